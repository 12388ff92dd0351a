"""Spherical and half-integer cylinder Bessel functions, zeros, and bounds.

Values are carried as ``mantissa * 2**exponent`` with an integer exponent so
that ``y_n(x)`` for ``x << n`` (and ``j_n`` in the same regime) never
overflows; ratios such as ``y_n / j_n`` stay exact to rounding.

Evaluation regions for order ``n`` at argument ``x``:

* ``x < 0.1 max(1, n)``: power series for ``j_n`` and ``j_{n+1}``;
* ``x < max(n + 1, 1)``: Miller downward recurrence normalised on the larger
  of the closed forms ``j_0``, ``j_1``;
* otherwise: upward recurrence from ``j_0``, ``j_1``.

``y_n`` always comes from upward recurrence.  Where the double-precision
result is ill-conditioned (near a zero of one of the four returned values)
the public scalar entry points re-evaluate with the terminating Hankel sum in
``mpmath`` at adaptive precision.

Cylinder functions use the tilde convention of the 2D problem:
``Jt_nu(x) = sqrt(2x/pi) j_n(x)`` with ``nu = n + 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.optimize import brentq

from .errors import BesselOverflow, DomainError

__all__ = [
    "A1",
    "BesselEval",
    "Order",
    "ZeroTable",
    "bessel_zero",
    "bessel_zeros_below",
    "cylinder_bessel",
    "jy_arrays",
    "paris_bound",
    "spherical_bessel",
    "sup_spherical_j",
    "zero_table",
]

#: Airy-type constant in the first-zero enclosure of ``J_nu``.
A1 = 1.855757082

_RESCALE_EXP = 400
_MIN_NORMAL = 2.0**-1022
# Condition number above which the scalar API escalates to mpmath.
_COND_ESCALATE = 16.0


@dataclass(frozen=True)
class Order:
    """Mode index ``n`` with the half-integer ``nu = n + 1/2`` derived exactly."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"order must be a non-negative integer, got {self.n!r}")

    @property
    def nu(self) -> float:
        return self.n + 0.5

    @classmethod
    def from_nu(cls, nu: float) -> "Order":
        n = nu - 0.5
        if n != int(n) or n < 0:
            raise DomainError(f"nu must be a non-negative half-integer, got {nu!r}")
        return cls(int(n))


def _as_order(n) -> int:
    if isinstance(n, Order):
        return n.n
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a non-negative integer, got {n!r}")
    return int(n)


def _nu_to_n(nu: float) -> int:
    return Order.from_nu(nu).n


@dataclass(frozen=True)
class BesselEval:
    """Bessel values at one point, stored in scaled form.

    ``j = j_mant * 2**j_exp`` and ``jp = jp_mant * 2**j_exp``; likewise ``y``
    and ``yp`` share ``y_exp``.  For ``kind == "cylinder"`` the four values
    are ``Jt_nu, Jt_nu', Yt_nu, Yt_nu'``.
    """

    n: int
    x: float
    j_mant: float
    jp_mant: float
    j_exp: int
    y_mant: float
    yp_mant: float
    y_exp: int
    kind: str = "spherical"

    @property
    def nu(self) -> float:
        return self.n + 0.5

    def _value(self, name: str) -> float:
        mant, exp = {
            "j": (self.j_mant, self.j_exp),
            "jp": (self.jp_mant, self.j_exp),
            "y": (self.y_mant, self.y_exp),
            "yp": (self.yp_mant, self.y_exp),
        }[name]
        val = _ldexp_safe(mant, exp)
        if mant != 0.0 and (math.isinf(val) or abs(val) < _MIN_NORMAL):
            raise BesselOverflow(name, math.copysign(1.0, mant), self.log_abs(name))
        return val

    @property
    def j(self) -> float:
        return self._value("j")

    @property
    def jp(self) -> float:
        return self._value("jp")

    @property
    def y(self) -> float:
        return self._value("y")

    @property
    def yp(self) -> float:
        return self._value("yp")

    @property
    def h(self) -> complex:
        return complex(self.j, self.y)

    @property
    def hp(self) -> complex:
        return complex(self.jp, self.yp)

    def log_abs(self, name: str) -> float:
        """Natural log of ``|value|`` for ``name`` in ``{"j", "jp", "y", "yp"}``."""
        mant, exp = {
            "j": (self.j_mant, self.j_exp),
            "jp": (self.jp_mant, self.j_exp),
            "y": (self.y_mant, self.y_exp),
            "yp": (self.yp_mant, self.y_exp),
        }[name]
        if mant == 0.0:
            return -math.inf
        return math.log(abs(mant)) + exp * math.log(2.0)

    def sign(self, name: str) -> float:
        mant = {"j": self.j_mant, "jp": self.jp_mant, "y": self.y_mant, "yp": self.yp_mant}[name]
        return math.copysign(1.0, mant) if mant != 0.0 else 0.0

    def ratio(self, num: str, den: str) -> float:
        """``num / den`` computed from the scaled parts, e.g. ``ratio("y", "j")``."""
        mants = {"j": self.j_mant, "jp": self.jp_mant, "y": self.y_mant, "yp": self.yp_mant}
        exps = {"j": self.j_exp, "jp": self.j_exp, "y": self.y_exp, "yp": self.y_exp}
        return _ldexp_safe(mants[num] / mants[den], exps[num] - exps[den])

    def log_abs_h(self) -> float:
        """Natural log of ``|h| = sqrt(j^2 + y^2)``."""
        lj, ly = self.log_abs("j"), self.log_abs("y")
        hi, lo = max(lj, ly), min(lj, ly)
        return hi + 0.5 * math.log1p(math.exp(2.0 * (lo - hi)))

    def wronskian_residual(self) -> float:
        """``x^2 (j y' - j' y) - 1`` (spherical) or ``pi x/2 (J Y' - J' Y) - 1`` (cylinder)."""
        w = (self.j_mant * self.yp_mant - self.jp_mant * self.y_mant)
        xm, xe = math.frexp(self.x)
        if self.kind == "spherical":
            target, te = xm * xm, 2 * xe
        else:
            target, te = math.pi * xm / 2.0, xe
        return _ldexp_safe(w * target, self.j_exp + self.y_exp + te) - 1.0


def _ldexp_safe(m: float, e: int) -> float:
    if m == 0.0:
        return 0.0
    if e > 2100:
        return math.copysign(math.inf, m)
    if e < -2200:
        return math.copysign(0.0, m)
    try:
        return math.ldexp(m, int(e))
    except OverflowError:
        return math.copysign(math.inf, m)


class JY(NamedTuple):
    """Array form of :class:`BesselEval` (orders ``n`` only)."""

    j: np.ndarray
    jp: np.ndarray
    je: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    ye: np.ndarray
    # order n+1 values in the scale of order n (spherical results only)
    j1: np.ndarray | None = None
    y1: np.ndarray | None = None


# ---------------------------------------------------------------------------
# double-precision kernels (vectorised over x)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _double_factorial(n: int) -> tuple[float, int]:
    """``(2n+1)!!`` as ``(mantissa, exponent)``, correctly rounded."""
    exact = math.prod(range(1, 2 * n + 2, 2))
    shift = max(exact.bit_length() - 62, 0)
    return float(exact >> shift), shift


def _normalise(m: np.ndarray, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fm, fe = np.frexp(m)
    return fm, e + fe.astype(np.int64)


def _series_j(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``j_n(x)`` by its power series, for ``x`` well inside the turning point."""
    z = -0.5 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 60):
        term = term * z / (k * (2 * n + 2 * k + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    mx, ex = np.frexp(x)
    ex = ex.astype(np.int64)
    # mx**n can underflow for huge n only; split the power
    pm = np.ones_like(x)
    pe = np.zeros_like(ex)
    remaining = n
    chunk = 64
    while remaining > 0:
        step = min(chunk, remaining)
        pm = pm * mx**step
        pm, pe = _normalise(pm, pe)
        remaining -= step
    dm, de = _double_factorial(n)
    m = pm * total / dm
    e = pe + n * ex - de
    return _normalise(m, e)


def _closed_j01(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s, c = np.sin(x), np.cos(x)
    j0 = s / x
    with np.errstate(invalid="ignore"):
        j1 = (j0 - c) / x
    small = x < 0.5
    if small.any():
        j1[small] = _small_j1(x[small])
    return j0, j1


def _small_j1(x: np.ndarray) -> np.ndarray:
    z = -0.5 * x * x
    term = x / 3.0
    total = term.copy()
    for k in range(1, 20):
        term = term * z / (k * (2 * k + 3))
        total = total + term
    return total


def _log2_max(a: np.ndarray, b: np.ndarray) -> float:
    m = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return math.log2(m) if m > 0 else -1100.0


def _rescale(cur, other, e):
    """Scale down entries whose magnitude passed ``2**(_RESCALE_EXP / 2)``."""
    big = np.abs(cur) > 2.0 ** (_RESCALE_EXP // 2)
    cur = np.where(big, np.ldexp(cur, -_RESCALE_EXP), cur)
    other = np.where(big, np.ldexp(other, -_RESCALE_EXP), other)
    return cur, other, e + np.where(big, _RESCALE_EXP, 0)


def _upward_y(nmax: int, x: np.ndarray, keep_all: bool):
    """Upward recurrence for ``y_0 .. y_{nmax+1}``; returns mantissas/exponents."""
    s, c = np.sin(x), np.cos(x)
    prev = -c / x
    cur = -c / (x * x) - s / x
    e = np.zeros(x.shape, dtype=np.int64)
    out_m, out_e = [], []
    if keep_all:
        out_m += [prev.copy(), cur.copy()]
        out_e += [e.copy(), e.copy()]
    if nmax == 0:
        last = (prev, cur, e.copy(), e.copy())
    inv_min = 1.0 / float(np.min(x)) if x.size else 0.0
    head = _log2_max(prev, cur)
    for k in range(1, nmax + 1):
        if head > _RESCALE_EXP:
            cur, prev, e = _rescale(cur, prev, e)
            head = _log2_max(prev, cur)
        nxt = (2 * k + 1) / x * cur - prev
        head += math.log2((2 * k + 1) * inv_min + 1.0)
        if k == nmax:
            last = (cur, nxt, e.copy(), e.copy())
        prev, cur = cur, nxt
        if keep_all:
            out_m.append(cur.copy())
            out_e.append(e.copy())
    if keep_all:
        return np.array(out_m), np.array(out_e)
    return last


def _upward_j(nmax: int, x: np.ndarray, keep_all: bool):
    j0, j1 = _closed_j01(x)
    prev, cur = j0, j1
    out = [j0, j1]
    last = (j0, j1)
    for k in range(1, nmax + 1):
        nxt = (2 * k + 1) / x * cur - prev
        if k == nmax:
            last = (cur, nxt)
        prev, cur = cur, nxt
        if keep_all:
            out.append(cur)
    zero = np.zeros(x.shape, dtype=np.int64)
    if keep_all:
        return np.array(out), np.zeros((nmax + 2,) + x.shape, dtype=np.int64)
    return last[0], last[1], zero, zero.copy()


def _miller_j(nmax: int, x: np.ndarray, keep_all: bool):
    """Miller downward recurrence for ``j_0 .. j_{nmax+1}`` (``x < nmax + 1``)."""
    top = int(math.ceil(max(nmax + 1.0, float(np.max(x))))) + 20 + int(math.ceil(14.0 * np.cbrt(max(float(np.max(x)), 1.0))))
    nxt = np.zeros_like(x)
    cur = np.full_like(x, 2.0**-500)
    e = np.zeros(x.shape, dtype=np.int64)
    inv_min = 1.0 / float(np.min(x))
    head = -500.0
    store_m = {}
    store_e = {}
    wanted = range(0, nmax + 2) if keep_all else (nmax, nmax + 1)
    for k in range(top, 0, -1):
        # cur = f_k, nxt = f_{k+1}
        if k in wanted or k == 1:
            store_m[k] = cur.copy()
            store_e[k] = e.copy()
        if head > _RESCALE_EXP:
            cur, nxt, e = _rescale(cur, nxt, e)
            head = _log2_max(nxt, cur)
        prv = (2 * k + 1) / x * cur - nxt
        head += math.log2((2 * k + 1) * inv_min + 1.0)
        nxt, cur = cur, prv
    store_m[0] = cur.copy()
    store_e[0] = e.copy()
    j0, j1 = _closed_j01(x)
    f1 = np.ldexp(store_m[1], store_e[1] - store_e[0])
    use0 = np.abs(j0) >= np.abs(j1)
    # the normalising ratio is expressed relative to scale e0
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(use0, j0 / store_m[0], j1 / np.where(f1 == 0.0, 1.0, f1))
    e0 = store_e[0]

    def scaled(k):
        return _normalise(store_m[k] * norm, store_e[k] - e0)

    if keep_all:
        ms, es = zip(*(scaled(k) for k in range(nmax + 2)))
        return np.array(ms), np.array(es)
    mn, en = scaled(nmax)
    mn1, en1 = scaled(nmax + 1)
    return mn, mn1, en, en1


def _pair_j(n: int, x: np.ndarray):
    """``(j_n, j_{n+1})`` mantissas and exponents for order ``n``."""
    jn = np.empty_like(x)
    jn1 = np.empty_like(x)
    en = np.zeros(x.shape, dtype=np.int64)
    en1 = np.zeros(x.shape, dtype=np.int64)
    series = x < 0.1 * max(1, n)
    upward = (~series) & (x >= max(n + 1, 1))
    miller = ~(series | upward)
    if series.any():
        m0, e0 = _series_j(n, x[series])
        m1, e1 = _series_j(n + 1, x[series])
        jn[series], en[series], jn1[series], en1[series] = m0, e0, m1, e1
    if upward.any():
        a, b, ea, eb = _upward_j(n, x[upward], keep_all=False)
        jn[upward], jn1[upward], en[upward], en1[upward] = a, b, ea, eb
    if miller.any():
        a, b, ea, eb = _miller_j(n, x[miller], keep_all=False)
        jn[miller], jn1[miller], en[miller], en1[miller] = a, b, ea, eb
    return jn, jn1, en, en1, upward


def _combine_derivative(n: int, x, m0, e0, m1, e1):
    """``(n/x) f_n - f_{n+1}`` in the scale of ``f_n``."""
    return n / x * m0 - np.ldexp(m1, np.clip(e1 - e0, -4000, 4000))


def jy_arrays(n, x, precise: bool = False) -> JY:
    """Vectorised ``j_n, j_n', y_n, y_n'`` at positive ``x`` (scaled form).

    With ``precise=True`` ill-conditioned entries are recomputed in
    arbitrary precision (slow; used by the scalar API).
    """
    n = _as_order(n)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("Bessel argument must be positive and finite")
    tiny = x < _TINY_X
    # tiny arguments overflow the recurrences; they are replaced below
    with np.errstate(**({"all": "ignore"} if tiny.any() else {})):
        jn, jn1, en, en1, upward = _pair_j(n, x)
        yn, yn1, yen, yen1 = _upward_y(n, x, keep_all=False)
        jm, je = _normalise(jn, en)
        jpm = _combine_derivative(n, x, jn, en, jn1, en1)
        jm, jpm, je = _renorm_pair(jn, jpm, en)
        ym, ypm, ye = _renorm_pair(yn, _combine_derivative(n, x, yn, yen, yn1, yen1), yen)
        j1m = np.ldexp(jn1, np.clip(en1 - je, -4000, 4000))
        y1m = np.ldexp(yn1, np.clip(yen1 - ye, -4000, 4000))
        if precise:
            cond = _condition(n, x, jn, jn1, en, en1, yn, yn1, yen, yen1, upward)
    if precise:
        for i in np.flatnonzero((cond > _COND_ESCALATE) & ~tiny):
            b = _mp_eval(n, float(x[i]))
            jm[i], jpm[i], je[i], ym[i], ypm[i], ye[i], j1m[i], y1m[i] = b
    for i in np.flatnonzero(tiny):
        jm[i], jpm[i], je[i], ym[i], ypm[i], ye[i], j1m[i], y1m[i] = _tiny_eval(n, float(x[i]))
    return JY(jm, jpm, je, ym, ypm, ye, j1m, y1m)


_TINY_X = 2.0**-100


def _tiny_eval(n: int, x: float):
    """Leading-order small-argument forms; the next term is ``O(x^2)`` relative."""
    with mpmath.workdps(30):
        xm = mpmath.mpf(x)
        dfact = mpmath.fac2(2 * n + 1)
        j = xm**n / dfact
        j1 = xm ** (n + 1) / (dfact * (2 * n + 3))
        jp = n / xm * j - j1
        y = -mpmath.fac2(2 * n - 1) / xm ** (n + 1) if n > 0 else -1 / xm
        y1 = -dfact / xm ** (n + 2)
        yp = n / xm * y - y1
        jm, jpm, je = _mp_to_scaled(j, jp)
        ym, ypm, ye = _mp_to_scaled(y, yp)
        return jm, jpm, je, ym, ypm, ye, float(mpmath.ldexp(j1, -je)), float(mpmath.ldexp(y1, -ye))


def _renorm_pair(m, mp_, e):
    """Renormalise so the larger of ``|m|``, ``|mp_|`` has mantissa in [0.5, 1)."""
    big = np.maximum(np.abs(m), np.abs(mp_))
    _, fe = np.frexp(np.where(big == 0.0, 1.0, big))
    fe = fe.astype(np.int64)
    return np.ldexp(m, -fe), np.ldexp(mp_, -fe), e + fe


def _log2abs(m, e):
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(m)) + e


def _condition(n, x, jn, jn1, en, en1, yn, yn1, yen, yen1, upward):
    """Relative condition estimate of the double results (max over 4 values)."""
    lj = _log2abs(jn, en)
    lj1 = _log2abs(jn1, en1)
    ly = _log2abs(yn, yen)
    ly1 = _log2abs(yn1, yen1)
    env = np.maximum(ly, lj)  # log2 |h_n| up to a factor sqrt(2)
    env1 = np.maximum(ly1, lj1)
    with np.errstate(divide="ignore", invalid="ignore"):
        jp = np.abs(_combine_derivative(n, x, jn, en, jn1, en1))
        ljp = np.log2(jp) + en
        yp = np.abs(_combine_derivative(n, x, yn, yen, yn1, yen1))
        lyp = np.log2(yp) + yen
        lnx = np.log2(np.maximum(n, 1e-300) / x) if n > 0 else np.full_like(x, -np.inf)
        # operand sizes of the derivative combinations
        ops_j = np.where(upward, np.maximum(lnx + env, env1), np.maximum(lnx + lj, lj1))
        ops_y = np.maximum(lnx + ly, ly1)
        c_j = np.where(upward, env - lj, 0.0)
        c_y = env - ly
        c_jp = ops_j - ljp
        c_yp = ops_y - lyp
        worst = np.nanmax(np.vstack([c_j, c_y, c_jp, c_yp]), axis=0)
    worst = np.where(np.isfinite(worst), worst, 4000.0)
    return np.exp2(np.minimum(worst, 1000.0))


# ---------------------------------------------------------------------------
# arbitrary-precision escalation (terminating Hankel sums)
# ---------------------------------------------------------------------------


def _mp_h(n: int, x):
    """``h_n(x)`` from its terminating series, at the current mpmath precision."""
    z = mpmath.mpc(0, 1) / (2 * x)
    total = mpmath.mpc(0)
    zk = mpmath.mpc(1)
    coef = 1
    for k in range(n + 1):
        total += coef * zk
        zk *= z
        coef = coef * (n + k + 1) * (n - k) // (k + 1)
    return mpmath.power(mpmath.mpc(0, -1), n + 1) * mpmath.expjpi(x / mpmath.pi) / x * total


def _hankel_term_digits(n: int, x: float) -> float:
    best = 0.0
    for k in range(n + 1):
        lg = math.lgamma(n + k + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) - k * math.log(2 * x)
        best = max(best, lg)
    return best / math.log(10.0)


def _mp_jy(n: int, x: float, digits: int = 20):
    """``(j, j', y, y')`` as mpf, accurate to about ``digits`` significant digits."""
    guard = _hankel_term_digits(n + 1, x) + 10
    # j << |h| inside the turning point: the cancellation costs log10|y/j|
    if x < n + 1:
        guard += max(0.0, (n + 0.5) * math.log10(max(2.0 * (n + 0.5) / (math.e * x), 1.0))) * 2
    dps = int(digits + guard)
    prev = None
    for _ in range(8):
        with mpmath.workdps(dps):
            xm = mpmath.mpf(x)
            h0 = _mp_h(n, xm)
            h1 = _mp_h(n + 1, xm)
            hp = n / xm * h0 - h1
            vals = (h0.real, hp.real, h0.imag, hp.imag)
        if prev is not None and all(
            v == p or abs(v - p) <= mpmath.mpf(10) ** (-digits - 2) * abs(v) for v, p in zip(vals, prev)
        ):
            return vals
        prev = vals
        dps += 20
    return prev


def _mp_to_scaled(a, b):
    """Two mpf values with a shared binary exponent: ``(ma, mb, e)``."""
    big = max(abs(a), abs(b))
    if big == 0:
        return 0.0, 0.0, 0
    _, e = mpmath.frexp(big)
    return float(mpmath.ldexp(a, -e)), float(mpmath.ldexp(b, -e)), int(e)


def _mp_eval(n: int, x: float):
    j, jp, y, yp = _mp_jy(n, x)
    jm, jpm, je = _mp_to_scaled(j, jp)
    ym, ypm, ye = _mp_to_scaled(y, yp)
    with mpmath.workdps(40):
        j1 = float(mpmath.ldexp(n / mpmath.mpf(x) * j - jp, -je))
        y1 = float(mpmath.ldexp(n / mpmath.mpf(x) * y - yp, -ye))
    return jm, jpm, je, ym, ypm, ye, j1, y1


# ---------------------------------------------------------------------------
# public scalar API
# ---------------------------------------------------------------------------


def spherical_bessel(n, x: float) -> BesselEval:
    """Spherical Bessel ``j_n, j_n', y_n, y_n'`` at ``x > 0``.

    Parameters
    ----------
    n : int or Order
        Non-negative mode index.
    x : float
        Positive argument.

    Returns
    -------
    BesselEval
        Scaled values; ``.j``/``.y`` raise :class:`BesselOverflow` when the
        value is outside the double range, while ``.ratio`` and ``.log_abs``
        always work.
    """
    n = _as_order(n)
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"spherical_bessel requires x > 0, got {x!r}")
    r = jy_arrays(n, np.array([float(x)]), precise=True)
    return BesselEval(
        n, float(x), float(r.j[0]), float(r.jp[0]), int(r.je[0]), float(r.y[0]), float(r.yp[0]), int(r.ye[0])
    )


def _cylinder_from_spherical(n: int, x: np.ndarray, r: JY, precise: bool) -> JY:
    cm, ce = np.frexp(np.sqrt(2.0 * x / np.pi))
    xm, xe = np.frexp(x)

    def scaled(m, mp_, e):
        # c (m, mp_ + m / (2x)) 2^e, then renormalised; the c factor stays in the exponent
        d = mp_ + np.ldexp(m / (2.0 * xm), -xe)
        return _renorm_pair(m * cm, d * cm, e + ce)

    jt, jtp, je = scaled(r.j, r.jp, r.je)
    yt, ytp, ye = scaled(r.y, r.yp, r.ye)
    if precise:
        with np.errstate(divide="ignore", invalid="ignore"):
            cj = (np.abs(r.jp) + np.abs(r.j) / (2 * x)) / np.abs(r.jp + r.j / (2 * x))
            cy = (np.abs(r.yp) + np.abs(r.y) / (2 * x)) / np.abs(r.yp + r.y / (2 * x))
        bad = np.flatnonzero(~(np.maximum(cj, cy) <= _COND_ESCALATE))
        for i in bad:
            xi = float(x[i])
            j, jp, y, yp = _mp_jy(n, xi)
            with mpmath.workdps(30):
                cc = mpmath.sqrt(2 * mpmath.mpf(xi) / mpmath.pi)
                jt[i], jtp[i], je[i] = _mp_to_scaled(cc * j, cc * (jp + j / (2 * xi)))
                yt[i], ytp[i], ye[i] = _mp_to_scaled(cc * y, cc * (yp + y / (2 * xi)))
    return JY(jt, jtp, je, yt, ytp, ye)


def cylinder_arrays(nu: float, x, precise: bool = False) -> JY:
    """Vectorised ``Jt_nu, Jt_nu', Yt_nu, Yt_nu'`` for half-integer ``nu``."""
    n = _nu_to_n(nu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _cylinder_from_spherical(n, x, jy_arrays(n, x, precise=precise), precise)


def cylinder_bessel(nu: float, x: float) -> BesselEval:
    """Cylinder ``J_nu, J_nu', Y_nu, Y_nu'`` for half-integer ``nu`` at ``x > 0``."""
    n = _nu_to_n(nu)
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"cylinder_bessel requires x > 0, got {x!r}")
    r = cylinder_arrays(nu, [float(x)], precise=True)
    return BesselEval(
        n,
        float(x),
        float(r.j[0]),
        float(r.jp[0]),
        int(r.je[0]),
        float(r.y[0]),
        float(r.yp[0]),
        int(r.ye[0]),
        kind="cylinder",
    )


def jy_values(n, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Plain double arrays ``(j, j', y, y')``; overflowing entries become inf/0."""
    r = jy_arrays(n, x)
    with np.errstate(over="ignore", under="ignore"):
        return (
            np.ldexp(r.j, r.je),
            np.ldexp(r.jp, r.je),
            np.ldexp(r.y, r.ye),
            np.ldexp(r.yp, r.ye),
        )


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------


_KINDS = ("J", "Jprime", "Y", "spherical_jprime")


def _kind_values(kind: str, nu: float, x: np.ndarray) -> np.ndarray:
    """Sign-faithful values of the function whose zeros are sought."""
    n = _nu_to_n(nu)
    r = jy_arrays(n, x)
    if kind == "J":
        return r.j
    if kind == "Y":
        return r.y
    if kind == "spherical_jprime":
        return r.jp
    # Jt' has the sign of j' + j/(2x)
    return r.jp + r.j / (2.0 * x)


def _kind_scalar(kind: str, nu: float, x: float) -> tuple[float, float]:
    """Value and derivative (same scale, for Newton) at a single point."""
    n = _nu_to_n(nu)
    r = jy_arrays(n, np.array([x]))
    j, jp = math.ldexp(r.j[0], int(r.je[0])), math.ldexp(r.jp[0], int(r.je[0]))
    y, yp = math.ldexp(r.y[0], int(r.ye[0])), math.ldexp(r.yp[0], int(r.ye[0]))
    if kind == "J":
        return j, jp
    if kind == "Y":
        return y, yp
    # j'' = -(2/x) j' - (1 - n(n+1)/x^2) j
    jpp = -2.0 / x * jp - (1.0 - n * (n + 1) / (x * x)) * j
    if kind == "spherical_jprime":
        return jp, jpp
    f = jp + j / (2.0 * x)
    fp = jpp + jp / (2.0 * x) - j / (2.0 * x * x)
    return f, fp


def _bisect_roots(kind: str, nu: float, lo: np.ndarray, hi: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    """Refine sign-change brackets ``[lo, hi]`` to width ``rtol * root``.

    A few brackets go through Brent's method one by one; many brackets are
    bisected together, which amortises the vectorised kernel.
    """
    if lo.size <= 8:
        return np.array([_brent_root(kind, nu, float(a), float(b), rtol) for a, b in zip(lo, hi)])
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    flo = np.sign(_kind_values(kind, nu, lo))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all(hi - lo <= rtol * mid):
            break
        fm = np.sign(_kind_values(kind, nu, mid))
        same = fm == flo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    roots = 0.5 * (lo + hi)
    # one Newton polish per root, kept only if it stays inside the bracket
    for i, r in enumerate(roots):
        f, fp = _kind_scalar(kind, nu, float(r))
        if fp != 0.0:
            cand = r - f / fp
            if lo[i] - rtol * r <= cand <= hi[i] + rtol * r:
                roots[i] = cand
    return roots


def _brent_root(kind: str, nu: float, lo: float, hi: float, rtol: float) -> float:
    def f(x):
        return _kind_scalar(kind, nu, x)[0]

    root = brentq(f, lo, hi, xtol=rtol * lo, rtol=4 * np.finfo(float).eps, maxiter=200)
    val, der = _kind_scalar(kind, nu, root)
    if der != 0.0:
        cand = root - val / der
        if abs(cand - root) <= rtol * root:
            root = cand
    return float(root)


def _mcmahon(nu: float, k: int, kind: str) -> float:
    mu = 4.0 * nu * nu
    if kind == "J":
        b = (k + nu / 2.0 - 0.25) * math.pi
        return b - (mu - 1.0) / (8.0 * b)
    if kind == "Y":
        b = (k + nu / 2.0 - 0.75) * math.pi
        return b - (mu - 1.0) / (8.0 * b)
    b = (k + nu / 2.0 - 0.75) * math.pi
    return b - (mu + 3.0) / (8.0 * b)


@lru_cache(maxsize=256)
def _zeros_cached(kind: str, nu: float, x_max: float) -> tuple[float, ...]:
    # every kind has its first zero above nu, and consecutive zeros are
    # further apart than the scan step
    start = max(nu * (1.0 - 1e-9), 1e-3) if nu > 0.5 else 0.2
    step = 0.25
    grid = np.arange(start, x_max + step, step)
    grid = grid[grid > 0]
    if grid.size < 2:
        return ()
    vals = np.concatenate([_kind_values(kind, nu, grid[i : i + 4096]) for i in range(0, grid.size, 4096)])
    s = np.sign(vals)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    if idx.size == 0:
        return ()
    roots = _bisect_roots(kind, nu, grid[idx], grid[idx + 1])
    return tuple(float(r) for r in roots if r <= x_max)


def bessel_zeros_below(kind: str, nu: float, x_max: float) -> tuple[float, ...]:
    """All positive zeros ``< x_max`` of the requested function, ascending."""
    if kind not in _KINDS:
        raise DomainError(f"unknown zero kind {kind!r}")
    _nu_to_n(nu)
    return _zeros_cached(kind, float(nu), float(x_max))


def bessel_zero(kind: str, nu: float, k: int) -> float:
    """The ``k``-th positive zero of ``Jt_nu``, ``Jt_nu'``, ``Yt_nu`` or ``j_n'``.

    ``kind`` is one of ``"J"`` (alpha), ``"Jprime"`` (alpha^(1)), ``"Y"``
    (beta, ``k == 1`` only) and ``"spherical_jprime"`` (gamma).
    """
    if kind not in _KINDS:
        raise DomainError(f"unknown zero kind {kind!r}")
    if int(k) != k or k < 1:
        raise DomainError(f"zero index must be a positive integer, got {k!r}")
    if kind == "Y" and k > 1:
        raise DomainError("only the first zero of Y_nu is supported")
    n = _nu_to_n(nu)
    if kind == "J" and k == 1:
        lo = nu + A1 * nu ** (1.0 / 3.0)
        hi = nu + (A1 + 0.3 * A1 * A1 * nu ** (-2.0 / 3.0)) * nu ** (1.0 / 3.0)
        a, b = _kind_values(kind, nu, np.array([lo, hi]))
        if a * b < 0:
            return float(_bisect_roots(kind, nu, np.array([lo]), np.array([hi]))[0])
    guess = max(_mcmahon(nu, k, "J" if kind == "J" else ("Y" if kind == "Y" else "Jp")), nu)
    x_max = max(guess, nu) + 4.0 * math.pi + 2.0 * n ** (1.0 / 3.0) + 4.0
    while True:
        zs = bessel_zeros_below(kind, nu, x_max)
        if len(zs) >= k:
            return zs[k - 1]
        x_max *= 1.5


@dataclass(frozen=True)
class ZeroTable:
    """First zeros attached to an order ``nu``."""

    nu: float
    alpha: tuple[float, ...]
    alpha1: tuple[float, ...]
    beta1: float
    gamma1: float


def zero_table(nu: float, count: int = 1) -> ZeroTable:
    """Zeros ``alpha_k``, ``alpha^(1)_k`` (``k <= count``), ``beta_1`` and ``gamma_1``."""
    return ZeroTable(
        nu=nu,
        alpha=tuple(bessel_zero("J", nu, k) for k in range(1, count + 1)),
        alpha1=tuple(bessel_zero("Jprime", nu, k) for k in range(1, count + 1)),
        beta1=bessel_zero("Y", nu, 1),
        gamma1=bessel_zero("spherical_jprime", nu, 1),
    )


# ---------------------------------------------------------------------------
# classical bounds
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def sup_spherical_j(n) -> float:
    """``sup_{x>0} |j_n(x)|``.

    Attained at the first zero of ``j_n'`` for ``n >= 1``; for ``n = 0`` it is
    the limit 1 at ``x -> 0+``.
    """
    n = _as_order(n)
    if n == 0:
        return 1.0
    gamma = bessel_zero("spherical_jprime", n + 0.5, 1)
    return abs(spherical_bessel(n, gamma).j)


@lru_cache(maxsize=None)
def sup_cylinder_j(nu: float) -> float:
    """``Jt_nu(alpha^(1)_{nu,1})``, the first (and largest) maximum of ``Jt_nu``."""
    a1 = bessel_zero("Jprime", nu, 1)
    return cylinder_bessel(nu, a1).j


def paris_bound(n, x: float, y: float) -> float:
    """Upper bound ``(x/y)^n j_n(y) exp((y^2 - x^2)/(2n + 5)) >= j_n(x)``.

    Valid for ``0 < x <= y < alpha^(1)_{nu,1}``.
    """
    n = _as_order(n)
    if not (0 < x <= y):
        raise DomainError("paris_bound requires 0 < x <= y")
    a1 = bessel_zero("Jprime", n + 0.5, 1)
    if y >= a1:
        raise DomainError(f"paris_bound requires y < alpha1 = {a1!r}")
    if x == y:
        return spherical_bessel(n, y).j
    jy = spherical_bessel(n, y)
    log_b = n * math.log(x / y) + jy.log_abs("j") + (y * y - x * x) / (2 * n + 5)
    return jy.sign("j") * math.exp(log_b)


def jn_power_bound_log(n: int, x: float) -> float:
    """``log(x^n / (2n+1)!!)``, an upper bound for ``log |j_n(x)|`` (x >= 0)."""
    return n * math.log(x) - (math.lgamma(2 * n + 2) - n * math.log(2.0) - math.lgamma(n + 1))
