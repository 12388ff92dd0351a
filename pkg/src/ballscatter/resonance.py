"""Quasi-resonances, contrast thresholds and excluded-frequency sets.

A triplet ``(t, x, lam)`` with ``0 < x < beta_{t,1}`` is quasi-resonant when

    F(x) = lam Jt_t'(lam x) Yt_t(x) - Yt_t'(x) Jt_t(lam x) = 0,

equivalently ``g_t(lam x) + k_t(x) = 0``, equivalently ``|r_n(x)| = 1`` for
``t = n + 1/2``.  Each Dixon bracket
``U_{t,k} = (alpha1_{t,k}/lam, alpha_{t,k}/lam)`` inside
``(alpha1_{t,1}/lam, beta_{t,1})`` holds exactly one such ``x``.

Excluded sets ``I_{nu,k}(tau)`` are the parts of ``U_{nu,k}`` where
``|g_nu(lam x) + k_nu(x)| <= tau |k_nu(x)|``; their union over ``k`` covers
the bad set ``B_n(tau)`` of frequencies where ``|r_n h_n|`` exceeds
``9/(2 tau) sup |j_n|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import modal, specfun
from .errors import DomainError, EmptySetError, PreconditionError

__all__ = [
    "BroadbandPlan",
    "BroadbandResult",
    "FrequencySet",
    "ResonanceBracket",
    "bad_set",
    "broadband_excluded_set",
    "excluded_interval",
    "find_quasi_resonances",
    "n0_threshold",
    "n1_threshold",
    "quasi_resonance_function",
]


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------


def n0_threshold(t: float) -> int:
    """``min {n >= 0 : t^2 <= 1 - 6/(n+1/2)^(2/3)}`` for ``0 < t < 1``."""
    if not (0 < t < 1):
        raise DomainError(f"n0_threshold requires 0 < t < 1, got {t!r}")
    # nu >= (6/(1-t^2))^(3/2); start just below and step up
    guess = max(0, int(math.floor((6.0 / (1.0 - t * t)) ** 1.5 - 0.5)) - 2)
    n = guess
    while not (t * t <= 1.0 - 6.0 / (n + 0.5) ** (2.0 / 3.0)):
        n += 1
    return n


def n1_threshold(t: float, corrected: bool = False) -> int:
    """Contrast threshold ``n_1(t)`` for ``t > 1``.

    Returns ``min {n >= 1 : t <= 1 + 3/(n+1/2)^(2/3)}``.  That set is empty for
    ``t > 1 + 3/(3/2)^(2/3)``, which raises :class:`EmptySetError`.
    ``corrected=True`` uses the reversed inequality
    ``t >= 1 + 3/(n+1/2)^(2/3)``, whose minimum exists for every ``t > 1`` and
    grows as ``t`` approaches 1.
    """
    if not (t > 1):
        raise DomainError(f"n1_threshold requires t > 1, got {t!r}")
    if not corrected:
        bound = 1.0 + 3.0 / 1.5 ** (2.0 / 3.0)
        if t > bound:
            raise EmptySetError(f"no n >= 1 satisfies t <= 1 + 3/(n+1/2)^(2/3) for t = {t!r} > {bound:.6f}")
        return 1
    # t >= 1 + 3 nu^(-2/3)  <=>  nu >= (3/(t-1))^(3/2)
    n = max(1, int(math.floor((3.0 / (t - 1.0)) ** 1.5 - 0.5)) - 2)
    while not (t >= 1.0 + 3.0 / (n + 0.5) ** (2.0 / 3.0)):
        n += 1
    return n


# ---------------------------------------------------------------------------
# quasi-resonances
# ---------------------------------------------------------------------------


def quasi_resonance_function(t: float, x, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """``F(x)/S(x)`` and the log2 of ``S(x)``, vectorised.

    ``S = |lam Jt'(lam x) Yt(x)| + |Yt'(x) Jt(lam x)|`` is the natural scale of
    ``F``, so ``|F/S| <= 1`` and ``F/S`` carries the sign of ``F``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = specfun.cylinder_arrays(t, x)
    b = specfun.cylinder_arrays(t, lam * x)
    p = lam * b.jp * a.y
    q = a.yp * b.j
    s = np.abs(p) + np.abs(q)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(s > 0, (p - q) / s, 0.0)
        log2s = np.log2(s) + a.ye + b.je
    return rel, log2s


def _f_rel(t, x, lam):
    return quasi_resonance_function(t, x, lam)[0]


@dataclass(frozen=True)
class ResonanceBracket:
    """Dixon bracket ``U_{t,k} = (lo, hi)`` and its quasi-resonance."""

    t: float
    k: int
    lo: float
    hi: float
    root: float | None
    residual: float | None

    def to_json(self) -> dict:
        return {"t": self.t, "k": self.k, "lo": self.lo, "hi": self.hi, "root": self.root, "residual": self.residual}

    @classmethod
    def from_json(cls, doc: dict) -> "ResonanceBracket":
        return cls(float(doc["t"]), int(doc["k"]), float(doc["lo"]), float(doc["hi"]),
                   None if doc["root"] is None else float(doc["root"]),
                   None if doc["residual"] is None else float(doc["residual"]))


def _bisect_vec(func, lo: np.ndarray, hi: np.ndarray, iters: int = 80, rtol: float = 1e-15) -> np.ndarray:
    """Vectorised sign-change bisection; ``func`` maps an array to signed values."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    flo = np.sign(func(lo))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = np.sign(func(mid))
        same = fm == flo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= rtol * np.abs(hi)):
            break
    return 0.5 * (lo + hi)


def _polish(t, lam, root, lo, hi):
    """Secant polish on ``F/S``; kept only when it stays inside the bracket and helps."""
    h = max(1e-9 * root, 1e-300)
    f0 = float(_f_rel(t, root, lam)[0])
    f1 = float(_f_rel(t, root + h, lam)[0])
    if f1 != f0:
        cand = root - f0 * h / (f1 - f0)
        if lo < cand < hi and abs(float(_f_rel(t, cand, lam)[0])) < abs(f0):
            return cand
    return root


def find_quasi_resonances(t: float, lam: float, x_max: float = math.inf) -> list[ResonanceBracket]:
    """Quasi-resonances ``omega_{t,k}`` in every admissible Dixon bracket.

    Parameters
    ----------
    t : float
        Half-integer order ``n + 1/2``.
    lam : float
        Contrast; below ``alpha_{t,1}/beta_{t,1}`` there are none.
    x_max : float
        Only brackets meeting ``(0, x_max)`` are returned.
    """
    specfun._nu_to_n(t)
    alpha1 = specfun.bessel_zero("J", t, 1)
    beta1 = specfun.bessel_zero("Y", t, 1)
    if lam <= alpha1 / beta1:
        return []
    top = min(beta1, x_max) * lam
    a_prime = specfun.bessel_zeros_below("Jprime", t, top * 1.0000001 + 1.0)
    a_zero = specfun.bessel_zeros_below("J", t, lam * beta1 * 1.0000001 + 1.0)
    out = []
    los, his, ks = [], [], []
    for k, (ap, az) in enumerate(zip(a_prime, a_zero), start=1):
        lo, hi = ap / lam, az / lam
        if hi >= beta1 or lo >= x_max:
            break
        los.append(lo)
        his.append(hi)
        ks.append(k)
    if not ks:
        return []
    lo_a = np.array(los)
    hi_a = np.array(his)
    # stay off the bracket ends, where Jt or Jt' of lam x vanishes exactly
    d = 1e-12 * hi_a
    fl = _f_rel(t, lo_a + d, lam)
    fh = _f_rel(t, hi_a - d, lam)
    roots = _bisect_vec(lambda x: _f_rel(t, x, lam), lo_a + d, hi_a - d)
    for k, lo, hi, r, a, b in zip(ks, los, his, roots, fl, fh):
        if np.sign(a) == np.sign(b) or a == 0 or b == 0:
            out.append(ResonanceBracket(t, k, lo, hi, None, None))
            continue
        r = _polish(t, lam, float(r), lo, hi)
        res = abs(float(_f_rel(t, r, lam)[0]))
        out.append(ResonanceBracket(t, k, lo, hi, float(r), res))
    return out


def sign_changes(t: float, lam: float, a: float, b: float, per_unit: int = 200, minimum: int = 2000) -> int:
    """Number of sign changes of ``F`` on a grid over ``(a, b)`` (heuristic check)."""
    npts = max(minimum, int(per_unit * (b - a)))
    x = np.linspace(a, b, npts + 2)[1:-1]
    f = _f_rel(t, x, lam)
    s = np.sign(f)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


# ---------------------------------------------------------------------------
# frequency sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencySet:
    """Finite union of disjoint closed intervals on ``(0, inf)``, sorted."""

    intervals: tuple = ()

    def __post_init__(self):
        prev = -math.inf
        for lo, hi in self.intervals:
            if not (0 <= lo < hi) or lo < prev:
                raise DomainError("FrequencySet intervals must be sorted, disjoint and non-degenerate")
            prev = hi

    @classmethod
    def from_intervals(cls, intervals) -> "FrequencySet":
        """Sort and merge overlapping intervals."""
        items = sorted((float(a), float(b)) for a, b in intervals if b > a)
        merged: list[list[float]] = []
        for lo, hi in items:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((a, b) for a, b in merged))

    @property
    def total_measure(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def union(self, other: "FrequencySet") -> "FrequencySet":
        return FrequencySet.from_intervals(self.intervals + other.intervals)

    def scaled(self, factor: float) -> "FrequencySet":
        return FrequencySet(tuple((lo * factor, hi * factor) for lo, hi in self.intervals))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.intervals:
            return np.zeros(x.shape, dtype=bool)
        los = np.array([a for a, _ in self.intervals])
        his = np.array([b for _, b in self.intervals])
        i = np.searchsorted(los, x, side="right") - 1
        ok = i >= 0
        out = np.zeros(x.shape, dtype=bool)
        out[ok] = x[ok] <= his[i[ok]]
        return out

    def to_json(self) -> list:
        return [[lo, hi] for lo, hi in self.intervals]


# ---------------------------------------------------------------------------
# excluded intervals and bad sets
# ---------------------------------------------------------------------------


def _check_tau(n: int, tau: float):
    if n == 0:
        if not (0 < tau < 0.75):
            raise DomainError(f"tau must lie in (0, 3/4) for n = 0, got {tau!r}")
    elif not (0 < tau <= 0.25):
        raise DomainError(f"tau must lie in (0, 1/4] for n >= 1, got {tau!r}")


def _check_lambda(lam: float):
    if not (lam > 7):
        raise PreconditionError(f"the excluded-set construction requires lambda > 7, got {lam!r}", "lambda > 7")


def _gk_sum(nu, x, lam, c):
    """``g(lam x) + c k(x)``, the boundary functions of ``I_{nu,k}(tau)``."""
    g, _, _ = modal.gk_arrays(nu, lam * x)
    _, k, _ = modal.gk_arrays(nu, x)
    return g + c * k


def _excluded_intervals(nu: float, lam: float, tau: float, kmax: int | None = None):
    """All ``I_{nu,k}(tau)`` for ``k`` in ``K(lam, n)``, clipped to ``x < nu``.

    The bad set of mode ``n`` lies in ``(alpha1_{nu,1}/lam, nu)``, so the part of
    each ``I_{nu,k}`` beyond ``nu`` is not needed to cover it.
    """
    a_prime = specfun.bessel_zeros_below("Jprime", nu, nu * lam)
    a_zero = specfun.bessel_zeros_below("J", nu, nu * lam + 4.0 * math.pi + 4.0)
    count = len(a_prime) if kmax is None else min(len(a_prime), kmax)
    if count == 0:
        return [], []
    ap = np.array(a_prime[:count])
    az = np.array(a_zero[:count])
    lo = ap / lam
    hi = np.minimum(az / lam, nu)
    d = 1e-13 * hi
    lo_in, hi_in = lo + d, hi - d
    f_plus_hi = _gk_sum(nu, hi_in, lam, 1.0 - tau)
    f_minus_hi = _gk_sum(nu, hi_in, lam, 1.0 + tau)
    # left end: g(lam x) = 0 and k > 0, so both boundary functions are positive
    left = np.where(
        f_plus_hi < 0,
        _bisect_vec(lambda x: _gk_sum(nu, x, lam, 1.0 - tau), lo_in, hi_in, iters=100, rtol=1e-14),
        np.nan,
    )
    right = np.where(
        f_minus_hi < 0,
        _bisect_vec(lambda x: _gk_sum(nu, x, lam, 1.0 + tau), lo_in, hi_in, iters=100, rtol=1e-14),
        hi,
    )
    ks = np.arange(1, count + 1)
    ok = np.isfinite(left) & (right > left)
    if ok.any():
        # the defining inequality must hold inside each reported interval
        mid = 0.5 * (left[ok] + right[ok])
        g, _, _ = modal.gk_arrays(nu, lam * mid)
        _, kk, _ = modal.gk_arrays(nu, mid)
        inside = np.abs(g + kk) <= tau * np.abs(kk) * (1 + 1e-9)
        idx = np.flatnonzero(ok)
        ok[idx[~inside]] = False
    return [(float(a), float(b)) for a, b in zip(left[ok], right[ok])], list(ks[ok])


def excluded_interval(nu: float, k: int, lam: float, tau: float) -> tuple[float, float] | None:
    """``I_{nu,k}(tau)`` as ``(lo, hi)`` (clipped to ``x < nu``), or None if empty."""
    n = specfun._nu_to_n(nu)
    _check_tau(n, tau)
    _check_lambda(lam)
    ivs, ks = _excluded_intervals(nu, lam, tau, kmax=k)
    for iv, kk in zip(ivs, ks):
        if kk == k:
            return iv
    return None


def bad_set(n: int, lam: float, tau: float) -> FrequencySet:
    """A cover of ``B_n(tau)`` by the intervals ``I_{nu,k}(tau)``, ``k in K(lam, n)``."""
    n = specfun._as_order(n)
    _check_tau(n, tau)
    _check_lambda(lam)
    ivs, _ = _excluded_intervals(n + 0.5, lam, tau)
    return FrequencySet.from_intervals(ivs)


def bad_set_bound(n: int, lam: float, tau: float) -> float:
    """``4 tau (2 nu) ln(lam) / lam``."""
    return 4.0 * tau * (2 * n + 1) * math.log(lam) / lam


# ---------------------------------------------------------------------------
# broadband set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BroadbandPlan:
    """Parameters of the high-contrast construction."""

    eps: float
    lam: float
    alpha: float
    s: float
    eta: float
    eta_max: float

    def tau(self, n: int) -> float:
        """``tau_n = alpha eta / (4 (2 nu)^(2 + alpha) eta_max)``."""
        return self.alpha * self.eta / (4.0 * (2 * n + 1) ** (2.0 + self.alpha) * self.eta_max)


@dataclass(frozen=True)
class BroadbandResult:
    """Excluded set for ``sqrt(q0) omega`` and the constant of the uniform bound.

    ``valid_below`` is the frequency up to which the truncated union over
    ``n <= n_max`` coincides with the full construction.
    """

    intervals: FrequencySet
    bound_constant: float
    regime: str
    measure_bound: float
    plan: BroadbandPlan | None = None
    n_max: int | None = None
    valid_below: float = math.inf
    per_mode: dict = field(default_factory=dict)


def broadband_excluded_set(eps: float, lam: float, alpha: float, n_max: int = 10) -> BroadbandResult:
    """Excluded set ``I`` making the scattered field uniformly bounded.

    For ``lam <= eps^(-2/3)`` the set is empty.  Otherwise ``lam = eps^(-s)``
    with ``s > 2/3`` and ``I = (1/eps) U_n B_n(tau_n)`` with
    ``eta = (3/2) s eps^(s + 2/3) ln(1/eps)``.  The union is built for
    ``n <= n_max``; higher modes only contribute above ``valid_below``.
    """
    if not (0 < eps < 7 ** -1.5):
        raise DomainError(f"broadband_excluded_set requires 0 < eps < 7^(-3/2), got {eps!r}")
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not (lam > 0):
        raise DomainError("lambda must be positive")
    measure_bound = eps ** (1.0 / 3.0) * math.log(1.0 / eps)
    if lam <= 1.0:
        return BroadbandResult(FrequencySet(), 2 ** (4.0 / 3.0), "low-contrast", measure_bound)
    if lam <= eps ** (-2.0 / 3.0):
        return BroadbandResult(FrequencySet(), 2 ** (4.0 / 3.0), "moderate-contrast", measure_bound)
    s = math.log(lam) / math.log(1.0 / eps)
    eta_max = 1.25 * math.log(lam) / lam
    eta = 1.5 * s * eps ** (s + 2.0 / 3.0) * math.log(1.0 / eps)
    plan = BroadbandPlan(eps, lam, alpha, s, eta, eta_max)
    total = FrequencySet()
    per_mode = {}
    for n in range(n_max + 1):
        b = bad_set(n, lam, plan.tau(n))
        per_mode[n] = b.total_measure
        total = total.union(b)
    valid = specfun.bessel_zero("Jprime", n_max + 1.5, 1) / lam / eps
    return BroadbandResult(total.scaled(1.0 / eps), 16.0 / alpha, "high-contrast", measure_bound, plan, n_max, valid, per_mode)
