"""Reflection and transmission coefficients of a homogeneous ball.

For mode ``n`` at rescaled frequency ``w`` and contrast ``lam``::

    D   = h_n'(w) j_n(lam w) - lam j_n'(lam w) h_n(w) = u + i v
    r_n = -u / (u + i v)
    t_n = i / (w^2 D)

``u`` and ``v`` are real, so ``|1 + 2 r_n| = 1`` holds by construction.  The
2D quantities ``g_nu``, ``k_nu``, ``tan theta_nu`` and the reflection formula
``R_nu`` built from them are provided for cross-checks and for the
quasi-resonance sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import specfun
from .errors import DomainError, PoleError
from .specfun import Order

__all__ = [
    "GKPair",
    "ModalCoefficients",
    "ScatteringConfig",
    "coefficient_arrays",
    "coefficients",
    "gk_arrays",
    "gk_pair",
    "reflection",
    "reflection_2d",
    "reflection_2d_equivalence",
    "scaled_coefficient_arrays",
    "transmission",
]

_EPS = np.finfo(float).eps
# relative size of u (or v) against its two terms below which it is recomputed
_CANCEL_GUARD = 1e3 * _EPS


@dataclass(frozen=True)
class ScatteringConfig:
    """Contrast ``lam``, rescaled frequency ``omega_eps`` and radius ``eps``."""

    lam: float
    omega_eps: float
    eps: float = 1.0

    def __post_init__(self):
        for name in ("lam", "omega_eps", "eps"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be a positive finite number, got {val!r}")

    @classmethod
    def from_physical(cls, q: float, q0: float, omega: float, eps: float) -> "ScatteringConfig":
        """Reduce physical ``(q, q0, omega, eps)`` to ``lam = sqrt(q/q0)``, ``omega_eps = sqrt(q0) omega eps``."""
        if not (q > 0 and q0 > 0 and omega > 0 and eps > 0):
            raise DomainError("q, q0, omega and eps must all be positive")
        return cls(math.sqrt(q / q0), math.sqrt(q0) * omega * eps, eps)

    def with_omega(self, omega_eps: float) -> "ScatteringConfig":
        return ScatteringConfig(self.lam, omega_eps, self.eps)


@dataclass(frozen=True)
class ModalCoefficients:
    n: int
    r: complex
    t: complex


@dataclass(frozen=True)
class GKPair:
    g: float
    k: float
    theta_tan: float


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------


def _uv_parts(n, lam, w, a: specfun.JY, b: specfun.JY):
    """Mantissas and exponents of ``u`` and ``v`` plus the size of their terms."""
    ua = a.jp * b.j
    ub = lam * b.jp * a.j
    va = a.yp * b.j
    vb = lam * b.jp * a.y
    u, v = ua - ub, va - vb
    su = np.abs(ua) + np.abs(ub)
    eu = a.je + b.je
    ev = a.ye + b.je
    # Below the turning point both terms of u agree to O(w^2); the form
    # u = j(w) j(lam w) (lam w rho(lam w) - w rho(w)) / w with
    # rho = j_{n+1}/j_n keeps the leading digits.
    inner = (w < max(n + 1, 1)) & (lam * w < max(n + 1, 1))
    if inner.any():
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = lam * w * (b.j1 / b.j)
            tb = w * (a.j1 / a.j)
            alt = a.j * b.j / w * (ta - tb)
            su_alt = np.abs(a.j * b.j / w) * (np.abs(ta) + np.abs(tb))
        ok = inner & np.isfinite(alt)
        u = np.where(ok, alt, u)
        su = np.where(ok, su_alt, su)
    return u, eu, su, v, ev, np.abs(va) + np.abs(vb)


def _mp_uv(n: int, lam: float, w: float, digits: int):
    """``u``, ``v`` and the sizes of their terms as mpf values."""
    ja, jpa, ya, ypa = specfun._mp_jy(n, w, digits)
    jb, jpb, _, _ = specfun._mp_jy(n, lam * w, digits)
    with mpmath.workdps(digits + 10):
        lm = mpmath.mpf(lam)
        u = jpa * jb - lm * jpb * ja
        v = ypa * jb - lm * jpb * ya
        su = abs(jpa * jb) + abs(lm * jpb * ja)
        sv = abs(ypa * jb) + abs(lm * jpb * ya)
    return u, v, su, sv


def _fix_cancellation(n, lam, w, idx, u, eu, v, ev):
    """Recompute ``u`` and ``v`` at the flagged indices in arbitrary precision."""
    for i in idx:
        digits = 30
        while True:
            mu, mv, su, sv = _mp_uv(n, float(lam[i]), float(w[i]), digits)
            floor = mpmath.mpf(10) ** (15 - digits)
            if (abs(mu) >= floor * su and abs(mv) >= floor * sv) or digits > 400:
                break
            digits *= 2
        u[i], eu[i] = _mpf_split(mu)
        v[i], ev[i] = _mpf_split(mv)


def _mpf_split(a):
    if a == 0:
        return 0.0, 0
    m, e = mpmath.frexp(a)
    return float(m), int(e)


def coefficient_arrays(n, lam, omega_eps, guard: bool = True):
    """Vectorised ``(r_n, t_n)`` over broadcast arrays of ``lam`` and ``omega_eps``.

    Parameters
    ----------
    n : int or Order
        Mode index.
    lam, omega_eps : array_like
        Positive contrasts and rescaled frequencies (broadcast together).
    guard : bool
        Recompute ``u``/``v`` in arbitrary precision where they cancel.

    Returns
    -------
    r, t : ndarray of complex
    """
    shape = np.broadcast_shapes(np.shape(lam), np.shape(omega_eps))
    r_m, r_e, t_m, t_e = scaled_coefficient_arrays(n, lam, omega_eps, guard)
    return _cldexp(r_m, r_e).reshape(shape), _cldexp(t_m, t_e).reshape(shape)


def _assemble_scaled(u, eu, v, ev, w):
    """``r`` and ``t`` as complex mantissas with integer binary exponents."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        shift = np.clip(ev - eu, -3000, 3000)
        rho = np.ldexp(v / np.where(u == 0.0, 1.0, u), shift)  # v/u
        use_rho = (np.abs(rho) <= 1.0) & (u != 0.0)
        # |v| > |u|: r = -(u/v) / (u/v + i), the small factor kept apart as 2^(eu-ev)
        q = u / np.where(v == 0.0, 1.0, v)
        wr = np.ldexp(q, np.clip(eu - ev, -3000, 3000))
        r_m = np.where(use_rho, -1.0 / (1.0 + 1j * rho), -q / (wr + 1j))
        r_e = np.where(use_rho, 0, eu - ev)
        r_m = np.where(u == 0.0, 0.0 + 0.0j, r_m)
        r_e = np.where(u == 0.0, 0, r_e)
        # D = 2^ev (u 2^(eu-ev) + i v)
        dm = wr * np.where(v == 0.0, 0.0, v) + 1j * v
        dm = np.where(v == 0.0, np.ldexp(u, np.clip(eu - ev, -3000, 3000)), dm)
        t_m = 1j / (w * w * dm)
        t_e = -ev
    return r_m.astype(complex), r_e.astype(np.int64), t_m.astype(complex), t_e.astype(np.int64)


def _cldexp(m, e):
    with np.errstate(over="ignore", under="ignore"):
        e = np.clip(e, -3000, 3000)
        return np.ldexp(m.real, e) + 1j * np.ldexp(m.imag, e)


def _assemble(u, eu, v, ev, w):
    r_m, r_e, t_m, t_e = _assemble_scaled(u, eu, v, ev, w)
    return _cldexp(r_m, r_e), _cldexp(t_m, t_e)


def scaled_coefficient_arrays(n, lam, omega_eps, guard: bool = True):
    """Like :func:`coefficient_arrays` but returns ``(r_m, r_e, t_m, t_e)``.

    ``r = r_m * 2**r_e`` and ``t = t_m * 2**t_e``; used where ``r_n`` is
    multiplied by Hankel values of very different magnitude.
    """
    n = specfun._as_order(n)
    lam, w = np.broadcast_arrays(np.asarray(lam, dtype=float), np.asarray(omega_eps, dtype=float))
    lam = lam.ravel()
    w = w.ravel()
    if np.any(~(lam > 0)) or np.any(~(w > 0)):
        raise DomainError("lam and omega_eps must be positive")
    a = specfun.jy_arrays(n, w)
    b = specfun.jy_arrays(n, lam * w)
    u, eu, su, v, ev, sv = _uv_parts(n, lam, w, a, b)
    u, v = u.copy(), v.copy()
    if guard:
        bad = ((np.abs(u) < _CANCEL_GUARD * su) | (np.abs(v) < _CANCEL_GUARD * sv)) & (lam != 1.0)
        idx = np.flatnonzero(bad)
        if idx.size:
            _fix_cancellation(n, lam, w, idx, u, eu, v, ev)
    r_m, r_e, t_m, t_e = _assemble_scaled(u, eu, v, ev, w)
    one = lam == 1.0
    r_m[one], r_e[one], t_m[one], t_e[one] = 0.0, 0, 1.0, 0
    return r_m, r_e, t_m, t_e


def coefficients(cfg: ScatteringConfig, n) -> ModalCoefficients:
    """``r_n`` and ``t_n`` for one configuration."""
    n = specfun._as_order(n)
    if cfg.lam == 1.0:
        return ModalCoefficients(n, 0j, 1 + 0j)
    w = np.array([cfg.omega_eps])
    lam = np.array([cfg.lam])
    a = specfun.jy_arrays(n, w, precise=True)
    b = specfun.jy_arrays(n, lam * w, precise=True)
    u, eu, su, v, ev, sv = _uv_parts(n, lam, w, a, b)
    u, v = u.copy(), v.copy()
    if abs(u[0]) < _CANCEL_GUARD * su[0] or abs(v[0]) < _CANCEL_GUARD * sv[0]:
        _fix_cancellation(n, lam, w, [0], u, eu, v, ev)
    r, t = _assemble(u, eu, v, ev, w)
    return ModalCoefficients(n, complex(r[0]), complex(t[0]))


def reflection(cfg: ScatteringConfig, n) -> complex:
    """Reflection coefficient ``r_n``."""
    return coefficients(cfg, n).r


def transmission(cfg: ScatteringConfig, n) -> complex:
    """Transmission coefficient ``t_n``."""
    return coefficients(cfg, n).t


# ---------------------------------------------------------------------------
# g / k auxiliary functions and the 2D reflection formula
# ---------------------------------------------------------------------------


_POLE_RTOL = 1e-12


def gk_arrays(nu: float, x, check_poles: bool = False):
    """Vectorised ``(g_nu, k_nu, tan theta_nu)``; poles give inf/nan unless checked."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = specfun.cylinder_arrays(nu, x)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        g = x / nu * c.jp / c.j
        k = -x / nu * c.yp / c.y
        tt = np.ldexp(c.y / c.j, np.clip(c.ye - c.je, -3000, 3000))
        if check_poles:
            dj = np.abs(c.j / c.jp)
            dy = np.abs(c.y / c.yp)
            near = (dj < _POLE_RTOL * x) | (dy < _POLE_RTOL * x)
            if near.any():
                i = int(np.flatnonzero(near)[0])
                z = x[i] - (c.j[i] / c.jp[i] if dj[i] < _POLE_RTOL * x[i] else c.y[i] / c.yp[i])
                raise PoleError(f"x = {x[i]!r} is within {_POLE_RTOL:g} relative of a Bessel zero", float(z))
    return g, k, tt


def gk_pair(nu: float, x: float) -> GKPair:
    """``g_nu(x) = (x/nu) J'/J``, ``k_nu(x) = -(x/nu) Y'/Y`` and ``tan theta = Y/J``.

    Raises
    ------
    PoleError
        If ``x`` lies within ``1e-12`` relative distance of a zero of
        ``Jt_nu`` or ``Yt_nu``.
    """
    if not (x > 0):
        raise DomainError(f"gk_pair requires x > 0, got {x!r}")
    c = specfun.cylinder_bessel(nu, x)
    for name, dname in (("j", "jp"), ("y", "yp")):
        step = c.ratio(name, dname)
        if abs(step) < _POLE_RTOL * x:
            raise PoleError(f"x = {x!r} is within {_POLE_RTOL:g} relative of a Bessel zero", x - step)
    return GKPair(x / nu * c.ratio("jp", "j"), -x / nu * c.ratio("yp", "y"), c.ratio("y", "j"))


def reflection_2d(nu: float, x, lam: float):
    """``R_nu(x, lam) = -(G - g)/(G - g + i tan(theta)(G + k))`` with ``G = g_nu(lam x)``.

    Vectorised over ``x``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g, k, tt = gk_arrays(nu, x)
    gl, _, _ = gk_arrays(nu, lam * x)
    num = gl - g
    big = np.abs(tt) > 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r_small = -num / (num + 1j * tt * (gl + k))
        q = num / tt
        r_big = -q / (q + 1j * (gl + k))
    return np.where(big, r_big, r_small)


def reflection_2d_equivalence(cfg: ScatteringConfig, n) -> float:
    """``|r_n - R_{n+1/2}|`` at ``cfg``.

    Raises :class:`PoleError` when ``omega_eps`` or ``lam omega_eps`` sits on a
    zero of ``Jt_nu`` or ``Yt_nu``.
    """
    n = specfun._as_order(n)
    nu = Order(n).nu
    gk_pair(nu, cfg.omega_eps)
    gk_pair(nu, cfg.lam * cfg.omega_eps)
    r = reflection(cfg, n)
    big_r = complex(reflection_2d(nu, cfg.omega_eps, cfg.lam)[0])
    return abs(r - big_r)
