"""Sobolev-type norms of modal traces.

``h_sigma_norm`` is the ``H^sigma`` norm on one sphere, ``n_sigma_norm`` the
radius-uniform norm (per-mode sup over ``R``), and ``n_pq_seminorm`` the
weighted window seminorm used by the lower bounds.  The per-mode sup over
``R`` is analytic for the three radial profiles of the modal solution:

* incident ``a j_n(w R/eps)``: ``|a| sup_x |j_n(x)|``;
* scattered ``a r_n h_n(w R/eps)``, ``R >= eps``: attained at ``R = eps`` since
  ``x |h_n(x)|`` decreases;
* transmitted ``a t_n j_n(lam w R/eps)``, ``R < eps``: ``|a t_n| j_n(lam w)`` while
  ``lam w`` is below the first maximum of ``j_n``, ``|a t_n| sup |j_n|`` after.

For ``n > 200`` the sup of ``j_n`` is replaced by the two-sided enclosure
``2 sin(1/2) (2nu)^(-5/6) < sup |j_n| < (2nu)^(-5/6) / 0.663``, so sums
over infinitely many modes come back as a ``[lower, upper]`` pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fields, modal, specfun
from .errors import DivergentSeriesError, DomainError, UnsupportedProfileError
from .fields import IncidentField, ModalTrace
from .modal import ScatteringConfig

__all__ = [
    "NormSpec",
    "NormValue",
    "grid_sup_norm",
    "h_sigma_norm",
    "mode_sups",
    "n_pq_seminorm",
    "n_sigma_norm",
    "pq_weight",
]

# orders above which sup |j_n| comes from the enclosure instead of a zero search
_EXACT_SUP_LIMIT = 200
_SUP_LO = 2.0 * math.sin(0.5)
_SUP_HI = 1.0 / 0.663


@dataclass(frozen=True)
class NormSpec:
    """Which norm to evaluate and its parameters."""

    kind: str
    sigma: float
    p: int = 0
    q: float = math.inf
    kappa: float = 1.0
    R: float | None = None

    def __post_init__(self):
        if self.kind not in ("H_sigma_at_R", "N_sigma", "N_pq_sigma"):
            raise DomainError(f"unknown norm kind {self.kind!r}")
        if self.kind == "N_pq_sigma":
            if not (self.q >= self.p >= 0):
                raise DomainError("N_pq requires q >= p >= 0")
            if self.kappa < 1:
                raise DomainError("N_pq requires kappa >= 1")
        if self.kind == "H_sigma_at_R" and (self.R is None or self.R <= 0):
            raise DomainError("H_sigma_at_R requires a positive radius R")


@dataclass(frozen=True)
class NormValue:
    """A norm together with a certified enclosure ``lower <= true <= upper``."""

    value: float
    lower: float
    upper: float
    n_terms: int
    note: str = ""

    def __float__(self) -> float:
        return self.value


def h_sigma_norm(trace: ModalTrace, sigma: float) -> NormValue:
    """``sqrt(sum_n sum_m |f_{n,m}|^2 (2n+1)^(2 sigma))`` with the tail bounded."""
    weights = (2.0 * np.arange(trace.n_max + 1) + 1.0) ** (2.0 * sigma)
    sq = np.abs(trace.coeffs) ** 2
    if not np.all(np.isfinite(sq)):
        raise DivergentSeriesError("trace has non-finite coefficients")
    part = math.fsum((weights[:, None] * sq).ravel())
    tail = trace.tail.squared_tail(sigma)
    return NormValue(math.sqrt(part), math.sqrt(part), math.sqrt(part + tail), trace.n_max + 1)


def _log_sup_j_bounds(n: int) -> tuple[float, float]:
    base = -5.0 / 6.0 * math.log(2 * n + 1)
    return base + math.log(_SUP_LO), base + math.log(_SUP_HI)


def _sup_j(n: int) -> float:
    return specfun.sup_spherical_j(n)


def mode_sups(field_kind: str, cfg: ScatteringConfig, n_values) -> np.ndarray:
    """``sup_R |radial_n(R)|`` for each ``n`` (exact orders only)."""
    out = []
    w, lam = cfg.omega_eps, cfg.lam
    for n in n_values:
        n = int(n)
        if field_kind == "incident":
            out.append(_sup_j(n))
        elif field_kind == "scattered":
            r_m, r_e, _, _ = modal.scaled_coefficient_arrays(n, lam, w)
            b = specfun.jy_arrays(n, [w])
            out.append(abs(fields._scaled_product(r_m[0], int(r_e[0]), b)))
        elif field_kind == "transmitted":
            _, _, t_m, t_e = modal.scaled_coefficient_arrays(n, lam, w)
            x = lam * w
            if n == 0:
                prof_m, prof_e = 1.0, 0
            else:
                gamma = specfun.bessel_zero("spherical_jprime", n + 0.5, 1)
                if x <= gamma:
                    b = specfun.jy_arrays(n, [x])
                    prof_m, prof_e = float(b.j[0]), int(b.je[0])
                else:
                    prof_m, prof_e = _sup_j(n), 0
            out.append(specfun._ldexp_safe(abs(t_m[0]) * abs(prof_m), int(t_e[0]) + prof_e))
        else:
            raise UnsupportedProfileError(f"no analytic radial sup for field kind {field_kind!r}")
    return np.array(out, dtype=float)


def _check_kind(field_kind):
    if field_kind not in fields.FIELD_KINDS:
        raise UnsupportedProfileError(f"no analytic radial sup for field kind {field_kind!r}")


def n_sigma_norm(
    field_kind: str,
    cfg: ScatteringConfig,
    incident: IncidentField,
    sigma: float,
    rtol: float = 1e-12,
    n_limit: int = 10**6,
) -> NormValue:
    """``sqrt(sum_n (2n+1)^(2 sigma) sum_m sup_R |f_{n,m}(R)|^2)``.

    Raises
    ------
    DivergentSeriesError
        For an untruncated plane-wave incident field with ``sigma >= -1/6``
        (the terms behave like ``(2n+1)^(2 sigma - 2/3)``).
    """
    _check_kind(field_kind)
    lim = incident.order_limit()
    if field_kind == "scattered":
        # the sup sits at R = eps: this is the H^sigma norm of that trace
        return h_sigma_norm(fields.modal_trace("scattered", cfg, incident, cfg.eps), sigma)
    if field_kind == "incident" and lim is None:
        return _plane_wave_n_sigma(sigma, rtol, n_limit)
    if lim is None:
        # transmitted plane-wave field: modes past the truncation order are
        # bounded through |t_n| j_n(lam w) <= j_n(w) + |r_n h_n(w)|
        n_max = fields.truncation_order(cfg.omega_eps, cfg.lam)
        trace = fields.modal_trace("transmitted", cfg, incident, 0.5 * cfg.eps, n_max)
        tail = trace.tail.squared_tail(sigma)
        lim_use = n_max
    else:
        tail = 0.0
        lim_use = lim
    ns = np.arange(lim_use + 1)
    sups = mode_sups(field_kind, cfg, ns)
    shells = np.array([incident.shell(int(n)) for n in ns])
    terms = (2.0 * ns + 1.0) ** (2 * sigma) * (shells * sups) ** 2
    part = math.fsum(terms)
    return NormValue(math.sqrt(part), math.sqrt(part), math.sqrt(part + tail), lim_use + 1)


def _plane_wave_n_sigma(sigma: float, rtol: float, n_limit: int) -> NormValue:
    """``N^sigma`` of the full plane wave, ``sum (2n+1)^(1 + 2 sigma) sup j_n^2``."""
    beta = 2.0 / 3.0 - 2.0 * sigma  # terms ~ (2n+1)^(-beta)
    exact = [(2 * n + 1) ** (1 + 2 * sigma) * _sup_j(n) ** 2 for n in range(_EXACT_SUP_LIMIT + 1)]
    if beta <= 1.0:
        partial = np.sqrt(np.cumsum(exact))
        raise DivergentSeriesError(
            f"N^sigma of a plane wave diverges for sigma >= -1/6 (sigma = {sigma})",
            partial_sums=partial[:: max(1, len(partial) // 20)],
        )
    exact_sum = math.fsum(exact)
    lo_terms, hi_terms = [], []
    n = _EXACT_SUP_LIMIT + 1
    while True:
        llo, lhi = _log_sup_j_bounds(n)
        w = (1 + 2 * sigma) * math.log(2 * n + 1)
        lo_terms.append(math.exp(w + 2 * llo))
        hi_terms.append(math.exp(w + 2 * lhi))
        n += 1
        # remainder of sum_{k >= n} (2k+1)^(-beta), compared by integrals
        rem_hi = _SUP_HI**2 * (2 * n - 1) ** (1 - beta) / (2 * (beta - 1))
        if rem_hi < rtol * exact_sum or n >= min(n_limit, 5000):
            break
    rem_lo = _SUP_LO**2 * (2 * n + 1) ** (1 - beta) / (2 * (beta - 1))
    lo = exact_sum + math.fsum(lo_terms) + rem_lo
    hi = exact_sum + math.fsum(hi_terms) + rem_hi
    return NormValue(
        math.sqrt(0.5 * (lo + hi)), math.sqrt(lo), math.sqrt(hi), n, "sup j_n enclosed for n > 200; integral remainder"
    )


def pq_weight(n: int, kappa: float) -> float:
    """``kappa^(nu - nu^(5/6))`` with ``nu = n + 1/2``."""
    nu = n + 0.5
    return math.exp((nu - nu ** (5.0 / 6.0)) * math.log(kappa))


def n_pq_seminorm(
    field_kind: str,
    cfg: ScatteringConfig,
    incident: IncidentField,
    sigma: float,
    p: int,
    q: float,
    kappa: float,
) -> NormValue:
    """``sup_{p <= n <= q} kappa^(nu - nu^(5/6)) (2n+1)^sigma sqrt(sum_m sup_R |f_{n,m}|^2)``.

    ``q = inf`` is allowed only for ``kappa == 1``.
    """
    _check_kind(field_kind)
    if not (q >= p >= 0) or int(p) != p:
        raise DomainError("n_pq_seminorm requires integers q >= p >= 0")
    if kappa < 1:
        raise DomainError("n_pq_seminorm requires kappa >= 1")
    if math.isinf(q) and kappa != 1.0:
        raise DomainError("q = inf is only supported with kappa = 1")
    lim = incident.order_limit()
    top = q if lim is None else min(q, lim)
    if top < p:
        return NormValue(0.0, 0.0, 0.0, 0)
    best = 0.0
    n = int(p)
    quiet = 0
    count = 0
    while n <= top:
        shell = incident.shell(n)
        if shell > 0:
            val = pq_weight(n, kappa) * (2 * n + 1) ** sigma * shell * float(mode_sups(field_kind, cfg, [n])[0])
            best = max(best, val)
        count += 1
        n += 1
        if math.isinf(top):
            # bound on every later mode term (kappa = 1 here)
            bound = _mode_upper_bound(field_kind, cfg, n - 1, sigma)
            if bound is None:
                raise DivergentSeriesError("seminorm over n -> inf diverges for this field", [best])
            if field_kind == "incident" and bound <= best:
                break
            quiet = quiet + 1 if bound <= 1e-16 * best else 0
            if quiet >= 10:
                break
    return NormValue(best, best, best, count)


def _mode_upper_bound(field_kind, cfg, n, sigma):
    """Upper bound on every later plane-wave mode term, or None if it does not decay."""
    nu = n + 1.5
    if field_kind == "incident":
        if sigma + 0.5 - 5.0 / 6.0 >= 0:
            return None
        # (2n+1)^(sigma+1/2) sup j_n, decreasing once the exponent is negative
        return (2 * n + 3) ** (sigma + 0.5) * (2 * nu) ** (-5.0 / 6.0) * _SUP_HI
    w = cfg.omega_eps
    if max(cfg.lam, 1.0) * w >= nu:
        return math.inf
    log_df = math.lgamma(2 * n + 4) - (n + 1) * math.log(2.0) - math.lgamma(n + 2)
    prof = (n + 1) * math.log(w) - log_df
    amp = 2 ** (4 / 3) * abs(cfg.lam - 1.0) * w + 1.0
    return math.exp((sigma + 0.5) * math.log(2 * n + 3) + prof) * amp


def grid_sup_norm(profiles: dict, sigma: float, r_min: float, r_max: float, points: int = 10_000) -> NormValue:
    """``N^sigma`` for arbitrary radial profiles via a log-grid sup.

    ``profiles`` maps ``(n, m)`` to a callable ``R -> complex``.  The grid sup
    can only under-estimate the true sup, so the result is a lower bound.
    """
    grid = np.geomspace(r_min, r_max, points)
    by_n: dict[int, float] = {}
    for (n, _), f in profiles.items():
        vals = np.abs(np.array([f(R) for R in grid], dtype=complex))
        by_n[n] = by_n.get(n, 0.0) + float(np.max(vals)) ** 2
    total = math.fsum((2 * n + 1) ** (2 * sigma) * v for n, v in by_n.items())
    return NormValue(math.sqrt(total), math.sqrt(total), math.inf, len(by_n), "grid-sup (lower bound of true sup)")
