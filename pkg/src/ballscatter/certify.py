"""Numerical certificates for the modal bounds on the scattered field.

Every certificate compares a computed left-hand side with the explicit
right-hand side of an inequality on a grid of configurations.  Comparisons are
carried out on ``log2`` magnitudes so that mode terms spanning hundreds of
decades compare safely.  For an upper bound the relative margin is
``(RHS - LHS)/RHS``; for a lower bound it is ``(LHS - RHS)/RHS``.  A report
passes when every relative margin is non-negative, passes at tolerance when
the worst one lies in ``[-tol_rel, 0)`` and fails otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fields, modal, norms, resonance, specfun
from .errors import DivergentSeriesError, DomainError, EmptySetError, PreconditionError
from .fields import IncidentField
from .modal import ScatteringConfig

__all__ = [
    "TOL_REL",
    "CertificateReport",
    "SweepGrid",
    "certify_broadband",
    "certify_hankel_lemma",
    "certify_lemma71",
    "certify_lower_blowup",
    "certify_lower_lowcontrast",
    "certify_upper_farfield",
    "certify_upper_quadratic",
    "certify_upper_small_freq",
    "default_grid",
    "plane_wave",
    "shifted_plane_wave",
]

TOL_REL = 1e-9
GRID_SUP = "grid-sup (lower bound of true sup)"
POINTWISE = "pointwise"


# ---------------------------------------------------------------------------
# grids and reports
# ---------------------------------------------------------------------------


def plane_wave(n_max: int | None = None) -> IncidentField:
    """Plane wave along ``e_3``, optionally truncated."""
    return fields.plane_wave_coeffs((0.0, 0.0, 1.0), n_max)


def shifted_plane_wave(p0: int, n_max: int) -> IncidentField:
    """Plane-wave modes ``p0 <= n <= n_max`` only, so the lowest order is ``p0``."""
    tab = plane_wave().table(n_max)
    coeffs = {(n, m): tab[n, m + n_max] for n in range(p0, n_max + 1) for m in range(-n, n + 1)}
    return IncidentField.modal(coeffs)


@dataclass(frozen=True)
class SweepGrid:
    """Configurations swept by a certificate.

    ``omegas=None`` lets each certificate use its default log grid with
    ``points_per_decade`` points over the admissible range.
    """

    lambdas: tuple = (0.1, 0.5, 0.9, 2.0, 5.0, 10.0, 50.0)
    omegas: tuple | None = None
    r_over_eps: tuple = (1.0, 2.0, 10.0)
    sigmas: tuple = (0.0, 1.0 / 3.0)
    incidents: tuple = field(default_factory=lambda: (plane_wave(),))
    n_max: int = 60
    points_per_decade: int = 200
    decades: float = 4.0

    def __post_init__(self):
        for name in ("lambdas", "r_over_eps"):
            vals = getattr(self, name)
            if not vals or any(not (math.isfinite(v) and v > 0) for v in vals):
                raise DomainError(f"SweepGrid.{name} must be non-empty, finite and positive")
            if list(vals) != sorted(vals):
                raise DomainError(f"SweepGrid.{name} must be sorted")
        if self.omegas is not None:
            if any(not (math.isfinite(v) and v > 0) for v in self.omegas) or list(self.omegas) != sorted(self.omegas):
                raise DomainError("SweepGrid.omegas must be finite, positive and sorted")
        if any(not math.isfinite(s) for s in self.sigmas):
            raise DomainError("SweepGrid.sigmas must be finite")
        if self.n_max < 0 or self.points_per_decade < 1 or self.decades <= 0:
            raise DomainError("SweepGrid.n_max, points_per_decade and decades must be positive")

    def log_grid(self, top: float) -> np.ndarray:
        """Log-spaced points in ``[top 10^-decades, top)``."""
        if self.omegas is not None:
            w = np.asarray(self.omegas, dtype=float)
            return w[w < top]
        count = max(2, int(round(self.points_per_decade * self.decades)))
        return np.geomspace(top * 10.0 ** (-self.decades), top, count, endpoint=False)

    def rejected_omegas(self, top: float) -> list:
        if self.omegas is None:
            return []
        return [w for w in self.omegas if w >= top]

    def to_json(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "omegas": None if self.omegas is None else list(self.omegas),
            "r_over_eps": list(self.r_over_eps),
            "sigmas": list(self.sigmas),
            "incidents": [inc.to_json() for inc in self.incidents],
            "n_max": self.n_max,
            "points_per_decade": self.points_per_decade,
            "decades": self.decades,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SweepGrid":
        allowed = {"lambdas", "omegas", "r_over_eps", "sigmas", "incidents", "n_max", "points_per_decade", "decades"}
        extra = set(doc) - allowed
        if extra:
            raise DomainError(f"unknown keys in grid document: {sorted(extra)}")
        kw = {}
        for key in ("lambdas", "r_over_eps", "sigmas"):
            if key in doc:
                kw[key] = tuple(float(v) for v in doc[key])
        if doc.get("omegas") is not None:
            kw["omegas"] = tuple(float(v) for v in doc["omegas"])
        if "incidents" in doc:
            kw["incidents"] = tuple(IncidentField.from_json(d) for d in doc["incidents"])
        for key in ("n_max", "points_per_decade"):
            if key in doc:
                kw[key] = int(doc[key])
        if "decades" in doc:
            kw["decades"] = float(doc["decades"])
        return cls(**kw)


def default_grid(suite: str) -> SweepGrid:
    """Default sweep for each certificate suite."""
    if suite == "small_freq":
        return SweepGrid(incidents=(plane_wave(), shifted_plane_wave(2, 30)))
    if suite == "quadratic":
        return SweepGrid(incidents=(plane_wave(), plane_wave(10)))
    if suite == "farfield":
        return SweepGrid(
            r_over_eps=(1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0),
            sigmas=(-1.0 / 3.0, 0.0),
            incidents=(plane_wave(), plane_wave(10)),
            points_per_decade=200,
        )
    if suite == "lemma71":
        return SweepGrid(lambdas=(0.1, 0.2, 0.5, 0.9, 1.0, 2.0, 3.0, 5.0, 10.0, 50.0), points_per_decade=50)
    if suite == "hankel":
        return SweepGrid(lambdas=(0.1, 0.3, 0.5), r_over_eps=(1.0, 1.5, 2.0, 3.0, 5.0, 10.0))
    raise DomainError(f"unknown certificate suite {suite!r}")


@dataclass
class CertificateReport:
    """Outcome of one certificate over a grid."""

    inequality: str
    kind: str
    lhs: np.ndarray
    rhs: np.ndarray
    rel_margin: np.ndarray
    coords: dict
    tol_rel: float = TOL_REL
    semantics: str = POINTWISE
    rejected: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    @property
    def margin(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.rhs - self.lhs if self.kind == "upper" else self.lhs - self.rhs

    @property
    def worst_index(self) -> int | None:
        if self.rel_margin.size == 0:
            return None
        return int(np.argmin(self.rel_margin))

    @property
    def worst_rel_margin(self) -> float:
        return float(np.min(self.rel_margin)) if self.rel_margin.size else math.inf

    @property
    def worst_margin(self) -> float:
        i = self.worst_index
        return math.inf if i is None else float(self.margin[i])

    @property
    def status(self) -> str:
        w = self.worst_rel_margin
        if w >= 0:
            return "pass"
        if w >= -self.tol_rel:
            return "pass-at-tolerance"
        return "fail"

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    @property
    def n_points(self) -> int:
        return int(self.rel_margin.size)

    def worst_point(self) -> dict:
        i = self.worst_index
        if i is None:
            return {}
        out = {k: _plain(v[i]) for k, v in self.coords.items()}
        out.update(lhs=float(self.lhs[i]), rhs=float(self.rhs[i]), rel_margin=float(self.rel_margin[i]))
        return out

    def to_json(self, per_point: bool = False) -> dict:
        doc = {
            "inequality": self.inequality,
            "kind": self.kind,
            "status": self.status,
            "n_points": self.n_points,
            "worst_margin": _finite_or_str(self.worst_margin),
            "worst_rel_margin": _finite_or_str(self.worst_rel_margin),
            "worst_point": {k: _finite_or_str(v) for k, v in self.worst_point().items()},
            "tol_rel": self.tol_rel,
            "semantics": self.semantics,
            "rejected": self.rejected,
            "extra": _jsonable(self.extra),
            "grid": _jsonable(self.grid),
        }
        if per_point:
            doc["points"] = [
                {
                    **{k: _finite_or_str(_plain(v[i])) for k, v in self.coords.items()},
                    "lhs": _finite_or_str(float(self.lhs[i])),
                    "rhs": _finite_or_str(float(self.rhs[i])),
                    "rel_margin": _finite_or_str(float(self.rel_margin[i])),
                }
                for i in range(self.n_points)
            ]
        return doc

    def table_row(self) -> str:
        return (
            f"{self.inequality:<28} {self.status:<18} {self.n_points:>8d} "
            f"{self.worst_rel_margin:>14.6e} {len(self.rejected):>8d}"
        )


def table_header() -> str:
    return f"{'inequality':<28} {'status':<18} {'points':>8} {'worst_rel':>14} {'rejected':>8}"


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def _finite_or_str(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return _finite_or_str(obj)
    return obj


def _rel_margin(log_l: np.ndarray, log_r: np.ndarray, kind: str) -> np.ndarray:
    """Relative margins from log2 magnitudes; ``0 <= 0`` counts as equality."""
    log_l = np.asarray(log_l, dtype=float)
    log_r = np.asarray(log_r, dtype=float)
    out = np.empty(np.broadcast(log_l, log_r).shape)
    both_zero = np.isneginf(log_l) & np.isneginf(log_r)
    with np.errstate(over="ignore", invalid="ignore"):
        d = log_l - log_r
        if kind == "upper":
            val = 1.0 - np.exp2(d)
            val = np.where(np.isposinf(log_r) & np.isfinite(log_l), 1.0, val)
        else:
            val = np.exp2(d) - 1.0
            val = np.where(np.isposinf(log_r), -np.inf, val)
    out[...] = np.where(both_zero, 0.0, val)
    return np.nan_to_num(out, nan=-np.inf)


class _Collector:
    """Accumulates points of one certificate in insertion order."""

    def __init__(self, inequality, kind, semantics=POINTWISE, tol_rel=TOL_REL):
        self.inequality, self.kind, self.semantics, self.tol_rel = inequality, kind, semantics, tol_rel
        self.log_l, self.log_r = [], []
        self.coords: dict[str, list] = {}
        self.rejected: list = []
        self.extra: dict = {}

    def add(self, log_l, log_r, **coords):
        log_l, log_r = np.broadcast_arrays(np.atleast_1d(np.asarray(log_l, float)), np.atleast_1d(np.asarray(log_r, float)))
        size = log_l.size
        old = sum(len(a) for a in self.log_l)
        for k in coords:
            if k not in self.coords:
                self.coords[k] = [None] * old
        for k in self.coords:
            v = coords.get(k)
            self.coords[k].extend(np.broadcast_to(np.asarray(v, dtype=object), (size,)).tolist())
        self.log_l.append(log_l.ravel())
        self.log_r.append(log_r.ravel())

    def report(self, grid: SweepGrid | None = None) -> CertificateReport:
        log_l = np.concatenate(self.log_l) if self.log_l else np.zeros(0)
        log_r = np.concatenate(self.log_r) if self.log_r else np.zeros(0)
        with np.errstate(over="ignore"):
            lhs, rhs = np.exp2(log_l), np.exp2(log_r)
        coords = {k: np.array(v, dtype=object) for k, v in self.coords.items()}
        return CertificateReport(
            self.inequality,
            self.kind,
            lhs,
            rhs,
            _rel_margin(log_l, log_r, self.kind),
            coords,
            self.tol_rel,
            self.semantics,
            self.rejected,
            self.extra,
            {} if grid is None else grid.to_json(),
        )


# ---------------------------------------------------------------------------
# log-domain building blocks
# ---------------------------------------------------------------------------


def _log2(x):
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(np.asarray(x, dtype=float)))


def _log2_abs_h(b: specfun.JY) -> np.ndarray:
    e = np.maximum(b.je, b.ye)
    mag = np.hypot(np.ldexp(b.j, np.clip(b.je - e, -2000, 0)), np.ldexp(b.y, np.clip(b.ye - e, -2000, 0)))
    return _log2(mag) + e


def _log2_abs_j(b: specfun.JY) -> np.ndarray:
    return _log2(b.j) + b.je


def _log2_abs_r(n: int, lam: float, w: np.ndarray) -> np.ndarray:
    r_m, r_e, _, _ = modal.scaled_coefficient_arrays(n, lam, w)
    return _log2(np.abs(r_m)) + r_e


def _logsumexp2(a: np.ndarray, axis: int = 0) -> np.ndarray:
    m = np.max(a, axis=axis)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sum(np.exp2(a - np.expand_dims(safe, axis)), axis=axis)
        out = np.log2(s) + safe
    return np.where(np.isneginf(m), -np.inf, np.where(np.isposinf(m), np.inf, out))


def _shell_log2(incident: IncidentField, n_top: int) -> np.ndarray:
    """``log2 sqrt(sum_m |a_{n,m}|^2)`` for ``n <= n_top``."""
    return _log2(np.array([incident.shell(n) for n in range(n_top + 1)]))


def _mode_top(incident: IncidentField, default: int) -> int:
    lim = incident.order_limit()
    return default if lim is None else min(default, lim)


def _scattered_table(lam: float, w: np.ndarray, r_over_eps: float, n_top: int) -> np.ndarray:
    """``log2 |r_n(w) h_n(w R/eps)|`` with shape ``(n_top + 1, len(w))``."""
    out = np.empty((n_top + 1, w.size))
    if lam == 1.0:
        out.fill(-np.inf)
        return out
    for n in range(n_top + 1):
        out[n] = _log2_abs_r(n, lam, w) + _log2_abs_h(specfun.jy_arrays(n, w * r_over_eps))
    return out


def _incident_table(w: np.ndarray, n_top: int) -> np.ndarray:
    """``log2 |j_n(w)|`` with shape ``(n_top + 1, len(w))``."""
    return np.array([_log2_abs_j(specfun.jy_arrays(n, w)) for n in range(n_top + 1)])


def _h_sigma_log2(table: np.ndarray, shells_log2: np.ndarray, sigma: float) -> np.ndarray:
    """``log2`` of ``(sum_n shell_n^2 (2n+1)^(2 sigma) |profile_n|^2)^(1/2)``."""
    n = np.arange(table.shape[0])
    terms = 2.0 * (shells_log2[:, None] + sigma * np.log2(2 * n + 1)[:, None] + table)
    return 0.5 * _logsumexp2(terms, axis=0)


def _tail_ratio(table: np.ndarray, shells_log2: np.ndarray, sigma: float) -> float:
    """Largest ratio of the last mode term to the full sum, a truncation diagnostic.

    Only meaningful for infinite incident fields; finite ones return 0.
    """
    n = np.arange(table.shape[0])
    terms = shells_log2[:, None] + sigma * np.log2(2 * n + 1)[:, None] + table
    finite = np.isfinite(shells_log2)
    if finite.sum() < 2 or not np.all(finite):
        return 0.0
    last = terms[np.flatnonzero(finite)[-1]]
    total = 0.5 * _logsumexp2(2.0 * terms, axis=0)
    with np.errstate(invalid="ignore"):
        d = last - total
    d = d[np.isfinite(d)]
    return float(np.exp2(d.max())) if d.size else 0.0


_N_SIGMA_CACHE: dict = {}


def _incident_n_sigma_log2(incident: IncidentField, sigma: float) -> tuple[float, str | None]:
    """``log2 N^sigma(u^i)``; a divergent norm gives ``+inf`` and a note."""
    key = (repr(incident.to_json()), sigma)
    if key not in _N_SIGMA_CACHE:
        try:
            val = float(norms.n_sigma_norm("incident", ScatteringConfig(1.0, 1.0), incident, sigma))
            _N_SIGMA_CACHE[key] = (math.log2(val) if val > 0 else -math.inf, None)
        except DivergentSeriesError:
            _N_SIGMA_CACHE[key] = (math.inf, f"N^{sigma:g}(u^i) diverges; bound is vacuous")
    return _N_SIGMA_CACHE[key]


def _incident_label(incident: IncidentField) -> str:
    if incident.is_plane_wave:
        return "plane_wave" if incident.n_max is None else f"plane_wave[n<={incident.n_max}]"
    return f"modal[p0={incident.lowest_order()},n<={incident.order_limit()}]"


# ---------------------------------------------------------------------------
# upper bounds
# ---------------------------------------------------------------------------


def certify_upper_small_freq(grid: SweepGrid | None = None, tol_rel: float = TOL_REL) -> CertificateReport:
    """``||u^s(R)||_{H^sigma} <= 2^(4/3)|lam-1| w (eps/R) ||u^i(eps)||_{H^(sigma-1/3)}``.

    Valid for ``max(lam,1) w < p0 + 1/2`` where ``p0`` is the lowest order of
    the incident field.
    """
    grid = grid or default_grid("small_freq")
    col = _Collector("eq:omsmall", "upper", tol_rel=tol_rel)
    for inc_i, inc in enumerate(grid.incidents):
        p0 = inc.lowest_order()
        label = _incident_label(inc)
        for lam in grid.lambdas:
            top = (p0 + 0.5) / max(lam, 1.0)
            for w in grid.rejected_omegas(top):
                col.rejected.append({"incident": label, "lambda": lam, "omega_eps": w, "clause": "max(lambda,1) omega_eps < p0 + 1/2"})
            w = grid.log_grid(top)
            if w.size == 0:
                continue
            n_top = _mode_top(inc, fields.truncation_order(top, lam, 1.0))
            shells = _shell_log2(inc, n_top)
            inc_tab = _incident_table(w, n_top)
            for ratio in grid.r_over_eps:
                tab = _scattered_table(lam, w, ratio, n_top)
                for sigma in grid.sigmas:
                    log_l = _h_sigma_log2(tab, shells, sigma)
                    log_r = (4.0 / 3.0 + _log2(lam - 1.0) + np.log2(w) - math.log2(ratio)
                             + _h_sigma_log2(inc_tab, shells, sigma - 1.0 / 3.0))
                    col.add(log_l, log_r, incident=label, **{"lambda": lam, "omega_eps": w, "r_over_eps": ratio, "sigma": sigma})
                    col.extra["max_tail_ratio"] = max(col.extra.get("max_tail_ratio", 0.0), _tail_ratio(tab, shells, sigma))
    return col.report(grid)


def quadratic_leading_coefficient(lam: float, r_over_eps: float, a00: float = 1.0) -> float:
    """Limit of ``||u^s(R)||_{H^sigma} / w^2`` as ``w -> 0``: ``(eps/R)|a00||lam^2-1|/3``."""
    return abs(a00) * abs(lam * lam - 1.0) / (3.0 * r_over_eps)


def certify_upper_quadratic(grid: SweepGrid | None = None, tol_rel: float = TOL_REL) -> CertificateReport:
    """``||u^s(R)||_{H^sigma} <= 2^(2/3)|lam-1|M w^2 (eps/R)(|a_00| + 2^(2/3) M w N^(sigma-1/3)(u^i))``.

    ``M = max(lam,1)`` and ``M w < 1/2``.  ``|a_00|`` is the order-zero shell
    of the incident field.  The report also records ``LHS/w^2`` at
    ``w in {1e-2, 1e-3, 1e-4}`` against its analytic limit.
    """
    grid = grid or default_grid("quadratic")
    col = _Collector("eq:corl1", "upper", tol_rel=tol_rel)
    scaling = []
    for inc in grid.incidents:
        label = _incident_label(inc)
        a00 = inc.shell(0)
        for lam in grid.lambdas:
            big = max(lam, 1.0)
            top = 0.5 / big
            for w in grid.rejected_omegas(top):
                col.rejected.append({"incident": label, "lambda": lam, "omega_eps": w, "clause": "max(lambda,1) omega_eps < 1/2"})
            w = grid.log_grid(top)
            probe = np.array([1e-2, 1e-3, 1e-4])
            probe = probe[probe < top]
            n_top = _mode_top(inc, fields.truncation_order(top, lam, 1.0))
            shells = _shell_log2(inc, n_top)
            for ratio in grid.r_over_eps:
                tab = _scattered_table(lam, w, ratio, n_top) if w.size else None
                for sigma in grid.sigmas:
                    nlog, note = _incident_n_sigma_log2(inc, sigma - 1.0 / 3.0)
                    if note:
                        col.extra.setdefault("notes", [])
                        if note not in col.extra["notes"]:
                            col.extra["notes"].append(note)
                    if tab is not None:
                        log_l = _h_sigma_log2(tab, shells, sigma)
                        with np.errstate(over="ignore"):
                            inner = a00 + 2 ** (2.0 / 3.0) * big * w * np.exp2(nlog)
                        if lam == 1.0:
                            log_r = np.full_like(w, -np.inf)
                        else:
                            log_r = (2.0 / 3.0 + _log2(lam - 1.0) + math.log2(big) + 2 * np.log2(w)
                                     - math.log2(ratio) + np.log2(inner))
                        col.add(log_l, log_r, incident=label, **{"lambda": lam, "omega_eps": w, "r_over_eps": ratio, "sigma": sigma})
                    if probe.size and sigma == grid.sigmas[0] and lam != 1.0 and a00 > 0:
                        ptab = _scattered_table(lam, probe, ratio, n_top)
                        vals = np.exp2(_h_sigma_log2(ptab, shells, sigma)) / probe**2
                        scaling.append({
                            "incident": label, "lambda": lam, "r_over_eps": ratio, "omega_eps": probe.tolist(),
                            "ratio": vals.tolist(), "leading": quadratic_leading_coefficient(lam, ratio, a00),
                        })
    col.extra["quadratic_scaling"] = scaling
    return col.report(grid)


def _resonance_points(lam: float, n_top: int, x_max: float) -> np.ndarray:
    pts = []
    if lam <= 1.0:
        return np.zeros(0)
    for n in range(n_top + 1):
        for b in resonance.find_quasi_resonances(n + 0.5, lam, x_max):
            if b.root is not None and b.root < x_max:
                pts.append(b.root)
    return np.array(sorted(pts))


def certify_upper_farfield(
    grid: SweepGrid | None = None, tol_rel: float = TOL_REL, lam_omega_max: float = 40.0
) -> CertificateReport:
    """``sup_w ||u^s(R)||_{H^sigma} <= 2^(4/3) M (eps/R) N^sigma(u^i)`` for ``R >= M eps``.

    The frequency grid covers ``M w <= lam_omega_max`` and is enriched with
    every quasi-resonance in that range.
    """
    grid = grid or default_grid("farfield")
    col = _Collector("eq:ffield", "upper", semantics=GRID_SUP, tol_rel=tol_rel)
    col.extra["notes"] = []
    for inc in grid.incidents:
        label = _incident_label(inc)
        for lam in grid.lambdas:
            big = max(lam, 1.0)
            top = lam_omega_max / big
            n_top = _mode_top(inc, fields.truncation_order(top, lam, 1.0) + 20)
            if grid.omegas is None:
                w = np.geomspace(1e-3, top, max(2, int(grid.points_per_decade * math.log10(top / 1e-3))))
            else:
                w = np.asarray(grid.omegas, dtype=float)
            res = _resonance_points(lam, n_top, w.max())
            w = np.unique(np.concatenate([w, res]))
            shells = _shell_log2(inc, n_top)
            for ratio in grid.r_over_eps:
                if ratio < big:
                    col.rejected.append({"incident": label, "lambda": lam, "r_over_eps": ratio, "clause": "R >= max(lambda,1) eps"})
                    continue
                tab = _scattered_table(lam, w, ratio, n_top)
                for sigma in grid.sigmas:
                    nlog, note = _incident_n_sigma_log2(inc, sigma)
                    if note and note not in col.extra["notes"]:
                        col.extra["notes"].append(note)
                    log_l = _h_sigma_log2(tab, shells, sigma)
                    log_r = 4.0 / 3.0 + math.log2(big) - math.log2(ratio) + nlog
                    col.add(log_l, log_r, incident=label, **{"lambda": lam, "omega_eps": w, "r_over_eps": ratio, "sigma": sigma})
                    col.extra["max_tail_ratio"] = max(col.extra.get("max_tail_ratio", 0.0), _tail_ratio(tab, shells, sigma))
            col.extra.setdefault("resonance_points", {})[str(lam)] = int(res.size)
    return col.report(grid)


# ---------------------------------------------------------------------------
# lower bounds
# ---------------------------------------------------------------------------


def _scattered_norm_at(lam, w, ratio, sigma, incident, n_top) -> np.ndarray:
    w = np.atleast_1d(np.asarray(w, dtype=float))
    n_top = _mode_top(incident, n_top)
    tab = _scattered_table(lam, w, ratio, n_top)
    return _h_sigma_log2(tab, _shell_log2(incident, n_top), sigma)


def certify_lower_lowcontrast(
    lam: float,
    r_over_eps: float,
    sigma: float = 0.0,
    incident: IncidentField | None = None,
    depth: int | None = None,
    tol_rel: float = TOL_REL,
) -> CertificateReport:
    """``sup_w ||u^s(R)||_{H^sigma} >= (1/4)(eps/R) N^(sigma-1/6)_{n0(lam),inf}(u^i, 1)`` for ``lam < 1``.

    The supremum is taken over the witnesses ``w = n + 1/2`` with
    ``n0 <= n <= n0 + depth``; ``depth`` defaults to 10, or 2 when ``n0 > 1000``.
    """
    if not (0 < lam < 1):
        raise DomainError(f"the low-contrast lower bound requires 0 < lambda < 1, got {lam!r}")
    if not (r_over_eps >= 1):
        raise PreconditionError("the low-contrast lower bound requires R >= eps", "eps <= R")
    incident = incident or plane_wave()
    n0 = resonance.n0_threshold(lam)
    if depth is None:
        depth = 10 if n0 <= 1000 else 2
    col = _Collector("pro:lowerbounds(lambda<1)", "lower", semantics=GRID_SUP, tol_rel=tol_rel)
    witnesses = [n + 0.5 for n in range(n0, n0 + depth + 1) if incident.shell(n) > 0]
    lhs = -math.inf
    sat = []
    for x in witnesses:
        n_top = fields.truncation_order(x, lam, 1.0)
        lhs = max(lhs, float(_scattered_norm_at(lam, x, r_over_eps, sigma, incident, n_top)[0]))
        n = int(x - 0.5)
        mode = (_log2_abs_r(n, lam, np.array([x]))[0] + _log2_abs_h(specfun.jy_arrays(n, [x * r_over_eps]))[0]
                + sigma * math.log2(2 * x))
        ref = -2.0 - math.log2(r_over_eps) + (sigma - 1.0 / 6.0) * math.log2(2 * x) + math.log2(specfun.sup_spherical_j(n))
        sat.append({"n": n, "ratio": float(np.exp2(mode - ref))})
    rhs_val = float(norms.n_pq_seminorm("incident", ScatteringConfig(lam, 1.0), incident, sigma - 1.0 / 6.0, n0, math.inf, 1.0))
    log_r = -2.0 - math.log2(r_over_eps) + math.log2(rhs_val)
    col.add(lhs, log_r, **{"lambda": lam, "r_over_eps": r_over_eps, "sigma": sigma}, incident=_incident_label(incident))
    col.extra.update(n0=n0, depth=depth, witnesses=witnesses, mode_saturation=sat)
    return col.report()


def _n1(lam: float) -> tuple[int, str]:
    try:
        return resonance.n1_threshold(lam), "literal"
    except EmptySetError:
        return resonance.n1_threshold(lam, corrected=True), "corrected (literal set is empty)"


def blowup_kappa(lam: float, r_over_eps: float) -> float:
    """``(eps lam/R) exp(R/(eps lam) - 1)``, greater than 1 when ``R < lam eps``."""
    rho = r_over_eps / lam
    return math.exp(rho - 1.0) / rho


def blowup_window(q: int) -> float:
    """Upper end of the range ``0 < lam w < q + 1.86 q^(1/3) + 1.04 q^(-1/3)``."""
    return q + 1.86 * q ** (1.0 / 3.0) + 1.04 * q ** (-1.0 / 3.0)


def certify_lower_blowup(
    lam: float,
    r_over_eps: float,
    q_values=(2, 4, 8),
    sigma: float = 0.0,
    incident: IncidentField | None = None,
    tol_rel: float = TOL_REL,
) -> CertificateReport:
    """``sup ||u^s(R)||_{H^sigma} >= 2^(-7/2) N^(sigma-1/3)_{n1,q}(u^i, kappa)`` for ``lam > 1``, ``R < lam eps``.

    For each ``q`` the supremum is taken over the quasi-resonances ``x_n``
    (``n1 <= n <= q``) inside the window ``lam w < q + 1.86 q^(1/3) + 1.04 q^(-1/3)``
    together with a log grid of that window.  ``extra["trend"]`` records the
    geometric growth of the mode-``q`` reference
    ``2^(-7/2) kappa^(q+1/2-(q+1/2)^(5/6)) (2q+1)^(sigma-2/3)``.
    """
    if not (lam > 1):
        raise DomainError(f"the blow-up lower bound requires lambda > 1, got {lam!r}")
    if not (1 <= r_over_eps < lam):
        raise PreconditionError("the blow-up lower bound requires eps <= R < lambda eps", "R < eps lambda")
    incident = incident or plane_wave()
    n1, reading = _n1(lam)
    kappa = blowup_kappa(lam, r_over_eps)
    col = _Collector("eq:blowup", "lower", semantics=GRID_SUP, tol_rel=tol_rel)
    margins, trend = [], []
    for q in q_values:
        if q < n1:
            col.rejected.append({"q": q, "clause": f"q >= n1(lambda) = {n1}"})
            continue
        top = blowup_window(q) / lam
        wit = []
        for n in range(n1, q + 1):
            br = resonance.find_quasi_resonances(n + 0.5, lam, top)
            if br and br[0].root is not None and br[0].root < top:
                wit.append(br[0].root)
        w = np.unique(np.concatenate([np.array(wit), np.geomspace(top * 1e-3, top, 600, endpoint=False)]))
        n_top = fields.truncation_order(top, lam, r_over_eps)
        vals = _scattered_norm_at(lam, w, r_over_eps, sigma, incident, n_top)
        log_l = float(np.max(vals))
        rhs_val = float(norms.n_pq_seminorm("incident", ScatteringConfig(lam, 1.0), incident, sigma - 1.0 / 3.0, n1, q, kappa))
        log_r = -3.5 + math.log2(rhs_val)
        nu = q + 0.5
        log_t = -3.5 + (nu - nu ** (5.0 / 6.0)) * math.log2(kappa) + (sigma - 2.0 / 3.0) * math.log2(2 * q + 1)
        col.add(log_l, log_r, q=q, **{"lambda": lam, "r_over_eps": r_over_eps, "sigma": sigma}, incident=_incident_label(incident))
        margins.append(2.0**log_l - 2.0**log_r)
        trend.append({"q": q, "grid_sup": 2.0**log_l, "reference": 2.0**log_t, "exceeds": bool(log_l > log_t),
                      "witnesses": len(wit), "argmax_omega_eps": float(w[int(np.argmax(vals))])})
    col.extra.update(
        n1=n1, n1_reading=reading, kappa=kappa, margins=margins, trend=trend,
        margins_monotone=bool(all(b > a for a, b in zip(margins, margins[1:]))),
    )
    return col.report()


# ---------------------------------------------------------------------------
# lemma suites
# ---------------------------------------------------------------------------


def certify_lemma71(grid: SweepGrid | None = None, tol_rel: float = TOL_REL) -> CertificateReport:
    """Mode-wise bounds on ``|r_n(x, lam) h_n(x)|`` for ``n <= grid.n_max``.

    Items: ``uniform-lowom``, ``expan-perturb``, ``expan-perturb2``,
    ``expan-perturb3`` (on ``x <= 1``) and ``lowl-contrex``; the last one is a
    lower bound and is reported with its margin sign flipped, so every item
    shares the "non-negative margin passes" convention.
    """
    grid = grid or default_grid("lemma71")
    col = _Collector("lem:7.1", "upper", tol_rel=tol_rel)
    c43, c23 = 4.0 / 3.0, 2.0 / 3.0
    per_item: dict = {}

    def add(item, log_l, log_r, lam, n, x):
        col.add(log_l, log_r, item=item, **{"lambda": lam, "n": n, "x": x})
        rel = _rel_margin(log_l, log_r, "upper")
        cur = per_item.setdefault(item, {"points": 0, "worst_rel_margin": math.inf})
        cur["points"] += int(np.size(rel))
        if np.size(rel):
            cur["worst_rel_margin"] = min(cur["worst_rel_margin"], float(np.min(rel)))

    for lam in grid.lambdas:
        big = max(lam, 1.0)
        dlog = _log2(lam - 1.0)
        n0 = resonance.n0_threshold(lam) if lam < 1 else None
        for n in range(grid.n_max + 1):
            nu = n + 0.5
            ap = specfun.bessel_zero("Jprime", nu, 1)
            beta = specfun.bessel_zero("Y", nu, 1)
            ranges = {
                "uniform-lowom": min(ap / lam, beta),
                "expan-perturb": min(1.0 / lam, 1.0) * nu,
            }
            if n == 0:
                ranges["expan-perturb2"] = 0.5 / big
            else:
                ranges["expan-perturb3"] = min(nu / big, 1.0)
            for item, top in ranges.items():
                x = grid.log_grid(top)
                if item == "expan-perturb3" and top == 1.0:
                    x = np.append(x, 1.0)
                if x.size == 0:
                    continue
                b = specfun.jy_arrays(n, x)
                log_rh = (_log2_abs_r(n, lam, x) + _log2_abs_h(b)) if lam != 1.0 else np.full(x.size, -np.inf)
                lx = np.log2(x)
                if item == "uniform-lowom":
                    log_r = c43 + _log2_abs_j(b)
                elif item == "expan-perturb":
                    log_r = c43 + dlog + lx - math.log2(2 * nu) / 3.0 + _log2_abs_j(b)
                elif item == "expan-perturb2":
                    log_r = c23 + dlog + math.log2(big) + 2 * lx
                else:
                    j1 = float(_log2_abs_j(specfun.jy_arrays(n, [1.0]))[0])
                    log_r = c43 + dlog + 2 * math.log2(big) + 3 * lx - math.log2(2 * nu) / 3.0 + j1
                add(item, log_rh, log_r, lam, n, x)
            if n0 is not None and n >= n0 and lam != 1.0:
                x = np.array([nu])
                b = specfun.jy_arrays(n, x)
                log_rh = _log2_abs_r(n, lam, x) + _log2_abs_h(b)
                # strict lower bound |r h| > j/2, written as upper bound j/2 < |r h|
                add("lowl-contrex", -1.0 + _log2_abs_j(b), log_rh, lam, n, x)
    col.extra["items"] = per_item
    col.extra["restrictions"] = {"expan-perturb3": "x <= 1"}
    return col.report(grid)


def certify_hankel_lemma(grid: SweepGrid | None = None, tol_rel: float = TOL_REL) -> CertificateReport:
    """Bounds on ``sup |j_n|`` and on Hankel values away from the scatterer.

    Items: ``bdjn-lower`` (``(2 nu)^(-5/6) < sup|j_n|/(2 sin 1/2)``),
    ``bdjn-upper`` (``0.663 sup|j_n| < (2 nu)^(-5/6)``), ``bdb1`` for
    ``n0(lam) < n <= n_max`` and the radii of the grid, and ``bdb2`` for
    ``R/(lam eps) in {0.1, ..., 1}``.  All are written as ``LHS <= RHS`` so a
    non-negative relative margin means the stated inequality holds.
    """
    grid = grid or default_grid("hankel")
    col = _Collector("lem:boundhn", "upper", tol_rel=tol_rel)
    per_item: dict = {}

    def add(item, log_l, log_r, **coords):
        col.add(log_l, log_r, item=item, **coords)
        rel = _rel_margin(log_l, log_r, "upper")
        cur = per_item.setdefault(item, {"points": 0, "worst_rel_margin": math.inf, "strict": True})
        cur["points"] += int(np.size(rel))
        cur["worst_rel_margin"] = min(cur["worst_rel_margin"], float(np.min(rel)))
        cur["strict"] = cur["strict"] and bool(np.all(rel > 0))

    sups = {n: math.log2(specfun.sup_spherical_j(n)) for n in range(grid.n_max + 1)}
    for n in range(grid.n_max + 1):
        nu = n + 0.5
        ref = -5.0 / 6.0 * math.log2(2 * nu)
        add("bdjn-lower", ref, sups[n] - math.log2(2 * math.sin(0.5)), n=n)
        add("bdjn-upper", math.log2(0.663) + sups[n], ref, n=n)
    lows = sorted({resonance.n0_threshold(lam) for lam in grid.lambdas if lam < 1})
    if lows:
        for n in range(min(lows) + 1, grid.n_max + 1):
            nu = n + 0.5
            b_nu = specfun.jy_arrays(n, [nu])
            base = math.log2(0.58) - math.log2(nu) / 6.0 + float(_log2_abs_h(b_nu)[0] - _log2_abs_j(b_nu)[0]) + sups[n]
            for ratio in grid.r_over_eps:
                lhs = float(_log2_abs_h(specfun.jy_arrays(n, [nu * ratio]))[0])
                add("bdb1", base - math.log2(ratio), lhs, n=n, r_over_eps=ratio,
                    lam_min=min(lam for lam in grid.lambdas if lam < 1 and resonance.n0_threshold(lam) < n))
    for n in range(1, grid.n_max + 1):
        nu = n + 0.5
        alpha = specfun.bessel_zero("J", nu, 1)
        for rho in np.round(np.arange(1, 11) / 10.0, 12):
            kappa = math.exp(rho - 1.0) / rho
            lhs = float(_log2_abs_h(specfun.jy_arrays(n, [rho * alpha]))[0])
            rhs = -3.5 - math.log2(2 * nu) / 3.0 + (nu - nu ** (5.0 / 6.0)) * math.log2(kappa) + sups[n]
            add("bdb2", rhs, lhs, n=n, r_over_lam_eps=float(rho))
    col.extra["items"] = per_item
    return col.report(grid)


# ---------------------------------------------------------------------------
# broadband bound
# ---------------------------------------------------------------------------


def certify_broadband(
    eps: float = 1e-3,
    lam: float = 1e3,
    alpha: float = 1.0,
    r_over_eps: float | None = None,
    sigma: float = 0.0,
    incident: IncidentField | None = None,
    samples: int = 1000,
    seed: int = 0,
    n_max: int = 10,
    tol_rel: float = TOL_REL,
) -> CertificateReport:
    """Uniform bound off the excluded set: ``||u^s(R)||_{H^sigma} <= C (eps^(1/3)/R) N^(sigma+2+alpha)(u^i)``.

    ``C`` is the constant returned by :func:`resonance.broadband_excluded_set`.
    Frequencies ``sqrt(q0) omega`` are drawn uniformly from
    ``(0, (n_max + 3/2)/eps)`` outside the excluded set; every excluded
    interval of the modes ``n <= n_max`` lies in that range.  The incident
    field must not carry modes above ``n_max``.  ``R`` defaults to
    ``eps^(1/3)``.
    """
    incident = incident or plane_wave(n_max)
    lim = incident.order_limit()
    if lim is None or lim > n_max:
        raise DomainError("the broadband certificate needs an incident field with no modes above n_max")
    if r_over_eps is None:
        r_over_eps = eps ** (-2.0 / 3.0)
    if r_over_eps * eps < eps ** (1.0 / 3.0) * (1 - 1e-12):
        raise PreconditionError("the broadband bound requires R >= eps^(1/3)", "R >= eps^(1/3)")
    res = resonance.broadband_excluded_set(eps, lam, alpha, n_max)
    rng = np.random.default_rng(seed)
    top = (n_max + 1.5) / eps
    picked = np.zeros(0)
    while picked.size < samples:
        cand = rng.uniform(0.0, top, 2 * samples)
        cand = cand[(cand > 0) & ~res.intervals.contains(cand)]
        picked = np.concatenate([picked, cand])
    phys = np.sort(picked[:samples])
    w = phys * eps
    log_l = _scattered_norm_at(lam, w, r_over_eps, sigma, incident, lim)
    nlog, note = _incident_n_sigma_log2(incident, sigma + 2.0 + alpha)
    R = r_over_eps * eps
    log_r = math.log2(res.bound_constant) + math.log2(eps ** (1.0 / 3.0) / R) + nlog
    col = _Collector("thm:broadband", "upper", tol_rel=tol_rel)
    col.add(log_l, log_r, sqrt_q0_omega=phys, **{"lambda": lam, "eps": eps, "sigma": sigma})
    col.extra.update(
        regime=res.regime, bound_constant=res.bound_constant, intervals=len(res.intervals),
        measure=res.intervals.total_measure, measure_bound=res.measure_bound,
        measure_ok=bool(res.intervals.total_measure < res.measure_bound), seed=seed,
    )
    if note:
        col.extra["notes"] = [note]
    return col.report()
