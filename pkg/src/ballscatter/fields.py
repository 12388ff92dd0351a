"""Modal series for the incident, scattered and transmitted fields.

Fields are written on the harmonics ``Z_n^m = sqrt(4 pi) Y_n^m``, which have
unit mean square on the sphere::

    incident     u^i = sum a_{n,m} j_n(w R/eps) Z_n^m
    scattered    u^s = sum a_{n,m} r_n h_n(w R/eps) Z_n^m      (R >= eps)
    transmitted  u^t = sum a_{n,m} t_n j_n(lam w R/eps) Z_n^m  (R < eps)

with ``w = omega_eps``.  Norms of traces are taken against the normalised
surface measure ``dS/(4 pi R^2)``, so they are plain weighted sums of
``|a_{n,m}|^2``.  Plane waves use ``a_{n,m} = sqrt(4 pi) i^n conj(Y_n^m(zeta))``,
i.e. ``a_{n,0} = i^n sqrt(2n+1)`` for ``zeta = z``; the series is exactly
``exp(i kappa zeta.x)``, equals 1 at the origin and has unit ``H^0`` trace norm
because ``sum_n (2n+1) j_n^2 = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import modal, specfun
from .errors import DomainError
from .modal import ScatteringConfig

__all__ = [
    "FieldSample",
    "IncidentField",
    "ModalTrace",
    "TailModel",
    "evaluate_field",
    "modal_trace",
    "plane_wave_coeffs",
    "plane_wave_shell_sum",
    "spherical_harmonic",
    "truncation_order",
    "ylm_table",
]

FIELD_KINDS = ("incident", "scattered", "transmitted")


# ---------------------------------------------------------------------------
# spherical harmonics
# ---------------------------------------------------------------------------


def _legendre_normalised(n_max: int, m: int, theta: float) -> np.ndarray:
    """``sqrt((2n+1)/4pi (n-m)!/(n+m)!) P_n^m(cos theta)`` for ``n = m .. n_max`` (``m >= 0``)."""
    c, s = math.cos(theta), math.sin(theta)
    out = np.zeros(n_max - m + 1)
    # P_m^m with the Condon-Shortley phase, accumulated in log form
    log_pmm = 0.5 * math.log((2 * m + 1) / (4 * math.pi))
    for k in range(1, m + 1):
        log_pmm += 0.5 * math.log((2 * k - 1) / (2 * k))
    if m > 0:
        if s == 0.0:
            return out
        log_pmm += m * math.log(abs(s))
    pmm = (-1) ** m * math.exp(log_pmm)
    out[0] = pmm
    if n_max == m:
        return out
    out[1] = math.sqrt(2 * m + 3) * c * pmm
    for n in range(m + 2, n_max + 1):
        a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
        b = math.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
        out[n - m] = a * (c * out[n - m - 1] - b * out[n - m - 2])
    return out


def spherical_harmonic(n: int, m: int, theta: float, phi: float) -> complex:
    """Orthonormal ``Y_n^m(theta, phi)`` with the Condon-Shortley phase.

    ``Y_n^{-m} = (-1)^m conj(Y_n^m)``.
    """
    if int(n) != n or n < 0 or int(m) != m or abs(m) > n:
        raise DomainError(f"spherical_harmonic requires |m| <= n, got n={n!r}, m={m!r}")
    n, m = int(n), int(m)
    mm = abs(m)
    val = _legendre_normalised(n, mm, theta)[n - mm] * complex(math.cos(mm * phi), math.sin(mm * phi))
    if m < 0:
        val = (-1) ** mm * val.conjugate()
    return val


def ylm_table(n_max: int, theta: float, phi: float) -> np.ndarray:
    """All ``Y_n^m`` at one direction, as an array ``[n, m + n_max]``."""
    out = np.zeros((n_max + 1, 2 * n_max + 1), dtype=complex)
    for m in range(0, n_max + 1):
        p = _legendre_normalised(n_max, m, theta)
        e = complex(math.cos(m * phi), math.sin(m * phi))
        out[m:, n_max + m] = p * e
        if m > 0:
            out[m:, n_max - m] = (-1) ** m * np.conj(p * e)
    return out


# ---------------------------------------------------------------------------
# incident fields
# ---------------------------------------------------------------------------


def _direction_angles(zeta) -> tuple[float, float]:
    z = np.asarray(zeta, dtype=float)
    if z.shape != (3,) or not np.all(np.isfinite(z)):
        raise DomainError("plane-wave direction must be a finite 3-vector")
    norm = float(np.linalg.norm(z))
    if abs(norm - 1.0) > 1e-9:
        raise DomainError(f"plane-wave direction must be a unit vector, |zeta| = {norm!r}")
    z = z / norm
    theta = math.acos(max(-1.0, min(1.0, z[2])))
    phi = math.atan2(z[1], z[0]) % (2 * math.pi)
    return theta, phi


@dataclass(frozen=True)
class IncidentField:
    """Incident-field coefficients ``a_{n,m}``.

    A plane wave (``direction`` set, ``n_max`` None) is infinite and expanded
    on demand; a modal field stores its finite table.
    """

    coeffs: dict = field(default_factory=dict)
    direction: tuple | None = None
    n_max: int | None = None

    @property
    def is_plane_wave(self) -> bool:
        return self.direction is not None

    @property
    def is_finite(self) -> bool:
        return self.n_max is not None

    def order_limit(self) -> int | None:
        if self.is_plane_wave:
            return self.n_max
        return max((n for n, _ in self.coeffs), default=0)

    def table(self, n_max: int) -> np.ndarray:
        """Coefficients ``a[n, m + n_max]`` for ``n <= n_max``."""
        out = np.zeros((n_max + 1, 2 * n_max + 1), dtype=complex)
        if self.is_plane_wave:
            top = n_max if self.n_max is None else min(n_max, self.n_max)
            theta, phi = _direction_angles(self.direction)
            y = ylm_table(top, theta, phi)
            phase = np.array([1j**n for n in range(top + 1)])
            out[: top + 1, n_max - top : n_max + top + 1] = math.sqrt(4 * math.pi) * phase[:, None] * np.conj(y)
            return out
        for (n, m), a in self.coeffs.items():
            if n <= n_max:
                out[n, m + n_max] = a
        return out

    def shell(self, n: int) -> float:
        """``sqrt(sum_m |a_{n,m}|^2)``."""
        if self.is_plane_wave:
            if self.n_max is not None and n > self.n_max:
                return 0.0
            return math.sqrt(2 * n + 1)
        return math.sqrt(sum(abs(a) ** 2 for (k, _), a in self.coeffs.items() if k == n))

    def truncated(self, n_max: int) -> "IncidentField":
        if self.is_plane_wave:
            top = n_max if self.n_max is None else min(n_max, self.n_max)
            return IncidentField(direction=self.direction, n_max=top)
        return IncidentField({k: v for k, v in self.coeffs.items() if k[0] <= n_max}, n_max=n_max)

    def lowest_order(self) -> int:
        """Smallest ``n`` with a nonzero shell."""
        if self.is_plane_wave:
            return 0
        nz = [n for (n, _), a in self.coeffs.items() if a != 0]
        if not nz:
            raise DomainError("incident field has no nonzero coefficient")
        return min(nz)

    @classmethod
    def modal(cls, coeffs: dict) -> "IncidentField":
        clean = {}
        for (n, m), a in coeffs.items():
            if int(n) != n or n < 0 or int(m) != m or abs(m) > n:
                raise DomainError(f"invalid mode index (n={n!r}, m={m!r})")
            a = complex(a)
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise DomainError("incident coefficients must be finite")
            clean[(int(n), int(m))] = a
        n_max = max((n for n, _ in clean), default=0)
        return cls(clean, n_max=n_max)

    @classmethod
    def from_json(cls, doc) -> "IncidentField":
        """Parse ``{"kind": "plane_wave", "direction": [...]}`` or ``{"kind": "modal", "coeffs": [...]}``."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        if not isinstance(doc, dict) or "kind" not in doc:
            raise DomainError("incident document must be an object with a 'kind' key")
        kind = doc["kind"]
        if kind == "plane_wave":
            extra = set(doc) - {"kind", "direction", "n_max"}
            if extra:
                raise DomainError(f"unknown keys in plane_wave document: {sorted(extra)}")
            zeta = tuple(float(c) for c in doc["direction"])
            _direction_angles(zeta)
            return plane_wave_coeffs(zeta, doc.get("n_max"))
        if kind == "modal":
            extra = set(doc) - {"kind", "coeffs"}
            if extra:
                raise DomainError(f"unknown keys in modal document: {sorted(extra)}")
            coeffs = {}
            for entry in doc["coeffs"]:
                if set(entry) != {"n", "m", "re", "im"}:
                    raise DomainError("each modal coefficient needs exactly n, m, re, im")
                key = (entry["n"], entry["m"])
                coeffs[key] = coeffs.get(key, 0) + complex(entry["re"], entry["im"])
            return cls.modal(coeffs)
        raise DomainError(f"unknown incident kind {kind!r}")

    def to_json(self) -> dict:
        if self.is_plane_wave:
            doc = {"kind": "plane_wave", "direction": list(self.direction)}
            if self.n_max is not None:
                doc["n_max"] = self.n_max
            return doc
        return {
            "kind": "modal",
            "coeffs": [{"n": n, "m": m, "re": a.real, "im": a.imag} for (n, m), a in sorted(self.coeffs.items())],
        }


def plane_wave_coeffs(zeta, n_max: int | None = None) -> IncidentField:
    """Plane wave travelling along the unit vector ``zeta``.

    ``n_max=None`` keeps the full (infinite) expansion, evaluated lazily.
    """
    _direction_angles(zeta)
    if n_max is not None and (int(n_max) != n_max or n_max < 0):
        raise DomainError("n_max must be a non-negative integer")
    return IncidentField(direction=tuple(float(c) for c in zeta), n_max=None if n_max is None else int(n_max))


# ---------------------------------------------------------------------------
# traces and truncation
# ---------------------------------------------------------------------------


def truncation_order(x: float, lam: float = 1.0, r_over_eps: float = 1.0) -> int:
    """Series cut-off ``ceil(max(lam,1) x R/eps) + max(15, ceil(8 (x R/eps)^(1/3)))``."""
    arg = x * r_over_eps
    return int(math.ceil(max(lam, 1.0) * arg)) + max(15, int(math.ceil(8.0 * arg ** (1.0 / 3.0))))


@dataclass(frozen=True)
class TailModel:
    """Bound ``|radial_n| <= amp * (2n+1)^(-power) * x^n / (2n+1)!!`` for ``n > start``.

    ``amp`` may depend on ``n`` only through a factor that decreases in ``n``;
    the value stored is the one at ``start + 1``.  ``shells`` lists
    ``sqrt(sum_m |a_{n,m}|^2)`` for the omitted modes of a finite incident
    field; ``None`` means a full plane wave (shell ``sqrt(2n+1)`` for all n).
    """

    x: float
    amp: float
    power: float
    start: int
    shells: tuple | None = ()

    def _log_profile_sq(self, n: int) -> float:
        if self.amp == 0.0 or self.x == 0.0:
            return -math.inf
        log_df = math.lgamma(2 * n + 2) - n * math.log(2.0) - math.lgamma(n + 1)
        return 2 * math.log(self.amp) - 2 * self.power * math.log(2 * n + 1) + 2 * n * math.log(self.x) - 2 * log_df

    def squared_tail(self, sigma: float) -> float:
        """Bound on ``sum_{n > start} (2n+1)^(2 sigma) sum_m |a_{n,m} radial_n|^2``."""
        if self.shells is None:
            return self._geometric(2 * sigma + 1.0, squared=True)
        return math.fsum(
            c * c * math.exp(2 * sigma * math.log(2 * n + 1) + self._log_profile_sq(n))
            for n, c in enumerate(self.shells, start=self.start + 1)
            if c > 0
        )

    def pointwise_tail(self) -> float:
        """Bound on ``sum_{n > start} |sum_m a_{n,m} radial_n Z_n^m|``."""
        # |sum_m a Z| <= shell * sqrt(2n+1)
        if self.shells is None:
            return self._geometric(2.0, squared=False)
        return math.fsum(
            c * math.sqrt(2 * n + 1) * math.exp(0.5 * self._log_profile_sq(n))
            for n, c in enumerate(self.shells, start=self.start + 1)
            if c > 0
        )

    def _geometric(self, weight: float, squared: bool) -> float:
        """Sum of ``((2n+1)^weight profile_n^2)^(1 or 1/2)`` over ``n > start``."""
        expo = max(0.0, weight - 2 * self.power)

        def ratio_at(n):
            r2 = ((2 * n + 3) / (2 * n + 1)) ** expo * (self.x / (2 * n + 3)) ** 2
            return r2 if squared else math.sqrt(r2)

        def term(n):
            lt = weight * math.log(2 * n + 1) + self._log_profile_sq(n)
            return math.exp(lt if squared else 0.5 * lt)

        if self.amp == 0.0 or self.x == 0.0:
            return 0.0
        n = self.start + 1
        head = []
        # the term ratio decreases in n; sum directly until it is below 1/2
        while ratio_at(n) >= 0.5:
            head.append(term(n))
            n += 1
        return math.fsum(head) + term(n) / (1.0 - ratio_at(n))


@dataclass(frozen=True)
class ModalTrace:
    """Per-mode coefficients ``f_{n,m}(R)`` of one field on the sphere ``|x| = R``."""

    kind: str
    R: float
    n_max: int
    coeffs: np.ndarray  # [n, m + n_max]
    radial: np.ndarray  # [n]
    tail: TailModel

    def shell(self) -> np.ndarray:
        """``sqrt(sum_m |f_{n,m}|^2)`` per ``n``."""
        return np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=1))


def _radial_factors(kind: str, cfg: ScatteringConfig, n_max: int, R: float) -> np.ndarray:
    """Radial profile value of every mode ``n <= n_max`` at radius ``R``."""
    w = cfg.omega_eps
    x = w * R / cfg.eps
    out = np.zeros(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        if kind == "incident":
            if R == 0.0:
                out[n] = 1.0 if n == 0 else 0.0
                continue
            b = specfun.jy_arrays(n, [x])
            out[n] = math.ldexp(float(b.j[0]), int(b.je[0]))
        elif kind == "scattered":
            r_m, r_e, _, _ = modal.scaled_coefficient_arrays(n, cfg.lam, w)
            b = specfun.jy_arrays(n, [x])
            out[n] = _scaled_product(r_m[0], int(r_e[0]), b)
        else:
            _, _, t_m, t_e = modal.scaled_coefficient_arrays(n, cfg.lam, w)
            if R == 0.0:
                out[n] = modal._cldexp(t_m, t_e)[0] if n == 0 else 0.0
                continue
            b = specfun.jy_arrays(n, [cfg.lam * x])
            val = t_m[0] * float(b.j[0])
            out[n] = complex(_ldexp(val.real, int(t_e[0] + b.je[0])), _ldexp(val.imag, int(t_e[0] + b.je[0])))
    return out


def _ldexp(m: float, e: int) -> float:
    return specfun._ldexp_safe(float(m), int(e))


def _scaled_product(r_m: complex, r_e: int, b: specfun.JY) -> complex:
    """``(r_m 2^r_e) (j + i y)`` without intermediate overflow."""
    j, je, y, ye = float(b.j[0]), int(b.je[0]), float(b.y[0]), int(b.ye[0])
    re = _ldexp(r_m.real * j, r_e + je) - _ldexp(r_m.imag * y, r_e + ye)
    im = _ldexp(r_m.real * y, r_e + ye) + _ldexp(r_m.imag * j, r_e + je)
    return complex(re, im)


def _tail_model(kind: str, cfg: ScatteringConfig, incident: IncidentField, R: float, n_max: int) -> TailModel:
    w = cfg.omega_eps
    lim = incident.order_limit()
    if lim is None:
        shells = None
    else:
        shells = tuple(incident.shell(n) for n in range(n_max + 1, lim + 1))
    nu = n_max + 1.5
    if kind == "incident":
        return TailModel(w * R / cfg.eps, 1.0, 0.0, n_max, shells)
    perturb = 2 ** (4 / 3) * abs(cfg.lam - 1.0) * w
    if (shells is None or any(shells)) and max(cfg.lam, 1.0) * w >= nu:
        raise DomainError("truncation order is below the turning point; no tail bound available")
    if kind == "scattered":
        # |r_n h_n(wR/eps)| <= (eps/R) |r_n h_n(w)| <= (eps/R) 2^(4/3)|lam-1| w (2nu)^(-1/3) j_n(w)
        return TailModel(w, cfg.eps / R * perturb, 1.0 / 3.0, n_max, shells)
    # |t_n j_n(lam w R/eps)| <= |t_n| j_n(lam w) <= j_n(w) + |r_n h_n(w)|
    return TailModel(w, 1.0 + perturb / (2 * nu) ** (1.0 / 3.0), 0.0, n_max, shells)


def _check_radius(kind: str, cfg: ScatteringConfig, R: float):
    if kind not in FIELD_KINDS:
        raise DomainError(f"unknown field kind {kind!r}")
    if not (R >= 0) or not math.isfinite(R):
        raise DomainError(f"radius must be non-negative, got {R!r}")
    if kind == "scattered" and R < cfg.eps:
        if R == 0.0:
            raise DomainError("the scattered field is singular at the origin")
        raise DomainError("the scattered series represents the field only for R >= eps")
    if kind == "transmitted" and R >= cfg.eps:
        raise DomainError("the transmitted field is defined only for R < eps")


def _default_order(kind, cfg, incident, R, n_max):
    lim = incident.order_limit()
    if n_max is None:
        if lim is not None and not incident.is_plane_wave:
            return int(lim)
        n_max = truncation_order(cfg.omega_eps, cfg.lam, max(R, cfg.eps) / cfg.eps)
    if lim is not None:
        n_max = min(n_max, lim)
    return int(n_max)


def modal_trace(
    field_kind: str, cfg: ScatteringConfig, incident: IncidentField, R: float, n_max: int | None = None
) -> ModalTrace:
    """Trace coefficients ``f_{n,m}(R)`` of the chosen field.

    Parameters
    ----------
    field_kind : {"incident", "scattered", "transmitted"}
    cfg : ScatteringConfig
    incident : IncidentField
    R : float
        Radius, in the same unit as ``cfg.eps``.
    n_max : int, optional
        Truncation order; defaults to :func:`truncation_order`.
    """
    _check_radius(field_kind, cfg, R)
    n_max = _default_order(field_kind, cfg, incident, R, n_max)
    a = incident.table(n_max)
    radial = _radial_factors(field_kind, cfg, n_max, R)
    return ModalTrace(field_kind, R, n_max, a * radial[:, None], radial, _tail_model(field_kind, cfg, incident, R, n_max))


@dataclass(frozen=True)
class FieldSample:
    location: tuple
    value: complex
    tail_bound: float
    n_max: int


def evaluate_field(
    field_kind: str, cfg: ScatteringConfig, incident: IncidentField, location, n_max: int | None = None
) -> FieldSample:
    """Evaluate a field at ``location = (R, theta, phi)``.

    The returned ``tail_bound`` bounds the omitted modes ``n > n_max``.
    """
    R, theta, phi = (float(c) for c in location)
    trace = modal_trace(field_kind, cfg, incident, R, n_max)
    y = math.sqrt(4 * math.pi) * ylm_table(trace.n_max, theta, phi)
    per_mode = np.sum(trace.coeffs * y, axis=1)
    value = complex(math.fsum(per_mode.real), math.fsum(per_mode.imag))
    return FieldSample((R, theta, phi), value, trace.tail.pointwise_tail(), trace.n_max)


def plane_wave_shell_sum(x: float, n_max: int | None = None) -> float:
    """``sum_{n <= n_max} (2n+1) j_n(x)^2`` (equals 1 in the limit)."""
    if n_max is None:
        n_max = truncation_order(x)
    terms = []
    for n in range(n_max + 1):
        b = specfun.jy_arrays(n, [x])
        terms.append((2 * n + 1) * _ldexp(float(b.j[0]), int(b.je[0])) ** 2)
    return math.fsum(terms)
