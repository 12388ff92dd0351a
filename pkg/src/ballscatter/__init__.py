"""Modal analysis of time-harmonic scattering by a small penetrable ball."""

from .errors import (
    BallScatterError,
    BesselOverflow,
    DivergentSeriesError,
    DomainError,
    EmptySetError,
    PoleError,
    PreconditionError,
    UnsupportedProfileError,
)
from .fields import IncidentField, evaluate_field, modal_trace, plane_wave_coeffs
from .modal import ScatteringConfig, coefficients, reflection, transmission
from .specfun import bessel_zero, spherical_bessel

__version__ = "0.1.0"

__all__ = [
    "BallScatterError",
    "BesselOverflow",
    "DivergentSeriesError",
    "DomainError",
    "EmptySetError",
    "IncidentField",
    "PoleError",
    "PreconditionError",
    "ScatteringConfig",
    "UnsupportedProfileError",
    "bessel_zero",
    "coefficients",
    "evaluate_field",
    "modal_trace",
    "plane_wave_coeffs",
    "reflection",
    "spherical_bessel",
    "transmission",
]
