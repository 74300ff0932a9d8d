"""
Conversion of physical ring geometry into walk parameters

Round-trip phase, round-trip loss and the duration of one walk step (one
half-ring traversal). Effective indices are inputs: no mode solving and no
dispersion model, n_eff is taken as wavelength independent for a run.
"""
import logging
import math

from scipy.constants import c as SPEED_OF_LIGHT  # 299 792 458 m/s, exact SI value

from utils.errors import SpecValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise SpecValidationError(f"{name} must be positive, got {value}")


def _require_non_negative(**values: float) -> None:
    for name, value in values.items():
        if not value >= 0:
            raise SpecValidationError(f"{name} must be non-negative, got {value}")


def phase_from_geometry(radius: float, n_eff: float, wavelength: float, reduce: bool = False) -> float:
    """
    Round-trip phase θ = 2π n_eff L / λ with L = 2πr

    Args:
        radius: ring radius in meters
        n_eff: effective refractive index
        wavelength: vacuum wavelength in meters
        reduce: return θ mod 2π instead of the raw phase

    Returns:
        Phase in radians (unreduced unless requested)
    """
    _require_positive(radius=radius, n_eff=n_eff, wavelength=wavelength)
    theta = TWO_PI * n_eff * (TWO_PI * radius) / wavelength
    return principal_phase(theta) if reduce else theta


def principal_phase(theta: float) -> float:
    """θ reduced to [0, 2π)"""
    return math.fmod(theta, TWO_PI) % TWO_PI


def loss_from_geometry(absorption: float, bending_loss: float, length: float, coupler_length: float = 0.0) -> float:
    """
    Round-trip transmission α = exp(-(α_t (L + L_c) + α_b L))

    Args:
        absorption: material absorption α_t in 1/m
        bending_loss: bending loss α_b in 1/m
        length: ring circumference L in meters
        coupler_length: racetrack coupler length L_c in meters

    Returns:
        Dimensionless transmission in (0, 1]
    """
    _require_non_negative(absorption=absorption, bending_loss=bending_loss, coupler_length=coupler_length)
    _require_positive(length=length)
    return math.exp(-(absorption * (length + coupler_length) + bending_loss * length))


def half_ring_time(radius: float, n_eff: float) -> float:
    """Duration Δt = π r n_eff / c of one walk step, in seconds"""
    _require_positive(radius=radius, n_eff=n_eff)
    return math.pi * radius * n_eff / SPEED_OF_LIGHT
