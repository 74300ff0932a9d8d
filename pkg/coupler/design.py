"""
Directional coupler design formulas

A symmetric coupler with supermode indices n_eff1 > n_eff2 exchanges power
fully over one beat length L_b. The curved sections on either side of the
straight region add partial coupling, folded into an effective length L_e.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from analysis.sweeps import SweepGrid
from utils.errors import SpecValidationError

logger = logging.getLogger(__name__)


def beat_length(wavelength: float, n_eff1: float, n_eff2: float) -> float:
    """L_b = λ / (2 (n_eff1 - n_eff2))"""
    if wavelength <= 0:
        raise SpecValidationError(f"wavelength must be positive, got {wavelength}")
    if n_eff1 <= n_eff2:
        raise SpecValidationError(f"n_eff1 ({n_eff1}) must exceed n_eff2 ({n_eff2})")
    return wavelength / (2.0 * (n_eff1 - n_eff2))


def coupling_coefficient(effective_length: float, beat: float) -> float:
    """κ² = sin²(π L_e / (2 L_b)), usable directly as a hopping probability"""
    if beat <= 0:
        raise SpecValidationError(f"beat length must be positive, got {beat}")
    if effective_length < 0:
        raise SpecValidationError(f"effective length must be non-negative, got {effective_length}")
    return math.sin(0.5 * math.pi * effective_length / beat) ** 2


@dataclass(frozen=True)
class CouplerSpec:
    """Coupler geometry, all lengths in meters"""

    wavelength: float
    n_eff1: float
    n_eff2: float
    gap: float                     # d
    straight_length: float         # L_s
    min_coupling_distance: float   # d_c
    ridge_half_width: float        # r_w
    bend_radius: float             # r_b

    def __post_init__(self) -> None:
        if self.wavelength <= 0:
            raise SpecValidationError(f"wavelength must be positive, got {self.wavelength}")
        if self.n_eff1 == self.n_eff2:
            raise SpecValidationError("n_eff1 and n_eff2 must differ")
        if self.straight_length < 0:
            raise SpecValidationError(f"straight_length must be non-negative, got {self.straight_length}")
        if self.bend_radius <= 0:
            raise SpecValidationError(f"bend_radius must be positive, got {self.bend_radius}")
        if self.gap < 0 or self.ridge_half_width < 0:
            raise SpecValidationError("gap and ridge_half_width must be non-negative")
        argument = self.arccos_argument()
        if not -1.0 <= argument <= 1.0:
            raise SpecValidationError(
                f"effective-length arccos argument {argument:.6g} outside [-1, 1] "
                f"(d={self.gap}, d_c={self.min_coupling_distance}, r_w={self.ridge_half_width}, r_b={self.bend_radius})"
            )

    def arccos_argument(self) -> float:
        separation = self.gap - 2.0 * self.ridge_half_width
        return 1.0 - (self.min_coupling_distance - separation) / (2.0 * self.bend_radius + 2.0 * self.ridge_half_width)

    def with_gap(self, gap: float, straight_length: float) -> CouplerSpec:
        return CouplerSpec(
            wavelength=self.wavelength,
            n_eff1=self.n_eff1,
            n_eff2=self.n_eff2,
            gap=gap,
            straight_length=straight_length,
            min_coupling_distance=self.min_coupling_distance,
            ridge_half_width=self.ridge_half_width,
            bend_radius=self.bend_radius,
        )


def effective_length(spec: CouplerSpec) -> float:
    """L_e = L_s + 2 r_b arccos(1 - (d_c - (d - 2 r_w)) / (2 r_b + 2 r_w))"""
    return spec.straight_length + 2.0 * spec.bend_radius * math.acos(spec.arccos_argument())


def coupler_coupling(spec: CouplerSpec) -> float:
    """κ² of a fully specified coupler"""
    return coupling_coefficient(effective_length(spec), beat_length(spec.wavelength, spec.n_eff1, spec.n_eff2))


def free_spectral_range(wavelength: float, group_index: float, radius: float) -> float:
    """FSR = λ² / (n_g 2π r), in meters of wavelength"""
    if wavelength <= 0 or group_index <= 0 or radius <= 0:
        raise SpecValidationError("wavelength, group_index and radius must be positive")
    return wavelength ** 2 / (group_index * 2.0 * math.pi * radius)


def coupling_table(
    spec: CouplerSpec,
    gaps: Sequence[float],
    straight_lengths: Sequence[float],
    delta_n: Sequence[float],
) -> SweepGrid:
    """
    κ² over (gap, straight length)

    The index splitting depends on the gap through mode solving, so Δn is
    supplied per gap; n_eff2 is taken as n_eff1 - Δn.
    """
    if len(gaps) != len(delta_n):
        raise SpecValidationError(f"{len(gaps)} gaps need as many Δn values, got {len(delta_n)}")
    if not gaps or not straight_lengths:
        raise SpecValidationError("coupling table needs at least one gap and one straight length")
    values = np.empty((len(gaps), len(straight_lengths)))
    for i, (gap, dn) in enumerate(zip(gaps, delta_n)):
        beat = beat_length(spec.wavelength, spec.n_eff1, spec.n_eff1 - dn)
        for j, length in enumerate(straight_lengths):
            values[i, j] = coupling_coefficient(effective_length(spec.with_gap(gap, length)), beat)
    logger.info(f"Coupling table computed for {len(gaps)} gap(s) x {len(straight_lengths)} length(s)")
    return SweepGrid(
        axis1_name='gap',
        axis1_values=np.asarray(gaps, dtype=float),
        axis2_name='straight_length',
        axis2_values=np.asarray(straight_lengths, dtype=float),
        metric='kappa^2',
        values=values,
        fixed={
            'wavelength': spec.wavelength,
            'n_eff1': spec.n_eff1,
            'delta_n': [float(dn) for dn in delta_n],
            'min_coupling_distance': spec.min_coupling_distance,
            'ridge_half_width': spec.ridge_half_width,
            'bend_radius': spec.bend_radius,
        },
    )
