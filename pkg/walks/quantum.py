"""
Quantum random walk: coherent amplitude evolution, closed-form steady
amplitudes for one and two rings, the amplitude path-sum oracle and the
classical-to-quantum substitution rules

Complex square roots follow one rule: γ^{1/2} = α^{1/2} e^{iθ/2} with the
unreduced θ halved. k_i, t_i and α are non-negative reals, so no other branch
choice arises.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from chain.builder import build_chain, quantum_transfer_matrix
from chain.models import QUANTUM, RingChainSpec
from utils.errors import SpecValidationError
from walks.base import BaseWalk
from walks.classical import DEGENERATE_DENOMINATOR, _check_probabilities

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12


@dataclass(frozen=True)
class RoundTripFactor:
    """γ = α e^{iθ} acquired per ring round trip"""

    alpha: float = 1.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise SpecValidationError(f"|γ| = α must lie in (0, 1], got {self.alpha}")

    @property
    def value(self) -> complex:
        return self.alpha * cmath.exp(1j * self.theta)

    @property
    def half(self) -> complex:
        return math.sqrt(self.alpha) * cmath.exp(0.5j * self.theta)

    @property
    def lossless(self) -> bool:
        return self.alpha == 1.0


@dataclass(frozen=True)
class AmplitudeResult:
    """Cumulative Drop/Thru amplitudes and their probabilities"""

    a_drop: complex
    a_thru: complex

    @property
    def p_drop(self) -> float:
        return abs(self.a_drop) ** 2

    @property
    def p_thru(self) -> float:
        return abs(self.a_thru) ** 2


class QuantumWalk(BaseWalk):
    """
    Amplitude walk on the complex transition matrix

    Absorbing nodes accumulate amplitude coherently, so p^D(n) = |a_D(n)|².
    The transient weight is the amplitude norm ‖a‖₂ of the non-absorbing
    nodes, which never increases.
    """

    kind = QUANTUM
    dtype = complex

    @classmethod
    def from_spec(cls, spec: RingChainSpec) -> QuantumWalk:
        return cls(quantum_transfer_matrix(build_chain(spec)))

    def validate_initial(self, values: np.ndarray) -> None:
        norm = np.linalg.norm(values)
        if norm > 1.0 + NORM_TOL:
            raise SpecValidationError(f"initial amplitude norm {norm} exceeds 1")

    def weight(self, values: np.ndarray) -> float:
        return float(np.linalg.norm(values))

    def amplitudes(self, state) -> AmplitudeResult:
        return AmplitudeResult(
            a_drop=complex(state[self.graph.drop_index]),
            a_thru=complex(state[self.graph.thru_index]),
        )


def steady_amplitudes_single(k1: float, k2: float, gamma: RoundTripFactor) -> AmplitudeResult:
    """
    Steady-state amplitudes for one ring

        a_D = -(k1 k2)^{1/2} γ^{1/2} / (1 - (t1 t2)^{1/2} γ)
        a_T = (t1^{1/2} - t2^{1/2} γ) / (1 - (t1 t2)^{1/2} γ)

    The 0/0 case k1 = k2 = 0 with γ = 1 resolves to (0, 1).
    """
    _check_probabilities(k1=k1, k2=k2)
    t1, t2 = 1.0 - k1, 1.0 - k2
    g = gamma.value
    denominator = 1.0 - math.sqrt(t1 * t2) * g
    if abs(denominator) <= DEGENERATE_DENOMINATOR:
        logger.warning(f"Degenerate single-ring amplitude denominator (k1={k1}, k2={k2}); using t -> 1 limit")
        return AmplitudeResult(a_drop=0j, a_thru=1 + 0j)
    a_drop = -math.sqrt(k1 * k2) * gamma.half / denominator
    a_thru = (math.sqrt(t1) - math.sqrt(t2) * g) / denominator
    return AmplitudeResult(a_drop=complex(a_drop), a_thru=complex(a_thru))


def steady_amplitudes_double(
    k1: float, k2: float, k3: float, gamma1: RoundTripFactor, gamma2: RoundTripFactor
) -> AmplitudeResult:
    """
    Steady-state amplitudes for two series-coupled rings

    The Thru numerator t1^{1/2} - t2^{1/2} γ1 - (t1 t2 t3)^{1/2} γ2 + t3^{1/2} γ1 γ2
    is the one that solves the two-ring chain; its third term carries γ2.
    Vanishing denominators fall back to the direct chain solution.
    """
    _check_probabilities(k1=k1, k2=k2, k3=k3)
    t1, t2, t3 = 1.0 - k1, 1.0 - k2, 1.0 - k3
    g1, g2 = gamma1.value, gamma2.value
    denominator = 1.0 - math.sqrt(t3 * t2) * g2 - math.sqrt(t2 * t1) * g1 + math.sqrt(t3 * t1) * g1 * g2
    if abs(denominator) <= DEGENERATE_DENOMINATOR:
        logger.warning(f"Degenerate two-ring amplitude denominator (k={k1},{k2},{k3}); solving chain directly")
        spec = RingChainSpec(
            num_rings=2,
            couplings=(k1, k2, k3),
            loss_per_round=(gamma1.alpha, gamma2.alpha),
            phases=(gamma1.theta, gamma2.theta),
        )
        walk = QuantumWalk.from_spec(spec)
        return walk.amplitudes(walk.absorption_solve())
    a_drop = -math.sqrt(k1 * k2 * k3) * gamma1.half * gamma2.half / denominator
    a_thru = (
        math.sqrt(t1) - math.sqrt(t2) * g1 - math.sqrt(t1 * t2 * t3) * g2 + math.sqrt(t3) * g1 * g2
    ) / denominator
    return AmplitudeResult(a_drop=complex(a_drop), a_thru=complex(a_thru))


def steady_amplitudes(spec: RingChainSpec) -> AmplitudeResult:
    """Dispatch to the one- or two-ring closed form"""
    factors = [RoundTripFactor(a, th) for a, th in zip(spec.loss_per_round, spec.phases)]
    if spec.num_rings == 1:
        return steady_amplitudes_single(*spec.couplings, factors[0])
    if spec.num_rings == 2:
        return steady_amplitudes_double(*spec.couplings, *factors)
    raise SpecValidationError(f"no closed form for {spec.num_rings} rings")


def drop_probability_single(k1: float, k2: float, alpha: float, theta) -> np.ndarray:
    """
    |a_D|² for one ring, vectorised over θ

    Equals k1 k2 α / (1 + t1 t2 α² - 2 (t1 t2)^{1/2} α cos θ); the 0/0 point
    resolves to 0.
    """
    t1, t2 = 1.0 - k1, 1.0 - k2
    theta = np.asarray(theta, dtype=float)
    denominator = 1.0 + t1 * t2 * alpha ** 2 - 2.0 * math.sqrt(t1 * t2) * alpha * np.cos(theta)
    numerator = np.full_like(theta, k1 * k2 * alpha)
    return np.divide(numerator, denominator, out=np.zeros_like(theta), where=denominator > DEGENERATE_DENOMINATOR)


def intensity_closed_form_single(k1: float, k2: float, alpha: float, theta: float) -> tuple[float, float]:
    """
    Drop and Thru intensity ratios in the form used for electrodynamic
    steady-state intensities

        I_D/I_0 = k1 k2 α^{1/2} / (1 + t1 t2 α - 2 (t1 t2)^{1/2} α cos θ)
        I_T/I_0 = (t1 + t2 α - 2 (t1 t2)^{1/2} α cos θ) / (same)

    Identical to |a_D|², |a_T|² when α = 1; with loss it applies the loss
    factor per round trip in intensity instead of amplitude.
    """
    _check_probabilities(k1=k1, k2=k2)
    t1, t2 = 1.0 - k1, 1.0 - k2
    denominator = 1.0 + t1 * t2 * alpha - 2.0 * math.sqrt(t1 * t2) * alpha * math.cos(theta)
    if denominator <= DEGENERATE_DENOMINATOR:
        return 0.0, 1.0
    return (
        k1 * k2 * math.sqrt(alpha) / denominator,
        (t1 + t2 * alpha - 2.0 * math.sqrt(t1 * t2) * alpha * math.cos(theta)) / denominator,
    )


def path_sum_amplitude_oracle(spec: RingChainSpec, steps: int) -> AmplitudeResult:
    """
    Cumulative a_D(n), a_T(n) for one ring as truncated geometric series in
    (t1 t2)^{1/2} γ
    """
    if spec.num_rings != 1:
        raise SpecValidationError(f"amplitude path sum covers a single ring, got {spec.num_rings}")
    if steps < 0:
        raise SpecValidationError(f"steps must be non-negative, got {steps}")
    k1, k2 = spec.couplings
    t1, t2 = 1.0 - k1, 1.0 - k2
    gamma = RoundTripFactor(spec.loss_per_round[0], spec.phases[0])
    ratio = math.sqrt(t1 * t2) * gamma.value
    # Drop arrivals at n = 2, 4, ...
    a_drop = sum(-math.sqrt(k1 * k2) * gamma.half * ratio ** m for m in range(steps // 2))
    # Thru: t1^{1/2} at n = 1, then -k1 t2^{1/2} γ ratio^m at n = 3, 5, ...
    a_thru = math.sqrt(t1) if steps >= 1 else 0.0
    a_thru += sum(-k1 * math.sqrt(t2) * gamma.value * ratio ** m for m in range((steps - 1) // 2))
    return AmplitudeResult(a_drop=complex(a_drop), a_thru=complex(a_thru))


@dataclass(frozen=True)
class PathFactors:
    """
    Single-ring closed forms written per path factor

    k_in: P0 -> ring, k_out: ring -> Thru, k_drop: ring -> Drop, t_direct:
    P0 -> Thru, t1/t2: in-ring hops at couplers 1/2, round_trip / half_trip:
    per-ring loss (classical α, α^{1/2}; quantum γ, γ^{1/2}).
    """

    k_in: complex
    k_out: complex
    k_drop: complex
    t_direct: complex
    t1: complex
    t2: complex
    round_trip: complex
    half_trip: complex

    def drop(self) -> complex:
        return self.k_in * self.k_drop * self.half_trip / (1.0 - self.t1 * self.t2 * self.round_trip)

    def thru(self) -> complex:
        loop = self.t1 * self.t2 * self.round_trip
        return self.t_direct + self.k_in * self.k_out * self.t2 * self.round_trip / (1.0 - loop)


def classical_path_factors(k1: float, k2: float, alpha: float) -> PathFactors:
    t1, t2 = 1.0 - k1, 1.0 - k2
    return PathFactors(
        k_in=k1, k_out=k1, k_drop=k2, t_direct=t1, t1=t1, t2=t2,
        round_trip=alpha, half_trip=math.sqrt(alpha),
    )


def classical_to_quantum_substitution(
    factors: PathFactors, theta: float, input_phase: float = math.pi
) -> PathFactors:
    """
    Replace probabilities by amplitudes in a classical closed form

    k_i -> k_i^{1/2} e^{iφ_i}, t_i -> t_i^{1/2}, α -> γ = α e^{iθ}. Only the
    input coupling carries a phase (φ = π); every other φ_i is zero.
    """
    return PathFactors(
        k_in=cmath.sqrt(factors.k_in) * cmath.exp(1j * input_phase),
        k_out=cmath.sqrt(factors.k_out),
        k_drop=cmath.sqrt(factors.k_drop),
        t_direct=cmath.sqrt(factors.t_direct),
        t1=cmath.sqrt(factors.t1),
        t2=cmath.sqrt(factors.t2),
        round_trip=factors.round_trip * cmath.exp(1j * theta),
        half_trip=factors.half_trip * cmath.exp(0.5j * theta),
    )
