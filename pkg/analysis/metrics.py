"""
Scalar figures of merit: phase averaging, goal-hitting times and the
fluctuation amplitude of cumulative Drop series
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from chain.models import CLASSICAL, QUANTUM, REGIMES, RingChainSpec
from utils.errors import SpecValidationError
from walks.base import DEFAULT_TOL
from walks.classical import ClassicalWalk, _check_alpha, _check_probabilities, closed_form
from walks.quantum import QuantumWalk, drop_probability_single

logger = logging.getLogger(__name__)

DEFAULT_GOAL = 2.0 / 3.0
DEFAULT_FLUCTUATION_START = 10


def phase_average(k1: float, k2: float, alpha: float = 1.0, samples: int = 10_000) -> float:
    """
    Average the single-ring quantum Drop probability over θ ∈ [0, 2π)

    Uses the periodic trapezoid rule on θ_j = 2πj / samples. For α = 1 the
    result equals the classical k1 k2 / (1 - t1 t2).
    """
    _check_probabilities(k1=k1, k2=k2)
    _check_alpha(alpha)
    if samples < 2:
        raise SpecValidationError(f"samples must be at least 2, got {samples}")
    theta = 2.0 * np.pi * np.arange(samples) / samples
    return float(drop_probability_single(k1, k2, alpha, theta).mean())


@dataclass(frozen=True)
class HittingResult:
    """Smallest step n* with p^D(n*) >= p_g, or unreachable"""

    threshold: float
    steps: Optional[int] = None
    steady_value: Optional[float] = None
    seconds: Optional[float] = None

    def __post_init__(self) -> None:
        if self.steps is not None and self.steps < 1:
            raise SpecValidationError(f"hitting step must be positive, got {self.steps}")

    @property
    def reachable(self) -> bool:
        return self.steps is not None

    def to_dict(self) -> dict:
        return {
            'p_g': self.threshold,
            'reachable': self.reachable,
            'steps': self.steps,
            'seconds': self.seconds,
            'steady_value': self.steady_value,
        }


def _check_goal(p_g: float, n_max: int) -> None:
    if not 0.0 < p_g < 1.0:
        raise SpecValidationError(f"p_g must lie in (0, 1), got {p_g}")
    if n_max < 1:
        raise SpecValidationError(f"n_max must be at least 1, got {n_max}")


def classical_steady_drop(spec: RingChainSpec, tol: float = DEFAULT_TOL) -> float:
    """Closed form for one or two uniform-loss rings, direct chain solution otherwise"""
    if spec.num_rings <= 2 and len(set(spec.loss_per_round)) == 1:
        return closed_form(spec)[0]
    walk = ClassicalWalk.from_spec(spec)
    return float(walk.absorption_solve()[walk.graph.drop_index])


def first_crossing(walk, p_g: float, n_max: int) -> Optional[int]:
    """Iterate from P0 and return the first n <= n_max with p^D(n) >= p_g"""
    state = walk.initial_state().values
    drop = walk.graph.drop_index
    for n in range(1, n_max + 1):
        state = walk.matrix @ state
        value = abs(state[drop]) ** 2 if walk.kind == QUANTUM else state[drop]
        if value >= p_g:
            return n
    return None


def hitting_time(
    spec: RingChainSpec, regime: str, p_g: float = DEFAULT_GOAL, n_max: int = 200, tol: float = DEFAULT_TOL
) -> HittingResult:
    """
    Goal-hitting time of the cumulative Drop probability

    Classical cumulative absorption rises monotonically to its steady value,
    so a steady state below p_g is reported unreachable without iterating.
    The quantum cumulative value can overshoot its limit and is always
    iterated up to n_max.
    """
    _check_goal(p_g, n_max)
    if regime not in REGIMES:
        raise SpecValidationError(f"unknown regime {regime!r}")
    duration = spec.step_duration()
    if regime == CLASSICAL:
        steady = classical_steady_drop(spec, tol)
        if steady < p_g:
            logger.debug(f"Classical steady Drop {steady:.6f} below goal {p_g}; unreachable")
            return HittingResult(threshold=p_g, steady_value=steady)
        steps = first_crossing(ClassicalWalk.from_spec(spec), p_g, n_max)
    else:
        steady = None
        steps = first_crossing(QuantumWalk.from_spec(spec), p_g, n_max)
    seconds = steps * duration if steps is not None and duration is not None else None
    return HittingResult(threshold=p_g, steps=steps, steady_value=steady, seconds=seconds)


def fluctuation_amplitude(series, start: int = DEFAULT_FLUCTUATION_START, steady: Optional[float] = None) -> float:
    """
    Oscillation of a cumulative Drop series about its steady value

    Total downward variation of p^D(n) / p^D(∞) after step `start`. The steady
    value defaults to the last sample. Zero for monotone rows (every classical
    row and the resonant quantum row); largest towards θ = π, where every
    round trip flips the sign of the interfering correction.
    """
    values = np.asarray(series, dtype=float)[start:]
    if values.size < 2:
        return 0.0
    steps = np.diff(values)
    downward = float(-steps[steps < 0].sum())
    if downward == 0.0:
        return 0.0
    steady = float(values[-1]) if steady is None else float(steady)
    if not steady > 0:
        raise SpecValidationError(f"steady Drop value must be positive to scale fluctuations, got {steady}")
    return downward / steady


def classical_phase_limit(k1: float, k2: float) -> float:
    """k1 k2 / (1 - t1 t2), the lossless classical Drop value"""
    t1, t2 = 1.0 - k1, 1.0 - k2
    denominator = 1.0 - t1 * t2
    return 0.0 if math.isclose(denominator, 0.0, abs_tol=1e-15) else k1 * k2 / denominator
