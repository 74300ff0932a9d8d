"""
Classical random walk: Markov chain evolution, closed-form steady states for
one and two rings, and the truncated sum-over-paths oracle
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.special import comb

from chain.builder import build_chain, classical_transfer_matrix
from chain.models import CLASSICAL, RingChainSpec
from utils.errors import SpecValidationError
from walks.base import BaseWalk

logger = logging.getLogger(__name__)

# Below this the closed-form denominator is treated as 0/0
DEGENERATE_DENOMINATOR = 1e-15

MASS_TOL = 1e-12


class ClassicalWalk(BaseWalk):
    """Probability walk on a real column-substochastic matrix"""

    kind = CLASSICAL
    dtype = float

    @classmethod
    def from_spec(cls, spec: RingChainSpec) -> ClassicalWalk:
        return cls(classical_transfer_matrix(build_chain(spec)))

    def validate_initial(self, values: np.ndarray) -> None:
        if np.any(values < 0):
            raise SpecValidationError("initial probabilities must be non-negative")
        if values.sum() > 1.0 + MASS_TOL:
            raise SpecValidationError(f"initial probability mass {values.sum()} exceeds 1")

    def weight(self, values: np.ndarray) -> float:
        return float(values.sum())


def _check_probabilities(**values: float) -> None:
    for name, value in values.items():
        if not 0.0 <= value <= 1.0:
            raise SpecValidationError(f"{name} must lie in [0, 1], got {value}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise SpecValidationError(f"alpha must lie in (0, 1], got {alpha}")


def closed_form_single(k1: float, k2: float, alpha: float = 1.0) -> tuple[float, float]:
    """
    Steady-state (p_D, p_T) for one ring

        p_D = k1 k2 α^{1/2} / (1 - α t1 t2)
        p_T = (t1 + t2 α - 2 t1 t2 α) / (1 - t1 t2 α)

    The 0/0 case k1 = k2 = 0, α = 1 resolves to (0, 1): the walker never
    enters the ring.
    """
    _check_probabilities(k1=k1, k2=k2)
    _check_alpha(alpha)
    t1, t2 = 1.0 - k1, 1.0 - k2
    denominator = 1.0 - alpha * t1 * t2
    if denominator <= DEGENERATE_DENOMINATOR:
        logger.warning(f"Degenerate single-ring denominator (k1={k1}, k2={k2}, alpha={alpha}); using absorbing limit")
        return 0.0, 1.0
    p_drop = k1 * k2 * math.sqrt(alpha) / denominator
    p_thru = (t1 + t2 * alpha - 2.0 * t1 * t2 * alpha) / denominator
    return p_drop, p_thru


def closed_form_double(k1: float, k2: float, k3: float, alpha: float = 1.0) -> tuple[float, float]:
    """
    Steady-state (p_D, p_T) for two series-coupled rings

    Sums every inter-ring transfer and loop count. A vanishing denominator
    (lossless, with couplings that wall the walker off from a ring) falls back
    to the direct absorbing-chain solution.
    """
    _check_probabilities(k1=k1, k2=k2, k3=k3)
    _check_alpha(alpha)
    t1, t2, t3 = 1.0 - k1, 1.0 - k2, 1.0 - k3
    a = alpha
    denominator = 1.0 - t1 * t2 * a - t2 * t3 * a - t1 * t3 * a ** 2 + 2.0 * t1 * t2 * t3 * a ** 2
    if abs(denominator) <= DEGENERATE_DENOMINATOR:
        logger.warning(f"Degenerate two-ring denominator (k={k1},{k2},{k3}, alpha={alpha}); solving chain directly")
        return _absorbed(RingChainSpec(num_rings=2, couplings=(k1, k2, k3), loss_per_round=alpha))
    p_drop = k1 * k2 * k3 * a / denominator
    p_thru = (
        t1 + t2 * a - 2.0 * t1 * t2 * a - (t1 * t2 - (1.0 - 2.0 * t1) * (1.0 - 2.0 * t2) * a) * t3 * a
    ) / denominator
    return p_drop, p_thru


def _absorbed(spec: RingChainSpec) -> tuple[float, float]:
    walk = ClassicalWalk.from_spec(spec)
    state = walk.absorption_solve()
    return float(state[walk.graph.drop_index]), float(state[walk.graph.thru_index])


def closed_form(spec: RingChainSpec) -> tuple[float, float]:
    """Dispatch to the one- or two-ring closed form (uniform loss required)"""
    if len(set(spec.loss_per_round)) != 1:
        raise SpecValidationError("closed forms assume the same loss in every ring")
    alpha = spec.loss_per_round[0]
    if spec.num_rings == 1:
        return closed_form_single(*spec.couplings, alpha)
    if spec.num_rings == 2:
        return closed_form_double(*spec.couplings, alpha)
    raise SpecValidationError(f"no closed form for {spec.num_rings} rings")


def path_sum_oracle(spec: RingChainSpec, steps: int) -> tuple[float, float]:
    """
    Cumulative (p_D(n), p_T(n)) by explicit enumeration of path classes

    Only paths of length <= n contribute. One ring: geometric terms
    (t1 t2 α)^m. Two rings: paths are grouped by A/B loop counts and the
    number of returns from ring B to ring A.
    """
    if steps < 0:
        raise SpecValidationError(f"steps must be non-negative, got {steps}")
    if len(set(spec.loss_per_round)) != 1:
        raise SpecValidationError("path-sum oracle assumes the same loss in every ring")
    alpha = spec.loss_per_round[0]
    if spec.num_rings == 1:
        return _single_ring_paths(*spec.couplings, alpha, steps)
    if spec.num_rings == 2:
        return _double_ring_paths(*spec.couplings, alpha, steps)
    raise SpecValidationError(f"path-sum oracle covers 1 or 2 rings, got {spec.num_rings}")


def _single_ring_paths(k1: float, k2: float, alpha: float, steps: int) -> tuple[float, float]:
    t1, t2 = 1.0 - k1, 1.0 - k2
    loop = t1 * t2 * alpha
    # Drop arrivals at n = 2, 4, ...: k1 k2 α^{1/2} loop^m
    p_drop = sum(k1 * k2 * math.sqrt(alpha) * loop ** m for m in range(steps // 2))
    # Thru: direct hop at n = 1, then k1² t2 α loop^m at n = 3, 5, ...
    p_thru = t1 if steps >= 1 else 0.0
    p_thru += sum(k1 * k1 * t2 * alpha * loop ** m for m in range((steps - 1) // 2))
    return p_drop, p_thru


def _double_ring_paths(k1: float, k2: float, k3: float, alpha: float, steps: int) -> tuple[float, float]:
    t1, t2, t3 = 1.0 - k1, 1.0 - k2, 1.0 - k3
    half = math.sqrt(alpha)
    loop_a = t1 * t2 * alpha      # P1 -> P2 -> P1, 2 steps
    loop_b = t2 * t3 * alpha      # P3 -> P4 -> P3, 2 steps
    cross = k2 * half             # P1 -> P3, 1 step
    ret = t3 * k2 * t1 * alpha * half  # P3 -> P4 -> P2 -> P1, 3 steps

    # Drop: P0 -> P1, s returns, A loops spread over s+1 stays in A, B loops
    # over s+1 stays in B, then P3 -> PD. Length 3 + 4s + 2(A + B).
    p_drop = 0.0
    s = 0
    while 3 + 4 * s <= steps:
        budget = (steps - 3 - 4 * s) // 2
        base = k1 * cross ** (s + 1) * ret ** s * k3 * half
        for loops_a in range(budget + 1):
            weight_a = comb(loops_a + s, s, exact=True) * loop_a ** loops_a
            for loops_b in range(budget - loops_a + 1):
                weight_b = comb(loops_b + s, s, exact=True) * loop_b ** loops_b
                p_drop += base * weight_a * weight_b
        s += 1

    # Thru: direct hop, or P0 -> P1 followed by r arrivals at P2 (u of them via
    # ring B with B loops in total), r - 1 returns P2 -> P1, exit P2 -> PT.
    # Length 2r + 2u + 2B + 1.
    p_thru = t1 if steps >= 1 else 0.0
    direct = t2 * half                        # P1 -> P2
    detour = k2 * half * t3 * half * k2 * half  # P1 -> P3 -> P4 -> P2
    back = t1 * half                          # P2 -> P1
    r = 1
    while 2 * r + 1 <= steps:
        for u in range(r + 1):
            budget = (steps - 2 * r - 2 * u - 1) // 2
            if budget < 0:
                break
            routes = comb(r, u, exact=True) * direct ** (r - u) * detour ** u
            for loops_b in range(budget + 1 if u > 0 else 1):
                spread = comb(loops_b + u - 1, u - 1, exact=True) if u > 0 else 1
                p_thru += k1 * routes * spread * loop_b ** loops_b * back ** (r - 1) * k1 * half
        r += 1
    return p_drop, p_thru
