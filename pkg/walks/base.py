"""
Base walk engine with functionality shared by the classical and quantum walks
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from chain.models import NodeGraph, TransitionMatrix
from utils.errors import DimensionMismatchError, NonConvergenceError, SpecValidationError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_STEPS = 1_000_000
# Defective-matrix guard for the eigendecomposition alternative
EIGEN_CONDITION_LIMIT = 1e12
# Column weight deficit below which a node counts as lossless
LEAK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WalkState:
    """Node values at step n: probabilities (classical) or amplitudes (quantum)"""

    step: int
    values: np.ndarray
    kind: str

    def probabilities(self) -> np.ndarray:
        if np.iscomplexobj(self.values):
            return np.abs(self.values) ** 2
        return self.values

    def __getitem__(self, index: int):
        return self.values[index]


@dataclass(frozen=True, eq=False)
class Trajectory(Sequence):
    """
    States for steps 0 .. n, row m holding T^m applied to the initial state

    Step 0 is the initial distribution; the first hop happens between steps
    0 and 1.
    """

    graph: NodeGraph = field(repr=False)
    kind: str
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, step):
        if isinstance(step, slice):
            return [self[i] for i in range(*step.indices(len(self)))]
        if step < 0:
            step += len(self)
        return WalkState(step=step, values=self.values[step], kind=self.kind)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self))

    def probabilities(self) -> np.ndarray:
        if np.iscomplexobj(self.values):
            return np.abs(self.values) ** 2
        return self.values

    def drop(self) -> np.ndarray:
        """Cumulative Drop probability p^D(n) per step"""
        return self.probabilities()[:, self.graph.drop_index]

    def thru(self) -> np.ndarray:
        """Cumulative Thru probability p^T(n) per step"""
        return self.probabilities()[:, self.graph.thru_index]

    def transient_mass(self) -> np.ndarray:
        return self.probabilities()[:, list(self.graph.transient)].sum(axis=1)

    def total_mass(self) -> np.ndarray:
        return self.probabilities().sum(axis=1)


def step_arrivals(trajectory: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-step arrivals f^D(n), f^T(n) from consecutive cumulative states

    Classical: arrival probabilities. Quantum: arrival amplitudes.
    """
    drop = trajectory.values[:, trajectory.graph.drop_index]
    thru = trajectory.values[:, trajectory.graph.thru_index]
    return np.diff(drop, prepend=drop[:1] * 0), np.diff(thru, prepend=thru[:1] * 0)


class BaseWalk(ABC):
    """Base class for walks driven by a transition matrix"""

    kind: str = ''
    dtype: type = float

    def __init__(self, transition: TransitionMatrix):
        """
        Initialize walk

        Args:
            transition: TransitionMatrix of the matching kind
        """
        if transition.kind != self.kind:
            raise SpecValidationError(f"{type(self).__name__} needs a {self.kind} matrix, got {transition.kind}")
        self.transition = transition
        self.graph = transition.graph
        self.matrix = transition.matrix

    def initial_state(self, node: str = 'P0') -> WalkState:
        """Walker localised on one node"""
        values = np.zeros(self.graph.dimension, dtype=self.dtype)
        values[self.graph.index(node)] = 1.0
        return WalkState(step=0, values=values, kind=self.kind)

    def _coerce(self, initial) -> np.ndarray:
        if initial is None:
            return self.initial_state().values
        values = initial.values if isinstance(initial, WalkState) else initial
        values = np.asarray(values, dtype=self.dtype)
        if values.shape != (self.graph.dimension,):
            raise DimensionMismatchError(
                f"state has shape {values.shape}, matrix needs ({self.graph.dimension},)"
            )
        self.validate_initial(values)
        return values

    @abstractmethod
    def validate_initial(self, values: np.ndarray) -> None:
        """Check the initial state against the regime's constraints"""

    @abstractmethod
    def weight(self, values: np.ndarray) -> float:
        """Probability mass carried by a vector of node values"""

    def transient_weight(self, values: np.ndarray) -> float:
        return self.weight(values[list(self.graph.transient)])

    def evolve(self, initial=None, steps: int = 0) -> Trajectory:
        """
        Iterate the transition matrix

        Args:
            initial: WalkState or vector; defaults to the walker at P0
            steps: number of hops n >= 0

        Returns:
            Trajectory with states for steps 0 .. n
        """
        if steps < 0:
            raise SpecValidationError(f"steps must be non-negative, got {steps}")
        state = self._coerce(initial)
        values = np.empty((steps + 1, self.graph.dimension), dtype=self.dtype)
        values[0] = state
        for m in range(1, steps + 1):
            values[m] = self.matrix @ values[m - 1]
        return Trajectory(graph=self.graph, kind=self.kind, values=values)

    def steady_state(self, initial=None, tol: float = DEFAULT_TOL, max_steps: int = DEFAULT_MAX_STEPS) -> WalkState:
        """
        Iterate until the mass left on non-absorbing nodes drops below tol

        Raises:
            NonConvergenceError: iteration cap reached, or the walker can
                enter a lossless closed loop with no exit
        """
        if not tol > 0:
            raise SpecValidationError(f"tol must be positive, got {tol}")
        state = self._coerce(initial)
        residual = self.transient_weight(state)
        trapped = self.trapped_nodes(state)
        if trapped and residual >= tol:
            names = ', '.join(self.graph.nodes[i] for i in trapped)
            raise NonConvergenceError(
                f"walker can enter closed loop {{{names}}} with no exit; transient mass stays at {residual:.3e}",
                steps=0,
                residual=residual,
            )
        step = 0
        while residual >= tol:
            if step >= max_steps:
                raise NonConvergenceError(
                    f"transient mass {residual:.3e} still above tol {tol:.1e} after {step} steps",
                    steps=step,
                    residual=residual,
                )
            state = self.matrix @ state
            step += 1
            residual = self.transient_weight(state)
        logger.debug(f"{self.kind} steady state reached after {step} steps")
        return WalkState(step=step, values=state, kind=self.kind)

    def trapped_nodes(self, initial=None) -> list[int]:
        """
        Transient nodes reachable from the initial support that never lose mass

        A node leaks when part of its outgoing weight lands on PD/PT or is lost
        to propagation; nodes with no path to a leaking node keep their mass
        forever.
        """
        state = self._coerce(initial)
        transient = list(self.graph.transient)
        reachable = self._reachable(state, transient)
        leaking = {j for j in reachable if self.transient_weight(self.matrix[:, j]) < 1.0 - LEAK_TOL}
        escapes = set(leaking)
        frontier = list(leaking)
        while frontier:
            dst = frontier.pop()
            for src in reachable:
                if src not in escapes and self.matrix[dst, src] != 0:
                    escapes.add(src)
                    frontier.append(src)
        return [i for i in reachable if i not in escapes]

    def absorption_solve(self, initial=None) -> WalkState:
        """
        Direct steady state via the fundamental matrix

        Solves (I - Q) x = b on the transient nodes reachable from the initial
        support, then reads absorbed values off the absorbing rows. Closed
        loops that the walker can never enter are excluded from the system.
        """
        state = self._coerce(initial)
        transient = list(self.graph.transient)
        reachable = self._reachable(state, transient)
        result = state.copy()
        result[transient] = 0.0
        if reachable:
            idx = np.array(reachable)
            q = self.matrix[np.ix_(idx, idx)]
            lhs = np.eye(len(idx), dtype=self.dtype) - q
            try:
                occupation = scipy.linalg.solve(lhs, state[idx])
            except (scipy.linalg.LinAlgError, ValueError) as e:
                raise NonConvergenceError(f"absorption system is singular: {e}") from e
            absorbing = list(self.graph.absorbing)
            result[absorbing] = state[absorbing] + self.matrix[np.ix_(absorbing, idx)] @ occupation
        return WalkState(step=-1, values=result, kind=self.kind)

    def _reachable(self, state: np.ndarray, transient: list[int]) -> list[int]:
        support = {i for i in transient if state[i] != 0}
        frontier = list(support)
        while frontier:
            src = frontier.pop()
            for dst in transient:
                if dst not in support and self.matrix[dst, src] != 0:
                    support.add(dst)
                    frontier.append(dst)
        return sorted(support)

    def evolve_eigen(self, initial=None, steps: int = 0) -> WalkState:
        """
        State after n steps from the eigendecomposition T = P D P^{-1}

        Not used by the engines: T is defective at k_i in {0, 1}.
        """
        state = self._coerce(initial)
        eigvals, vectors = np.linalg.eig(self.matrix)
        if np.linalg.cond(vectors) > EIGEN_CONDITION_LIMIT:
            raise SpecValidationError("transition matrix is defective; use iterated evolution")
        coeffs = np.linalg.solve(vectors, state.astype(complex))
        values = vectors @ (eigvals ** steps * coeffs)
        if self.dtype is float:
            values = values.real
        return WalkState(step=steps, values=values, kind=self.kind)


def evolve_batch(matrices: np.ndarray, initial: np.ndarray, steps: int, record: int) -> np.ndarray:
    """
    Iterate a stack of same-shape matrices in lockstep

    Args:
        matrices: array (S, d, d) of transition matrices
        initial: array (d,) shared initial state
        steps: number of hops
        record: node index whose value is kept at every step

    Returns:
        Array (steps + 1, S) of the recorded node's values
    """
    if matrices.ndim != 3 or matrices.shape[1:] != (initial.shape[0], initial.shape[0]):
        raise DimensionMismatchError(f"matrix stack {matrices.shape} does not match state {initial.shape}")
    states = np.broadcast_to(initial, (matrices.shape[0], initial.shape[0])).astype(matrices.dtype)
    out = np.empty((steps + 1, matrices.shape[0]), dtype=matrices.dtype)
    out[0] = states[:, record]
    for m in range(1, steps + 1):
        states = np.einsum('sij,sj->si', matrices, states)
        out[m] = states[:, record]
    return out
