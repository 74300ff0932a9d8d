"""
Domain models for series-coupled ring resonator chains

Node ordering is fixed: [P0, P1, ..., P{2N}, PD, PT]. Ring j owns two
half-ring nodes, P{2j-1} (travelling from coupler j to coupler j+1) and
P{2j} (travelling back from coupler j+1 to coupler j). Matrices are indexed
[target, source] so that columns hold the outgoing hops of a node.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from chain.geometry import half_ring_time, loss_from_geometry, phase_from_geometry
from utils.errors import SpecValidationError

logger = logging.getLogger(__name__)

GEOMETRY_MATCH_TOL = 1e-12

CLASSICAL = 'classical'
QUANTUM = 'quantum'
REGIMES = (CLASSICAL, QUANTUM)


def _as_tuple(values, count: int, name: str) -> tuple[float, ...]:
    """Accept a scalar (broadcast to every ring) or a sequence of floats"""
    if isinstance(values, (int, float)):
        return tuple(float(values) for _ in range(count))
    result = tuple(float(v) for v in values)
    if len(result) != count:
        raise SpecValidationError(f"{name} needs {count} values, got {len(result)}")
    return result


@dataclass(frozen=True)
class RingGeometry:
    """Physical description from which per-ring θ and α are derived"""

    radius: tuple[float, ...]     # [m] per ring
    n_eff: float                  # effective index
    wavelength: float             # [m]
    coupler_length: float = 0.0   # [m] racetrack L_c
    absorption: float = 0.0       # α_t [1/m]
    bending_loss: float = 0.0     # α_b [1/m]

    def __post_init__(self) -> None:
        radius = (self.radius,) if isinstance(self.radius, (int, float)) else self.radius
        object.__setattr__(self, 'radius', tuple(float(r) for r in radius))
        if not self.radius:
            raise SpecValidationError("geometry needs at least one radius")

    def phases(self) -> tuple[float, ...]:
        return tuple(phase_from_geometry(r, self.n_eff, self.wavelength) for r in self.radius)

    def losses(self) -> tuple[float, ...]:
        return tuple(
            loss_from_geometry(self.absorption, self.bending_loss, 2.0 * math.pi * r, self.coupler_length)
            for r in self.radius
        )

    def step_duration(self) -> Optional[float]:
        """Δt of one step, defined only when every ring has the same radius"""
        if len(set(self.radius)) != 1:
            return None
        return half_ring_time(self.radius[0], self.n_eff)


@dataclass(frozen=True)
class RingChainSpec:
    """
    N series-coupled rings between an input/thru bus and a drop bus

    couplings holds k_1 ... k_{N+1}; loss_per_round and phases hold one value
    per ring. When geometry is given, θ_j and α_j are derived from it and any
    explicit values must agree within 1e-12.
    """

    num_rings: int
    couplings: tuple[float, ...]
    loss_per_round: Optional[tuple[float, ...]] = None
    phases: Optional[tuple[float, ...]] = None
    geometry: Optional[RingGeometry] = None
    step_time: Optional[float] = None  # [s] Δt kept when θ/α override a geometry

    def __post_init__(self) -> None:
        if not isinstance(self.num_rings, (int, np.integer)) or self.num_rings < 1:
            raise SpecValidationError(f"num_rings must be a positive integer, got {self.num_rings}")
        n = int(self.num_rings)
        object.__setattr__(self, 'num_rings', n)

        couplings = tuple(float(k) for k in self.couplings)
        if len(couplings) != n + 1:
            raise SpecValidationError(f"{n} ring(s) need {n + 1} couplings, got {len(couplings)}")
        for i, k in enumerate(couplings, start=1):
            if not 0.0 <= k <= 1.0:
                raise SpecValidationError(f"coupling k{i} must lie in [0, 1], got {k}")
        object.__setattr__(self, 'couplings', couplings)

        losses = None if self.loss_per_round is None else _as_tuple(self.loss_per_round, n, 'loss_per_round')
        phases = None if self.phases is None else _as_tuple(self.phases, n, 'phases')

        if self.geometry is not None:
            if len(self.geometry.radius) == 1 and n > 1:
                object.__setattr__(self, 'geometry', replace(self.geometry, radius=self.geometry.radius * n))
            if len(self.geometry.radius) != n:
                raise SpecValidationError(f"geometry needs {n} radii, got {len(self.geometry.radius)}")
            derived_phases = self.geometry.phases()
            derived_losses = self.geometry.losses()
            self._check_match('phases', phases, derived_phases)
            self._check_match('loss_per_round', losses, derived_losses)
            phases, losses = derived_phases, derived_losses

        losses = losses if losses is not None else tuple(1.0 for _ in range(n))
        phases = phases if phases is not None else tuple(0.0 for _ in range(n))
        for j, alpha in enumerate(losses, start=1):
            if not 0.0 < alpha <= 1.0:
                raise SpecValidationError(f"loss_per_round α{j} must lie in (0, 1], got {alpha}")
        for j, theta in enumerate(phases, start=1):
            if not math.isfinite(theta):
                raise SpecValidationError(f"phase θ{j} must be finite, got {theta}")
        if self.step_time is not None and not self.step_time > 0:
            raise SpecValidationError(f"step_time must be positive, got {self.step_time}")
        object.__setattr__(self, 'loss_per_round', losses)
        object.__setattr__(self, 'phases', phases)

    @staticmethod
    def _check_match(name: str, explicit: Optional[tuple[float, ...]], derived: tuple[float, ...]) -> None:
        if explicit is None:
            return
        for j, (given, computed) in enumerate(zip(explicit, derived), start=1):
            if not math.isclose(given, computed, rel_tol=GEOMETRY_MATCH_TOL, abs_tol=GEOMETRY_MATCH_TOL):
                raise SpecValidationError(
                    f"{name}[{j}] = {given} disagrees with geometry-derived value {computed}"
                )

    @classmethod
    def uniform(cls, num_rings: int, k: float | Sequence[float], alpha: float = 1.0, theta: float = 0.0) -> RingChainSpec:
        """Identical rings; k may be a single value for every coupler or the full list"""
        couplings = [k] * (num_rings + 1) if isinstance(k, (int, float)) else list(k)
        return cls(num_rings=num_rings, couplings=tuple(couplings), loss_per_round=alpha, phases=theta)

    @classmethod
    def from_geometry(
        cls,
        couplings: Sequence[float],
        radius: float | Sequence[float],
        n_eff: float,
        wavelength: float,
        coupler_length: float = 0.0,
        absorption: float = 0.0,
        bending_loss: float = 0.0,
    ) -> RingChainSpec:
        num_rings = len(couplings) - 1
        radii = (radius,) * num_rings if isinstance(radius, (int, float)) else tuple(radius)
        geometry = RingGeometry(
            radius=radii,
            n_eff=n_eff,
            wavelength=wavelength,
            coupler_length=coupler_length,
            absorption=absorption,
            bending_loss=bending_loss,
        )
        return cls(num_rings=num_rings, couplings=tuple(couplings), geometry=geometry)

    @property
    def transmissions(self) -> tuple[float, ...]:
        """t_i = 1 - k_i"""
        return tuple(1.0 - k for k in self.couplings)

    def round_trip_factors(self) -> np.ndarray:
        """γ_j = α_j e^{iθ_j} per ring"""
        return np.array([a * np.exp(1j * th) for a, th in zip(self.loss_per_round, self.phases)])

    def half_trip_factors(self) -> np.ndarray:
        """γ_j^{1/2} = α_j^{1/2} e^{iθ_j/2}, halving the unreduced phase"""
        return np.array([math.sqrt(a) * np.exp(0.5j * th) for a, th in zip(self.loss_per_round, self.phases)])

    def step_duration(self) -> Optional[float]:
        return self.step_time if self.geometry is None else self.geometry.step_duration()

    def with_couplings(self, couplings: Sequence[float]) -> RingChainSpec:
        return replace(self, couplings=tuple(couplings))

    def with_parameters(self, loss_per_round=None, phases=None) -> RingChainSpec:
        """Copy with new α/θ; drops geometry, which would otherwise pin them, but keeps its Δt"""
        return RingChainSpec(
            num_rings=self.num_rings,
            couplings=self.couplings,
            loss_per_round=self.loss_per_round if loss_per_round is None else loss_per_round,
            phases=self.phases if phases is None else phases,
            step_time=self.step_duration(),
        )

    def with_geometry(self, **changes) -> RingChainSpec:
        """Copy with modified geometry fields; θ and α are re-derived"""
        if self.geometry is None:
            raise SpecValidationError("spec has no geometry to modify")
        return RingChainSpec(
            num_rings=self.num_rings,
            couplings=self.couplings,
            geometry=replace(self.geometry, **changes),
        )

    def to_dict(self) -> dict:
        data = {
            'num_rings': self.num_rings,
            'couplings': list(self.couplings),
            'loss_per_round': list(self.loss_per_round),
            'phases': list(self.phases),
        }
        if self.geometry is not None:
            data['geometry'] = {
                'radius': list(self.geometry.radius),
                'n_eff': self.geometry.n_eff,
                'wavelength': self.geometry.wavelength,
                'coupler_length': self.geometry.coupler_length,
                'absorption': self.geometry.absorption,
                'bending_loss': self.geometry.bending_loss,
            }
        elif self.step_time is not None:
            data['step_time'] = self.step_time
        return data


def scenario_couplings(k1: float, k2: float, scenario: int) -> tuple[float, float, float]:
    """
    Two-ring coupling sets linking k3 to k1

    Scenario 1: k3 = 1 - k1 (balanced first step). Scenario 2: k3 = k1.
    """
    if scenario == 1:
        return k1, k2, 1.0 - k1
    if scenario == 2:
        return k1, k2, k1
    raise SpecValidationError(f"unknown scenario {scenario}, expected 1 or 2")


@dataclass(frozen=True)
class Edge:
    """
    One hop of the walk

    coupling is 'k' (cross) or 't' (through) of coupler `coupler` (1-based).
    ring is the ring whose half is traversed by the source node, None for the
    input bus. sign is the amplitude sign used by the quantum matrix.
    """

    source: int
    target: int
    coupling: str
    coupler: int
    ring: Optional[int]
    sign: int = 1


@dataclass(frozen=True)
class NodeGraph:
    spec: RingChainSpec
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    @property
    def dimension(self) -> int:
        return len(self.nodes)

    def index(self, name: str) -> int:
        try:
            return self.nodes.index(name)
        except ValueError:
            raise SpecValidationError(f"unknown node {name!r}") from None

    @property
    def input_index(self) -> int:
        return 0

    @property
    def drop_index(self) -> int:
        return self.dimension - 2

    @property
    def thru_index(self) -> int:
        return self.dimension - 1

    @property
    def absorbing(self) -> tuple[int, int]:
        return self.drop_index, self.thru_index

    @property
    def transient(self) -> tuple[int, ...]:
        return tuple(range(self.dimension - 2))


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Square [target, source] matrix over the graph nodes"""

    kind: str
    matrix: np.ndarray
    graph: NodeGraph = field(repr=False)

    def __post_init__(self) -> None:
        if self.kind not in REGIMES:
            raise SpecValidationError(f"unknown matrix kind {self.kind!r}")
        dim = self.graph.dimension
        if self.matrix.shape != (dim, dim):
            raise SpecValidationError(f"matrix shape {self.matrix.shape} does not match {dim} nodes")
        self.matrix.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.graph.dimension

    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def column_norms(self) -> np.ndarray:
        return np.sqrt((np.abs(self.matrix) ** 2).sum(axis=0))

    def transient_block(self) -> np.ndarray:
        idx = np.array(self.graph.transient)
        return self.matrix[np.ix_(idx, idx)]
