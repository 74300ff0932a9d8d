"""
Parameter sweeps over ring chains

Axis values are inclusive linspaces. Rows (axis1) are evaluated in parallel
with a thread pool and assembled in order, so grids do not depend on the
thread count.
"""
from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from analysis.metrics import DEFAULT_GOAL, HittingResult, _check_goal, hitting_time, phase_average
from chain.builder import transfer_matrix
from chain.models import CLASSICAL, QUANTUM, REGIMES, RingChainSpec, scenario_couplings
from utils.errors import SpecValidationError
from walks.base import DEFAULT_TOL, evolve_batch
from walks.classical import ClassicalWalk, closed_form
from walks.quantum import QuantumWalk, steady_amplitudes

logger = logging.getLogger(__name__)

MIN_SAMPLES = 2
MAX_SAMPLES = 2001
MAX_TIME_STEPS = 100_000

METRICS = ('p_C^D', 'p_C^T', 'p_Q^D', 'p_Q^T', 'p_Q^D - p_C^D', 'p_Q^T - p_C^T')

_AXIS_PATTERN = re.compile(r'^(k\d+|k1=k2|theta\d*|alpha|wavelength|lambda|radius|r|r\d+|r1=r2)$')


def normalize_metric(name: str) -> str:
    """Accept the typographic minus and any spacing around it"""
    compact = name.replace('−', '-').replace(' ', '')
    for metric in METRICS:
        if compact == metric.replace(' ', ''):
            return metric
    raise SpecValidationError(f"unknown metric {name!r}, expected one of {', '.join(METRICS)}")


@dataclass(frozen=True)
class Axis:
    """Swept parameter: inclusive linspace of `samples` points"""

    name: str
    start: float
    stop: float
    samples: int

    def __post_init__(self) -> None:
        if not _AXIS_PATTERN.match(self.name):
            raise SpecValidationError(f"unknown axis {self.name!r}")
        if not MIN_SAMPLES <= self.samples <= MAX_SAMPLES:
            raise SpecValidationError(
                f"axis {self.name} needs {MIN_SAMPLES}..{MAX_SAMPLES} samples, got {self.samples}"
            )

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.samples)


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """Metric matrix with rows along axis1 and columns along axis2"""

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    metric: str
    values: np.ndarray
    fixed: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = (len(self.axis1_values), len(self.axis2_values))
        if self.values.shape != expected:
            raise SpecValidationError(f"grid shape {self.values.shape} does not match axes {expected}")
        if not np.all(np.isfinite(self.values)):
            raise SpecValidationError(f"grid for {self.metric} contains non-finite cells")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def argmin(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.axis1_values[i]), float(self.axis2_values[j]), float(self.values[i, j])

    def argmax(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.axis1_values[i]), float(self.axis2_values[j]), float(self.values[i, j])


def _replace_at(values: tuple[float, ...], index: int, value: float, label: str) -> tuple[float, ...]:
    if not 0 <= index < len(values):
        raise SpecValidationError(f"axis {label} is out of range for {len(values)} value(s)")
    items = list(values)
    items[index] = value
    return tuple(items)


def apply_axis(spec: RingChainSpec, name: str, value: float) -> RingChainSpec:
    """Return a copy of spec with the swept parameter set to value"""
    value = float(value)
    if name == 'k1=k2':
        couplings = _replace_at(spec.couplings, 0, value, name)
        return spec.with_couplings(_replace_at(couplings, 1, value, name))
    if name.startswith('k'):
        return spec.with_couplings(_replace_at(spec.couplings, int(name[1:]) - 1, value, name))
    if name == 'theta':
        return spec.with_parameters(phases=value)
    if name.startswith('theta'):
        return spec.with_parameters(phases=_replace_at(spec.phases, int(name[5:]) - 1, value, name))
    if name == 'alpha':
        return spec.with_parameters(loss_per_round=value)
    if spec.geometry is None:
        raise SpecValidationError(f"axis {name} needs a [geometry] section")
    if name in ('wavelength', 'lambda'):
        return spec.with_geometry(wavelength=value)
    if name in ('radius', 'r', 'r1=r2'):
        radius = spec.geometry.radius
        if name == 'r1=r2':
            radius = _replace_at(_replace_at(radius, 0, value, name), 1, value, name)
        else:
            radius = tuple(value for _ in radius)
        return spec.with_geometry(radius=radius)
    return spec.with_geometry(radius=_replace_at(spec.geometry.radius, int(name[1:]) - 1, value, name))


def apply_scenario(spec: RingChainSpec, scenario: Optional[int]) -> RingChainSpec:
    if scenario is None:
        return spec
    if spec.num_rings != 2:
        raise SpecValidationError(f"scenarios apply to two rings, got {spec.num_rings}")
    return spec.with_couplings(scenario_couplings(spec.couplings[0], spec.couplings[1], scenario))


def classical_steady(spec: RingChainSpec, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    if spec.num_rings <= 2 and len(set(spec.loss_per_round)) == 1:
        return closed_form(spec)
    walk = ClassicalWalk.from_spec(spec)
    state = walk.steady_state(tol=tol)
    return float(state[walk.graph.drop_index]), float(state[walk.graph.thru_index])


def quantum_steady(spec: RingChainSpec, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    if spec.num_rings <= 2:
        result = steady_amplitudes(spec)
        return result.p_drop, result.p_thru
    walk = QuantumWalk.from_spec(spec)
    result = walk.amplitudes(walk.steady_state(tol=tol))
    return result.p_drop, result.p_thru


def evaluate_metric(spec: RingChainSpec, metric: str, tol: float = DEFAULT_TOL) -> float:
    """Steady-state value of one metric for one chain"""
    metric = normalize_metric(metric)
    port = 0 if metric.startswith('p_Q^D') or metric.startswith('p_C^D') else 1
    quantum = quantum_steady(spec, tol)[port] if 'p_Q' in metric else 0.0
    classical = classical_steady(spec, tol)[port] if 'p_C' in metric else 0.0
    if ' - ' in metric:
        return quantum - classical
    return quantum if metric.startswith('p_Q') else classical


def _parallel_rows(worker, rows, threads: int) -> list:
    if threads <= 1:
        return [worker(row) for row in rows]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(worker, rows))


def sweep2d(
    template: RingChainSpec,
    axis1: Axis,
    axis2: Axis,
    metric: str,
    scenario: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> SweepGrid:
    """
    Steady-state metric over a 2D parameter grid

    Closed forms are used for one and two rings, Markov iteration otherwise.
    """
    metric = normalize_metric(metric)
    if axis1.name == axis2.name:
        raise SpecValidationError(f"both axes sweep {axis1.name}")
    values1, values2 = axis1.values(), axis2.values()
    logger.info(f"Sweeping {metric} over {axis1.name} x {axis2.name} ({len(values1)}x{len(values2)}, {threads} thread(s))")

    def row(value1: float) -> np.ndarray:
        spec1 = apply_axis(template, axis1.name, value1)
        cells = np.empty(len(values2))
        for j, value2 in enumerate(values2):
            spec = apply_scenario(apply_axis(spec1, axis2.name, value2), scenario)
            cells[j] = evaluate_metric(spec, metric, tol)
        return cells

    values = np.vstack(_parallel_rows(row, values1, threads))
    fixed = template.to_dict()
    if scenario is not None:
        fixed['scenario'] = scenario
    return SweepGrid(
        axis1_name=axis1.name,
        axis1_values=values1,
        axis2_name=axis2.name,
        axis2_values=values2,
        metric=metric,
        values=values,
        fixed=fixed,
    )


def _drop_series(specs: list[RingChainSpec], regime: str, n_max: int) -> np.ndarray:
    """Cumulative Drop probability for steps 0..n_max, one column per spec"""
    matrices = np.stack([transfer_matrix(spec, regime).matrix for spec in specs])
    initial = np.zeros(matrices.shape[1], dtype=matrices.dtype)
    initial[0] = 1.0
    drop = matrices.shape[1] - 2
    recorded = evolve_batch(matrices, initial, n_max, drop)
    return np.abs(recorded) ** 2 if regime == QUANTUM else recorded.real


def time_grid(
    template: RingChainSpec,
    axis: Axis,
    n_max: int,
    regime: str,
    scenario: Optional[int] = None,
) -> SweepGrid:
    """p^D(n) for n = 0..n_max (rows) against one swept parameter (columns)"""
    if regime not in REGIMES:
        raise SpecValidationError(f"unknown regime {regime!r}")
    if not 1 <= n_max <= MAX_TIME_STEPS:
        raise SpecValidationError(f"n_max must lie in 1..{MAX_TIME_STEPS}, got {n_max}")
    samples = axis.values()
    specs = [apply_scenario(apply_axis(template, axis.name, v), scenario) for v in samples]
    logger.info(f"Time grid ({regime}) over {axis.name}: {len(samples)} samples x {n_max + 1} steps")
    fixed = template.to_dict()
    fixed['regime'] = regime
    return SweepGrid(
        axis1_name='n',
        axis1_values=np.arange(n_max + 1),
        axis2_name=axis.name,
        axis2_values=samples,
        metric=f"p_{'Q' if regime == QUANTUM else 'C'}^D(n)",
        values=_drop_series(specs, regime, n_max),
        fixed=fixed,
    )


def goal_region(grid: SweepGrid, p_g: float = DEFAULT_GOAL) -> np.ndarray:
    """Boolean mask of cells strictly above the goal probability"""
    return grid.values > p_g


def hitting_curve(
    template: RingChainSpec,
    axis: Axis,
    regime: str,
    p_g: float = DEFAULT_GOAL,
    n_max: int = 200,
    scenario: Optional[int] = None,
    tol: float = DEFAULT_TOL,
) -> list[tuple[float, HittingResult]]:
    """
    Goal-hitting time for every sample of one axis

    Quantum samples are evolved together as a batch; classical samples check
    their steady state first.
    """
    _check_goal(p_g, n_max)
    if regime not in REGIMES:
        raise SpecValidationError(f"unknown regime {regime!r}")
    samples = axis.values()
    specs = [apply_scenario(apply_axis(template, axis.name, v), scenario) for v in samples]
    if regime == CLASSICAL:
        return [(float(v), hitting_time(spec, CLASSICAL, p_g, n_max, tol)) for v, spec in zip(samples, specs)]

    series = _drop_series(specs, QUANTUM, n_max)
    results = []
    for column, (value, spec) in enumerate(zip(samples, specs)):
        above = np.nonzero(series[1:, column] >= p_g)[0]
        steps = int(above[0]) + 1 if above.size else None
        duration = spec.step_duration()
        seconds = steps * duration if steps is not None and duration is not None else None
        results.append((float(value), HittingResult(threshold=p_g, steps=steps, seconds=seconds)))
    return results


def phase_average_grid(k1_axis: Axis, k2_axis: Axis, alpha: float = 1.0, samples: int = 10_000) -> SweepGrid:
    """Phase-averaged single-ring quantum Drop probability over a (k1, k2) grid"""
    if k1_axis.name != 'k1' or k2_axis.name != 'k2':
        raise SpecValidationError(f"phase averaging sweeps k1 x k2, got {k1_axis.name} x {k2_axis.name}")
    values1, values2 = k1_axis.values(), k2_axis.values()
    values = np.array([[phase_average(k1, k2, alpha, samples) for k2 in values2] for k1 in values1])
    return SweepGrid(
        axis1_name='k1',
        axis1_values=values1,
        axis2_name='k2',
        axis2_values=values2,
        metric='<p_Q^D>_theta',
        values=values,
        fixed={'alpha': alpha, 'samples': samples},
    )
