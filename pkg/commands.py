"""
Subcommand handlers

Each handler takes a validated RunContext, writes exactly one artifact and
returns a JSON-serializable summary for logging and the run archive.
"""
import logging
from dataclasses import dataclass

import numpy as np

from analysis.metrics import fluctuation_amplitude, hitting_time, phase_average
from analysis.sweeps import Axis, hitting_curve, phase_average_grid, sweep2d, time_grid
from chain.models import CLASSICAL, QUANTUM, RingChainSpec
from config.run_config import OptionsSection, RunConfig
from coupler.bend_loss import load_bend_loss_table, max_free_spectral_range, min_radius_for_loss
from coupler.design import beat_length, coupling_table, effective_length, coupling_coefficient
from utils.errors import SpecValidationError
from utils.export import write_grid, write_records
from walks.classical import ClassicalWalk, closed_form, closed_form_single
from walks.quantum import QuantumWalk, steady_amplitudes

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    config: RunConfig
    options: OptionsSection
    resolved: dict
    out: str
    fmt: str = 'csv'
    gnuplot: bool = False

    @property
    def regime(self) -> str:
        return self.config.run.regime


def _walk(spec: RingChainSpec, regime: str):
    return QuantumWalk.from_spec(spec) if regime == QUANTUM else ClassicalWalk.from_spec(spec)


def _require(section, *names: str) -> None:
    missing = [name for name in names if getattr(section, name) is None]
    if missing:
        raise SpecValidationError(f"[sweep] is missing: {', '.join(missing)}")


def _sweep_axis(ctx: RunContext) -> Axis:
    """The single axis used by timegrid and hit"""
    sweep = ctx.config.sweep
    _require(sweep, 'axis', 'start', 'stop', 'samples')
    return Axis(name=sweep.axis, start=sweep.start, stop=sweep.stop, samples=sweep.samples)


def run_steady(ctx: RunContext) -> dict:
    """Closed-form steady state with a Markov iteration cross-check"""
    spec = ctx.config.chain_spec()
    walk = _walk(spec, ctx.regime)
    state = walk.steady_state(tol=ctx.options.tol, max_steps=ctx.options.max_steps)
    drop, thru = walk.graph.drop_index, walk.graph.thru_index

    uniform = len(set(spec.loss_per_round)) == 1
    if ctx.regime == QUANTUM and spec.num_rings <= 2:
        result = steady_amplitudes(spec)
        reference, source = (result.a_drop, result.a_thru), 'closed_form'
    elif ctx.regime == CLASSICAL and spec.num_rings <= 2 and uniform:
        reference, source = closed_form(spec), 'closed_form'
    else:
        solved = walk.absorption_solve()
        reference, source = (solved[drop], solved[thru]), 'absorption_solve'

    records = []
    for port, index, expected in (('D', drop, reference[0]), ('T', thru, reference[1])):
        markov = state[index]
        record = {
            'port': port,
            'closed_form': abs(expected) ** 2 if ctx.regime == QUANTUM else float(expected),
            'markov': abs(markov) ** 2 if ctx.regime == QUANTUM else float(markov),
            'markov_steps': state.step,
        }
        record['abs_diff'] = abs(record['closed_form'] - record['markov'])
        if ctx.regime == QUANTUM:
            record['amplitude_re'] = complex(expected).real
            record['amplitude_im'] = complex(expected).imag
        records.append(record)

    columns = ['port', 'closed_form', 'markov', 'abs_diff', 'markov_steps']
    if ctx.regime == QUANTUM:
        columns += ['amplitude_re', 'amplitude_im']
    write_records(ctx.out, records, columns, ctx.resolved, ctx.fmt, meta={'reference': source})
    summary = {
        'p_D': records[0]['closed_form'],
        'p_T': records[1]['closed_form'],
        'max_abs_diff': max(r['abs_diff'] for r in records),
        'steps': state.step,
    }
    logger.info(f"Steady state ({ctx.regime}): p_D={summary['p_D']:.12g}, p_T={summary['p_T']:.12g}")
    return summary


def run_evolve(ctx: RunContext) -> dict:
    """Trajectory for steps 0..n_max"""
    spec = ctx.config.chain_spec()
    walk = _walk(spec, ctx.regime)
    trajectory = walk.evolve(steps=ctx.options.n_max)
    nodes = walk.graph.nodes

    if ctx.regime == QUANTUM:
        columns = ['n'] + [f"{node}_{part}" for node in nodes for part in ('re', 'im', 'abs2')]
    else:
        columns = ['n'] + list(nodes)
    columns += ['p_D', 'p_T']

    drop, thru = trajectory.drop(), trajectory.thru()
    records = []
    for state in trajectory:
        record = {'n': state.step, 'p_D': drop[state.step], 'p_T': thru[state.step]}
        for node, value in zip(nodes, state.values):
            if ctx.regime == QUANTUM:
                record[f"{node}_re"] = value.real
                record[f"{node}_im"] = value.imag
                record[f"{node}_abs2"] = abs(value) ** 2
            else:
                record[node] = value
        records.append(record)

    write_records(ctx.out, records, columns, ctx.resolved, ctx.fmt)
    return {'steps': ctx.options.n_max, 'p_D': float(drop[-1]), 'p_T': float(thru[-1])}


def run_sweep(ctx: RunContext) -> dict:
    """Steady-state metric over a 2D grid"""
    sweep = ctx.config.sweep
    _require(sweep, 'axis1', 'axis1_start', 'axis1_stop', 'axis1_samples',
             'axis2', 'axis2_start', 'axis2_stop', 'axis2_samples', 'metric')
    axis1 = Axis(sweep.axis1, sweep.axis1_start, sweep.axis1_stop, sweep.axis1_samples)
    axis2 = Axis(sweep.axis2, sweep.axis2_start, sweep.axis2_stop, sweep.axis2_samples)
    grid = sweep2d(
        ctx.config.chain_spec(), axis1, axis2, sweep.metric,
        scenario=sweep.scenario, tol=ctx.options.tol, threads=ctx.options.threads,
    )
    write_grid(ctx.out, grid, ctx.resolved, ctx.fmt, gnuplot=ctx.gnuplot)
    (min1, min2, min_value), (max1, max2, max_value) = grid.argmin(), grid.argmax()
    return {
        'metric': grid.metric,
        'min': {grid.axis1_name: min1, grid.axis2_name: min2, 'value': min_value},
        'max': {grid.axis1_name: max1, grid.axis2_name: max2, 'value': max_value},
    }


def run_timegrid(ctx: RunContext) -> dict:
    """Cumulative Drop probability over (step, axis)"""
    axis = _sweep_axis(ctx)
    grid = time_grid(ctx.config.chain_spec(), axis, ctx.options.n_max, ctx.regime, scenario=ctx.config.sweep.scenario)
    write_grid(ctx.out, grid, ctx.resolved, ctx.fmt, gnuplot=ctx.gnuplot)
    fluctuations = [fluctuation_amplitude(grid.values[:, j]) for j in range(grid.values.shape[1])]
    widest = int(np.argmax(fluctuations))
    return {
        'metric': grid.metric,
        'max_fluctuation': fluctuations[widest],
        'max_fluctuation_at': float(grid.axis2_values[widest]),
    }


def run_hit(ctx: RunContext) -> dict:
    """Goal-hitting time, optionally tabulated over one axis"""
    spec = ctx.config.chain_spec()
    options = ctx.options
    if ctx.config.sweep.axis is None:
        rows = [(None, hitting_time(spec, ctx.regime, options.p_g, options.n_max, options.tol))]
        axis_name = 'value'
    else:
        axis = _sweep_axis(ctx)
        rows = hitting_curve(spec, axis, ctx.regime, options.p_g, options.n_max,
                             scenario=ctx.config.sweep.scenario, tol=options.tol)
        axis_name = axis.name

    columns = [axis_name, 'p_g', 'reachable', 'steps', 'seconds', 'steady_value']
    records = [dict(result.to_dict(), **{axis_name: value}) for value, result in rows]
    write_records(ctx.out, records, columns, ctx.resolved, ctx.fmt, meta={'regime': ctx.regime})
    reached = [r['steps'] for r in records if r['reachable']]
    logger.info(f"Goal p_g={options.p_g:.6g} reached for {len(reached)}/{len(records)} sample(s)")
    summary = {'p_g': options.p_g, 'reachable': len(reached), 'samples': len(records)}
    if len(records) == 1:
        summary['steps'] = records[0]['steps']
    return summary


def run_phase_avg(ctx: RunContext) -> dict:
    """Phase-averaged quantum Drop probability against the classical value"""
    spec = ctx.config.chain_spec()
    if spec.num_rings != 1:
        raise SpecValidationError(f"phase averaging covers a single ring, got {spec.num_rings}")
    alpha = spec.loss_per_round[0]
    samples = ctx.options.samples
    sweep = ctx.config.sweep

    if sweep.axis1 is not None:
        _require(sweep, 'axis1_start', 'axis1_stop', 'axis1_samples', 'axis2', 'axis2_start', 'axis2_stop', 'axis2_samples')
        grid = phase_average_grid(
            Axis(sweep.axis1, sweep.axis1_start, sweep.axis1_stop, sweep.axis1_samples),
            Axis(sweep.axis2, sweep.axis2_start, sweep.axis2_stop, sweep.axis2_samples),
            alpha, samples,
        )
        classical = np.array([[closed_form_single(k1, k2, alpha)[0] for k2 in grid.axis2_values]
                              for k1 in grid.axis1_values])
        write_grid(ctx.out, grid, ctx.resolved, ctx.fmt, gnuplot=ctx.gnuplot)
        return {'samples': samples, 'max_abs_diff': float(np.max(np.abs(grid.values - classical)))}

    k1, k2 = spec.couplings
    average = phase_average(k1, k2, alpha, samples)
    classical = closed_form_single(k1, k2, alpha)[0]
    record = {
        'k1': k1, 'k2': k2, 'alpha': alpha, 'samples': samples,
        'phase_average': average, 'classical': classical, 'abs_diff': abs(average - classical),
    }
    write_records(ctx.out, [record], list(record), ctx.resolved, ctx.fmt)
    return {'phase_average': average, 'classical': classical, 'abs_diff': record['abs_diff']}


def run_coupler(ctx: RunContext) -> dict:
    """Coupler κ², optional κ² table over (gap, length) and bend-loss limits"""
    section = ctx.config.coupler
    spec = ctx.config.coupler_spec()
    beat = beat_length(spec.wavelength, spec.n_eff1, spec.n_eff2)
    length = effective_length(spec)
    summary = {
        'beat_length': beat,
        'effective_length': length,
        'kappa2': coupling_coefficient(length, beat),
    }

    if section.bend_loss_table is not None:
        if section.min_transmission is None:
            raise SpecValidationError("[coupler] bend_loss_table needs min_transmission")
        table = load_bend_loss_table(section.bend_loss_table)
        summary['min_radius'] = min_radius_for_loss(table, section.min_transmission)
        if section.group_index is not None:
            summary['max_fsr'] = max_free_spectral_range(
                table, section.min_transmission, spec.wavelength, section.group_index
            )

    lists = (section.gaps, section.straight_lengths, section.delta_n)
    if any(item is not None for item in lists):
        if any(item is None for item in lists):
            raise SpecValidationError("[coupler] gaps, straight_lengths and delta_n go together")
        grid = coupling_table(spec, section.gaps, section.straight_lengths, section.delta_n)
        grid.fixed.update(summary)
        write_grid(ctx.out, grid, ctx.resolved, ctx.fmt, gnuplot=ctx.gnuplot)
    else:
        write_records(ctx.out, [summary], list(summary), ctx.resolved, ctx.fmt)
    logger.info(f"Coupler: L_b={beat:.6g} m, L_e={length:.6g} m, kappa^2={summary['kappa2']:.6g}")
    return summary


HANDLERS = {
    'steady': run_steady,
    'evolve': run_evolve,
    'sweep': run_sweep,
    'timegrid': run_timegrid,
    'hit': run_hit,
    'phase-avg': run_phase_avg,
    'coupler': run_coupler,
}


def run(ctx: RunContext) -> dict:
    return HANDLERS[ctx.config.run.subcommand](ctx)
