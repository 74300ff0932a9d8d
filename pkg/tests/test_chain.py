"""
Tests for chain graphs, transition matrices and geometry conversion
"""
import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chain.builder import (
    build_chain, check_isometry, check_stochastic, classical_transfer_matrix, dump_matrix_csv,
    quantum_transfer_matrix, transfer_matrix,
)
from chain.geometry import half_ring_time, loss_from_geometry, phase_from_geometry, principal_phase
from chain.models import CLASSICAL, QUANTUM, RingChainSpec, scenario_couplings
from tests.conftest import losses, phases, probabilities, random_spec
from utils.errors import SpecValidationError


class TestGraph:
    def test_node_order_single_ring(self, single_ring):
        graph = build_chain(single_ring())
        assert graph.nodes == ('P0', 'P1', 'P2', 'PD', 'PT')
        assert graph.drop_index == 3
        assert graph.thru_index == 4
        assert graph.transient == (0, 1, 2)

    def test_node_order_double_ring(self, double_ring):
        graph = build_chain(double_ring())
        assert graph.nodes == ('P0', 'P1', 'P2', 'P3', 'P4', 'PD', 'PT')
        assert graph.index('PD') == 5

    def test_every_transient_node_has_two_exits(self):
        graph = build_chain(RingChainSpec.uniform(4, 0.3))
        sources = [edge.source for edge in graph.edges]
        for node in graph.transient:
            assert sources.count(node) == 2

    def test_unknown_node(self, single_ring):
        with pytest.raises(SpecValidationError):
            build_chain(single_ring()).index('P9')


class TestClassicalMatrix:
    def test_single_ring_entries(self, single_ring):
        tm = classical_transfer_matrix(build_chain(single_ring(k1=0.3, k2=0.6, alpha=0.81)))
        expected = np.zeros((5, 5))
        expected[1, 0], expected[4, 0] = 0.3, 0.7
        expected[2, 1], expected[3, 1] = 0.4 * 0.9, 0.6 * 0.9
        expected[1, 2], expected[4, 2] = 0.7 * 0.9, 0.3 * 0.9
        expected[3, 3] = expected[4, 4] = 1.0
        np.testing.assert_allclose(tm.matrix, expected, rtol=0, atol=1e-15)

    def test_double_ring_entries(self):
        spec = RingChainSpec(num_rings=2, couplings=(0.2, 0.5, 0.7), loss_per_round=(1.0, 0.64))
        m = classical_transfer_matrix(build_chain(spec)).matrix
        assert m[1, 0] == pytest.approx(0.2)
        assert m[6, 0] == pytest.approx(0.8)
        assert m[2, 1] == pytest.approx(0.5)
        assert m[3, 1] == pytest.approx(0.5)
        assert m[1, 2] == pytest.approx(0.8)
        assert m[6, 2] == pytest.approx(0.2)
        assert m[4, 3] == pytest.approx(0.3 * 0.8)
        assert m[5, 3] == pytest.approx(0.7 * 0.8)
        assert m[2, 4] == pytest.approx(0.5 * 0.8)
        assert m[3, 4] == pytest.approx(0.5 * 0.8)

    def test_matrix_is_read_only(self, single_ring):
        tm = classical_transfer_matrix(build_chain(single_ring()))
        with pytest.raises(ValueError):
            tm.matrix[0, 0] = 1.0

    @given(num_rings=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_lossless_columns_are_stochastic(self, num_rings, seed):
        spec = random_spec(np.random.default_rng(seed), num_rings, lossless=True)
        tm = classical_transfer_matrix(build_chain(spec))
        assert check_stochastic(tm)
        np.testing.assert_allclose(tm.column_sums(), 1.0, atol=1e-12)

    @given(num_rings=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_lossy_columns_are_substochastic(self, num_rings, seed):
        spec = random_spec(np.random.default_rng(seed), num_rings)
        tm = classical_transfer_matrix(build_chain(spec))
        assert check_stochastic(tm)
        assert np.all(tm.matrix >= 0)


class TestQuantumMatrix:
    def test_single_ring_entries(self, single_ring):
        theta = 0.7
        tm = quantum_transfer_matrix(build_chain(single_ring(k1=0.3, k2=0.6, alpha=0.81, theta=theta)))
        half = 0.9 * np.exp(0.5j * theta)
        m = tm.matrix
        assert m[1, 0] == pytest.approx(-math.sqrt(0.3))
        assert m[4, 0] == pytest.approx(math.sqrt(0.7))
        assert m[2, 1] == pytest.approx(math.sqrt(0.4) * half)
        assert m[3, 1] == pytest.approx(math.sqrt(0.6) * half)
        assert m[1, 2] == pytest.approx(math.sqrt(0.7) * half)
        assert m[4, 2] == pytest.approx(math.sqrt(0.3) * half)

    def test_backward_inter_ring_hop_is_negative(self):
        spec = RingChainSpec(num_rings=2, couplings=(0.5, 0.5, 0.5))
        m = quantum_transfer_matrix(build_chain(spec)).matrix
        assert m[2, 4].real == pytest.approx(-math.sqrt(0.5))
        assert m[3, 1].real == pytest.approx(math.sqrt(0.5))

    def test_half_phase_is_unreduced(self, single_ring):
        # θ = 2π + 1 must give e^{i(π + 1/2)}, not e^{i/2}
        m = quantum_transfer_matrix(build_chain(single_ring(k1=0.0, k2=0.0, theta=2 * math.pi + 1))).matrix
        assert m[2, 1] == pytest.approx(np.exp(1j * (math.pi + 0.5)))

    @given(num_rings=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_lossless_matrix_is_isometric_on_transient_nodes(self, num_rings, seed):
        spec = random_spec(np.random.default_rng(seed), num_rings, lossless=True)
        assert check_isometry(quantum_transfer_matrix(build_chain(spec)))

    @given(k1=probabilities, k2=probabilities, alpha=losses, theta=phases)
    @settings(max_examples=100, deadline=None)
    def test_column_norms_bounded_by_one(self, k1, k2, alpha, theta):
        spec = RingChainSpec(num_rings=1, couplings=(k1, k2), loss_per_round=alpha, phases=theta)
        tm = quantum_transfer_matrix(build_chain(spec))
        assert np.all(tm.column_norms() <= 1.0 + 1e-12)

    def test_lossy_matrix_is_not_isometric(self, single_ring):
        assert not check_isometry(quantum_transfer_matrix(build_chain(single_ring(alpha=0.5))))

    @given(num_rings=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_same_nonzero_pattern_as_classical(self, num_rings, seed):
        graph = build_chain(random_spec(np.random.default_rng(seed), num_rings))
        classical = classical_transfer_matrix(graph).matrix
        quantum = quantum_transfer_matrix(graph).matrix
        np.testing.assert_array_equal(classical != 0, quantum != 0)

    def test_pattern_follows_zero_couplings(self):
        graph = build_chain(RingChainSpec(num_rings=2, couplings=(1.0, 0.0, 1.0)))
        classical = classical_transfer_matrix(graph).matrix
        quantum = quantum_transfer_matrix(graph).matrix
        np.testing.assert_array_equal(classical != 0, quantum != 0)
        np.testing.assert_allclose(np.abs(quantum) ** 2, classical, atol=1e-15)


class TestBuildChecks:
    def test_classical_build_rejects_non_stochastic_matrix(self, monkeypatch, single_ring):
        monkeypatch.setattr('chain.builder.check_stochastic', lambda tm: False)
        with pytest.raises(SpecValidationError):
            classical_transfer_matrix(build_chain(single_ring()))

    def test_quantum_build_rejects_non_isometric_lossless_matrix(self, monkeypatch, single_ring):
        monkeypatch.setattr('chain.builder.check_isometry', lambda tm: False)
        with pytest.raises(SpecValidationError):
            quantum_transfer_matrix(build_chain(single_ring()))

    def test_lossy_quantum_build_skips_isometry(self, monkeypatch, single_ring):
        monkeypatch.setattr('chain.builder.check_isometry', lambda tm: False)
        assert quantum_transfer_matrix(build_chain(single_ring(alpha=0.5))).kind == QUANTUM


class TestSpecValidation:
    @pytest.mark.parametrize('kwargs', [
        {'num_rings': 0, 'couplings': (0.5,)},
        {'num_rings': 1, 'couplings': (0.5, 0.5, 0.5)},
        {'num_rings': 1, 'couplings': (1.5, 0.5)},
        {'num_rings': 1, 'couplings': (-0.1, 0.5)},
        {'num_rings': 1, 'couplings': (0.5, 0.5), 'loss_per_round': 0.0},
        {'num_rings': 1, 'couplings': (0.5, 0.5), 'loss_per_round': 1.2},
        {'num_rings': 2, 'couplings': (0.5, 0.5, 0.5), 'phases': (0.0,) * 3},
        {'num_rings': 1, 'couplings': (0.5, 0.5), 'phases': math.inf},
    ])
    def test_rejects_invalid_specs(self, kwargs):
        with pytest.raises(SpecValidationError):
            RingChainSpec(**kwargs)

    def test_defaults_are_lossless_and_resonant(self):
        spec = RingChainSpec(num_rings=2, couplings=(0.1, 0.2, 0.3))
        assert spec.loss_per_round == (1.0, 1.0)
        assert spec.phases == (0.0, 0.0)
        assert spec.transmissions == pytest.approx((0.9, 0.8, 0.7))

    def test_unknown_regime(self, single_ring):
        with pytest.raises(SpecValidationError):
            transfer_matrix(single_ring(), 'semiclassical')

    def test_round_trip_factors(self):
        spec = RingChainSpec(num_rings=2, couplings=(0.5,) * 3, loss_per_round=(0.9, 0.8), phases=(0.0, math.pi))
        np.testing.assert_allclose(spec.round_trip_factors(), [0.9, -0.8], atol=1e-15)

    def test_scenarios(self):
        assert scenario_couplings(0.3, 0.6, 1) == pytest.approx((0.3, 0.6, 0.7))
        assert scenario_couplings(0.3, 0.6, 2) == pytest.approx((0.3, 0.6, 0.3))
        with pytest.raises(SpecValidationError):
            scenario_couplings(0.3, 0.6, 3)


class TestGeometry:
    def test_phase_from_geometry(self):
        radius, n_eff, wavelength = 10e-6, 2.0, 1.55e-6
        expected = 2 * math.pi * n_eff * 2 * math.pi * radius / wavelength
        assert phase_from_geometry(radius, n_eff, wavelength) == pytest.approx(expected, rel=1e-15)
        assert 0 <= phase_from_geometry(radius, n_eff, wavelength, reduce=True) < 2 * math.pi

    def test_principal_phase(self):
        assert principal_phase(2 * math.pi + 0.25) == pytest.approx(0.25)
        assert principal_phase(-0.25) == pytest.approx(2 * math.pi - 0.25)

    def test_loss_from_geometry(self):
        assert loss_from_geometry(0.0, 0.0, 1e-3) == 1.0
        assert loss_from_geometry(100.0, 50.0, 1e-3, 1e-4) == pytest.approx(math.exp(-(100 * 1.1e-3 + 50 * 1e-3)))

    def test_half_ring_time(self):
        assert half_ring_time(10e-6, 1.5) == pytest.approx(math.pi * 10e-6 * 1.5 / 299_792_458)

    def test_geometry_derives_phase_and_loss(self):
        spec = RingChainSpec.from_geometry(
            couplings=(0.5, 0.5), radius=20e-6, n_eff=2.2, wavelength=1.55e-6, absorption=10.0
        )
        assert spec.phases[0] == pytest.approx(phase_from_geometry(20e-6, 2.2, 1.55e-6))
        assert spec.loss_per_round[0] == pytest.approx(math.exp(-10.0 * 2 * math.pi * 20e-6))
        assert spec.step_duration() == pytest.approx(half_ring_time(20e-6, 2.2))

    @pytest.mark.parametrize('regime', [CLASSICAL, QUANTUM])
    def test_geometry_and_explicit_parameters_give_same_matrix(self, regime):
        radii, n_eff, wavelength = (20e-6, 23e-6), 2.2, 1.55e-6
        from_geometry = RingChainSpec.from_geometry(
            couplings=(0.3, 0.6, 0.4), radius=radii, n_eff=n_eff, wavelength=wavelength,
            coupler_length=5e-6, absorption=10.0, bending_loss=4.0,
        )
        explicit = RingChainSpec(
            num_rings=2,
            couplings=(0.3, 0.6, 0.4),
            loss_per_round=tuple(loss_from_geometry(10.0, 4.0, 2 * math.pi * r, 5e-6) for r in radii),
            phases=tuple(phase_from_geometry(r, n_eff, wavelength) for r in radii),
        )
        np.testing.assert_allclose(
            transfer_matrix(from_geometry, regime).matrix, transfer_matrix(explicit, regime).matrix, rtol=0, atol=1e-12
        )

    def test_explicit_values_must_match_geometry(self):
        geometry = RingChainSpec.from_geometry(couplings=(0.5, 0.5), radius=20e-6, n_eff=2.2, wavelength=1.55e-6).geometry
        with pytest.raises(SpecValidationError):
            RingChainSpec(num_rings=1, couplings=(0.5, 0.5), phases=0.1, geometry=geometry)

    def test_unequal_radii_have_no_step_duration(self):
        spec = RingChainSpec.from_geometry(
            couplings=(0.5, 0.5, 0.5), radius=(10e-6, 12e-6), n_eff=2.2, wavelength=1.55e-6
        )
        assert spec.step_duration() is None

    def test_with_geometry_rederives_phase(self):
        spec = RingChainSpec.from_geometry(couplings=(0.5, 0.5), radius=10e-6, n_eff=2.2, wavelength=1.55e-6)
        shifted = spec.with_geometry(wavelength=1.56e-6)
        assert shifted.phases[0] == pytest.approx(phase_from_geometry(10e-6, 2.2, 1.56e-6))


def test_dump_matrix_csv(tmp_path, single_ring):
    path = tmp_path / 'matrix.csv'
    tm = transfer_matrix(single_ring(k1=0.25, k2=0.5, theta=1.0), QUANTUM)
    dump_matrix_csv(tm, str(path))
    frame = pd.read_csv(path, index_col=0, dtype=str)
    assert list(frame.columns) == list(tm.graph.nodes)
    re, im = (float(part) for part in frame.loc['PT', 'P0'].split(','))
    assert complex(re, im) == pytest.approx(math.sqrt(0.75))

    classical_path = tmp_path / 'classical.csv'
    dump_matrix_csv(transfer_matrix(single_ring(k1=0.25), CLASSICAL), str(classical_path))
    assert float(pd.read_csv(classical_path, index_col=0).loc['P1', 'P0']) == 0.25


def test_dump_matrix_csv_keeps_full_precision(tmp_path, single_ring):
    tm = transfer_matrix(single_ring(k1=0.3, k2=0.7, theta=1.234, alpha=0.9), QUANTUM)
    path = tmp_path / 'matrix.csv'
    dump_matrix_csv(tm, str(path))
    frame = pd.read_csv(path, index_col=0, dtype=str)
    for i, target in enumerate(tm.graph.nodes):
        for j, source in enumerate(tm.graph.nodes):
            re, im = (float(part) for part in frame.loc[target, source].split(','))
            assert complex(re, im) == tm.matrix[i, j]
