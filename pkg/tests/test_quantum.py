"""
Tests for the quantum walk, steady amplitudes and amplitude path sums
"""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.signal import argrelmax

from chain.models import RingChainSpec
from tests.conftest import losses, open_probabilities, phases, random_spec
from utils.errors import SpecValidationError
from walks.base import step_arrivals
from walks.classical import ClassicalWalk
from walks.quantum import (
    QuantumWalk, RoundTripFactor, classical_path_factors, classical_to_quantum_substitution,
    drop_probability_single, intensity_closed_form_single, path_sum_amplitude_oracle,
    steady_amplitudes, steady_amplitudes_double, steady_amplitudes_single,
)


class TestEvolve:
    def test_resonant_build_up(self, single_ring):
        drop = QuantumWalk.from_spec(single_ring()).evolve(steps=6).drop()
        assert drop[2] == pytest.approx(0.25)
        assert drop[4] == pytest.approx(0.5625)
        assert drop[6] == pytest.approx(0.765625)

    def test_first_amplitudes(self, single_ring):
        spec = single_ring(k1=0.3, k2=0.6, theta=1.1)
        walk = QuantumWalk.from_spec(spec)
        trajectory = walk.evolve(steps=2)
        assert walk.amplitudes(trajectory[1]).a_thru == pytest.approx(math.sqrt(0.7))
        expected = -math.sqrt(0.3 * 0.6) * RoundTripFactor(1.0, 1.1).half
        assert walk.amplitudes(trajectory[2]).a_drop == pytest.approx(expected)

    def test_no_input_coupling(self, single_ring):
        walk = QuantumWalk.from_spec(single_ring(k1=0.0, theta=0.7))
        trajectory = walk.evolve(steps=4)
        assert walk.amplitudes(trajectory[4]).a_thru == pytest.approx(1.0)
        assert trajectory.drop()[4] == 0.0

    def test_antiresonant_limit(self, single_ring):
        drop = QuantumWalk.from_spec(single_ring(theta=math.pi)).evolve(steps=200).drop()
        assert drop[-1] == pytest.approx(1 / 9, abs=1e-8)

    def test_rejects_oversized_initial_state(self, single_ring):
        walk = QuantumWalk.from_spec(single_ring())
        with pytest.raises(SpecValidationError):
            walk.evolve(np.array([1.0, 1.0, 0, 0, 0], dtype=complex), steps=1)

    def test_accepts_superposed_initial_state(self, single_ring):
        walk = QuantumWalk.from_spec(single_ring())
        initial = np.array([1.0, 1.0j, 0, 0, 0]) / math.sqrt(2)
        assert len(walk.evolve(initial, steps=3)) == 4

    def test_norm_identity(self, rng):
        for _ in range(100):
            walk = QuantumWalk.from_spec(random_spec(rng, int(rng.integers(1, 4)), lossless=True))
            trajectory = walk.evolve(steps=60)
            f_drop, f_thru = step_arrivals(trajectory)
            arrived = np.cumsum(np.abs(f_drop) ** 2 + np.abs(f_thru) ** 2)
            transient = np.linalg.norm(trajectory.values[:, list(walk.graph.transient)], axis=1) ** 2
            np.testing.assert_allclose(transient + arrived, 1.0, atol=1e-12)

    def test_one_step_isometry_on_transient_states(self, rng):
        for draw in range(100):
            walk = QuantumWalk.from_spec(random_spec(rng, 1 + draw % 3, lossless=True))
            x = np.zeros(walk.graph.dimension, dtype=complex)
            transient = list(walk.graph.transient)
            x[transient] = rng.normal(size=len(transient)) + 1j * rng.normal(size=len(transient))
            x /= np.linalg.norm(x)
            assert np.linalg.norm(walk.matrix @ x) == pytest.approx(1.0, abs=1e-12)

    def test_lossy_transient_weight_shrinks(self, rng):
        walk = QuantumWalk.from_spec(random_spec(rng, 2))
        trajectory = walk.evolve(steps=50)
        weights = [walk.transient_weight(state.values) for state in trajectory]
        assert all(b <= a + 1e-15 for a, b in zip(weights, weights[1:]))

    def test_resonance_dominates_classical(self):
        for k in np.linspace(0.0, 1.0, 21):
            spec = RingChainSpec(num_rings=1, couplings=(k, k))
            quantum = QuantumWalk.from_spec(spec).evolve(steps=100).drop()
            classical = ClassicalWalk.from_spec(spec).evolve(steps=100).drop()
            assert np.all(quantum >= classical - 1e-12)
            assert np.all(np.diff(quantum) >= -1e-15)

    def test_steady_state_uses_amplitude_norm(self, single_ring):
        walk = QuantumWalk.from_spec(single_ring(theta=math.pi))
        state = walk.steady_state(tol=1e-12)
        assert walk.amplitudes(state).p_drop == pytest.approx(1 / 9, abs=1e-10)

    @pytest.mark.parametrize('num_rings', [2, 3])
    def test_full_and_zero_couplings_converge(self, num_rings):
        for couplings in itertools.product((0.0, 1.0), repeat=num_rings + 1):
            spec = RingChainSpec(num_rings=num_rings, couplings=couplings, phases=0.4)
            walk = QuantumWalk.from_spec(spec)
            iterated = walk.amplitudes(walk.steady_state())
            solved = walk.amplitudes(walk.absorption_solve())
            assert iterated.a_drop == pytest.approx(solved.a_drop, abs=1e-12)
            assert iterated.a_thru == pytest.approx(solved.a_thru, abs=1e-12)
            assert iterated.p_drop + iterated.p_thru == pytest.approx(1.0, abs=1e-12)

    def test_long_detour_matches_closed_form(self):
        spec = RingChainSpec(num_rings=2, couplings=(1.0, 1.0, 0.0), phases=(0.3, 1.2))
        walk = QuantumWalk.from_spec(spec)
        iterated = walk.amplitudes(walk.steady_state())
        closed = steady_amplitudes(spec)
        assert (iterated.p_drop, iterated.p_thru) == (pytest.approx(0.0, abs=1e-15), pytest.approx(1.0))
        assert iterated.a_thru == pytest.approx(closed.a_thru, abs=1e-12)

    def test_forced_path_through_three_rings(self):
        walk = QuantumWalk.from_spec(RingChainSpec.uniform(3, 1.0, theta=0.9))
        assert walk.amplitudes(walk.steady_state()).p_drop == pytest.approx(1.0, abs=1e-12)


class TestSteadyAmplitudes:
    def test_resonance_is_total_drop(self):
        for k in np.linspace(0.05, 0.95, 19):
            assert steady_amplitudes_single(k, k, RoundTripFactor()).p_drop == pytest.approx(1.0, abs=1e-12)

    def test_antiresonance(self):
        result = steady_amplitudes_single(0.5, 0.5, RoundTripFactor(1.0, math.pi))
        assert result.p_drop == pytest.approx(1 / 9, abs=1e-14)
        assert result.p_thru == pytest.approx(8 / 9, abs=1e-14)

    @given(k2=open_probabilities, theta=phases)
    @settings(max_examples=50, deadline=None)
    def test_full_input_coupling(self, k2, theta):
        assert steady_amplitudes_single(1.0, k2, RoundTripFactor(1.0, theta)).p_drop == pytest.approx(k2, abs=1e-12)

    @pytest.mark.parametrize('k', np.round(np.linspace(0.05, 0.95, 19), 2))
    def test_resonant_evolution_reaches_full_drop(self, single_ring, k):
        walk = QuantumWalk.from_spec(single_ring(k1=k, k2=k))
        final = walk.amplitudes(walk.evolve(steps=10_000)[-1])
        closed = steady_amplitudes_single(k, k, RoundTripFactor())
        assert final.p_drop == pytest.approx(1.0, abs=1e-6)
        assert final.a_drop == pytest.approx(closed.a_drop, abs=1e-8)
        assert final.a_thru == pytest.approx(closed.a_thru, abs=1e-8)

    @pytest.mark.parametrize('alpha', [0.5, 0.81, 0.95])
    def test_full_input_coupling_with_loss_applies_alpha_once(self, single_ring, alpha):
        # |a_D|² = k2 α, the intensity form gives k2 α^{1/2}
        closed = steady_amplitudes_single(1.0, 0.5, RoundTripFactor(alpha, 0.3))
        assert closed.p_drop == pytest.approx(0.5 * alpha, abs=1e-12)
        walk = QuantumWalk.from_spec(single_ring(k1=1.0, k2=0.5, alpha=alpha, theta=0.3))
        assert walk.amplitudes(walk.steady_state()).p_drop == pytest.approx(0.5 * alpha, abs=1e-12)
        assert intensity_closed_form_single(1.0, 0.5, alpha, 0.3)[0] == pytest.approx(0.5 * math.sqrt(alpha))

    def test_degenerate_point(self):
        result = steady_amplitudes_single(0.0, 0.0, RoundTripFactor())
        assert (result.a_drop, result.a_thru) == (0j, 1 + 0j)

    @given(k1=open_probabilities, k2=open_probabilities, theta=phases)
    @settings(max_examples=100, deadline=None)
    def test_single_ring_lossless_sum(self, k1, k2, theta):
        result = steady_amplitudes_single(k1, k2, RoundTripFactor(1.0, theta))
        assert result.p_drop + result.p_thru == pytest.approx(1.0, abs=1e-10)

    @given(k1=open_probabilities, k2=open_probabilities, k3=open_probabilities, theta1=phases, theta2=phases)
    @settings(max_examples=100, deadline=None)
    def test_double_ring_lossless_sum(self, k1, k2, k3, theta1, theta2):
        result = steady_amplitudes_double(k1, k2, k3, RoundTripFactor(1.0, theta1), RoundTripFactor(1.0, theta2))
        assert result.p_drop + result.p_thru == pytest.approx(1.0, abs=1e-10)

    def test_double_ring_forced_path(self):
        result = steady_amplitudes_double(1.0, 1.0, 1.0, RoundTripFactor(1.0, 0.4), RoundTripFactor(1.0, 2.2))
        assert result.p_drop == pytest.approx(1.0)

    def test_double_ring_matches_long_evolution(self, rng):
        for _ in range(50):
            spec = random_spec(rng, 2, k_low=0.1, k_high=0.9)
            walk = QuantumWalk.from_spec(spec)
            final = walk.amplitudes(walk.evolve(steps=10_000)[-1])
            closed = steady_amplitudes(spec)
            assert closed.p_drop == pytest.approx(final.p_drop, abs=1e-6)
            assert closed.p_thru == pytest.approx(final.p_thru, abs=1e-6)

    def test_single_ring_matches_absorption_solve(self, rng):
        for _ in range(20):
            spec = random_spec(rng, 1, k_low=0.05, k_high=0.95)
            walk = QuantumWalk.from_spec(spec)
            solved = walk.amplitudes(walk.absorption_solve())
            closed = steady_amplitudes(spec)
            assert closed.a_drop == pytest.approx(solved.a_drop, abs=1e-12)
            assert closed.a_thru == pytest.approx(solved.a_thru, abs=1e-12)

    @given(k1=open_probabilities, k2=open_probabilities, theta=phases)
    @settings(max_examples=50, deadline=None)
    def test_drop_symmetric_in_couplings(self, k1, k2, theta):
        forward = steady_amplitudes_single(k1, k2, RoundTripFactor(1.0, theta)).p_drop
        swapped = steady_amplitudes_single(k2, k1, RoundTripFactor(1.0, theta)).p_drop
        assert forward == pytest.approx(swapped, abs=1e-12)

    def test_no_closed_form_beyond_two_rings(self):
        with pytest.raises(SpecValidationError):
            steady_amplitudes(RingChainSpec.uniform(3, 0.5))

    def test_round_trip_factor_validation(self):
        with pytest.raises(SpecValidationError):
            RoundTripFactor(alpha=0.0)
        with pytest.raises(SpecValidationError):
            RoundTripFactor(alpha=1.2)

    def test_half_factor_keeps_unreduced_phase(self):
        gamma = RoundTripFactor(1.0, 3 * math.pi)
        assert gamma.half == pytest.approx(-1j)
        assert gamma.half ** 2 == pytest.approx(gamma.value)

    def test_two_identical_rings_split_the_resonance(self):
        thetas = np.linspace(0.0, 2 * math.pi, 10_000, endpoint=False)
        drop = np.array([
            steady_amplitudes_double(0.5, 0.5, 0.5, RoundTripFactor(1.0, th), RoundTripFactor(1.0, th)).p_drop
            for th in thetas
        ])
        peaks = argrelmax(drop, mode='wrap')[0]
        assert len(peaks) == 2
        assert drop[peaks] == pytest.approx([1.0, 1.0], abs=1e-5)


class TestVectorisedForms:
    @given(k1=open_probabilities, k2=open_probabilities, alpha=losses)
    @settings(max_examples=50, deadline=None)
    def test_drop_probability_matches_amplitudes(self, k1, k2, alpha):
        thetas = np.linspace(-math.pi, math.pi, 9)
        expected = [steady_amplitudes_single(k1, k2, RoundTripFactor(alpha, th)).p_drop for th in thetas]
        np.testing.assert_allclose(drop_probability_single(k1, k2, alpha, thetas), expected, atol=1e-12)

    def test_drop_probability_degenerate_point(self):
        assert drop_probability_single(0.0, 0.0, 1.0, np.array([0.0]))[0] == 0.0

    @given(k1=open_probabilities, k2=open_probabilities, theta=phases)
    @settings(max_examples=50, deadline=None)
    def test_intensity_form_agrees_without_loss(self, k1, k2, theta):
        result = steady_amplitudes_single(k1, k2, RoundTripFactor(1.0, theta))
        p_drop, p_thru = intensity_closed_form_single(k1, k2, 1.0, theta)
        assert p_drop == pytest.approx(result.p_drop, abs=1e-12)
        assert p_thru == pytest.approx(result.p_thru, abs=1e-12)

    def test_intensity_form_with_loss(self):
        p_drop, _ = intensity_closed_form_single(1.0, 0.5, 0.81, 0.0)
        assert p_drop == pytest.approx(0.5 * 0.9)


class TestAmplitudeOracle:
    def test_first_steps(self, single_ring):
        spec = single_ring(k1=0.3, k2=0.6, theta=0.8)
        gamma = RoundTripFactor(1.0, 0.8)
        assert path_sum_amplitude_oracle(spec, 1).a_thru == pytest.approx(math.sqrt(0.7))
        assert path_sum_amplitude_oracle(spec, 2).a_drop == pytest.approx(-math.sqrt(0.18) * gamma.half)
        assert path_sum_amplitude_oracle(spec, 0).a_thru == 0

    def test_matches_evolution(self, rng):
        for _ in range(50):
            spec = random_spec(rng, 1)
            walk = QuantumWalk.from_spec(spec)
            trajectory = walk.evolve(steps=20)
            for n in range(21):
                oracle = path_sum_amplitude_oracle(spec, n)
                evolved = walk.amplitudes(trajectory[n])
                assert oracle.a_drop == pytest.approx(evolved.a_drop, abs=1e-12)
                assert oracle.a_thru == pytest.approx(evolved.a_thru, abs=1e-12)

    def test_rejects_two_rings(self, double_ring):
        with pytest.raises(SpecValidationError):
            path_sum_amplitude_oracle(double_ring(), 4)


class TestSubstitution:
    @given(k1=open_probabilities, k2=open_probabilities, alpha=losses, theta=phases)
    @settings(max_examples=50, deadline=None)
    def test_classical_factors_reproduce_closed_form(self, k1, k2, alpha, theta):
        factors = classical_path_factors(k1, k2, alpha)
        t1, t2 = 1 - k1, 1 - k2
        assert factors.drop() == pytest.approx(k1 * k2 * math.sqrt(alpha) / (1 - t1 * t2 * alpha), abs=1e-12)
        assert factors.thru() == pytest.approx(
            (t1 + t2 * alpha - 2 * t1 * t2 * alpha) / (1 - t1 * t2 * alpha), abs=1e-12
        )

    @given(k1=open_probabilities, k2=open_probabilities, alpha=losses, theta=phases)
    @settings(max_examples=50, deadline=None)
    def test_substitution_yields_quantum_amplitudes(self, k1, k2, alpha, theta):
        quantum = classical_to_quantum_substitution(classical_path_factors(k1, k2, alpha), theta)
        expected = steady_amplitudes_single(k1, k2, RoundTripFactor(alpha, theta))
        assert quantum.drop() == pytest.approx(expected.a_drop, abs=1e-12)
        assert quantum.thru() == pytest.approx(expected.a_thru, abs=1e-12)
