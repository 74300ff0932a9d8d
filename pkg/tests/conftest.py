"""
Shared fixtures and hypothesis strategies
"""
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from chain.models import RingChainSpec

probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
open_probabilities = st.floats(min_value=0.05, max_value=0.95, allow_nan=False)
losses = st.floats(min_value=0.5, max_value=1.0, allow_nan=False)
phases = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def single_ring():
    """Factory for one-ring specs"""
    def make(k1=0.5, k2=0.5, alpha=1.0, theta=0.0):
        return RingChainSpec(num_rings=1, couplings=(k1, k2), loss_per_round=alpha, phases=theta)
    return make


@pytest.fixture
def double_ring():
    """Factory for two-ring specs"""
    def make(k1=0.5, k2=0.5, k3=0.5, alpha=1.0, theta1=0.0, theta2=0.0):
        return RingChainSpec(
            num_rings=2,
            couplings=(k1, k2, k3),
            loss_per_round=alpha,
            phases=(theta1, theta2),
        )
    return make


def random_spec(rng, num_rings, lossless=False, k_low=0.0, k_high=1.0):
    """Random chain with couplings in [k_low, k_high], α in [0.5, 1] and θ in [0, 2π)"""
    couplings = tuple(rng.uniform(k_low, k_high, num_rings + 1))
    alpha = 1.0 if lossless else tuple(rng.uniform(0.5, 1.0, num_rings))
    theta = tuple(rng.uniform(0.0, 2 * math.pi, num_rings))
    return RingChainSpec(num_rings=num_rings, couplings=couplings, loss_per_round=alpha, phases=theta)


@pytest.fixture
def write_config(tmp_path):
    """Write an INI run config and return its path"""
    def write(text: str, name: str = 'run.ini') -> str:
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return write
