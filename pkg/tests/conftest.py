import numpy as np
import pytest

from drosc import ComplexMoments, ModelParams, bath_constants, linear_ramp


@pytest.fixture
def fig2_params():
    """Parameter point used throughout the trajectory figures (T = 20)."""
    return ModelParams(y=0.1, w=4.0, eta=0.008, script_t=20.0, delta_l=10.0)


@pytest.fixture
def fig2_ramp():
    return linear_ramp(10.0)


@pytest.fixture
def fig2_init(fig2_params):
    a0 = 0.1 + 0.1j
    c0 = bath_constants(fig2_params).n_th + 2.0 - abs(a0) ** 2
    return ComplexMoments(a_mean=a0, v_a=0.0, c_aadag=c0)


@pytest.fixture
def coarse_grid():
    return np.linspace(0.0, 1.0, 21)
