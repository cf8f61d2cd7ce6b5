"""Driven damped quantum harmonic oscillator in the Gaussian-moment picture.

Markovian master equations for a linearly driven oscillator coupled to an
Ohmic bath, in three treatments of the driving (nonadiabatic, adiabatic,
weakly driven), solved through closed-form second moments and a
quadrature-based first moment, together with two brute-force oracles and
a CSV-emitting command line front end.
"""

__version__ = "0.1.0"

from .driving import (
    DrivingProtocol,
    DrivingVariant,
    a_ad_bar,
    a_bar,
    delta_a_bar,
    delta_f_bar,
    delta_g_bar,
    f_ad_bar,
    f_bar,
    g_ad_bar,
    g_bar,
    generic_protocol,
    h_bar,
    linear_ramp,
)
from .errors import (
    AnsatzValidityError,
    ConfigError,
    DomainError,
    NumericError,
    TruncationError,
    UnphysicalStateError,
)
from .gaussian import (
    ComplexMoments,
    RealMoments,
    Trajectory,
    coherence_energy_basis,
    coherence_ss_basis,
    energy,
    entropy,
    evolve,
    fidelity,
    gibbs_moments,
    purity_mu,
    steady_state_moments,
    to_complex,
    to_real,
)
from .oracle import (
    FockDensityMatrix,
    MomentTrajectory,
    MuftiState,
    build_generator,
    displaced_thermal_density_matrix,
    evolve_fock,
    evolve_fock_adaptive,
    evolve_mufti,
    interaction_picture_check,
    mufti_from_moments,
    thermal_density_matrix,
)
from .params import (
    BathConstants,
    ModelParams,
    alpha_bar,
    bath_constants,
    gamma_bar,
    n_th,
    sigma_bar,
    sigma_bar_closed,
)

__all__ = [
    "__version__",
    "ModelParams",
    "BathConstants",
    "n_th",
    "gamma_bar",
    "sigma_bar",
    "sigma_bar_closed",
    "alpha_bar",
    "bath_constants",
    "DrivingProtocol",
    "DrivingVariant",
    "linear_ramp",
    "generic_protocol",
    "a_bar",
    "a_ad_bar",
    "delta_a_bar",
    "f_bar",
    "f_ad_bar",
    "delta_f_bar",
    "g_bar",
    "g_ad_bar",
    "delta_g_bar",
    "h_bar",
    "ComplexMoments",
    "RealMoments",
    "Trajectory",
    "evolve",
    "to_real",
    "to_complex",
    "purity_mu",
    "energy",
    "entropy",
    "coherence_energy_basis",
    "coherence_ss_basis",
    "steady_state_moments",
    "gibbs_moments",
    "fidelity",
    "FockDensityMatrix",
    "MuftiState",
    "MomentTrajectory",
    "thermal_density_matrix",
    "displaced_thermal_density_matrix",
    "build_generator",
    "evolve_fock",
    "evolve_fock_adaptive",
    "mufti_from_moments",
    "evolve_mufti",
    "interaction_picture_check",
    "DomainError",
    "NumericError",
    "UnphysicalStateError",
    "TruncationError",
    "AnsatzValidityError",
    "ConfigError",
]
