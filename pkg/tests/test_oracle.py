import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from drosc import (
    AnsatzValidityError,
    ComplexMoments,
    DrivingVariant,
    ModelParams,
    TruncationError,
    bath_constants,
    build_generator,
    displaced_thermal_density_matrix,
    evolve,
    evolve_fock,
    evolve_fock_adaptive,
    evolve_mufti,
    fidelity,
    generic_protocol,
    h_bar,
    interaction_picture_check,
    linear_ramp,
    mufti_from_moments,
    steady_state_moments,
    thermal_density_matrix,
    to_real,
)
from drosc.oracle import _ladder

FIG2 = ModelParams(y=0.1, w=4.0, eta=0.008, script_t=20.0, delta_l=10.0)
RAMP = linear_ramp(10.0)


def zero_protocol():
    return generic_protocol(lam=lambda t: 0.0, lam_dot=lambda t: 0.0)


def random_hermitian(n, seed=0, support=None):
    rng = np.random.default_rng(seed)
    k = support or n
    block = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    m = np.zeros((n, n), complex)
    m[:k, :k] = block @ block.conj().T
    return m / np.trace(m).real


class TestGenerator:
    def test_trace_preservation(self):
        gen = build_generator(0.4, FIG2, RAMP, DrivingVariant.NONADIABATIC, 30)
        rho = random_hermitian(30, seed=1)
        assert abs(np.trace(gen(rho))) < 1e-12

    def test_hermiticity_preservation(self):
        gen = build_generator(0.4, FIG2, RAMP, DrivingVariant.NONADIABATIC, 24)
        rng = np.random.default_rng(3)
        rho = rng.normal(size=(24, 24)) + 1j * rng.normal(size=(24, 24))
        lhs = gen(rho).conj().T
        rhs = gen(rho.conj().T)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_undriven_gibbs_fixed_point(self):
        p = FIG2
        bc = bath_constants(p)
        gen = build_generator(0.5, p, zero_protocol(), DrivingVariant.NONADIABATIC, 40)
        rho = thermal_density_matrix(bc.n_th, 40).entries
        assert np.linalg.norm(gen(rho)) < 1e-12

    @pytest.mark.parametrize("variant", list(DrivingVariant))
    def test_steady_state_annihilated(self, variant):
        # L_tau applied to the Gaussian state built from the fixed-point moments
        p = ModelParams(y=0.1, w=4.0, eta=0.008, script_t=2000.0, delta_l=10.0)
        bc = bath_constants(p)
        tau = 0.25
        ss = steady_state_moments(tau, p, RAMP, variant)
        a_ss = 0.5 * (ss.x_mean + 1j * ss.p_mean)
        rho = displaced_thermal_density_matrix(a_ss, bc.n_th, 80).entries
        gen = build_generator(tau, p, RAMP, variant, 80)
        assert np.linalg.norm(gen(rho)) < 1e-5


class TestEvolveFock:
    def test_undriven_vacuum_relaxation(self):
        p = FIG2
        bc = bath_constants(p)
        init = thermal_density_matrix(0.0, 40)
        grid = np.linspace(0.1, 1.0, 4)
        out = evolve_fock(init, p, linear_ramp(0.0), DrivingVariant.NONADIABATIC, grid, step=5e-4)
        expected = bc.n_th * (1 - np.exp(-bc.gamma_bar * grid))
        assert np.max(np.abs(out.c_aadag - expected)) < 1e-6
        assert np.max(np.abs(out.a_mean)) < 1e-12
        assert out.max_trace_drift < 1e-10

    def test_fig2_first_moments_against_gaussian(self, fig2_init):
        p = ModelParams(y=0.1, w=4.0, eta=0.008, script_t=10.0, delta_l=10.0)
        grid = np.linspace(0.05, 0.5, 5)
        init = displaced_thermal_density_matrix(fig2_init.a_mean, fig2_init.c_aadag, 60)
        fock = evolve_fock(init, p, RAMP, DrivingVariant.NONADIABATIC, grid, step=2e-4)
        ana = evolve(fig2_init, p, RAMP, DrivingVariant.NONADIABATIC, grid)
        assert np.max(np.abs(2 * fock.a_mean.real - ana.x_mean)) < 1e-4
        assert np.max(np.abs(2 * fock.a_mean.imag - ana.p_mean)) < 1e-4

    def test_truncation_error_names_tau(self, fig2_init):
        # dim 40 holds the initial state but not the grown displacement
        init = displaced_thermal_density_matrix(fig2_init.a_mean, fig2_init.c_aadag, 40)
        with pytest.raises(TruncationError) as err:
            evolve_fock(init, FIG2, RAMP, DrivingVariant.NONADIABATIC, [1.0], step=5e-4)
        assert err.value.tau is not None
        assert 0.0 < err.value.tau < 1.0

    def test_tiny_dimension_rejected_on_init(self, fig2_init):
        # at dim = 4 the displaced-thermal start already has too much tail
        with pytest.raises(TruncationError):
            init = displaced_thermal_density_matrix(fig2_init.a_mean, fig2_init.c_aadag, 4)
            evolve_fock(init, FIG2, RAMP, DrivingVariant.NONADIABATIC, [0.1])

    def test_adaptive_doubling_completes(self, fig2_init):
        out = evolve_fock_adaptive(
            fig2_init.a_mean,
            fig2_init.c_aadag,
            FIG2,
            RAMP,
            DrivingVariant.NONADIABATIC,
            [0.5, 1.0],
            dim_start=30,
            dim_max=240,
            step=5e-4,
        )
        assert out.dim > 30
        ana = evolve(fig2_init, FIG2, RAMP, DrivingVariant.NONADIABATIC, [0.5, 1.0])
        assert np.max(np.abs(out.a_mean - ana.a_mean)) < 1e-4

    def test_coherent_state_overlap_matches_fidelity(self):
        # pure-state overlap Tr(rho1 rho2) vs the squared Gaussian fidelity
        a1, a2 = 0.6 + 0.2j, -0.1 + 0.9j
        n = 30
        r1 = displaced_thermal_density_matrix(a1, 0.0, n).entries
        r2 = displaced_thermal_density_matrix(a2, 0.0, n).entries
        overlap = float(np.trace(r1 @ r2).real)
        f = fidelity(
            to_real(ComplexMoments(a_mean=a1, v_a=0.0, c_aadag=0.0)),
            to_real(ComplexMoments(a_mean=a2, v_a=0.0, c_aadag=0.0)),
        )
        assert overlap == pytest.approx(f, abs=1e-6)


class TestEvolveMufti:
    def test_fixed_point_is_boltzmann_factor(self):
        # gamma12 z^2 - 2 sigma z + gamma21 = 0 has roots 1 and e^{-1/y}
        p = FIG2
        bc = bath_constants(p)
        g12 = bc.gamma_bar * (bc.n_th + 1)
        g21 = bc.gamma_bar * bc.n_th
        sigma = 0.5 * (g12 + g21)
        z_star = g21 / g12
        assert g12 * z_star**2 - 2 * sigma * z_star + g21 == pytest.approx(0.0, abs=1e-15)
        assert z_star == pytest.approx(math.exp(-1.0 / p.y), rel=1e-12)

    def test_thermal_start_stays_thermal(self):
        p = FIG2
        bc = bath_constants(p)
        init = mufti_from_moments(0.0, bc.n_th)
        out = evolve_mufti(init, p, linear_ramp(0.0), DrivingVariant.NONADIABATIC,
                           np.linspace(0.1, 1.0, 4))
        assert np.max(np.abs(out.a_mean)) == 0.0
        assert np.max(np.abs(out.c_aadag - bc.n_th)) < 1e-12

    @pytest.mark.parametrize("variant", list(DrivingVariant))
    def test_driven_matches_gaussian(self, variant, fig2_init, coarse_grid):
        init = mufti_from_moments(fig2_init.a_mean, fig2_init.c_aadag)
        out = evolve_mufti(init, FIG2, RAMP, variant, coarse_grid)
        ana = evolve(fig2_init, FIG2, RAMP, variant, coarse_grid)
        assert np.max(np.abs(out.a_mean - ana.a_mean)) < 1e-6
        assert np.max(np.abs(out.c_aadag - ana.c_aadag)) < 1e-6

    def test_phase_normalization(self):
        s = mufti_from_moments(0.3 + 0.1j, 1.5)
        expected = (1 - s.z) * math.exp(abs(s.alpha_g) ** 2 / (s.z - 1))
        assert s.e_phase == expected

    def test_rejects_squeezed_start(self):
        with pytest.raises(AnsatzValidityError):
            mufti_from_moments(0.0, 0.0)

    def test_invalid_z_rejected(self):
        from drosc import MuftiState

        with pytest.raises(AnsatzValidityError):
            MuftiState(z=1.5, alpha_g=0.0)


class TestInteractionPicture:
    def test_identity_at_zero_time(self):
        assert interaction_picture_check(0.0, FIG2, RAMP, dim=30, block=15) < 1e-12

    def test_free_rotation_undriven(self):
        assert interaction_picture_check(0.5, FIG2, zero_protocol(), dim=30, block=15) < 1e-12

    def test_fig2_midpoint(self):
        # |A(0.5)| ~ 2.7 spreads level k to ~ k + 2|A| sqrt(k) + |A|^2, so a
        # 20-level block needs ~80 Fock levels for a clean residual
        assert interaction_picture_check(0.5, FIG2, RAMP, dim=80, block=20) < 1e-8
        assert interaction_picture_check(0.5, FIG2, RAMP, dim=40, block=5) < 1e-7

    def test_residual_improves_with_dim(self):
        res = [interaction_picture_check(0.5, FIG2, RAMP, dim=n, block=20) for n in (40, 60, 80)]
        assert res[0] > res[1] > res[2]


class TestDisplacementFrameReduction:
    def test_transformed_generator_is_undriven(self):
        # solve the displacement ODE zeta' = -delta zeta + h, zeta(0) = 0, then
        # check the transformed generator acts as the undriven one
        p, proto, variant = FIG2, RAMP, DrivingVariant.NONADIABATIC
        bc = bath_constants(p)
        tau = 0.3
        val, _ = quad(
            lambda u: np.exp(-bc.delta_bar * (tau - u)) * complex(h_bar(u, p, proto, variant)),
            0.0,
            tau,
            complex_func=True,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=500,
        )
        zeta = val
        zeta_dot = -bc.delta_bar * zeta + h_bar(tau, p, proto, variant)

        n = 60
        a = _ladder(n)
        ad = a.conj().T
        disp = expm(zeta * ad - np.conj(zeta) * a)
        gen = build_generator(tau, p, proto, variant, n)
        gen0 = build_generator(tau, p, zero_protocol(), variant, n)
        rho_p = random_hermitian(n, seed=7, support=12)

        inner = disp.conj().T @ rho_p @ disp
        transformed = (
            -np.conj(zeta_dot) * (a @ rho_p - rho_p @ a)
            + zeta_dot * (ad @ rho_p - rho_p @ ad)
            + disp @ gen(inner) @ disp.conj().T
        )
        residual = transformed - gen0(rho_p)
        assert np.linalg.norm(residual[:20, :20], 2) < 1e-10
