"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Everything here is property-based or cross-solver equivalence at
desk scale; the whole module stays under five minutes.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from drosc import (
    ComplexMoments,
    DrivingVariant,
    ModelParams,
    alpha_bar,
    bath_constants,
    build_generator,
    coherence_energy_basis,
    coherence_ss_basis,
    displaced_thermal_density_matrix,
    entropy,
    evolve,
    evolve_fock_adaptive,
    evolve_mufti,
    f_bar,
    g_bar,
    gamma_bar,
    generic_protocol,
    h_bar,
    linear_ramp,
    mufti_from_moments,
    purity_mu,
    sigma_bar,
    steady_state_moments,
    to_real,
)
from drosc.driving import delta_g_bar, f_bar_quadrature
from drosc.special import integral_i0, integral_i1, integral_ie

RAMP = linear_ramp(10.0)


def fig2_params(script_t):
    return ModelParams(y=0.1, w=4.0, eta=0.008, script_t=script_t, delta_l=10.0)


def fig2_initial(p):
    a0 = 0.1 + 0.1j
    return ComplexMoments(
        a_mean=a0, v_a=0.0, c_aadag=bath_constants(p).n_th + 2.0 - abs(a0) ** 2
    )


def verdict(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_two_route_bath_constants():
    """|Re(alpha) - gamma/2| <= 1e-10 gamma and |Im(alpha) - Sigma_PV| <= 1e-9
    over a 5x5x5 grid of (w, eta, script_t)."""
    worst_re, worst_im = 0.0, 0.0
    for w in (0.5, 1.0, 2.0, 4.0, 10.0):
        for eta in (0.001, 0.004, 0.008, 0.02, 0.045):
            if eta * w >= 0.5:
                continue
            for t in (1.0, 5.0, 20.0, 100.0, 500.0):
                p = ModelParams(y=0.1, w=w, eta=eta, script_t=t, delta_l=1.0)
                a = alpha_bar(p)
                g = gamma_bar(p)
                worst_re = max(worst_re, abs(a.real - g / 2) / g)
                s_pv = sigma_bar(p, epsabs=1e-13, epsrel=1e-12)
                worst_im = max(worst_im, abs(a.imag - s_pv))
    verdict(
        "two-route bath constants",
        worst_re <= 1e-10 and worst_im <= 1e-9,
        f"max |Re a - g/2|/g = {worst_re:.2e}, max |Im a - Sigma_PV| = {worst_im:.2e}",
    )


def test_ramp_integrals_vs_quadrature():
    """I0, I1, Ie match adaptive quadrature of their defining integrals to
    1e-10 for z in [0, 100] and w in {0.5, 1, 4, 10}."""

    def quad_c(f, a, b):
        v, _ = quad(f, a, b, complex_func=True, epsabs=1e-13, epsrel=1e-12, limit=600)
        return v

    zs = np.concatenate([[0.0], np.geomspace(1e-2, 100.0, 13)])
    worst = 0.0
    for z in zs:
        worst = max(worst, abs(integral_i0(z) - quad_c(lambda x: 1 / (1 + 1j * x) ** 2, 0, z)))
        worst = max(worst, abs(integral_i1(z) - quad_c(lambda x: x / (1 + 1j * x) ** 2, 0, z)))
        for w in (0.5, 1.0, 4.0, 10.0):
            worst = max(
                worst,
                abs(
                    integral_ie(z, w)
                    - quad_c(lambda x: np.exp(1j * x / w) / (1 + 1j * x) ** 2, 0, z)
                ),
            )
    verdict("closed-form integrals vs quadrature", worst <= 1e-10, f"max dev {worst:.2e}")


def test_analytic_vs_generic_driving_path():
    """f and g from the linear-ramp closed forms match the double-quadrature
    generic path to 1e-8 on the Fig.-2 parameter set, 32-point grid."""
    p = fig2_params(20.0)
    gen = generic_protocol(lam=lambda t: 10.0 * t, lam_dot=lambda t: 10.0)
    taus = np.linspace(0.0, 1.0, 32)
    worst_f = max(abs(f_bar(t, p, RAMP) - f_bar_quadrature(t, p, gen)) for t in taus)
    worst_g = max(abs(g_bar(t, p, RAMP) - g_bar(t, p, gen)) for t in taus)
    verdict(
        "analytic vs generic driving path",
        worst_f <= 1e-8 and worst_g <= 1e-8,
        f"max |df| = {worst_f:.2e}, max |dg| = {worst_g:.2e}",
    )


def test_adiabatic_convergence():
    """max_tau of the nonadiabatic driving correction (in units of the system
    frequency, as plotted) at script_t = 2000 is >= 10x below script_t = 10
    and strictly decreasing across {10, 20, 200, 2000}."""
    taus = np.linspace(0.005, 1.0, 64)
    sups = []
    for t in (10.0, 20.0, 200.0, 2000.0):
        p = fig2_params(t)
        sups.append(max(abs(delta_g_bar(tau, p, RAMP)) / t for tau in taus))
    decreasing = all(a > b for a, b in zip(sups, sups[1:]))
    verdict(
        "adiabatic convergence of delta_g",
        decreasing and sups[0] >= 10.0 * sups[-1],
        f"sup|dg|/omega = {[f'{s:.3e}' for s in sups]}",
    )


def test_cross_solver_equivalence():
    """Gaussian moments vs Fock oracle (starting truncation 60, doubling on
    tail trips) vs product-ansatz oracle: <x>, <p>, V_x, V_p, C_xp all agree
    to 1e-4 on the Fig.-2 set for every variant and script_t in {10, 20};
    total runtime under two minutes."""
    started = time.time()
    worst = 0.0
    detail = []
    for script_t in (10.0, 20.0):
        p = fig2_params(script_t)
        init = fig2_initial(p)
        grid = np.linspace(0.05, 1.0, 20)
        for variant in DrivingVariant:
            ana = evolve(init, p, RAMP, variant, grid)
            fock = evolve_fock_adaptive(
                init.a_mean, init.c_aadag, p, RAMP, variant, grid, dim_start=60
            )
            mufti = evolve_mufti(
                mufti_from_moments(init.a_mean, init.c_aadag), p, RAMP, variant, grid
            )
            for other in (fock, mufti):
                dev = max(
                    np.max(np.abs(2 * ana.a_mean.real - 2 * other.a_mean.real)),
                    np.max(np.abs(2 * ana.a_mean.imag - 2 * other.a_mean.imag)),
                    np.max(np.abs(ana.v_x - (2 * other.c_aadag + 1 + 2 * other.v_a.real))),
                    np.max(np.abs(ana.v_p - (2 * other.c_aadag + 1 - 2 * other.v_a.real))),
                    np.max(np.abs(ana.c_xp - 2 * other.v_a.imag)),
                )
                worst = max(worst, dev)
            detail.append(f"T={script_t:g}/{variant.value}: fock dim {fock.dim}")
    elapsed = time.time() - started
    verdict(
        "cross-solver equivalence",
        worst <= 1e-4 and elapsed < 120.0,
        f"max moment dev {worst:.2e}, runtime {elapsed:.0f}s; " + "; ".join(detail),
    )


def test_second_moments_and_entropy_variant_independent():
    """V_a, C_aa+ and the entropy are identical across variants to 1e-12."""
    p = fig2_params(20.0)
    init = fig2_initial(p)
    grid = np.linspace(0.0, 1.0, 101)
    trajs = [evolve(init, p, RAMP, v, grid) for v in DrivingVariant]
    worst = 0.0
    for other in trajs[1:]:
        worst = max(worst, np.max(np.abs(trajs[0].v_a - other.v_a)))
        worst = max(worst, np.max(np.abs(trajs[0].c_aadag - other.c_aadag)))
        worst = max(worst, np.max(np.abs(trajs[0].entropy - other.entropy)))
    verdict("driving-independent second moments and entropy", worst <= 1e-12,
            f"max dev {worst:.2e}")


def test_steady_state_residual():
    """The frozen-time Fock generator annihilates the Gaussian steady state:
    residual norm < 1e-5 at dim 80, tau in {0.25, 0.75}, script_t = 2000."""
    p = fig2_params(2000.0)
    bc = bath_constants(p)
    worst = 0.0
    for variant in (DrivingVariant.NONADIABATIC, DrivingVariant.ADIABATIC):
        for tau in (0.25, 0.75):
            ss = steady_state_moments(tau, p, RAMP, variant)
            a_ss = 0.5 * (ss.x_mean + 1j * ss.p_mean)
            rho = displaced_thermal_density_matrix(a_ss, bc.n_th, 80).entries
            gen = build_generator(tau, p, RAMP, variant, 80)
            worst = max(worst, float(np.linalg.norm(gen(rho))))
    verdict("steady-state residual", worst < 1e-5, f"max residual norm {worst:.2e}")


def test_fidelity_and_coherence_structure_slow_driving():
    """At script_t = 2000: F(rho, ss) >= 0.999 for tau >= 0.2 while
    F(rho, gibbs) stays at least 1e-3 away from 1; ss-basis coherence stays
    below 1e-4 while the energy-basis coherence exceeds it."""
    p = fig2_params(2000.0)
    init = fig2_initial(p)
    grid = np.linspace(0.2, 1.0, 33)
    traj = evolve(init, p, RAMP, DrivingVariant.NONADIABATIC, grid)
    min_f_ss = float(np.min(traj.fidelity_to_ss))
    max_f_gibbs = float(np.max(traj.fidelity_to_gibbs))
    max_c_ss = float(np.max(traj.coherence_ss_basis))
    ordering = bool(np.all(traj.coherence_energy_basis > traj.coherence_ss_basis))
    ok = (
        min_f_ss >= 0.999
        and max_f_gibbs <= 1.0 - 1e-3
        and max_c_ss <= 1e-4
        and ordering
    )
    verdict(
        "slow-driving fidelity and coherence structure",
        ok,
        f"min F_ss {min_f_ss:.6f}, max F_gibbs {max_f_gibbs:.6f}, "
        f"max C_ss {max_c_ss:.2e}, energy-basis always larger: {ordering}",
    )


def test_physicality_suite():
    """100 randomized physical configs: purity mu <= 1 + 1e-10, entropy >= 0,
    coherences >= -1e-12 along trajectories; Fock trace drift <= 1e-8."""
    rng = np.random.default_rng(20260810)
    grid = np.linspace(0.0, 1.0, 21)
    fock_grid = np.linspace(0.0, 0.1, 3)
    worst_mu = 0.0
    min_entropy = np.inf
    min_coh = np.inf
    worst_drift = 0.0
    for _ in range(100):
        y = rng.uniform(0.05, 1.0)
        w = rng.uniform(0.5, 8.0)
        eta = rng.uniform(1e-4, min(0.02, 0.4 / w))
        script_t = rng.uniform(5.0, 100.0)
        delta_l = rng.uniform(-3.0, 3.0)
        p = ModelParams(y=y, w=w, eta=eta, script_t=script_t, delta_l=delta_l)
        proto = linear_ramp(delta_l)
        a0 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        delta_n0 = rng.uniform(abs(a0) ** 2 + 0.05, abs(a0) ** 2 + 2.0)
        nbar = bath_constants(p).n_th + delta_n0 - abs(a0) ** 2
        # half the starts carry squeezing (displaced squeezed thermal relations)
        r = rng.uniform(0.0, 0.6) if rng.random() < 0.5 else 0.0
        if r:
            ch, sh = math.cosh(r), math.sinh(r)
            v_a = -np.exp(1j * rng.uniform(0, 2 * np.pi)) * ch * sh * (2 * nbar + 1)
            c_eff = sh * sh + (ch * ch + sh * sh) * nbar
        else:
            v_a = 0.0
            c_eff = nbar
        variant = list(DrivingVariant)[int(rng.integers(0, 3))]
        init = ComplexMoments(a_mean=a0, v_a=v_a, c_aadag=c_eff)
        traj = evolve(init, p, proto, variant, grid)
        for i in range(len(grid)):
            worst_mu = max(worst_mu, purity_mu(traj.real_moments(i)))
        min_entropy = min(min_entropy, float(np.min(traj.entropy)))
        min_coh = min(
            min_coh,
            float(np.min(traj.coherence_energy_basis)),
            float(np.min(traj.coherence_ss_basis)),
        )
        fock = evolve_fock_adaptive(
            a0, nbar, p, proto, variant, fock_grid, dim_start=60, step=1e-3
        )
        worst_drift = max(worst_drift, fock.max_trace_drift)
    ok = (
        worst_mu <= 1 + 1e-10
        and min_entropy >= 0.0
        and min_coh >= -1e-12
        and worst_drift <= 1e-8
    )
    verdict(
        "physicality suite",
        ok,
        f"max mu {worst_mu:.12f}, min S {min_entropy:.2e}, min coherence "
        f"{min_coh:.2e}, max Fock trace drift {worst_drift:.2e}",
    )


def test_gradient_check():
    """Closed-form d<a>/dtau matches the adjoint right-hand side
    -delta <a> - h to 1e-6 relative via central differences at h = 1e-4."""
    p = fig2_params(20.0)
    init = fig2_initial(p)
    bc = bath_constants(p)
    h = 1e-4
    worst = 0.0
    for variant in DrivingVariant:
        for tau in (0.15, 0.4, 0.65, 0.9):
            pts = evolve(init, p, RAMP, variant, [tau - h, tau, tau + h])
            deriv = (pts.a_mean[2] - pts.a_mean[0]) / (2 * h)
            rhs = -bc.delta_bar * pts.a_mean[1] - h_bar(tau, p, RAMP, variant)
            worst = max(worst, abs(deriv - rhs) / abs(rhs))
    verdict("gradient check", worst <= 1e-6, f"max rel err {worst:.2e}")
