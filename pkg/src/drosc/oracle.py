"""Brute-force reference solvers used to validate the Gaussian-moment path.

Two independent routes: a truncated-Fock-space RK4 integrator of the
Schroedinger-picture master equation, and the two coupled ODEs obtained
from the exponential product ansatz rho = e^phi e^{alpha a+} e^{chi n}
e^{alpha* a} (displaced thermal states).  Both emit moment trajectories
comparable with gaussian.evolve.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from .driving import DrivingProtocol, DrivingVariant, a_bar, g_ad_bar, g_bar, h_bar
from .errors import AnsatzValidityError, DomainError, TruncationError
from .gaussian import _validate_grid
from .params import ModelParams, bath_constants

__all__ = [
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
    "default_step",
]

_TAIL_THRESHOLD = 1e-6
_TRACE_TOL = 1e-8
_MIN_EIG_TOL = -1e-8


@dataclass(frozen=True)
class FockDensityMatrix:
    """Dense density matrix on the lowest ``dim`` number states."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise DomainError(f"entries must be {self.dim}x{self.dim}, got {m.shape}")

    def validate(self, tail_threshold: float = _TAIL_THRESHOLD) -> None:
        m = self.entries
        # tail first: an inadequate truncation also degrades the trace, and
        # the truncation diagnosis is the actionable one
        if m[-1, -1].real > tail_threshold:
            raise TruncationError(
                f"top-level population {m[-1, -1].real:.2e} exceeds {tail_threshold:.0e}",
                dim=self.dim,
            )
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise DomainError("density matrix is not Hermitian to 1e-10")
        if abs(np.trace(m).real - 1.0) > _TRACE_TOL or abs(np.trace(m).imag) > _TRACE_TOL:
            raise DomainError("trace differs from 1 beyond 1e-8")
        if np.linalg.eigvalsh(m)[0] < _MIN_EIG_TOL:
            raise DomainError("negative eigenvalue beyond -1e-8")


@dataclass(frozen=True)
class MuftiState:
    """Ansatz parameters: z = e^chi in (0,1) and the complex alpha."""

    z: float
    alpha_g: complex

    def __post_init__(self):
        if not (0.0 < self.z < 1.0):
            raise AnsatzValidityError(f"z must lie in (0, 1), got {self.z}")

    @property
    def e_phase(self) -> float:
        """Normalization factor e^phi = (1-z) exp(|alpha|^2/(z-1))."""
        return (1.0 - self.z) * math.exp(abs(self.alpha_g) ** 2 / (self.z - 1.0))


@dataclass(frozen=True)
class MomentTrajectory:
    """Moments emitted by an oracle run on a tau grid."""

    tau_grid: np.ndarray
    a_mean: np.ndarray
    v_a: np.ndarray
    c_aadag: np.ndarray
    dim: Optional[int] = None
    max_trace_drift: float = 0.0
    min_eigenvalue: float = 0.0
    max_tail: float = 0.0


# ---------------------------------------------------------------------------
# state builders


def thermal_density_matrix(nbar: float, dim: int) -> FockDensityMatrix:
    """Thermal state with occupation nbar, truncated and renormalized."""
    if nbar < 0:
        raise DomainError(f"nbar must be nonnegative, got {nbar}")
    k = np.arange(dim)
    if nbar == 0.0:
        pop = np.zeros(dim)
        pop[0] = 1.0
    else:
        pop = np.exp(k * math.log(nbar / (1.0 + nbar)))
        pop /= pop.sum()
    return FockDensityMatrix(dim=dim, entries=np.diag(pop).astype(complex))


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(complex)


def displaced_thermal_density_matrix(alpha: complex, nbar: float, dim: int) -> FockDensityMatrix:
    """D(alpha) rho_th(nbar) D+(alpha) with the truncated displacement."""
    a = _ladder(dim)
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)
    th = thermal_density_matrix(nbar, dim).entries
    rho = d @ th @ d.conj().T
    return FockDensityMatrix(dim=dim, entries=rho)


# ---------------------------------------------------------------------------
# Liouvillian


class _FockContext:
    """Precomputed pieces of the dimensionless Liouvillian at truncation N."""

    def __init__(self, p: ModelParams, proto: DrivingProtocol, variant: DrivingVariant, dim: int):
        if dim < 2:
            raise DomainError(f"Fock dimension must be >= 2, got {dim}")
        self.p = p
        self.proto = proto
        self.variant = variant
        self.dim = dim
        bc = bath_constants(p)
        self.bc = bc
        self.g12 = bc.gamma_bar * (bc.n_th + 1.0)
        self.g21 = bc.gamma_bar * bc.n_th
        k = np.arange(dim, dtype=float)
        self.sq = np.sqrt(np.arange(1.0, dim))
        self.SS = np.outer(self.sq, self.sq)
        # truncated a a+ has a vanishing corner element
        diag_aad = np.concatenate([np.arange(1.0, dim), [0.0]])
        gs = 0.5 * (self.g12 * k + self.g21 * diag_aad)
        hd = (p.script_t + bc.sigma_bar) * k
        self.W = -1j * (hd[:, None] - hd[None, :]) - (gs[:, None] + gs[None, :])
        self._sqc = self.sq[:, None]
        self._sqr = self.sq[None, :]
        self._jump12 = self.g12 * self.SS
        self._jump21 = self.g21 * self.SS
        self._c1 = np.empty((dim, dim), dtype=complex)
        self._z = np.empty((dim, dim), dtype=complex)

    def ladder_coefficient(self, tau: float) -> complex:
        """Coefficient of a in the Hermitian driving Hamiltonian at tau."""
        p, proto = self.p, self.proto
        c = -0.5 * p.script_t * proto.lam(tau) + 0.0j
        if self.variant is DrivingVariant.NONADIABATIC:
            c += 1j * np.conj(g_bar(tau, p, proto))
        elif self.variant is DrivingVariant.ADIABATIC:
            c += 1j * np.conj(g_ad_bar(tau, p, proto)) - 0.5j * proto.lam_dot(tau)
        return c

    def apply(self, rho: np.ndarray, c: complex, out: np.ndarray) -> np.ndarray:
        """out = L[rho] for Hermitian rho, with ladder coefficient c."""
        np.multiply(self.W, rho, out=out)
        c1, z = self._c1, self._z
        c1[:-1, :] = rho[1:, :]
        c1[-1, :] = 0.0
        c1[:-1, :] *= self._sqc
        c1[:, 1:] -= rho[:, :-1] * self._sqr
        np.multiply(-1j * c, c1, out=z)
        out += z
        out += z.conj().T
        out[:-1, :-1] += self._jump12 * rho[1:, 1:]
        out[1:, 1:] += self._jump21 * rho[:-1, :-1]
        return out

    def apply_general(self, rho: np.ndarray, tau: float) -> np.ndarray:
        """L[rho] without the Hermiticity shortcut (general matrices)."""
        a = _ladder(self.dim)
        ad = a.conj().T
        n = ad @ a
        aad = a @ ad
        p = self.p
        c = self.ladder_coefficient(tau)
        h = (p.script_t + self.bc.sigma_bar) * n + c * a + np.conj(c) * ad
        out = -1j * (h @ rho - rho @ h)
        out += self.g12 * (a @ rho @ ad - 0.5 * (n @ rho + rho @ n))
        out += self.g21 * (ad @ rho @ a - 0.5 * (aad @ rho + rho @ aad))
        return out

    def moments(self, rho: np.ndarray):
        a_mean = np.sum(self.sq * np.diagonal(rho, -1))
        a2 = np.sum(self.sq[:-1] * self.sq[1:] * np.diagonal(rho, -2))
        n_mean = np.sum(np.arange(self.dim) * np.diagonal(rho).real)
        return a_mean, a2 - a_mean**2, n_mean - abs(a_mean) ** 2


def build_generator(
    tau: float, p: ModelParams, proto: DrivingProtocol, variant: DrivingVariant, dim: int
) -> Callable[[np.ndarray], np.ndarray]:
    """Frozen-time Liouvillian action rho -> L_tau[rho] on the truncated space.

    The Lamb shift enters as sigma_bar * n (constant terms drop out of the
    commutator); the driving enters through the Hamiltonian displacement
    term and, except for the weakly driven variant, the g-dependent ladder
    correction.
    """
    ctx = _FockContext(p, proto, variant, dim)
    tau = float(tau)

    def action(rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        return ctx.apply_general(rho, tau)

    return action


def default_step(p: ModelParams) -> float:
    """Fixed integration step min(1e-4, 0.1/gamma_bar) in tau."""
    g = bath_constants(p).gamma_bar
    return min(1e-4, 0.1 / g) if g > 0 else 1e-4


def evolve_fock(
    init: FockDensityMatrix,
    p: ModelParams,
    proto: DrivingProtocol,
    variant: DrivingVariant,
    grid,
    *,
    step: Optional[float] = None,
    tail_threshold: float = _TAIL_THRESHOLD,
) -> MomentTrajectory:
    """Integrate the master equation with classic fixed-step RK4.

    Monitors trace drift, positivity (checked at grid points) and the
    top-level population; a tail violation raises TruncationError naming
    the offending tau.
    """
    g = _validate_grid(grid)
    init.validate(tail_threshold)
    dim = init.dim
    ctx = _FockContext(p, proto, variant, dim)
    h_step = float(step) if step is not None else default_step(p)
    if h_step <= 0:
        raise DomainError(f"step must be positive, got {h_step}")
    # RK4 stability: the fastest Liouvillian frequency is set by the level
    # splitting across the truncated ladder; clamp the step to stay inside
    # the imaginary-axis stability region (|lambda h| < 2.8)
    bc = ctx.bc
    spectral_radius = (p.script_t + abs(bc.sigma_bar) + bc.gamma_bar * (bc.n_th + 1.0)) * dim
    if spectral_radius > 0:
        h_step = min(h_step, 2.0 / spectral_radius)

    rho = np.array(init.entries, dtype=complex, order="C")
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    tmp = np.empty_like(rho)

    out_a = np.empty(len(g), dtype=complex)
    out_v = np.empty(len(g), dtype=complex)
    out_c = np.empty(len(g), dtype=float)
    max_drift = 0.0
    min_eig = np.inf
    max_tail = 0.0

    t = 0.0
    for i, tgt in enumerate(g):
        if tgt > t:
            nsub = max(1, int(math.ceil((tgt - t) / h_step - 1e-12)))
            h = (tgt - t) / nsub
            for _ in range(nsub):
                c_a = ctx.ladder_coefficient(t)
                c_b = ctx.ladder_coefficient(t + 0.5 * h)
                c_c = ctx.ladder_coefficient(t + h)
                ctx.apply(rho, c_a, k1)
                np.multiply(0.5 * h, k1, out=tmp)
                tmp += rho
                ctx.apply(tmp, c_b, k2)
                np.multiply(0.5 * h, k2, out=tmp)
                tmp += rho
                ctx.apply(tmp, c_b, k3)
                np.multiply(h, k3, out=tmp)
                tmp += rho
                ctx.apply(tmp, c_c, k4)
                k2 += k3
                k1 += k4
                k1 += 2.0 * k2
                k1 *= h / 6.0
                rho += k1
                t += h
                tail = rho[-1, -1].real
                if tail > tail_threshold:
                    raise TruncationError(
                        f"top-level population {tail:.2e} exceeded {tail_threshold:.0e} "
                        f"at tau = {t:.6f} (dim {dim})",
                        tau=t,
                        dim=dim,
                    )
                if tail > max_tail:
                    max_tail = tail
            t = tgt
        drift = abs(np.trace(rho) - 1.0)
        max_drift = max(max_drift, drift)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(rho)[0]))
        a_mean, v_a, c_aa = ctx.moments(rho)
        out_a[i] = a_mean
        out_v[i] = v_a
        out_c[i] = c_aa
    return MomentTrajectory(
        tau_grid=g,
        a_mean=out_a,
        v_a=out_v,
        c_aadag=out_c,
        dim=dim,
        max_trace_drift=float(max_drift),
        min_eigenvalue=float(min_eig),
        max_tail=float(max_tail),
    )


def evolve_fock_adaptive(
    a0: complex,
    nbar0: float,
    p: ModelParams,
    proto: DrivingProtocol,
    variant: DrivingVariant,
    grid,
    *,
    dim_start: int = 60,
    dim_max: int = 240,
    step: Optional[float] = None,
    tail_threshold: float = _TAIL_THRESHOLD,
) -> MomentTrajectory:
    """evolve_fock with the default doubling policy on tail violations.

    Starts from the displaced-thermal state (a0, nbar0) at dim_start and
    restarts at doubled truncation (capped at dim_max) whenever the tail
    monitor trips.
    """
    dim = dim_start
    while True:
        init = displaced_thermal_density_matrix(a0, nbar0, dim)
        try:
            return evolve_fock(
                init, p, proto, variant, grid, step=step, tail_threshold=tail_threshold
            )
        except TruncationError:
            if 2 * dim > dim_max:
                raise
            dim *= 2


# ---------------------------------------------------------------------------
# product-ansatz oracle


def mufti_from_moments(a_mean: complex, c_aadag: float) -> MuftiState:
    """Ansatz parameters of the displaced thermal state with given moments.

    The ansatz cannot carry a nonzero V_a; callers must start from
    displaced thermal states (z = C/(C+1), alpha = <a>(1-z)).
    """
    if c_aadag <= 0.0:
        raise AnsatzValidityError(
            f"ansatz needs a strictly positive thermal occupation, got C = {c_aadag}"
        )
    z = c_aadag / (c_aadag + 1.0)
    return MuftiState(z=z, alpha_g=a_mean * (1.0 - z))


def evolve_mufti(
    init: MuftiState,
    p: ModelParams,
    proto: DrivingProtocol,
    variant: DrivingVariant,
    grid,
    *,
    step: Optional[float] = None,
) -> MomentTrajectory:
    """Integrate the two ansatz ODEs with fixed-step RK4.

    z' = -2 sigma z + g12 z^2 + g21,
    alpha' = (g12 z - (sigma + i(Sigma + script_t))) alpha + h (z - 1),
    all rates in driving-time units; moments follow from <a> = alpha/(1-z),
    C = z/(1-z), V_a = 0.
    """
    g = _validate_grid(grid)
    bc = bath_constants(p)
    g12 = bc.gamma_bar * (bc.n_th + 1.0)
    g21 = bc.gamma_bar * bc.n_th
    sigma = 0.5 * (g12 + g21)
    rot = sigma + 1j * (bc.sigma_bar + p.script_t)
    h_step = float(step) if step is not None else default_step(p)
    if proto.is_linear:
        from .driving import h_bar_parts

        parts = h_bar_parts(p, proto, variant)
        h_of = lambda t: parts.total(t, p.script_t)
    else:
        h_of = lambda t: h_bar(t, p, proto, variant)

    def rhs(t, z, al):
        dz = -2.0 * sigma * z + g12 * z * z + g21
        dal = (g12 * z - rot) * al + h_of(t) * (z - 1.0)
        return dz, dal

    z, al = init.z, init.alpha_g
    out_a = np.empty(len(g), dtype=complex)
    out_v = np.zeros(len(g), dtype=complex)
    out_c = np.empty(len(g), dtype=float)
    t = 0.0
    for i, tgt in enumerate(g):
        if tgt > t:
            nsub = max(1, int(math.ceil((tgt - t) / h_step - 1e-12)))
            h = (tgt - t) / nsub
            for _ in range(nsub):
                dz1, da1 = rhs(t, z, al)
                dz2, da2 = rhs(t + 0.5 * h, z + 0.5 * h * dz1, al + 0.5 * h * da1)
                dz3, da3 = rhs(t + 0.5 * h, z + 0.5 * h * dz2, al + 0.5 * h * da2)
                dz4, da4 = rhs(t + h, z + h * dz3, al + h * da3)
                z += h / 6.0 * (dz1 + 2.0 * dz2 + 2.0 * dz3 + dz4)
                al += h / 6.0 * (da1 + 2.0 * da2 + 2.0 * da3 + da4)
                t += h
                if not (0.0 < z < 1.0):
                    raise AnsatzValidityError(
                        f"z = {z:.6g} left (0, 1) at tau = {t:.6f}; the ansatz "
                        "only covers displaced thermal states"
                    )
            t = tgt
        out_a[i] = al / (1.0 - z)
        out_c[i] = z / (1.0 - z)
    return MomentTrajectory(tau_grid=g, a_mean=out_a, v_a=out_v, c_aadag=out_c)


# ---------------------------------------------------------------------------
# interaction-picture cross-check


def interaction_picture_check(
    tau: float,
    p: ModelParams,
    proto: DrivingProtocol,
    *,
    dim: int = 40,
    block: int = 20,
) -> float:
    """Residual of U+ a U = e^{-i script_t tau}(A(tau) + a) in truncated form.

    U = exp(-i script_t tau n) D(A(tau)) with the truncated displacement;
    returns the spectral norm of the residual restricted to the lowest
    ``block`` levels.  The block must leave enough headroom below ``dim``
    for the displaced number states it reaches.
    """
    if not (0 < block <= dim):
        raise DomainError(f"block must lie in (0, dim], got {block}")
    a = _ladder(dim)
    big_a = a_bar(tau, p, proto)
    d = expm(big_a * a.conj().T - np.conj(big_a) * a)
    phases = np.exp(-1j * p.script_t * tau * np.arange(dim))
    u = phases[:, None] * d
    residual = u.conj().T @ a @ u - cmath.exp(-1j * p.script_t * tau) * (
        big_a * np.eye(dim) + a
    )
    return float(np.linalg.norm(residual[:block, :block], 2))
