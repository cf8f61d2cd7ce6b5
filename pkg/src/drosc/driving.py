"""Driving-function machinery for the three master-equation variants.

The linear ramp runs through closed forms built on the ramp integrals; any
other protocol goes through nested adaptive quadrature of the defining
convolutions with the Ohmic kernel 1/(1/(w script_t) + i s)^2.  All
quantities are dimensionless (time tau = t/T on [0,1], rates in units of
1/T).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from scipy.integrate import quad

from .errors import DomainError, NumericError
from .params import ModelParams, bath_constants
from .special import integral_i0, integral_i1, integral_ie

__all__ = [
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
    "f_bar_quadrature",
    "f_ad_bar_quadrature",
    "delta_f_bar_quadrature",
    "g_bar",
    "g_ad_bar",
    "delta_g_bar",
    "h_bar",
    "h_bar_parts",
    "HBarParts",
]

_INNER_REL = 1e-10
_OUTER_REL = 1e-9
_INNER_ABS = 1e-13
_OUTER_ABS = 1e-12


class DrivingVariant(enum.Enum):
    """Which treatment of the driving enters the master equation."""

    NONADIABATIC = "nonadiabatic"
    ADIABATIC = "adiabatic"
    WEAKLY_DRIVEN = "weakly_driven"


@dataclass(frozen=True)
class DrivingProtocol:
    """Protocol lambda(tau) on [0,1] with its derivative.

    lambda(0) must vanish.  ``delta_l`` is set for the linear ramp
    lambda(tau) = delta_l * tau, which unlocks the closed-form fast paths.
    """

    lam: Callable[[float], float]
    lam_dot: Callable[[float], float]
    delta_l: Optional[float] = field(default=None)

    def __post_init__(self):
        l0 = self.lam(0.0)
        if abs(l0) > 1e-12:
            raise DomainError(f"protocol must satisfy lambda(0) = 0, got {l0!r}")

    @property
    def is_linear(self) -> bool:
        return self.delta_l is not None


def linear_ramp(delta_l: float) -> DrivingProtocol:
    """lambda(tau) = delta_l * tau."""
    dl = float(delta_l)
    if not math.isfinite(dl):
        raise DomainError(f"delta_l must be finite, got {delta_l!r}")
    return DrivingProtocol(lam=lambda tau: dl * tau, lam_dot=lambda tau: dl, delta_l=dl)


def generic_protocol(lam: Callable[[float], float], lam_dot: Callable[[float], float]) -> DrivingProtocol:
    """Arbitrary protocol; all driving functions fall back to quadrature."""
    return DrivingProtocol(lam=lam, lam_dot=lam_dot, delta_l=None)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not (0.0 <= tau <= 1.0):
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    return tau


def _cquad(f, a, b, *, epsabs, epsrel, limit=800):
    val, err = quad(f, a, b, complex_func=True, epsabs=epsabs, epsrel=epsrel, limit=limit)
    err_tot = abs(complex(err).real) + abs(complex(err).imag)
    if err_tot > 1e3 * max(epsabs, epsrel * max(1.0, abs(val))):
        raise NumericError(f"quadrature residual {err_tot:.2e} on [{a}, {b}]", residual=err_tot)
    return val


# ---------------------------------------------------------------------------
# A(tau) and its adiabatic / nonadiabatic split


def a_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Interaction-picture displacement (i script_t/2) int_0^tau lam e^{i script_t tau'}."""
    tau = _check_tau(tau)
    t = p.script_t
    if proto.is_linear:
        dl = proto.delta_l
        if tau == 0.0:
            return 0.0 + 0.0j
        return dl / 2 * ((tau + 1j / t) * cmath.exp(1j * t * tau) - 1j / t)
    if tau == 0.0:
        return 0.0 + 0.0j
    return (
        0.5j
        * t
        * _cquad(
            lambda u: proto.lam(u) * cmath.exp(1j * t * u),
            0.0,
            tau,
            epsabs=_INNER_ABS,
            epsrel=_INNER_REL,
        )
    )


def a_ad_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Adiabatic part (lam(tau)/2) e^{i script_t tau}."""
    tau = _check_tau(tau)
    return 0.5 * proto.lam(tau) * cmath.exp(1j * p.script_t * tau)


def delta_a_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Nonadiabatic remainder a_bar - a_ad_bar.

    For the linear ramp this equals (delta_l/2)(i/script_t)(e^{i script_t tau} - 1).
    """
    return a_bar(tau, p, proto) - a_ad_bar(tau, p, proto)


def _delta_a1_bar(tau: float, sigma: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    # (lam(tau-sigma) - lam(tau))/2 * e^{i script_t (tau-sigma)}; test-only surface
    return 0.5 * (proto.lam(tau - sigma) - proto.lam(tau)) * cmath.exp(1j * p.script_t * (tau - sigma))


def _delta_a2_bar(tau: float, sigma: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    # -int_0^{tau-sigma} (lam'(u)/2) e^{i script_t u} du; test-only surface
    upper = tau - sigma
    if upper == 0.0:
        return 0.0 + 0.0j
    if proto.is_linear:
        dl = proto.delta_l
        t = p.script_t
        return 0.5j * dl / t * (cmath.exp(1j * t * upper) - 1.0)
    return -_cquad(
        lambda u: 0.5 * proto.lam_dot(u) * cmath.exp(1j * p.script_t * u),
        0.0,
        upper,
        epsabs=_INNER_ABS,
        epsrel=_INNER_REL,
    )


# ---------------------------------------------------------------------------
# f(tau): convolution of the bath kernel with A


def _f_closed(tau: float, p: ModelParams, dl: float) -> complex:
    z = p.w * p.script_t * tau
    if tau == 0.0:
        return 0.0 + 0.0j
    bracket = (z + 1j * p.w) * integral_i0(z) - integral_i1(z)
    return (
        p.eta
        * dl
        / 2
        * (bracket * cmath.exp(1j * p.script_t * tau) - 1j * p.w * integral_ie(z, p.w))
    )


def _f_ad_closed(tau: float, p: ModelParams, dl: float) -> complex:
    z = p.w * p.script_t * tau
    return p.eta * dl / 2 * z * cmath.exp(1j * p.script_t * tau) * integral_i0(z)


def _kernel_convolve(tau, p, a_func, *, epsrel=_OUTER_REL, epsabs=_OUTER_ABS):
    # eta w script_t int_0^{w script_t tau} du e^{iu/w}/(1+iu)^2 a_func(tau - u/(w script_t))
    # The substitution u = w script_t s flattens the kernel peak at s = 0.
    wt = p.w * p.script_t
    z_max = wt * tau
    if z_max == 0.0 or p.eta == 0.0:
        return 0.0 + 0.0j

    def integrand(u):
        return cmath.exp(1j * u / p.w) / (1 + 1j * u) ** 2 * a_func(max(0.0, tau - u / wt))

    return p.eta * wt * _cquad(integrand, 0.0, z_max, epsabs=epsabs, epsrel=epsrel)


def f_bar_quadrature(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Generic-path f: double quadrature of the defining convolution."""
    tau = _check_tau(tau)
    return _kernel_convolve(tau, p, lambda s: a_bar(s, p, proto))


def f_ad_bar_quadrature(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Generic-path adiabatic f: kernel against A_ad(tau, sigma)."""
    tau = _check_tau(tau)
    lam_half = 0.5 * proto.lam(tau)
    return _kernel_convolve_two_time(
        tau, p, lambda sig: lam_half * cmath.exp(1j * p.script_t * (tau - sig))
    )


def _kernel_convolve_two_time(tau, p, a_two_time, *, epsrel=_OUTER_REL, epsabs=_OUTER_ABS):
    # same kernel, but the convolved function depends on sigma = u/(w script_t)
    wt = p.w * p.script_t
    z_max = wt * tau
    if z_max == 0.0 or p.eta == 0.0:
        return 0.0 + 0.0j

    def integrand(u):
        return cmath.exp(1j * u / p.w) / (1 + 1j * u) ** 2 * a_two_time(min(tau, u / wt))

    return p.eta * wt * _cquad(integrand, 0.0, z_max, epsabs=epsabs, epsrel=epsrel)


def delta_f_bar_quadrature(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Generic-path nonadiabatic remainder: kernel against dA1 + dA2."""
    tau = _check_tau(tau)
    return _kernel_convolve_two_time(
        tau,
        p,
        lambda sig: _delta_a1_bar(tau, sig, p, proto) + _delta_a2_bar(tau, sig, p, proto),
    )


def f_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Driving function f in dimensionless form; closed form on the linear ramp."""
    tau = _check_tau(tau)
    if proto.is_linear:
        return _f_closed(tau, p, proto.delta_l)
    return f_bar_quadrature(tau, p, proto)


def f_ad_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Adiabatic driving function f_ad; closed form on the linear ramp."""
    tau = _check_tau(tau)
    if proto.is_linear:
        return _f_ad_closed(tau, p, proto.delta_l)
    return f_ad_bar_quadrature(tau, p, proto)


def delta_f_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """Nonadiabatic part of f (f = f_ad + delta_f pointwise)."""
    return f_bar(tau, p, proto) - f_ad_bar(tau, p, proto)


# ---------------------------------------------------------------------------
# g(tau) and h(tau)


def g_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """g = e^{-i script_t tau}(f - alpha_bar A)."""
    tau = _check_tau(tau)
    bc = bath_constants(p)
    return cmath.exp(-1j * p.script_t * tau) * (
        f_bar(tau, p, proto) - bc.alpha_bar * a_bar(tau, p, proto)
    )


def g_ad_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """g_ad = e^{-i script_t tau}(f_ad - alpha_bar A_ad)."""
    tau = _check_tau(tau)
    bc = bath_constants(p)
    return cmath.exp(-1j * p.script_t * tau) * (
        f_ad_bar(tau, p, proto) - bc.alpha_bar * a_ad_bar(tau, p, proto)
    )


def delta_g_bar(tau: float, p: ModelParams, proto: DrivingProtocol) -> complex:
    """delta_g = e^{-i script_t tau}(delta_f - alpha_bar delta_A); g = g_ad + delta_g."""
    tau = _check_tau(tau)
    bc = bath_constants(p)
    return cmath.exp(-1j * p.script_t * tau) * (
        delta_f_bar(tau, p, proto) - bc.alpha_bar * delta_a_bar(tau, p, proto)
    )


def h_bar(tau: float, p: ModelParams, proto: DrivingProtocol, variant: DrivingVariant) -> complex:
    """Forcing entering the first-moment equation, per variant.

    nonadiabatic: g - (i script_t/2) lam
    adiabatic:    g_ad - (i script_t/2) lam - lam_dot/2
    weakly driven: -(i script_t/2) lam
    """
    tau = _check_tau(tau)
    drive = -0.5j * p.script_t * proto.lam(tau)
    if variant is DrivingVariant.WEAKLY_DRIVEN:
        return drive
    if variant is DrivingVariant.ADIABATIC:
        return g_ad_bar(tau, p, proto) + drive - 0.5 * proto.lam_dot(tau)
    return g_bar(tau, p, proto) + drive


# ---------------------------------------------------------------------------
# Oscillation-free split of h for the linear ramp.  Writing
#   h(tau) = S0(tau) + c1 tau + c0 + Q(tau) e^{-i script_t tau},
# S0 and Q are smooth and bounded, so the first-moment Duhamel integral can
# treat the fast phase analytically at any driving speed.


@dataclass(frozen=True)
class HBarParts:
    c1: complex
    c0: complex
    smooth: Callable[[float], complex]     # S0
    rotating: Callable[[float], complex]   # Q, coefficient of e^{-i script_t tau}
    has_rotating: bool

    def total(self, tau: float, script_t: float) -> complex:
        val = self.smooth(tau) + self.c1 * tau + self.c0
        if self.has_rotating:
            val += self.rotating(tau) * cmath.exp(-1j * script_t * tau)
        return val


def h_bar_parts(p: ModelParams, proto: DrivingProtocol, variant: DrivingVariant) -> HBarParts:
    """Decompose the linear-ramp h into smooth + linear + rotating pieces."""
    if not proto.is_linear:
        raise DomainError("h_bar_parts requires a linear ramp protocol")
    dl = proto.delta_l
    t = p.script_t
    w = p.w
    wt = w * t
    bc = bath_constants(p)
    zero = lambda tau: 0.0 + 0.0j

    if variant is DrivingVariant.WEAKLY_DRIVEN:
        return HBarParts(c1=-0.5j * t * dl, c0=0.0 + 0.0j, smooth=zero, rotating=zero, has_rotating=False)

    c1 = -0.5 * dl * bc.delta_bar - 0.5j * p.eta * dl * wt

    if variant is DrivingVariant.ADIABATIC:
        def smooth_ad(tau: float) -> complex:
            z = wt * tau
            # z I0(z) + iz stays bounded (-> 1 as z -> inf)
            return 0.5 * p.eta * dl * (z * integral_i0(z) + 1j * z)

        return HBarParts(c1=c1, c0=complex(-0.5 * dl), smooth=smooth_ad, rotating=zero, has_rotating=False)

    c0 = -0.5j * bc.alpha_bar * dl / t

    def smooth_nonad(tau: float) -> complex:
        z = wt * tau
        return 0.5 * p.eta * dl * ((z + 1j * w) * integral_i0(z) - integral_i1(z) + 1j * z)

    def rotating(tau: float) -> complex:
        z = wt * tau
        return -0.5j * p.eta * dl * w * integral_ie(z, w) - c0

    return HBarParts(c1=c1, c0=c0, smooth=smooth_nonad, rotating=rotating, has_rotating=True)
