"""Complex exponential integral and the three ramp integrals with their
large-argument limits.

Ei uses the principal branch (cut on the negative real axis).  The closed
forms below use the main branch of the complex logarithm throughout.
"""

from __future__ import annotations

import cmath
import math

from .errors import DomainError

__all__ = [
    "ei",
    "integral_i0",
    "integral_i1",
    "integral_ie",
    "i0_limit",
    "i1_asymptotic",
    "ie_limit",
]

_EULER_GAMMA = 0.5772156649015328606
# exp(L) bounds the cancellation in the power series: the largest term is
# ~exp(|z|) while the sum is ~exp(Re z), so L = |z| - Re z digits are lost.
_SERIES_LOSS_MAX = 7.0
_SERIES_ABS_MAX = 705.0
_CF_MAX_ITER = 400


def _check_finite(z: complex, name: str = "z") -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z}")
    return z


def _ei_series(z: complex) -> complex:
    # Ei(z) = gamma + ln z + sum_k z^k / (k k!), principal log.
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(1, 2500):
        term *= z / k
        total += term / k
        if abs(term) <= 1e-18 * (1.0 + abs(total)) and k > abs(z):
            break
    if z.imag == 0.0 and z.real < 0.0:
        # on the cut: principal-value convention, result is real
        return complex(_EULER_GAMMA + math.log(-z.real) + total.real, 0.0)
    return _EULER_GAMMA + cmath.log(z) + total


def _e1_continued_fraction(u: complex) -> complex:
    # E1(u) by the modified-Lentz evaluation of the Legendre-type continued
    # fraction; valid off the negative real axis, fast away from it.
    tiny = 1e-300
    b = u + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        a = -(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * cmath.exp(-u)
    raise DomainError(f"continued fraction for E1 did not converge at u={u}")


def ei(z: complex) -> complex:
    """Exponential integral Ei(z), principal branch.

    Power series for arguments with tolerable cancellation, otherwise
    Ei(z) = -E1(-z) + i pi sgn(Im z) with E1 from a continued fraction.
    Accurate to >= 12 significant digits for |z| <= 50.
    """
    z = _check_finite(z)
    if z == 0:
        raise DomainError("Ei has a logarithmic pole at z = 0")
    if z.real > 700.0:
        raise OverflowError(f"Ei overflows double precision for Re z = {z.real}")
    loss = abs(z) - z.real
    if loss <= _SERIES_LOSS_MAX and abs(z) <= _SERIES_ABS_MAX:
        return _ei_series(z)
    e1 = _e1_continued_fraction(-z)
    if z.imag > 0.0:
        return -e1 + 1j * math.pi
    if z.imag < 0.0:
        return -e1 - 1j * math.pi
    # negative real axis: principal-value convention, Ei(-x) = -E1(x)
    return complex((-e1).real, 0.0)


def _check_ramp_args(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z}")
    if z < 0.0:
        raise DomainError(f"ramp integrals take z >= 0, got {z}")
    return z


def integral_i0(z: float) -> complex:
    """int_0^z dx (1+ix)^-2 = 1/(z-i) - i."""
    z = _check_ramp_args(z)
    return 1.0 / (z - 1j) - 1j


def integral_i1(z: float) -> complex:
    """int_0^z dx x(1+ix)^-2 = z/(z-i) - ln(z-i) - i pi/2."""
    z = _check_ramp_args(z)
    return z / (z - 1j) - cmath.log(z - 1j) - 1j * math.pi / 2


def integral_ie(z: float, w: float) -> complex:
    """int_0^z dx e^{ix/w}(1+ix)^-2 in closed form via Ei."""
    z = _check_ramp_args(z)
    w = float(w)
    if not (math.isfinite(w) and w > 0.0):
        raise DomainError(f"cutoff ratio w must be positive, got {w}")
    iw = 1.0 / w
    return (
        (1j * iw) * math.exp(-iw) * (ei(iw) - ei(iw + 1j * z / w))
        + cmath.exp(1j * z / w) / (z - 1j)
        - 1j
    )


def i0_limit() -> complex:
    """z -> infinity value of integral_i0."""
    return -1j


def i1_asymptotic(z: float) -> complex:
    """Large-z form of integral_i1: 1 - ln(1+z^2)/2 - i pi/2."""
    z = _check_ramp_args(z)
    return 1.0 - 0.5 * math.log1p(z * z) - 1j * math.pi / 2


def ie_limit(w: float) -> complex:
    """z -> infinity value of integral_ie: (i/w)e^{-1/w}(Ei(1/w) - i pi) - i."""
    w = float(w)
    if not (math.isfinite(w) and w > 0.0):
        raise DomainError(f"cutoff ratio w must be positive, got {w}")
    iw = 1.0 / w
    return (1j * iw) * math.exp(-iw) * (ei(iw) - 1j * math.pi) - 1j
