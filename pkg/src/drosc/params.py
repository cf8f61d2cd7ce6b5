"""Dimensionless model parameters and bath-derived constants.

Everything downstream is a function of the five dimensionless numbers
(y, w, eta, script_t, delta_l): thermal energy, cutoff ratio, coupling,
driving duration and total displacement.  The bath constants come in two
independent routes (closed form vs principal-value quadrature) that the
test suite holds against each other.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

from scipy.integrate import quad

from .errors import DomainError, NumericError
from .special import ei, ie_limit

__all__ = [
    "ModelParams",
    "BathConstants",
    "n_th",
    "gamma_bar",
    "sigma_bar",
    "sigma_bar_closed",
    "alpha_bar",
    "bath_constants",
]

# default quadrature targets for this module; these constants feed every
# downstream trajectory
_QUAD_ABS = 1e-12
_QUAD_REL = 1e-10
_ETA_W_WARN = 0.5


@dataclass(frozen=True)
class ModelParams:
    """The five dimensionless parameters of the driven oscillator.

    y: thermal energy 1/(beta hbar omega); w: cutoff ratio Omega/omega;
    eta: coupling strength; script_t: driving duration omega*T;
    delta_l: total displacement in zero-point units.
    """

    y: float
    w: float
    eta: float
    script_t: float
    delta_l: float

    def __post_init__(self):
        for name in ("y", "w", "script_t"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise DomainError(f"eta must be nonnegative and finite, got {self.eta!r}")
        if not math.isfinite(self.delta_l):
            raise DomainError(f"delta_l must be finite, got {self.delta_l!r}")
        if self.eta * self.w >= _ETA_W_WARN:
            warnings.warn(
                f"eta*w = {self.eta * self.w:.3g} >= {_ETA_W_WARN}: weak-coupling "
                "validity is questionable",
                stacklevel=2,
            )


@dataclass(frozen=True)
class BathConstants:
    """Bath-derived constants at the system frequency, in driving-time units.

    alpha_bar is built as gamma_bar/2 + i sigma_bar so its real part matches
    gamma_bar/2 bit-for-bit, and delta_bar = alpha_bar + i script_t exactly.
    """

    n_th: float
    gamma_bar: float
    sigma_bar: float
    alpha_bar: complex
    delta_bar: complex


def n_th(y: float) -> float:
    """Thermal occupation [exp(1/y) - 1]^-1."""
    y = float(y)
    if not (math.isfinite(y) and y > 0):
        raise DomainError(f"y must be positive, got {y!r}")
    return 1.0 / math.expm1(1.0 / y)


def gamma_bar(p: ModelParams) -> float:
    """Dimensionless damping rate 2 pi eta script_t exp(-1/w)."""
    return 2.0 * math.pi * p.eta * p.script_t * math.exp(-1.0 / p.w)


def sigma_bar_closed(p: ModelParams) -> float:
    """Lamb-shift sum in closed form: -eta script_t (w - e^{-1/w} Ei(1/w))."""
    iw = 1.0 / p.w
    return -p.eta * p.script_t * (p.w - math.exp(-iw) * ei(iw).real)


def sigma_bar(p: ModelParams, *, epsabs: float = _QUAD_ABS, epsrel: float = _QUAD_REL) -> float:
    """Lamb-shift sum by principal-value quadrature.

    -P int_0^inf dx phi(x)/(x-1) with phi(x) = eta script_t x e^{-x/w}.  The
    singular pair around x = 1 is combined into the regular integrand
    [phi(1+u) - phi(1-u)]/u on u in (0,1]; the remainder runs from x = 2 to
    a cutoff X with e^{-X/w} below double precision.
    """
    if p.eta == 0.0:
        return 0.0
    c = p.eta * p.script_t
    w = p.w

    def phi(x):
        return c * x * math.exp(-x / w)

    def paired(u):
        if u == 0.0:
            # limiting value 2 phi'(1)
            return 2.0 * c * math.exp(-1.0 / w) * (1.0 - 1.0 / w)
        return (phi(1.0 + u) - phi(1.0 - u)) / u

    core, err1 = quad(paired, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=400)
    x_max = max(2.0, 40.0 * w)
    tail, err2 = quad(
        lambda x: phi(x) / (x - 1.0), 2.0, x_max, epsabs=epsabs, epsrel=epsrel, limit=400
    )
    total_err = err1 + err2
    scale = max(1.0, abs(core) + abs(tail))
    if total_err > 1e3 * max(epsabs, epsrel * scale):
        raise NumericError(
            f"principal-value quadrature did not converge (residual {total_err:.2e})",
            residual=total_err,
        )
    return -(core + tail)


def alpha_bar(p: ModelParams) -> complex:
    """Complex decay constant via the closed integral chain: script_t eta w Ie_inf(w)."""
    return p.script_t * p.eta * p.w * ie_limit(p.w)


@functools.lru_cache(maxsize=128)
def bath_constants(p: ModelParams) -> BathConstants:
    """Assemble all bath constants for a parameter set (cached; both types
    are immutable)."""
    g = gamma_bar(p)
    a = complex(0.5 * g, sigma_bar_closed(p))
    return BathConstants(
        n_th=n_th(p.y),
        gamma_bar=g,
        sigma_bar=a.imag,
        alpha_bar=a,
        delta_bar=a + 1j * p.script_t,
    )
