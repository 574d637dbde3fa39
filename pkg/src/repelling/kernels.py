"""Kernel/transform pairs and truncation bounds.

A kernel pair is a radial point-pair kernel ``k(rho)``, its force law
``H(rho) = -k'(rho)`` and its spectral multiplier ``h(lambda)``.  Only the
heat family is provided:

    k_t(rho) = (4 pi t)^(-d/2) exp(-rho^2 / (4 t))
    H_t(rho) = rho / (2 t) * k_t(rho)
    h_t(lam) = exp(-lam t)

On a flat torus the periodised ``k_t`` and the eigen-expansion weighted by
``h_t`` agree exactly (Poisson summation).  All public interfaces speak in
Laplace eigenvalues ``lam``; the spectral parameter ``r`` only appears through
``lam = r^2 + ((n - 1) / 2)^2`` in the hyperbolic picture and is never used
numerically.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

FAMILIES = ("heat",)


@dataclass(frozen=True)
class KernelPair:
    """Heat kernel pair with bandwidth ``t`` on a ``dim``-dimensional model."""

    t: float
    dim: int = 1
    family: str = "heat"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown kernel family {self.family!r}")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise DomainError(f"kernel bandwidth t must be positive, got {self.t}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim}")

    @property
    def k0(self):
        """Value of the kernel at zero distance."""
        return (4.0 * math.pi * self.t) ** (-0.5 * self.dim)

    def k(self, rho):
        return k_eval(self, rho)

    def H(self, rho):
        return H_eval(self, rho)

    def h(self, lam):
        return h_eval(self, lam)


def _nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must be nonnegative")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def k_eval(kernel, rho):
    """Kernel value at geodesic length ``rho`` (scalar or array)."""
    rho = _nonneg(rho, "rho")
    return _out(kernel.k0 * np.exp(-rho * rho / (4.0 * kernel.t)))


def H_eval(kernel, rho):
    """Repelling force magnitude ``-k'(rho)``; zero at ``rho = 0``."""
    rho = _nonneg(rho, "rho")
    t = kernel.t
    return _out(rho / (2.0 * t) * kernel.k0 * np.exp(-rho * rho / (4.0 * t)))


def h_eval(kernel, lam):
    """Spectral weight at Laplace eigenvalue ``lam``."""
    lam = _nonneg(lam, "lambda")
    return _out(np.exp(-lam * kernel.t))


def r_to_lambda(r, dim=2):
    """Spectral parameter to eigenvalue, ``lam = r^2 + ((dim-1)/2)^2``.

    Documentation helper only; nothing numerical depends on it.
    """
    return r * r + ((dim - 1) / 2.0) ** 2


# -- truncation ------------------------------------------------------------

def geometric_tail_bound(kernel, R, growth_rate=0.0, count_const=None,
                         count_degree=None, order=1):
    """Upper bound on the sum of ``g(L)`` over all orbit lengths ``L > R``.

    ``g`` is ``k`` for ``order=1`` and ``H`` for ``order=2``.  The number of
    lengths ``<= rho`` is assumed bounded by
    ``count_const * (rho + 1)**count_degree * exp(growth_rate * rho)``.

    Summation by parts turns the tail into ``int_R^inf (-g') N``, with
    ``-k' = (rho/2t) k`` and ``-H' <= (rho/2t)^2 k``.  The log of that
    integrand has a decreasing derivative, so the integral is at most
    ``exp(f(R)) / -f'(R)`` once ``f'(R) < 0``.  Returns ``inf`` otherwise.
    """
    if count_degree is None:
        count_degree = kernel.dim
    if count_const is None:
        count_const = 2.0 ** count_degree
    t = kernel.t
    if R <= 0:
        return math.inf
    if order == 2 and R * R < 2.0 * t:
        return math.inf  # H is not yet decreasing
    fprime = order / R + count_degree / (R + 1.0) + growth_rate - R / (2.0 * t)
    if fprime >= 0:
        return math.inf
    logf = (math.log(count_const) + order * math.log(R / (2.0 * t))
            + count_degree * math.log(R + 1.0) + growth_rate * R
            - R * R / (4.0 * t) + math.log(kernel.k0))
    return math.exp(logf) / -fprime


def geometric_truncation_radius(kernel, growth_rate, eps, count_const=None,
                                count_degree=None, order=1, max_radius=1e4):
    """Smallest ``R >= 1`` on the half-integer grid with tail bound ``< eps``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if growth_rate < 0:
        raise DomainError("growth rate must be nonnegative")
    R = 1.0
    while R <= max_radius:
        if geometric_tail_bound(kernel, R, growth_rate, count_const,
                                count_degree, order) < eps:
            return R
        R += 0.5
    raise DomainError(f"no truncation radius below {max_radius} reaches eps={eps}")


def _spectral_count_const(periods):
    return math.prod(max(2.0 * p, 1.0) for p in periods)


def spectral_tail_sum(kernel, periods, lambda_max):
    """Bound on ``sum h(lam_m)`` over nonzero torus modes with ``lam_m > lambda_max``.

    Modes are ``m / periods`` with ``lam = 4 pi^2 |m/periods|^2``; the number
    with frequency norm ``<= r`` is at most ``prod(max(2 l_k, 1)) (r+1)^d``.
    Below the radius ``r1`` where the summation-by-parts integrand starts to
    decay, the modes are bounded crudely by count times largest weight.
    """
    periods = tuple(float(p) for p in periods)
    d = len(periods)
    a = 4.0 * math.pi ** 2 * kernel.t
    const = _spectral_count_const(periods)
    r = math.sqrt(max(lambda_max, 0.0)) / (2.0 * math.pi)
    first = 1.0 / max(periods)
    # no nonzero mode lies below the first shell
    wmax = math.exp(-a * max(r, first) ** 2)
    if r < first:
        r = 0.5 * first

    def fprime(x):
        return 1.0 / x + d / (x + 1.0) - 2.0 * a * x

    r1 = r
    head = 0.0
    if fprime(r1) >= 0:
        while fprime(r1) > -1.0 / r1:
            r1 *= 1.25
        head = const * (r1 + 1.0) ** d * wmax
    logf = (math.log(const) + math.log(2.0 * a * r1)
            + d * math.log(r1 + 1.0) - a * r1 * r1)
    return head + math.exp(logf) / -fprime(r1)


def spectral_truncation(kernel, volume, n_points, eps, periods=None, step=0.25):
    """Eigenvalue cutoff with ``(N^2/V) * sum_{lam > cutoff} h(lam) < eps``.

    ``periods`` defaults to a cube of the given volume in ``kernel.dim``
    dimensions.  Returns ``0.0`` when the whole nonconstant spectrum already
    fits inside the tolerance.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if n_points < 1:
        raise DomainError("N must be at least 1")
    if not volume > 0:
        raise DomainError("volume must be positive")
    if periods is None:
        periods = (volume ** (1.0 / kernel.dim),) * kernel.dim
    scale = n_points ** 2 / volume
    if scale * spectral_tail_sum(kernel, periods, 0.0) < eps:
        return 0.0
    first = 1.0 / max(periods)
    r = first
    while True:
        lam = 4.0 * math.pi ** 2 * r * r
        if scale * spectral_tail_sum(kernel, periods, lam) < eps:
            return lam
        r += step
