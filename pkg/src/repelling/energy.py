"""Spectral and geometric energies, forces, and the pretrace residual.

Conventions shared by both energies:

* the geometric energy sums ``k(L)`` over every geodesic between every
  ordered pair of points, including nontrivial loops from a point to itself,
  but never the zero-length identity loop (its contribution ``N k(0)`` does
  not depend on the configuration);
* the spectral energy sums ``a_m |S_m|^2`` over nonconstant modes only (the
  constant mode contributes ``N^2 h(0) / V``).

With both constants restored the two sides agree up to truncation; on a flat
torus that identity is Poisson summation for the heat kernel.  Because the
geometric energy counts ordered pairs, its gradient at ``x_i`` is ``-2``
times the one-sided force ``sum H(L) V`` at ``x_i``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _loops
from .errors import DomainError, UnsupportedModelError
from .kernels import (geometric_tail_bound, geometric_truncation_radius,
                      spectral_truncation)
from .manifolds import disk, is_torus
from .spectrum import build_basis

UNIT_ROUNDOFF = 2.0 ** -53
CONVENTIONS = ("self_interaction_excludes_identity", "constant_mode_excluded")


@dataclass
class EnergyReport:
    """Energy value with its certified truncation bound.

    ``roundoff`` is a separate, looser bound on floating-point error in the
    terms and their compensated sum.
    """

    value: float
    tail_bound: float
    roundoff: float = 0.0
    conventions: tuple = field(default=CONVENTIONS)
    kind: str = ""

    def to_dict(self):
        return {"value": self.value, "tail_bound": self.tail_bound,
                "roundoff": self.roundoff, "conventions": list(self.conventions),
                "kind": self.kind}


def _require_torus(M, what):
    if not is_torus(M):
        raise UnsupportedModelError(f"{what} needs a flat torus; no closed-form spectrum for {M.kind}")


def basis_for(M, kernel, n_points, eps):
    """Torus basis truncated so the spectral energy tail is below ``eps``."""
    _require_torus(M, "spectral basis")
    lam = spectral_truncation(kernel, M.volume(), n_points, eps, periods=M.periods)
    return build_basis(M, kernel, lam)


# -- spectral side -------------------------------------------------------------

def _spectral_parts(points, basis):
    x = np.asarray(points, dtype=float).reshape(-1, basis.dim)
    amps, phis = _loops.weyl_amplitudes(x, basis.freqs, basis.volume)
    return x, amps, phis


def energy_spectral(points, basis):
    """``sum_m a_m |S_m|^2`` over the basis, with certified tail."""
    if basis is None:
        raise UnsupportedModelError("spectral energy needs a torus basis")
    x, amps, _ = _spectral_parts(points, basis)
    n = x.shape[0]
    terms = basis.weights * (amps.real ** 2 + amps.imag ** 2)
    value = math.fsum(terms.tolist())
    scale = n * n / basis.volume
    rmax = math.sqrt(basis.lambda_max) / (2.0 * math.pi)
    c = 16.0 + 4.0 * math.pi * rmax * sum(basis.periods)
    roundoff = UNIT_ROUNDOFF * c * 2.0 * scale * basis.weight_sum()
    return EnergyReport(value, scale * basis.weight_tail(), roundoff, kind="spectral")


def gradient_spectral(points, basis):
    """Chart gradient of the spectral energy, shape ``(N, d)``.

    ``d/dx_i |S_m|^2 = 2 Re(conj(S_m) * 2 pi i f_m phi_m(x_i))`` with
    ``f_m = m / l``.
    """
    if basis is None:
        raise UnsupportedModelError("spectral gradient needs a torus basis")
    x, amps, phis = _spectral_parts(points, basis)
    if len(basis) == 0:
        return np.zeros_like(x)
    coef = basis.weights[None, :] * np.imag(np.conj(amps)[None, :] * phis)
    return -4.0 * math.pi * (coef @ basis.freqs)


def energy_change_spectral(points, step, basis):
    """``E(x + step) - E(x)`` without cancellation.

    With ``D_m = S_m(x + step) - S_m(x)`` the change is
    ``sum a_m Re(D_m conj(2 S_m + D_m))``, and each increment
    ``exp(i a) - 1 = 2i sin(a/2) exp(i a/2)`` keeps full relative accuracy,
    so changes far below one ulp of the energy are still resolved.
    """
    x = np.asarray(points, dtype=float).reshape(-1, basis.dim)
    v = np.asarray(step, dtype=float).reshape(x.shape)
    if len(basis) == 0:
        return 0.0
    freqs = basis.freqs
    phi = np.exp(2j * math.pi * (x @ freqs.T)) / math.sqrt(basis.volume)
    half = math.pi * (v @ freqs.T)
    inc = phi * (2j * np.sin(half) * np.exp(1j * half))
    S = phi.sum(axis=0)
    D = inc.sum(axis=0)
    return math.fsum((basis.weights * np.real(D * np.conj(2.0 * S + D))).tolist())


def mean_field_level(basis, n_points):
    """``(N / V) sum a_m``: the average spectral energy of uniform configurations."""
    return n_points / basis.volume * basis.weight_sum()


# -- geometric side ------------------------------------------------------------

def _check_kernel(M, kernel):
    if kernel.dim != M.dim:
        raise DomainError(f"kernel dimension {kernel.dim} does not match manifold dimension {M.dim}")


def truncation_radius(M, kernel, n_points, eps, with_force=False):
    """Cutoff so the omitted part of the ordered-pair sums stays below ``eps``."""
    const, degree, growth = M.orbit_count_bound()
    per_pair = eps / (n_points * n_points)
    R = geometric_truncation_radius(kernel, growth, per_pair, const, degree, order=1)
    if with_force:
        R = max(R, geometric_truncation_radius(kernel, growth, per_pair, const, degree, order=2))
    return R


def _geometric(points, M, kernel, eps, with_force):
    if not eps > 0:
        raise DomainError("eps must be positive")
    _check_kernel(M, kernel)
    t, k0 = kernel.t, kernel.k0
    if is_torus(M):
        x = M.as_points(points)
        n = x.shape[0]
        R = truncation_radius(M, kernel, n, eps, with_force)
        offsets, ms = M.lattice_offsets(R + 2.0 * M.half_diameter)
        zero_idx = int(np.nonzero(np.all(ms == 0, axis=1))[0][0])
        value, forces = _loops.torus_pair_sums(x, M.period_array, offsets, zero_idx,
                                               R, t, k0, with_force)
        c = 16.0 + (R / t) * (R + 4.0 * M.half_diameter)
    else:
        z = M.as_points(points)
        n = z.shape[0]
        R = truncation_radius(M, kernel, n, eps, with_force)
        d0 = disk.dist_origin(z)
        d0 = np.atleast_1d(d0)
        # reduced points lie within the circumradius; sizing the table for that
        # keeps one enumeration valid for every reduced configuration
        radius = R + 2.0 * max(float(np.max(d0)), M.circumradius) + 1e-9
        a, b, disp = M._elements_with_identity(radius)
        limits = np.searchsorted(disp, R + d0[:, None] + d0[None, :] + 1e-9, side="right")
        value, forces = _loops.disk_pair_sums(z, a, b, limits, R, t, k0, with_force)
        c = 64.0 + (R / t) * 1e4
    const, degree, growth = M.orbit_count_bound()
    tail = n * n * geometric_tail_bound(kernel, R, growth, const, degree, order=1)
    report = EnergyReport(value, tail, UNIT_ROUNDOFF * c * value, kind="geometric")
    return report, forces, R


def energy_geometric(points, M, kernel, eps=1e-12):
    """Sum of ``k(L)`` over geodesics between ordered pairs, tail ``< eps``."""
    report, _, _ = _geometric(points, M, kernel, eps, with_force=False)
    return report


def forces(points, M, kernel, eps=1e-12):
    """One-sided repelling sums ``sum H(L) V`` at every point.

    Torus: ``(N, d)`` real; disk: ``(N,)`` complex in the orthonormal frame.
    """
    _, f, _ = _geometric(points, M, kernel, eps, with_force=True)
    return f


def force_at(points, i, M, kernel, eps=1e-12):
    """Net repelling vector at point ``i``."""
    n = len(M.as_points(points))
    if not 0 <= i < n:
        raise DomainError(f"point index {i} out of range for N={n}")
    return forces(points, M, kernel, eps)[i]


def energy_and_gradient_geometric(points, M, kernel, eps=1e-12):
    """Geometric energy report and its Riemannian gradient (``-2`` x forces)."""
    report, f, _ = _geometric(points, M, kernel, eps, with_force=True)
    return report, -2.0 * f


# -- pretrace identity -----------------------------------------------------------

@dataclass
class PretraceReport:
    residual: float
    budget: float
    geometric: EnergyReport
    spectral: EnergyReport
    identity_term: float
    constant_mode: float

    @property
    def ok(self):
        return abs(self.residual) <= self.budget

    def to_dict(self):
        return {"residual": self.residual, "budget": self.budget, "ok": self.ok,
                "geometric": self.geometric.to_dict(), "spectral": self.spectral.to_dict(),
                "identity_term": self.identity_term, "constant_mode": self.constant_mode}


def pretrace_check(points, M, kernel, basis, eps=1e-12):
    """Both sides of the periodised-kernel identity and their mismatch.

    ``residual = (E_geo + N k(0)) - (N^2 h(0) / V + E_spec)``; the budget is
    the sum of both truncation bounds plus both roundoff bounds.
    """
    _require_torus(M, "pretrace residual")
    x = M.as_points(points)
    n = x.shape[0]
    geo = energy_geometric(x, M, kernel, eps)
    spectral = energy_spectral(x, basis)
    ident = n * kernel.k0
    const = n * n * float(kernel.h(0.0)) / M.volume()
    residual = math.fsum([geo.value, ident, -const, -spectral.value])
    budget = (geo.tail_bound + spectral.tail_bound + geo.roundoff + spectral.roundoff
              + 8.0 * UNIT_ROUNDOFF * (ident + const + geo.value + spectral.value))
    return PretraceReport(residual, budget, geo, spectral, ident, const)


def pretrace_residual(points, M, kernel, basis, eps=1e-12):
    return pretrace_check(points, M, kernel, basis, eps).residual
