"""Riemannian gradient descent with Armijo backtracking, plus multistart.

On a torus the objective is the spectral energy; on the hyperbolic surface
it is the geometric energy (no eigenfunctions available there).  The result
is certified when its spectral energy is at most the uniform-average level
``(N / V) sum a_m``; that inequality alone gives the per-mode Weyl bound.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
import math

import numpy as np

from .energy import (energy_and_gradient_geometric, energy_change_spectral,
                     energy_geometric, energy_spectral, gradient_spectral,
                     mean_field_level)
from .errors import DomainError, ResourceLimitError
from .manifolds import is_torus


@dataclass(frozen=True)
class OptimizeParams:
    max_iters: int = 10_000
    grad_tol: float = 1e-9
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    seed: int = 0
    restarts: int = 16
    min_step: float = 1e-16
    eps: float = 1e-12  # truncation tolerance for geometric objectives

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise DomainError("max_iters must be a positive integer")
        if not self.grad_tol > 0:
            raise DomainError("grad_tol must be positive")
        if not 0 < self.armijo_c < 1:
            raise DomainError("armijo_c must lie in (0, 1)")
        if not 0 < self.backtrack_factor < 1:
            raise DomainError("backtrack_factor must lie in (0, 1)")
        if not self.initial_step > 0:
            raise DomainError("initial_step must be positive")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if int(self.restarts) != self.restarts or self.restarts < 0:
            raise DomainError("restarts must be a nonnegative integer")
        if not self.eps > 0:
            raise DomainError("eps must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass
class OptimizeResult:
    config: np.ndarray
    energy: object
    residual_norm: float
    iterations: int
    certified_below_mean: object  # bool on tori, None on the hyperbolic surface
    trace: list
    status: str
    mean_field: object = None
    restart_energies: list = field(default_factory=list)
    best_restart: int = 0

    def to_dict(self, with_trace=True):
        pts = self.config
        if np.iscomplexobj(pts):
            coords = [[float(p.real), float(p.imag)] for p in pts]
        else:
            coords = [[float(v) for v in row] for row in pts]
        out = {
            "points": coords,
            "energy": self.energy.to_dict(),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "certified_below_mean": self.certified_below_mean,
            "mean_field_level": self.mean_field,
            "status": self.status,
            "restart_energies": list(self.restart_energies),
            "best_restart": self.best_restart,
        }
        if with_trace:
            out["trace"] = [[e, r] for e, r in self.trace]
        return out


def uniform_random_configuration(M, n_points, seed):
    """``N`` i.i.d. points from the normalised volume measure."""
    if n_points < 1:
        raise DomainError("N must be at least 1")
    rng = np.random.default_rng(seed)
    return M.reduce(M.random_points(n_points, rng))


class _Objective:
    def __init__(self, M, kernel, basis, eps):
        self.M = M
        self.kernel = kernel
        self.basis = basis
        self.eps = eps
        self.spectral = is_torus(M)
        if self.spectral and basis is None:
            raise DomainError("torus minimisation needs a spectral basis")

    def __call__(self, x):
        """Energy value and Riemannian gradient."""
        if self.spectral:
            return energy_spectral(x, self.basis).value, gradient_spectral(x, self.basis)
        report, grad = energy_and_gradient_geometric(x, self.M, self.kernel, self.eps)
        return report.value, grad

    def trial(self, x, v, E):
        """Energy change for the step ``v``, the new point and its energy.

        The gradient comes back too when it was needed for the value anyway.
        """
        xn = self.M.retract(x, v)
        if self.spectral:
            dE = energy_change_spectral(x, v, self.basis)
            return dE, xn, E + dE, None
        En, gn = self(xn)
        return En - E, xn, En, gn

    def residual(self, grad):
        norms = self.M.tangent_norms(grad)
        if not self.spectral:
            norms = 0.5 * norms  # report force, not gradient
        return float(np.max(norms)) if len(norms) else 0.0

    def report(self, x):
        if self.spectral:
            return energy_spectral(x, self.basis)
        return energy_geometric(x, self.M, self.kernel, self.eps)


def _has_coincident(M, x):
    pts = np.asarray(x)
    if pts.ndim == 1:
        pts = pts.reshape(len(pts), -1)
    return len(np.unique(pts, axis=0)) < len(pts)


def minimize(M, kernel, basis, start, params=None):
    """Gradient descent ``x <- retract(x, -s g)`` with Armijo backtracking.

    A trial step is accepted when the energy drops strictly and by at least
    ``armijo_c * s * |g|^2``.  On tori the drop is computed directly from
    amplitude increments, which resolves it below the roundoff of the energy
    itself; a trace entry falls back to the accumulated drop only when the
    recomputed energy cannot resolve it.  The first trial
    step is ``initial_step``; later ones start from twice the last accepted
    step.  If no step down to
    ``min_step`` is accepted the run stops with status ``"stagnated"``.
    """
    params = params or OptimizeParams()
    obj = _Objective(M, kernel, basis, params.eps)
    x = M.reduce(M.as_points(start))
    E, g = obj(x)
    res = obj.residual(g)
    trace = [(E, res)]
    step = params.initial_step
    status = "max_iters"
    it = 0
    while True:
        if res <= params.grad_tol:
            status = "stagnated" if _has_coincident(M, x) else "converged"
            break
        if it >= params.max_iters:
            break
        gg = float(np.sum(M.tangent_norms(g) ** 2))
        s = step
        accepted = False
        while s >= params.min_step:
            dE, xn, En, gn = obj.trial(x, -s * g, E)
            if dE < 0 and dE <= -params.armijo_c * s * gg:
                accepted = True
                break
            s *= params.backtrack_factor
        if not accepted:
            status = "stagnated"
            break
        if gn is None:
            Ec, gn = obj(xn)
            # keep the recomputed value whenever it resolves the drop
            if Ec < E:
                En = Ec
        x, E, g = xn, En, gn
        res = obj.residual(g)
        trace.append((E, res))
        step = 2.0 * s
        it += 1
    report = obj.report(x)
    certified = None
    level = None
    if obj.spectral:
        level = mean_field_level(basis, len(x))
        certified = bool(report.value <= level)
    return OptimizeResult(x, report, res, it, certified, trace, status, level)


def multistart(M, kernel, basis, n_points, params=None, parallel=False):
    """Best of ``params.restarts`` runs from seeded uniform starts.

    Run ``r`` uses seed ``params.seed + r``.  Energies equal within
    ``1e-12`` resolve to the lowest restart index.
    """
    params = params or OptimizeParams()
    if params.restarts < 1:
        raise DomainError("multistart needs restarts >= 1")

    def run(r):
        start = uniform_random_configuration(M, n_points, params.seed + r)
        return minimize(M, kernel, basis, start, params)

    def guarded(r):
        try:
            return run(r)
        except ResourceLimitError:
            raise
        except (DomainError, FloatingPointError, ArithmeticError) as exc:
            return exc

    if parallel:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(guarded, range(params.restarts)))
    else:
        results = [guarded(r) for r in range(params.restarts)]
    best = None
    best_idx = -1
    energies = []
    for r, res in enumerate(results):
        if isinstance(res, Exception):
            energies.append(None)
            continue
        energies.append(res.energy.value)
        if best is None or res.energy.value < best.energy.value - 1e-12:
            best, best_idx = res, r
    if best is None:
        raise results[-1]
    best.restart_energies = energies
    best.best_restart = best_idx
    return best


def rotation_aligned_error(x, circumference=1.0):
    """Max distance of sorted circle points from the best-rotated equal spacing."""
    pts = np.sort(np.mod(np.asarray(x, dtype=float).reshape(-1), circumference))
    n = len(pts)
    grid = np.arange(n) * circumference / n
    offs = pts - grid
    # circular mean of the offsets picks the rotation
    ang = 2.0 * math.pi * offs / (circumference / n)
    shift = math.atan2(np.mean(np.sin(ang)), np.mean(np.cos(ang))) * (circumference / n) / (2 * math.pi)
    diff = offs - shift
    spacing = circumference / n
    diff = diff - spacing * np.round(diff / spacing)
    return float(np.max(np.abs(diff)))
