"""Equidistribution diagnostics.

If a torus configuration has spectral energy at most ``(N / V) sum a_n``,
every single term obeys ``a_m |S_m|^2 <= (N / V) sum a_n``, hence

    |S_m| / N  <=  C(m) / sqrt(N),    C(m) = sqrt(sum a_n / (V a_m)).

:func:`weyl_report` checks that inequality mode by mode.  The numerator
``sum a_n`` includes the certified tail of the omitted modes, so the
reported bound is valid for the untruncated series.
"""
import csv
from dataclasses import dataclass, field
import io
import math

import numpy as np
from scipy import integrate

from . import _loops
from .energy import energy_spectral, mean_field_level
from .errors import DomainError, UnsupportedModelError
from .kernels import h_eval
from .manifolds import is_torus

WEYL_SLACK = 1e-12


@dataclass
class WeylReport:
    indices: np.ndarray
    w: np.ndarray
    bound: np.ndarray
    passed: np.ndarray
    weight_sum: float
    weight_tail: float
    n_points: int
    energy: float
    mean_field: float
    certified_below_mean: bool
    extra: dict = field(default_factory=dict)

    @property
    def all_pass(self):
        return bool(np.all(self.passed))

    def lowest(self, count):
        """Row positions of the ``count`` lowest modes (basis order)."""
        return np.arange(min(count, len(self.w)))

    def max_w(self, count=None):
        sel = self.w if count is None else self.w[self.lowest(count)]
        return float(np.max(sel)) if len(sel) else 0.0

    def to_dict(self):
        return {
            "n_points": self.n_points,
            "energy": self.energy,
            "mean_field_level": self.mean_field,
            "certified_below_mean": self.certified_below_mean,
            "weight_sum": self.weight_sum,
            "weight_tail": self.weight_tail,
            "modes": len(self.w),
            "failures": int(np.sum(~self.passed)),
            "all_pass": self.all_pass,
            "max_w": self.max_w(),
            "table": [
                {"mode_index": [int(v) for v in self.indices[i]], "w_m": float(self.w[i]),
                 "bound": float(self.bound[i]), "pass": bool(self.passed[i])}
                for i in range(len(self.w))
            ],
        }

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["mode_index", "w_m", "bound", "pass"])
        for i in range(len(self.w)):
            idx = "(" + ",".join(str(int(v)) for v in self.indices[i]) + ")"
            writer.writerow([idx, repr(float(self.w[i])), repr(float(self.bound[i])),
                             "true" if self.passed[i] else "false"])
        return buf.getvalue()


def weyl_bounds(basis, n_points):
    """``C(m) / sqrt(N)`` for every basis mode, tail-inflated numerator."""
    total = basis.weight_sum() + basis.weight_tail()
    return np.sqrt(total / (basis.volume * basis.weights)) / math.sqrt(n_points)


def weyl_report(points, basis):
    """Normalised amplitudes against the sub-mean-energy bound."""
    x = np.asarray(points, dtype=float).reshape(-1, basis.dim)
    n = x.shape[0]
    amps, _ = _loops.weyl_amplitudes(x, basis.freqs, basis.volume)
    w = np.abs(amps) / n
    bound = weyl_bounds(basis, n)
    energy = energy_spectral(x, basis).value
    level = mean_field_level(basis, n)
    return WeylReport(basis.indices, w, bound, w <= bound + WEYL_SLACK,
                      basis.weight_sum(), basis.weight_tail(), n, energy, level,
                      bool(energy <= level))


@dataclass
class MeanEnergyReport:
    n_points: int
    samples: int
    mean: float
    std_error: float
    target: float
    agrees: bool
    energies: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {"n_points": self.n_points, "samples": self.samples, "mean": self.mean,
                "std_error": self.std_error, "target": self.target,
                "deviation": self.mean - self.target, "agrees": self.agrees}


def mean_energy_check(M, kernel, basis, n_points, samples, seed, nsigma=4.0):
    """Monte Carlo mean of the spectral energy over uniform configurations.

    For independent uniform points ``E|S_m|^2 = N / V`` exactly, so the
    truncated energy averages to ``(N / V) sum a_m`` over the stored modes.
    """
    if not is_torus(M):
        raise UnsupportedModelError("mean-energy check needs a flat torus")
    if samples < 100:
        raise DomainError("mean-energy check needs at least 100 samples")
    rng = np.random.default_rng(seed)
    energies = np.empty(samples)
    for s in range(samples):
        energies[s] = energy_spectral(M.random_points(n_points, rng), basis).value
    mean = math.fsum(energies.tolist()) / samples
    se = float(np.std(energies, ddof=1)) / math.sqrt(samples)
    target = mean_field_level(basis, n_points)
    agrees = abs(mean - target) <= nsigma * se + 1e-12 * max(abs(target), 1.0)
    return MeanEnergyReport(n_points, samples, mean, se, target, bool(agrees), energies)


@dataclass
class IntegrationReport:
    empirical: complex
    exact: complex
    difference: complex
    weyl_difference: complex


def _conjugate_symmetric(coeffs):
    table = {tuple(m): complex(c) for m, c in coeffs}
    return all(abs(table.get(tuple(-v for v in m), 0j) - c.conjugate()) <= 1e-15 * (1 + abs(c))
               for m, c in table.items())


def integrate_against(points, coeffs, periods):
    """Sample mean of ``f(x) = sum_m c_m exp(2 pi i m.x / l)`` versus its integral mean.

    ``coeffs`` is a list of ``(index, coefficient)`` pairs.  The empirical
    mean is evaluated directly; the difference is also rebuilt from Weyl
    amplitudes as ``sum_{m != 0} c_m sqrt(V) S_m / N``.  Values are real
    when the coefficient list is conjugate-symmetric.
    """
    periods = np.asarray(periods, dtype=float).reshape(-1)
    x = np.asarray(points, dtype=float).reshape(-1, len(periods))
    n = x.shape[0]
    V = float(np.prod(periods))
    idx = np.array([np.asarray(m, dtype=float).reshape(-1) for m, _ in coeffs]).reshape(-1, len(periods))
    c = np.array([complex(v) for _, v in coeffs])
    freqs = idx / periods
    vals = np.exp(2j * math.pi * (x @ freqs.T)) @ c if len(c) else np.zeros(n, complex)
    empirical = complex(math.fsum(vals.real.tolist()), math.fsum(vals.imag.tolist())) / n
    zero = np.all(idx == 0, axis=1)
    exact = complex(np.sum(c[zero]))
    nz = ~zero
    if np.any(nz):
        amps, _ = _loops.weyl_amplitudes(x, freqs[nz], V)
        weyl_diff = complex(np.sum(c[nz] * amps) * math.sqrt(V) / n)
    else:
        weyl_diff = 0j
    out = IntegrationReport(empirical, exact, empirical - exact, weyl_diff)
    if _conjugate_symmetric(list(zip(idx.astype(int).tolist(), c))):
        out = IntegrationReport(*(v.real for v in (out.empirical, out.exact,
                                                   out.difference, out.weyl_difference)))
    return out


def symmetric_minimizer_oracle(n_points, circumference, kernel, lambda_max=math.inf, rtol=1e-17):
    """Spectral energy of ``N`` equally spaced points on a circle.

    Only modes ``m = k N`` survive, each pair ``+-kN`` contributing
    ``2 a_{kN} N^2 / V``.  Returns ``(value, tail_bound)``; modes above
    ``lambda_max`` are left out so the value can match a truncated basis.
    The tail is bounded by a geometric series since consecutive weight
    ratios decrease.
    """
    if n_points < 1:
        raise DomainError("N must be at least 1")
    V = float(circumference)
    scale = 2.0 * n_points ** 2 / V
    terms = []
    k = 1
    while True:
        lam = 4.0 * math.pi ** 2 * (k * n_points / V) ** 2
        if lam > lambda_max:
            return math.fsum(terms), 0.0
        term = scale * float(h_eval(kernel, lam))
        terms.append(term)
        lam_next = 4.0 * math.pi ** 2 * ((k + 1) * n_points / V) ** 2
        ratio = math.exp(-(lam_next - lam) * kernel.t)
        tail = term * ratio / (1.0 - ratio)
        total = math.fsum(terms)
        if tail <= rtol * total or term == 0.0:
            return total, tail
        k += 1


# -- hyperbolic proxy ------------------------------------------------------------

@dataclass
class NearestNeighborReport:
    """Heuristic spread statistic; not a Weyl certificate."""

    mean_nn: float
    min_nn: float
    poisson_mean_nn: float
    ratio: float
    label: str = "heuristic"

    def to_dict(self):
        return {"mean_nn_distance": self.mean_nn, "min_nn_distance": self.min_nn,
                "poisson_mean_nn_distance": self.poisson_mean_nn,
                "ratio": self.ratio, "label": self.label}


def nearest_neighbor_report(points, M):
    """Mean nearest-neighbour distance against ``N`` uniform random points.

    Baseline: ``P(nn > r) = (1 - A(r) / V)^(N-1)`` with the hyperbolic disk
    area ``A(r) = 2 pi (cosh r - 1)``, exact below the injectivity radius.
    """
    pts = M.as_points(points)
    n = len(pts)
    if n < 2:
        raise DomainError("nearest-neighbour statistics need N >= 2")
    nn = np.array([min(M.distance(pts[i], pts[j]) for j in range(n) if j != i)
                   for i in range(n)])
    V = M.volume()
    r_max = math.acosh(1.0 + V / (2.0 * math.pi))

    def surv(r):
        return (1.0 - 2.0 * math.pi * (math.cosh(r) - 1.0) / V) ** (n - 1)

    base, _ = integrate.quad(surv, 0.0, r_max)
    mean = float(np.mean(nn))
    return NearestNeighborReport(mean, float(np.min(nn)), base, mean / base)
