"""Flat-torus eigendata: modes, weights and Weyl amplitudes.

Eigenfunctions are ``phi_m(x) = V^(-1/2) exp(2 pi i sum_k m_k x_k / l_k)``
with eigenvalue ``4 pi^2 sum_k (m_k / l_k)^2``.  Both members of each
conjugate pair ``+-m`` are stored, so every quadratic form built from the
amplitudes is real.  The constant mode is left out; wherever it matters it
is added back analytically.

Trigonometric polynomials are sup-norm dense in ``C(T^d)``
(Stone-Weierstrass), which is the density hypothesis the equidistribution
argument needs.
"""
from dataclasses import dataclass
import itertools
import math

import numpy as np

from . import _loops
from .errors import UnsupportedModelError
from .kernels import h_eval, spectral_tail_sum


@dataclass(frozen=True)
class SpectralMode:
    index: tuple
    eigenvalue: float
    weight: float


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Nonconstant torus modes with ``lam <= lambda_max``.

    Ordered by eigenvalue, then lexicographically by index.
    """

    periods: tuple
    lambda_max: float
    indices: np.ndarray      # (M, d) int
    eigenvalues: np.ndarray  # (M,)
    weights: np.ndarray      # (M,)
    volume: float
    kernel: object = None

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def dim(self):
        return len(self.periods)

    @property
    def freqs(self):
        """Frequency vectors ``m / l`` (cycles per unit length)."""
        return self.indices / np.asarray(self.periods)

    @property
    def modes(self):
        return [SpectralMode(tuple(int(v) for v in self.indices[i]),
                             float(self.eigenvalues[i]), float(self.weights[i]))
                for i in range(len(self))]

    def weight_sum(self):
        """Truncated ``sum a_m`` over the stored modes."""
        return math.fsum(self.weights.tolist())

    def weight_tail(self):
        """Certified bound on ``sum a_m`` over the omitted modes."""
        if self.kernel is None:
            return 0.0
        return spectral_tail_sum(self.kernel, self.periods, self.lambda_max)

    def eval(self, x):
        """Table ``phi_m(x_i)``, shape ``(N, M)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(2j * math.pi * (x @ self.freqs.T)) / math.sqrt(self.volume)

    def find(self, index):
        """Position of the mode with the given integer index vector."""
        hits = np.nonzero(np.all(self.indices == np.asarray(index), axis=1))[0]
        if not len(hits):
            raise KeyError(index)
        return int(hits[0])


def build_basis(M, kernel, lambda_max):
    """All nonzero lattice modes of the torus ``M`` with eigenvalue ``<= lambda_max``."""
    if getattr(M, "kind", None) != "torus":
        raise UnsupportedModelError("closed-form eigendata exist only for flat tori")
    periods = np.asarray(M.periods)
    d = len(periods)
    if lambda_max <= 0:
        empty = np.zeros((0, d), dtype=int)
        return SpectralBasis(M.periods, 0.0, empty, np.zeros(0), np.zeros(0), M.volume(), kernel)
    rmax = math.sqrt(lambda_max) / (2.0 * math.pi)
    ranges = [range(-int(math.floor(rmax * p)), int(math.floor(rmax * p)) + 1) for p in periods]
    idx = np.array(list(itertools.product(*ranges)), dtype=int).reshape(-1, d)
    lam = 4.0 * math.pi ** 2 * np.sum((idx / periods) ** 2, axis=1)
    keep = (lam <= lambda_max) & np.any(idx != 0, axis=1)
    idx, lam = idx[keep], lam[keep]
    order = np.lexsort(tuple(idx[:, k] for k in range(d - 1, -1, -1)) + (lam,))
    idx, lam = idx[order], lam[order]
    return SpectralBasis(M.periods, float(lambda_max), idx, lam,
                         np.asarray(h_eval(kernel, lam), dtype=float).reshape(-1),
                         M.volume(), kernel)


def weyl_amplitudes(basis, points):
    """Vector of ``S_m = sum_i phi_m(x_i)`` over every basis mode."""
    x = np.asarray(points, dtype=float).reshape(-1, basis.dim)
    amps, _ = _loops.weyl_amplitudes(x, basis.freqs, basis.volume)
    return amps


def weyl_amplitude(basis, mode, points):
    """Amplitude for one mode, given by position or by integer index vector."""
    if not isinstance(mode, (int, np.integer)):
        mode = basis.find(mode)
    x = np.asarray(points, dtype=float).reshape(-1, basis.dim)
    amps, _ = _loops.weyl_amplitudes(x, basis.freqs[mode:mode + 1], basis.volume)
    return complex(amps[0])
