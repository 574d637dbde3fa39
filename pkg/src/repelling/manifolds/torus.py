"""Flat tori ``R^d / (l_1 Z x ... x l_d Z)``."""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from ..errors import DomainError
from .segment import GeodesicSegment


@dataclass(frozen=True)
class TorusModel:
    """Flat torus with the given period lengths (``d = 1`` or ``2``)."""

    periods: tuple
    kind: str = field(default="torus", init=False)

    def __post_init__(self):
        periods = tuple(float(p) for p in np.atleast_1d(self.periods))
        if not periods:
            raise DomainError("torus needs at least one period")
        if any(not (p > 0 and math.isfinite(p)) for p in periods):
            raise DomainError(f"torus periods must be positive, got {periods}")
        object.__setattr__(self, "periods", periods)

    @property
    def dim(self):
        return len(self.periods)

    @property
    def period_array(self):
        return np.asarray(self.periods)

    def volume(self):
        return math.prod(self.periods)

    def describe(self):
        return {"kind": "torus", "periods": list(self.periods)}

    # -- points ------------------------------------------------------------

    def as_points(self, points):
        """Coerce to an ``(N, d)`` float array."""
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1) if self.dim == 1 else arr.reshape(1, -1)
        if arr.shape[-1] != self.dim:
            raise DomainError(f"expected {self.dim} coordinates per point")
        return arr

    def _as_point(self, p):
        arr = np.asarray(p, dtype=float).reshape(-1)
        if arr.shape[0] != self.dim:
            raise DomainError(f"expected {self.dim} coordinates, got {arr.shape[0]}")
        return arr

    def reduce(self, raw):
        """Representative in ``[0, l_k)`` per coordinate; keeps the input shape."""
        arr = np.asarray(raw, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise DomainError("point coordinates must be finite")
        per = self.period_array if arr.ndim else self.periods[0]
        out = np.mod(arr, per)
        # mod can round a tiny negative up to exactly the period
        out = np.where(out >= per, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def is_reduced(self, points):
        arr = self.as_points(points)
        return bool(np.all((arr >= 0) & (arr < self.period_array)))

    def random_points(self, n, rng):
        """``n`` i.i.d. uniform points, shape ``(n, d)``."""
        return rng.random((n, self.dim)) * self.period_array

    # -- tangent vectors ---------------------------------------------------

    def tangent_norms(self, vectors):
        return np.linalg.norm(np.asarray(vectors, dtype=float).reshape(-1, self.dim), axis=1)

    def zero_tangent(self, n):
        return np.zeros((n, self.dim))

    def retract(self, p, v):
        """Exact exponential map: translate, then wrap."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(v)):
            raise DomainError("tangent vector must be finite")
        return self.reduce(p + v)

    def frame(self, p):
        """Orthonormal tangent frame at ``p`` as rows."""
        return np.eye(self.dim)

    # -- geodesics ---------------------------------------------------------

    def lattice_offsets(self, radius):
        """Lattice translations ``m * l`` with norm ``<= radius``, lexicographic in ``m``."""
        ranges = [range(-int(math.floor(radius / p)), int(math.floor(radius / p)) + 1)
                  for p in self.periods]
        ms = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, self.dim)
        off = ms * self.period_array
        keep = np.linalg.norm(off, axis=1) <= radius
        return off[keep], ms[keep].astype(int)

    def orbit_count_bound(self):
        """``(const, degree, growth)`` with ``#{L <= rho} <= const (rho+1)^degree``."""
        const = math.prod(max(2.0 / p, 1.0) for p in self.periods)
        return const, self.dim, 0.0

    @property
    def half_diameter(self):
        return 0.5 * math.sqrt(sum(p * p for p in self.periods))

    def geodesics_between(self, p, q, R):
        """Every geodesic from ``p`` to ``q`` of length ``<= R``.

        Ordered by lexicographic winding vector.  For ``p == q`` the
        zero-length class is left out.
        """
        if not R > 0:
            raise DomainError("cutoff R must be positive")
        p = self._as_point(p)
        q = self._as_point(q)
        if not (self.is_reduced(p) and self.is_reduced(q)):
            raise DomainError("points must be reduced to the fundamental domain")
        out = []
        lo = np.floor((p - q - R) / self.period_array).astype(int)
        hi = np.ceil((p - q + R) / self.period_array).astype(int)
        for m in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
            v = q - p + np.asarray(m) * self.period_array
            L = float(np.linalg.norm(v))
            if L > R:
                continue
            if L == 0.0:
                continue
            out.append(GeodesicSegment(L, -v / L, tuple(m)))
        return out

    def distance(self, p, q):
        p = self._as_point(p)
        q = self._as_point(q)
        d = q - p
        d = d - self.period_array * np.round(d / self.period_array)
        return float(np.linalg.norm(d))
