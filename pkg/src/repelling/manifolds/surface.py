"""Compact hyperbolic surfaces presented by a Fuchsian group (disk model).

Only the genus-2 Bolza surface is shipped.  Its fundamental domain is the
regular octagon centred at ``0`` with interior angles ``pi/4``; opposite sides
are paired by hyperbolic translations ``g_k`` along the directions
``k pi / 4``, ``k = 0..3``.  Because the octagon is also the Dirichlet domain
about ``0`` for these side pairings, greedy reduction by generators lands in
it.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.spatial import cKDTree

from ..errors import DomainError, ResourceLimitError
from . import disk
from .segment import GeodesicSegment

DEFAULT_MAX_ELEMENTS = 2_000_000

# distinct orbit points of 0 sit at least the systole apart; duplicates of one
# element differ by accumulated rounding only
_DEDUP_RADIUS = 0.5


@dataclass(frozen=True)
class GroupElement:
    matrix: np.ndarray
    word_length: int
    displacement: float

    @property
    def trace(self):
        return float(self.matrix[0, 0] + self.matrix[1, 1])

    @property
    def translation_length(self):
        return 2.0 * math.acosh(max(abs(self.trace) / 2.0, 1.0))


@dataclass
class GroupTable:
    """Enumerated group elements sorted by displacement (identity excluded).

    Arrays are parallel: ``matrices`` (K, 2, 2) real, disk coefficients
    ``a``/``b``, ``displacement``, ``word_length``.  ``radius`` is the
    displacement cutoff the table is complete for.
    """

    radius: float
    matrices: np.ndarray
    a: np.ndarray
    b: np.ndarray
    displacement: np.ndarray
    word_length: np.ndarray

    def __len__(self):
        return len(self.displacement)

    def upto(self, radius):
        """Prefix of the table with displacement ``<= radius``."""
        if radius > self.radius + 1e-12:
            raise ValueError("table is not complete at that radius")
        n = int(np.searchsorted(self.displacement, radius, side="right"))
        return GroupTable(radius, self.matrices[:n], self.a[:n], self.b[:n],
                          self.displacement[:n], self.word_length[:n])

    def elements(self):
        return [GroupElement(self.matrices[i], int(self.word_length[i]),
                             float(self.displacement[i])) for i in range(len(self))]


def _sign_normalize(m):
    flat = m.reshape(len(m), 4)
    idx = np.argmax(np.abs(flat) > 1e-12, axis=1)
    sign = np.sign(flat[np.arange(len(flat)), idx])
    sign[sign == 0] = 1.0
    return m * sign[:, None, None]


def _orbit_coords(a, b):
    # 2ab = sinh(d) e^{i theta}: horizontal hyperboloid coordinates of g(0)
    x = 2.0 * a * b
    return np.column_stack([x.real, x.imag])


def _mat_inverse(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


@dataclass(eq=False)
class HyperbolicSurfaceModel:
    """Closed hyperbolic surface ``D / Gamma`` with a Dirichlet domain at ``0``.

    ``generators`` are real ``SL(2)`` matrices; ``relation`` is a word of
    ``(generator index, +1 | -1)`` pairs multiplying to ``+-I``.
    """

    name: str
    generators: tuple
    relation: tuple
    genus: int
    inradius: float
    circumradius: float
    injectivity_radius_lower_bound: float
    basepoint: complex = 0j
    max_elements: int = DEFAULT_MAX_ELEMENTS
    kind: str = field(default="hyperbolic", init=False)
    _table: GroupTable = field(default=None, init=False, repr=False)

    def __post_init__(self):
        gens = [np.asarray(g, dtype=float) for g in self.generators]
        for g in gens:
            if abs(np.linalg.det(g) - 1.0) > 1e-12:
                raise DomainError("generators must have unit determinant")
            if abs(g[0, 0] + g[1, 1]) <= 2.0:
                raise DomainError("generators must be hyperbolic (|trace| > 2)")
        self.generators = tuple(gens)
        # side pairings: each generator followed by its inverse
        self._side_mats = np.array([m for g in gens for m in (g, _mat_inverse(g))])
        self._side_a, self._side_b = disk.sl2_to_disk(self._side_mats)

    dim = 2

    def describe(self):
        return {"kind": "hyperbolic", "name": self.name}

    def volume(self):
        """Area by Gauss-Bonnet, ``2 pi |chi|``."""
        return 2.0 * math.pi * (2 * self.genus - 2)

    @property
    def max_generator_displacement(self):
        return float(np.max(disk.displacement(self._side_a)))

    @property
    def systole_lower_bound(self):
        return 2.0 * self.injectivity_radius_lower_bound

    # -- presentation checks ----------------------------------------------

    def relation_matrix(self):
        m = np.eye(2)
        for idx, sign in self.relation:
            g = self.generators[idx]
            m = m @ (g if sign > 0 else _mat_inverse(g))
        return m

    def relation_residual(self):
        """Max-norm distance of the relation word from ``+-I``."""
        m = self.relation_matrix()
        return float(min(np.max(np.abs(m - np.eye(2))), np.max(np.abs(m + np.eye(2)))))

    def vertices(self):
        """Octagon vertices (Dirichlet domain corners), counter-clockwise."""
        n = len(self._side_mats)
        rc = math.tanh(self.circumradius / 2.0)
        return np.array([rc * np.exp(1j * (math.pi / n + 2 * math.pi * k / n)) for k in range(n)])

    def interior_angles(self):
        """Vertex angles measured from the geodesic sides."""
        v = self.vertices()
        out = []
        for k in range(len(v)):
            d1 = disk.direction_to(v[k], v[k - 1])
            d2 = disk.direction_to(v[k], v[(k + 1) % len(v)])
            out.append(abs(np.angle(d2 / d1)))
        return np.array(out)

    def domain_area(self):
        """Area of the fundamental polygon, ``(n - 2) pi - sum(angles)``."""
        ang = self.interior_angles()
        return (len(ang) - 2) * math.pi - float(np.sum(ang))

    # -- points ------------------------------------------------------------

    def as_points(self, points):
        arr = np.asarray(points, dtype=complex).reshape(-1)
        return arr

    def _side_images(self, z):
        return disk.apply(self._side_a[:, None], self._side_b[:, None], z[None, :])

    def in_domain(self, points, tol=1e-9):
        z = self.as_points(points)
        if np.any(np.abs(z) >= 1):
            return False
        imgs = np.abs(self._side_images(z))
        return bool(np.all(imgs >= np.abs(z)[None, :] - tol))

    def is_reduced(self, points):
        return self.in_domain(points)

    def reduce(self, raw, max_steps=10_000):
        """Greedy Dirichlet reduction: apply the side pairing that moves the
        point closest to ``0`` while that strictly helps."""
        scalar = np.ndim(raw) == 0
        z = np.array(np.atleast_1d(raw), dtype=complex)
        if not np.all(np.isfinite(z)):
            raise DomainError("point coordinates must be finite")
        if np.any(np.abs(z) >= 1):
            raise DomainError("disk points must satisfy |z| < 1")
        for _ in range(max_steps):
            imgs = self._side_images(z)
            mags = np.abs(imgs)
            best = np.argmin(mags, axis=0)
            bmag = mags[best, np.arange(len(z))]
            move = bmag < np.abs(z) * (1.0 - 1e-15) - 1e-15
            if not np.any(move):
                break
            z[move] = imgs[best[move], np.nonzero(move)[0]]
        else:  # pragma: no cover
            raise RuntimeError("domain reduction did not terminate")
        return complex(z[0]) if scalar else z

    def random_points(self, n, rng):
        """Uniform (area measure) points in the fundamental domain.

        Rejection from the hyperbolic disk of radius ``circumradius``, where
        ``cosh(rho) - 1`` is uniform.
        """
        out = np.empty(n, dtype=complex)
        filled = 0
        span = math.cosh(self.circumradius) - 1.0
        while filled < n:
            m = max(2 * (n - filled), 16)
            u = rng.random(m)
            theta = rng.random(m) * 2.0 * math.pi
            rho = np.arccosh(1.0 + u * span)
            z = np.tanh(rho / 2.0) * np.exp(1j * theta)
            imgs = np.abs(self._side_images(z))
            ok = np.all(imgs >= np.abs(z)[None, :], axis=0)
            take = z[ok][: n - filled]
            out[filled:filled + len(take)] = take
            filled += len(take)
        return out

    # -- tangent vectors ---------------------------------------------------

    def tangent_norms(self, vectors):
        return np.abs(np.asarray(vectors, dtype=complex).reshape(-1))

    def zero_tangent(self, n):
        return np.zeros(n, dtype=complex)

    def retract(self, p, v):
        """Exact exponential map followed by domain reduction."""
        out = disk.exp_map(p, v)
        return self.reduce(out)

    def frame(self, p):
        return np.array([1.0 + 0j, 1j])

    # -- group ---------------------------------------------------------------

    def orbit_count_bound(self):
        """``(const, degree, growth)`` bounding ``#{g : d(p, g q) <= rho}``.

        Balls of radius ``s`` (the injectivity bound) about the orbit points
        are disjoint and lie in ``B(p, rho + s)``, so the count is at most
        ``(cosh(rho+s) - 1) / (cosh s - 1) <= e^s / (2 (cosh s - 1)) e^rho``.
        """
        s = self.injectivity_radius_lower_bound
        return math.exp(s) / (2.0 * (math.cosh(s) - 1.0)), 0, 1.0

    def enumerate_group(self, R, max_elements=None):
        """All elements with ``d(0, g 0) <= R`` as a :class:`GroupTable`.

        Breadth-first over words in the side pairings; a word is only
        extended while its displacement is at most ``R`` plus the
        circumradius, which keeps a minimal word for every target
        reachable.  Cached; later calls with a smaller radius slice the
        stored table.
        """
        if not R > 0:
            raise DomainError("radius must be positive")
        if self._table is not None and self._table.radius >= R:
            return self._table.upto(R)
        cap = self.max_elements if max_elements is None else max_elements
        self._table = self._bfs(R, cap)
        return self._table

    def _bfs(self, R, cap):
        # A minimal word for g can follow the tiles crossed by the segment
        # [0, g 0]; each of those tile centres is within the circumradius of
        # the segment, so pruning at R + circumradius loses nothing.
        expand = R + self.circumradius + 1e-9
        gens = self._side_mats
        n_gen = len(gens)
        inverse_of = np.arange(n_gen) ^ 1  # generators are stored (g, g^-1) pairwise
        all_m = [np.eye(2)[None]]
        all_w = [np.zeros(1, dtype=int)]
        frontier = np.eye(2)[None]
        last = np.array([-1])
        prev_x = np.zeros((0, 2))
        cur_x = np.zeros((1, 2))
        total = 1
        level = 0
        while len(frontier):
            level += 1
            cand = np.matmul(frontier[:, None], gens[None]).reshape(-1, 2, 2)
            letter = np.tile(np.arange(n_gen), len(frontier))
            # skip immediate backtracking g h h^-1
            keep = np.repeat(last, n_gen) != inverse_of[letter]
            cand, letter = cand[keep], letter[keep]
            a, b = disk.sl2_to_disk(cand)
            keep = disk.displacement(a) <= expand
            cand, letter, a, b = cand[keep], letter[keep], a[keep], b[keep]
            if not len(cand):
                break
            x = _orbit_coords(a, b)
            # Cayley-graph neighbours of level L sit in levels L-1, L, L+1
            known = np.concatenate([prev_x, cur_x])
            dist_known, _ = cKDTree(known).query(x, distance_upper_bound=_DEDUP_RADIUS)
            fresh = ~np.isfinite(dist_known)
            cand, letter, x = cand[fresh], letter[fresh], x[fresh]
            # dedup within this level, first occurrence wins
            if len(cand) > 1:
                pairs = cKDTree(x).query_pairs(_DEDUP_RADIUS, output_type="ndarray")
                if len(pairs):
                    drop = np.zeros(len(cand), dtype=bool)
                    drop[np.maximum(pairs[:, 0], pairs[:, 1])] = True
                    cand, letter, x = cand[~drop], letter[~drop], x[~drop]
            if not len(cand):
                break
            total += len(cand)
            if total > cap:
                raise ResourceLimitError(
                    f"group enumeration to radius {R} exceeds max_elements={cap}", cap=cap)
            all_m.append(cand)
            all_w.append(np.full(len(cand), level))
            frontier, last = cand, letter
            prev_x, cur_x = cur_x, x
        mats = _sign_normalize(np.concatenate(all_m)[1:])
        words = np.concatenate(all_w)[1:]
        a, b = disk.sl2_to_disk(mats)
        disp = disk.displacement(a)
        within = disp <= R
        mats, words, a, b, disp = mats[within], words[within], a[within], b[within], disp[within]
        flat = mats.reshape(-1, 4)
        order = np.lexsort((flat[:, 3], flat[:, 2], flat[:, 1], flat[:, 0], np.round(disp, 9)))
        return GroupTable(R, mats[order], a[order], b[order], disp[order], words[order])

    def _elements_with_identity(self, radius):
        tab = self.enumerate_group(radius)
        a = np.concatenate([[1.0 + 0j], tab.a])
        b = np.concatenate([[0j], tab.b])
        disp = np.concatenate([[0.0], tab.displacement])
        return a, b, disp

    # -- geodesics ---------------------------------------------------------

    def geodesics_between(self, p, q, R):
        """Every geodesic from ``p`` to ``q`` of length ``<= R``, one per group
        element, in table order (identity first; omitted when ``p == q``)."""
        if not R > 0:
            raise DomainError("cutoff R must be positive")
        p = complex(p)
        q = complex(q)
        if not (self.in_domain(p) and self.in_domain(q)):
            raise DomainError("points must be reduced to the fundamental domain")
        radius = R + disk.dist_origin(p) + disk.dist_origin(q) + 1e-9
        a, b, _ = self._elements_with_identity(radius)
        w = disk.apply(a, b, q)
        L = disk.dist(p, w)
        out = []
        for idx in np.nonzero(L <= R)[0]:
            if idx == 0 and p == q:
                continue
            phi = disk.to_origin(p, w[idx])
            if phi == 0:
                continue
            out.append(GeodesicSegment(float(L[idx]), complex(-phi / abs(phi)), int(idx) - 1))
        return out

    def distance(self, p, q):
        p = complex(p)
        q = complex(q)
        # the shortest class is within the domain diameter
        R = 2.0 * self.circumradius + 1e-9
        radius = R + disk.dist_origin(p) + disk.dist_origin(q)
        a, b, _ = self._elements_with_identity(radius)
        return float(np.min(disk.dist(p, disk.apply(a, b, q))))


def bolza(max_elements=DEFAULT_MAX_ELEMENTS):
    """The Bolza surface: genus 2, regular octagon with angles ``pi/4``.

    Inradius ``r_in`` and circumradius ``r_c`` of the regular ``n``-gon with
    angle ``alpha`` satisfy ``cosh r_in = cos(alpha/2) / sin(pi/n)`` and
    ``cosh r_c = cot(pi/n) cot(alpha/2)``.  Each side pairing translates by
    ``2 r_in`` (which is also the systole).
    """
    n, alpha = 8, math.pi / 4
    r_in = math.acosh(math.cos(alpha / 2) / math.sin(math.pi / n))
    r_c = math.acosh(1.0 / (math.tan(math.pi / n) * math.tan(alpha / 2)))
    gens = []
    for k in range(4):
        a = math.cosh(r_in)
        b = math.sinh(r_in) * np.exp(1j * k * math.pi / 4)
        gens.append(disk.disk_to_sl2(a, b))
    relation = ((0, 1), (1, -1), (2, 1), (3, -1), (0, -1), (1, 1), (2, -1), (3, 1))
    return HyperbolicSurfaceModel(
        name="bolza", generators=tuple(gens), relation=relation, genus=2,
        inradius=r_in, circumradius=r_c, injectivity_radius_lower_bound=r_in,
        max_elements=max_elements)
