import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repelling.energy import (basis_for, energy_and_gradient_geometric, energy_geometric,
                              energy_spectral, force_at, forces, gradient_spectral,
                              mean_field_level, pretrace_check, pretrace_residual,
                              truncation_radius)
from repelling.errors import DomainError, UnsupportedModelError
from repelling.kernels import KernelPair
from repelling.manifolds import TorusModel, bolza, disk


def lattice_energy(x, periods, t, reach=6):
    """Ordered-pair periodised kernel sum, identity loops left out."""
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    per = np.asarray(periods)
    d = len(per)
    k0 = (4 * math.pi * t) ** (-d / 2)
    terms = []
    for i, j in itertools.product(range(len(x)), repeat=2):
        for m in itertools.product(range(-reach, reach + 1), repeat=d):
            if i == j and not any(m):
                continue
            L2 = float(np.sum((x[j] - x[i] + np.asarray(m) * per) ** 2))
            terms.append(k0 * math.exp(-L2 / (4 * t)))
    return math.fsum(terms)


def theta_energy(x, periods, t, reach=40):
    """Sum over nonzero modes of exp(-lam t) |S_m|^2, by direct loops."""
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    per = np.asarray(periods)
    V = float(np.prod(per))
    terms = []
    for m in itertools.product(range(-reach, reach + 1), repeat=len(per)):
        if not any(m):
            continue
        f = np.asarray(m) / per
        lam = 4 * math.pi ** 2 * float(f @ f)
        S = np.sum(np.exp(2j * math.pi * (x @ f)))
        terms.append(math.exp(-lam * t) * abs(S) ** 2 / V)
    return math.fsum(terms)


def fd_gradient(fn, x, h=1e-5):
    g = np.zeros_like(x)
    for idx in np.ndindex(*x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (fn(xp) - fn(xm)) / (2 * h)
    return g


class TestSpectral:
    def test_single_point_is_position_free(self, circle, k1):
        b = basis_for(circle, k1, 1, 1e-14)
        for x in (0.0, 0.123, 0.77):
            assert energy_spectral([[x]], b).value == pytest.approx(b.weight_sum(), rel=1e-14)

    def test_antipodal_keeps_even_modes(self, circle, k1):
        b = basis_for(circle, k1, 2, 1e-14)
        oracle = 4 * math.fsum(2 * math.exp(-4 * math.pi ** 2 * (2 * k) ** 2 * 0.05)
                               for k in range(1, 20))
        assert energy_spectral([[0.1], [0.6]], b).value == pytest.approx(oracle, rel=1e-13)

    def test_coincident_pair(self, square, k2):
        b = basis_for(square, k2, 2, 1e-14)
        assert energy_spectral([[0.3, 0.4]] * 2, b).value == pytest.approx(4 * b.weight_sum(), rel=1e-14)

    def test_matches_theta_oracle(self, square, k2):
        x = np.random.default_rng(3).random((6, 2))
        b = basis_for(square, k2, 6, 1e-14)
        assert energy_spectral(x, b).value == pytest.approx(theta_energy(x, (1, 1), 0.05, 12), rel=1e-12)

    def test_tail_and_conventions(self, square, k2):
        rep = energy_spectral(np.zeros((3, 2)), basis_for(square, k2, 3, 1e-10))
        assert 0 <= rep.tail_bound < 1e-10
        assert "constant_mode_excluded" in rep.conventions

    def test_hyperbolic_rejected(self):
        with pytest.raises(UnsupportedModelError):
            basis_for(bolza(), KernelPair(0.2, dim=2), 2, 1e-12)
        with pytest.raises(UnsupportedModelError):
            energy_spectral([0j], None)


class TestGeometric:
    def test_single_point_circle(self, circle, k1):
        rep = energy_geometric([[0.37]], circle, k1, 1e-12)
        oracle = 2 * math.fsum(k1.k(float(m)) for m in range(1, 10))
        assert rep.value == pytest.approx(oracle, rel=1e-14)
        assert rep.value == pytest.approx(2 * k1.k(1.0), abs=1e-8)
        assert rep.tail_bound < 1e-12

    def test_half_separation(self, circle, k1):
        rep = energy_geometric([[0.0], [0.5]], circle, k1)
        assert rep.value == pytest.approx(lattice_energy([[0.0], [0.5]], (1.0,), 0.05), rel=1e-14)

    @pytest.mark.parametrize("periods", [(1.0,), (1.0, 1.0), (0.8, 1.3)])
    def test_matches_lattice_oracle(self, periods):
        K = KernelPair(0.05, dim=len(periods))
        x = np.random.default_rng(7).random((5, len(periods))) * np.asarray(periods)
        rep = energy_geometric(x, TorusModel(periods), K)
        assert rep.value == pytest.approx(lattice_energy(x, periods, 0.05, 4), rel=1e-13)

    def test_homogeneous(self, square, k2):
        vals = [energy_geometric([p], square, k2).value for p in ([0, 0], [0.3, 0.9], [0.5, 0.5])]
        assert max(vals) - min(vals) < 1e-15

    def test_rejects_bad_eps_and_dimension(self, square, k1, k2):
        with pytest.raises(DomainError):
            energy_geometric([[0.1, 0.1]], square, k2, eps=0.0)
        with pytest.raises(DomainError):
            energy_geometric([[0.1, 0.1]], square, k1)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_invariances(self, seed):
        T = TorusModel((1.0, 1.0))
        K = KernelPair(0.05, dim=2)
        rng = np.random.default_rng(seed)
        x = rng.random((5, 2))
        b = basis_for(T, K, 5, 1e-12)
        perm = rng.permutation(5)
        shifted = T.reduce(x + rng.random(2))
        eg, es = energy_geometric(x, T, K).value, energy_spectral(x, b).value
        assert energy_geometric(x[perm], T, K).value == pytest.approx(eg, rel=1e-15)
        assert energy_spectral(x[perm], b).value == pytest.approx(es, rel=1e-15)
        assert abs(energy_geometric(shifted, T, K).value - eg) < 1e-10
        assert abs(energy_spectral(shifted, b).value - es) < 1e-10
        assert es >= 0 and eg > 0

    def test_bolza_positive_and_permutation_invariant(self, surface):
        K = KernelPair(0.2, dim=2)
        z = surface.random_points(3, np.random.default_rng(2))
        e = energy_geometric(z, surface, K).value
        assert e > 0
        assert energy_geometric(z[::-1], surface, K).value == pytest.approx(e, rel=1e-14)

    def test_bolza_self_loops(self, surface):
        # at the centre the shortest loops are the 8 side pairings
        K = KernelPair(0.2, dim=2)
        e = energy_geometric([0j], surface, K).value
        assert e >= 8 * K.k(2 * surface.inradius)
        assert e == pytest.approx(8 * K.k(2 * surface.inradius), rel=1e-2)


class TestPretrace:
    def test_single_point_circle(self, circle, k1):
        b = basis_for(circle, k1, 1, 1e-12)
        r = pretrace_residual([[0.21]], circle, k1, b, 1e-12)
        assert abs(r) < 2e-12

    def test_theta_and_lattice_oracles_agree(self):
        # independent check of the identity itself
        x = np.array([[0.1, 0.7], [0.45, 0.2], [0.9, 0.95]])
        n, t = len(x), 0.05
        lhs = lattice_energy(x, (1, 1), t, 4) + n / (4 * math.pi * t)
        rhs = n * n + theta_energy(x, (1, 1), t, 12)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    @pytest.mark.parametrize("t", [0.02, 0.05, 5.0])
    def test_random_square(self, square, t):
        K = KernelPair(t, dim=2)
        b = basis_for(square, K, 8, 1e-12)
        x = np.random.default_rng(11).random((8, 2))
        rep = pretrace_check(x, square, K, b)
        assert rep.ok and rep.budget <= 1e-8
        d = rep.to_dict()
        assert d["ok"] and d["geometric"]["kind"] == "geometric"

    def test_large_t_tends_to_uniform(self, square):
        K = KernelPair(5.0, dim=2)
        b = basis_for(square, K, 4, 1e-12)
        x = np.random.default_rng(0).random((4, 2))
        rep = pretrace_check(x, square, K, b)
        assert rep.geometric.value + rep.identity_term == pytest.approx(16.0, rel=1e-12)

    def test_empty_basis(self, circle, k1):
        b = basis_for(circle, k1, 2, 1e6)
        assert len(b) == 0
        rep = pretrace_check([[0.1], [0.4]], circle, k1, b, 1e-12)
        assert rep.ok

    def test_hyperbolic_rejected(self, surface):
        with pytest.raises(UnsupportedModelError):
            pretrace_residual([0j], surface, KernelPair(0.2, dim=2), None)


class TestForces:
    def test_single_point_zero(self, square, k2):
        assert np.max(np.abs(forces([[0.3, 0.6]], square, k2))) < 1e-14

    def test_antipodal_zero(self, circle, k1):
        assert np.max(np.abs(forces([[0.2], [0.7]], circle, k1))) < 1e-12

    def test_separation_03(self, circle, k1):
        x = np.array([[0.2], [0.5]])
        f0 = force_at(x, 0, circle, k1)[0]
        oracle = math.fsum(k1.H(abs(0.3 + m)) * (-1 if 0.3 + m > 0 else 1) for m in range(-8, 9))
        assert f0 == pytest.approx(oracle, rel=1e-13)
        assert f0 < 0  # pushed away from the neighbour at +0.3

        def energy(v):
            return energy_geometric(v, circle, k1, 1e-15).value
        fd = fd_gradient(energy, x)
        assert f0 == pytest.approx(-0.5 * fd[0, 0], rel=1e-6)

    def test_index_checked(self, circle, k1):
        with pytest.raises(DomainError):
            force_at([[0.1]], 3, circle, k1)

    def test_gradient_is_minus_twice_force(self, square, k2):
        x = np.random.default_rng(5).random((4, 2))
        _, g = energy_and_gradient_geometric(x, square, k2)
        assert np.array_equal(g, -2.0 * forces(x, square, k2))

    def test_bolza_force_matches_finite_difference(self, surface):
        K = KernelPair(0.2, dim=2)
        z = surface.random_points(3, np.random.default_rng(9))
        f = forces(z, surface, K, 1e-15)
        h = 1e-5
        for i in range(3):
            for e in surface.frame(z[i]):
                zp, zm = z.copy(), z.copy()
                zp[i] = disk.exp_map(z[i], h * e)
                zm[i] = disk.exp_map(z[i], -h * e)
                fd = (energy_geometric(zp, surface, K, 1e-15).value
                      - energy_geometric(zm, surface, K, 1e-15).value) / (2 * h)
                comp = (f[i] * e.conjugate()).real
                assert comp == pytest.approx(-0.5 * fd, rel=1e-5, abs=1e-9)

    def test_truncation_radius_for_forces_not_smaller(self, square, k2):
        assert truncation_radius(square, k2, 4, 1e-12, True) >= truncation_radius(square, k2, 4, 1e-12)


class TestSpectralGradient:
    def test_equally_spaced_zero(self, circle, k1):
        b = basis_for(circle, k1, 5, 1e-12)
        x = (np.arange(5) / 5.0)[:, None]
        assert np.max(np.abs(gradient_spectral(x, b))) < 1e-12

    def test_single_point_zero(self, square, k2):
        b = basis_for(square, k2, 1, 1e-12)
        assert np.max(np.abs(gradient_spectral([[0.2, 0.9]], b))) < 1e-12

    def test_finite_differences(self, square, k2):
        b = basis_for(square, k2, 5, 1e-12)
        x = np.random.default_rng(1).random((5, 2))
        g = gradient_spectral(x, b)
        fd = fd_gradient(lambda v: energy_spectral(v, b).value, x)
        assert np.allclose(g, fd, rtol=1e-5, atol=1e-5 * np.max(np.abs(fd)))

    def test_empty_basis(self, circle, k1):
        b = basis_for(circle, k1, 1, 1e6)
        assert np.all(gradient_spectral([[0.3]], b) == 0)

    def test_mean_field_level(self, square, k2):
        b = basis_for(square, k2, 3, 1e-12)
        assert mean_field_level(b, 6) == pytest.approx(2 * mean_field_level(b, 3))
