import numpy as np
import pytest

from repelling.energy import basis_for, energy_spectral, forces, mean_field_level
from repelling.errors import DomainError
from repelling.kernels import KernelPair
from repelling.optimize import (OptimizeParams, minimize, multistart,
                                rotation_aligned_error, uniform_random_configuration)


class TestParams:
    @pytest.mark.parametrize("kw", [
        {"max_iters": 0}, {"max_iters": 1.5}, {"grad_tol": 0.0}, {"armijo_c": 1.0},
        {"backtrack_factor": 0.0}, {"initial_step": -1.0}, {"seed": -1},
        {"seed": 2 ** 64}, {"restarts": -1}, {"eps": 0.0},
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            OptimizeParams(**kw)

    def test_defaults(self):
        p = OptimizeParams()
        assert (p.initial_step, p.backtrack_factor, p.armijo_c, p.restarts) == (1.0, 0.5, 1e-4, 16)


class TestMinimize:
    def test_pair_on_circle_goes_antipodal(self, circle, k1):
        b = basis_for(circle, k1, 2, 1e-12)
        res = minimize(circle, k1, b, [[0.0], [0.3]])
        assert res.status == "converged"
        assert circle.distance(res.config[0], res.config[1]) == pytest.approx(0.5, abs=1e-6)
        assert res.residual_norm <= 1e-9
        assert res.certified_below_mean

    def test_grid_search_oracle(self, circle, k1):
        # energy of {0, s} is minimised at s = 1/2 among a fine grid
        b = basis_for(circle, k1, 2, 1e-12)
        seps = np.linspace(0.01, 0.99, 99)
        vals = [energy_spectral([[0.0], [s]], b).value for s in seps]
        assert seps[int(np.argmin(vals))] == pytest.approx(0.5)

    def test_symmetric_start_stops_immediately(self, circle, k1):
        b = basis_for(circle, k1, 4, 1e-12)
        res = minimize(circle, k1, b, (np.arange(4) / 4.0)[:, None])
        assert res.iterations <= 1 and res.residual_norm <= 1e-9

    def test_trace_strictly_decreasing(self, square, k2):
        b = basis_for(square, k2, 6, 1e-12)
        res = minimize(square, k2, b, uniform_random_configuration(square, 6, 4))
        e = [v for v, _ in res.trace]
        assert all(y < x for x, y in zip(e, e[1:]))
        assert len(res.trace) == res.iterations + 1
        assert square.is_reduced(res.config)

    def test_certification_consistent(self, square, k2):
        b = basis_for(square, k2, 5, 1e-12)
        res = minimize(square, k2, b, uniform_random_configuration(square, 5, 0))
        recomputed = energy_spectral(res.config, b).value
        assert res.certified_below_mean == (recomputed <= mean_field_level(b, 5))
        if res.certified_below_mean:
            assert recomputed <= mean_field_level(b, 5) + 1e-12

    def test_converged_torus_forces_small(self, circle, k1):
        b = basis_for(circle, k1, 3, 1e-12)
        res = minimize(circle, k1, b, [[0.0], [0.2], [0.5]])
        f = forces(res.config, circle, k1)
        # spectral minimiser is geometrically balanced up to truncation
        assert np.max(np.abs(f)) <= res.residual_norm + 1e-9

    def test_coincident_start_stagnates(self, circle, k1):
        b = basis_for(circle, k1, 2, 1e-12)
        res = minimize(circle, k1, b, [[0.4], [0.4]])
        assert res.status == "stagnated"
        assert not res.certified_below_mean

    def test_max_iters(self, square, k2):
        b = basis_for(square, k2, 6, 1e-12)
        res = minimize(square, k2, b, uniform_random_configuration(square, 6, 1),
                       OptimizeParams(max_iters=2))
        assert res.status == "max_iters" and res.iterations == 2

    def test_torus_needs_basis(self, circle, k1):
        with pytest.raises(DomainError):
            minimize(circle, k1, None, [[0.1]])

    def test_hyperbolic_pair(self, surface):
        K = KernelPair(0.2, dim=2)
        start = uniform_random_configuration(surface, 2, 5)
        res = minimize(surface, K, None, start)
        assert res.status == "converged"
        assert res.residual_norm <= 1e-6
        e = [v for v, _ in res.trace]
        assert all(y < x for x, y in zip(e, e[1:]))
        assert surface.in_domain(res.config)
        assert res.certified_below_mean is None
        assert np.max(np.abs(forces(res.config, surface, K))) <= 1e-6


class TestMultistart:
    def test_three_points_equally_spaced(self, circle, k1):
        b = basis_for(circle, k1, 3, 1e-12)
        res = multistart(circle, k1, b, 3, OptimizeParams(restarts=16))
        assert rotation_aligned_error(res.config) <= 1e-4
        assert len(res.restart_energies) == 16

    def test_single_restart_matches_minimize(self, square, k2):
        b = basis_for(square, k2, 4, 1e-12)
        p = OptimizeParams(restarts=1, seed=9)
        a = multistart(square, k2, b, 4, p)
        single = minimize(square, k2, b, uniform_random_configuration(square, 4, 9), p)
        assert np.array_equal(a.config, single.config)
        assert a.energy.value == single.energy.value and a.trace == single.trace

    def test_deterministic_and_parallel_agree(self, square, k2):
        b = basis_for(square, k2, 4, 1e-12)
        p = OptimizeParams(restarts=4, seed=3)
        r1 = multistart(square, k2, b, 4, p)
        r2 = multistart(square, k2, b, 4, p)
        r3 = multistart(square, k2, b, 4, p, parallel=True)
        assert r1.energy.value == r2.energy.value == r3.energy.value
        assert r1.restart_energies == r3.restart_energies
        assert r1.best_restart == r3.best_restart

    def test_ties_go_to_lowest_index(self, circle, k1):
        b = basis_for(circle, k1, 2, 1e-12)
        res = multistart(circle, k1, b, 2, OptimizeParams(restarts=6))
        best = min(res.restart_energies)
        first = next(i for i, e in enumerate(res.restart_energies) if e <= best + 1e-12)
        assert res.best_restart == first

    def test_needs_a_restart(self, circle, k1):
        with pytest.raises(DomainError):
            multistart(circle, k1, basis_for(circle, k1, 2, 1e-12), 2, OptimizeParams(restarts=0))


class TestUniform:
    def test_coordinate_means(self, square):
        x = uniform_random_configuration(square, 100_000, 0)
        assert np.all(np.abs(x.mean(axis=0) - 0.5) < 0.01)

    def test_seeded(self, surface):
        a = uniform_random_configuration(surface, 5, 42)
        assert np.array_equal(a, uniform_random_configuration(surface, 5, 42))

    def test_rejects_empty(self, circle):
        with pytest.raises(DomainError):
            uniform_random_configuration(circle, 0, 0)


def test_rotation_alignment():
    x = np.mod(np.arange(5) / 5 + 0.137, 1.0)
    assert rotation_aligned_error(x) < 1e-15
    assert rotation_aligned_error([0.0, 0.3]) == pytest.approx(0.1)
