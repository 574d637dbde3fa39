import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repelling.errors import UnsupportedModelError
from repelling.kernels import KernelPair
from repelling.manifolds import TorusModel, bolza
from repelling.spectrum import build_basis, weyl_amplitude, weyl_amplitudes


def basis(periods, lam, t=0.05):
    return build_basis(TorusModel(periods), KernelPair(t, dim=len(periods)), lam)


class TestBuild:
    def test_circle_cutoff_50(self):
        b = basis((1.0,), 50.0)
        assert [m.index for m in b.modes] == [(-1,), (1,)]
        assert b.eigenvalues[0] == pytest.approx(4 * math.pi ** 2)

    def test_zero_cutoff_is_empty(self):
        b = basis((1.0, 1.0), 0.0)
        assert len(b) == 0 and b.weight_sum() == 0.0

    def test_square_cutoff_40(self):
        b = basis((1.0, 1.0), 40.0)
        assert sorted(m.index for m in b.modes) == [(-1, 0), (0, -1), (0, 1), (1, 0)]

    def test_count_matches_lattice_enumeration(self):
        lam = 900.0
        b = basis((1.0, 0.6), lam)
        r = math.sqrt(lam) / (2 * math.pi)
        count = sum(1 for i in range(-20, 21) for j in range(-20, 21)
                    if (i, j) != (0, 0) and i * i + (j / 0.6) ** 2 <= r * r)
        assert len(b) == count

    def test_ordering(self):
        b = basis((1.0, 1.0), 400.0)
        keys = [(lam, tuple(idx)) for lam, idx in zip(b.eigenvalues, b.indices.tolist())]
        assert keys == sorted(keys)

    def test_weights_positive_and_pairs_present(self):
        b = basis((1.0, 2.0), 300.0)
        assert np.all(b.weights > 0) and np.all(b.eigenvalues > 0)
        idx = {tuple(v) for v in b.indices.tolist()}
        assert all(tuple(-v for v in m) in idx for m in idx)

    def test_hyperbolic_rejected(self):
        with pytest.raises(UnsupportedModelError):
            build_basis(bolza(), KernelPair(0.2, dim=2), 10.0)


class TestEigenfunctions:
    def test_orthonormal_by_quadrature(self):
        b = basis((1.0, 2.0), 200.0)
        n = 32
        xs = (np.arange(n) + 0.5) / n
        ys = 2.0 * (np.arange(n) + 0.5) / n
        grid = np.array([[x, y] for x in xs for y in ys])
        phi = b.eval(grid)[:, :5]
        gram = phi.conj().T @ phi * (2.0 / (n * n))
        assert np.allclose(gram, np.eye(5), atol=1e-10)

    def test_mean_zero_by_quadrature(self):
        b = basis((1.0,), 2000.0)
        n = 64
        grid = (np.arange(n) + 0.5) / n
        assert np.max(np.abs(b.eval(grid[:, None]).mean(axis=0))) < 1e-12

    def test_weighted_square_sum_is_constant(self):
        b = basis((1.0, 1.0), 600.0)
        x = np.random.default_rng(0).random((100, 2))
        vals = (np.abs(b.eval(x)) ** 2) @ b.weights
        assert np.allclose(vals, b.weight_sum() / b.volume, rtol=0, atol=1e-12)


class TestWeylAmplitudes:
    def test_antipodal_cancels(self):
        b = basis((1.0,), 50.0)
        assert abs(weyl_amplitude(b, (1,), [0.0, 0.5])) < 1e-15

    def test_single_point(self):
        b = basis((2.0, 1.0), 200.0)
        amps = weyl_amplitudes(b, [[0.3, 0.7]])
        assert np.allclose(np.abs(amps), 1 / math.sqrt(2.0))

    def test_roots_of_unity(self):
        b = basis((1.0,), 4 * math.pi ** 2 * 16)
        x = np.arange(4) / 4.0
        for m in (1, 2, 3):
            oracle = sum(cmath.exp(2j * math.pi * m * v) for v in x)
            assert abs(weyl_amplitude(b, (m,), x) - oracle) < 1e-14
            assert abs(weyl_amplitude(b, (m,), x)) < 1e-14
        assert weyl_amplitude(b, (4,), x) == pytest.approx(4.0, abs=1e-13)

    @settings(max_examples=30)
    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=12))
    def test_conjugate_symmetry_and_bound(self, pts):
        b = basis((1.0, 1.0), 300.0)
        amps = weyl_amplitudes(b, np.array(pts))
        for i, m in enumerate(b.indices.tolist()):
            j = b.find([-v for v in m])
            assert abs(amps[j] - amps[i].conjugate()) <= 1e-14 * max(1, len(pts))
        assert np.all(np.abs(amps) <= len(pts) + 1e-12)

    @settings(max_examples=30)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=10), st.floats(-3, 3))
    def test_translation_changes_phase_only(self, pts, delta):
        b = basis((1.0,), 800.0)
        x = np.array(pts)
        a0 = weyl_amplitudes(b, x)
        a1 = weyl_amplitudes(b, np.mod(x + delta, 1.0))
        assert np.allclose(np.abs(a0), np.abs(a1), atol=1e-12)

    def test_index_or_position(self):
        b = basis((1.0,), 200.0)
        x = [0.1, 0.35]
        assert weyl_amplitude(b, 0, x) == weyl_amplitude(b, tuple(b.indices[0]), x)
        with pytest.raises(KeyError):
            b.find((99,))
