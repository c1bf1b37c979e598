import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from corrdecomp.correntropy import (
    CorrentropyMatrix,
    KernelConfig,
    WindowMatrix,
    correntropy_estimate,
    correntropy_matrix,
    gaussian_kernel,
    kernel_config,
    silverman_bandwidth,
    similarity_vector,
    windowize,
)
from corrdecomp.signals import Trace, zscore_normalize


def naive_kernel(u, sigma):
    return math.exp(-u * u / (2 * sigma * sigma)) / (math.sqrt(2 * math.pi) * sigma)


def naive_c_and_z(data, sigma):
    w, n = data.shape
    c = [[0.0] * n for _ in range(n)]
    for j in range(n):
        for k in range(n):
            c[j][k] = sum(naive_kernel(data[i, j] - data[i, k], sigma) for i in range(w)) / w
    z = [sum(c[j][k] for j in range(n)) for k in range(n)]
    return np.array(c), np.array(z)


class TestKernel:
    def test_values(self):
        assert gaussian_kernel(0.0, 1.0) == pytest.approx(0.3989422804, abs=1e-10)
        assert gaussian_kernel(1.0, 1.0) == pytest.approx(0.2419707245, abs=1e-10)

    @given(st.floats(-50, 50), st.floats(1e-3, 10))
    def test_even_and_positive(self, u, sigma):
        k = gaussian_kernel(u, sigma)
        assert k == gaussian_kernel(-u, sigma)
        assert k >= 0 and k <= gaussian_kernel(0, sigma)

    def test_array_input(self):
        u = np.array([0.0, 1.0, -1.0])
        assert np.allclose(gaussian_kernel(u, 1.0), [0.3989422804, 0.2419707245, 0.2419707245])

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_bad_sigma(self, sigma):
        with pytest.raises(ValueError):
            gaussian_kernel(0.0, sigma)


class TestSilverman:
    def normalized(self, n, seed=0):
        return zscore_normalize(Trace(np.random.default_rng(seed).standard_normal(n), 200.0))

    def test_n1000(self):
        # sample std of a z-scored trace is sqrt(n/(n-1))
        n = 1000
        expected = 1.06 * math.sqrt(n / (n - 1)) * n ** -0.2
        assert silverman_bandwidth(self.normalized(n)) == pytest.approx(expected, rel=1e-12)
        assert silverman_bandwidth(self.normalized(n)) == pytest.approx(0.2663, abs=2e-4)

    def test_n360000_and_shrink(self):
        kc = kernel_config(self.normalized(360000))
        assert kc.sigma_star == pytest.approx(0.08204, abs=1e-4)
        assert kc.sigma == pytest.approx(0.0547, abs=1e-4)
        assert kc.sigma == pytest.approx(kc.sigma_star / 1.5, rel=1e-15)

    def test_linear_in_scale(self, rng):
        x = rng.standard_normal(500)
        assert silverman_bandwidth(2 * x) == pytest.approx(2 * silverman_bandwidth(x), rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            silverman_bandwidth(np.ones(10))
        with pytest.raises(ValueError):
            silverman_bandwidth(np.array([1.0]))

    def test_kernel_config_validation(self):
        with pytest.raises(ValueError):
            KernelConfig(sigma=0.0, sigma_star=1.0)


class TestEstimate:
    def test_identical(self, rng):
        x = rng.standard_normal(20)
        assert correntropy_estimate(x, x, 0.7) == gaussian_kernel(0.0, 0.7)

    def test_two_points(self):
        assert correntropy_estimate([0, 1], [1, 0], 1.0) == pytest.approx(0.2419707245, abs=1e-10)

    def test_brute_force(self, rng):
        x, y = rng.standard_normal(50), rng.standard_normal(50)
        ref = sum(naive_kernel(a - b, 0.4) for a, b in zip(x, y)) / 50
        assert correntropy_estimate(x, y, 0.4) == pytest.approx(ref, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            correntropy_estimate([1, 2], [1, 2, 3], 1.0)


class TestWindowize:
    def test_tail(self):
        xm = windowize(np.arange(10.0), 3)
        assert (xm.n_cols, xm.dropped_tail) == (3, 1)
        assert np.array_equal(xm.data[:, 1], [3, 4, 5])

    def test_exact(self):
        xm = windowize(np.arange(10.0), 5)
        assert (xm.n_cols, xm.dropped_tail) == (2, 0)

    @given(st.integers(2, 40), st.integers(4, 300))
    def test_round_trip(self, w, n):
        if n < 2 * w:
            with pytest.raises(ValueError):
                windowize(np.arange(float(n)), w)
            return
        x = np.arange(float(n))
        xm = windowize(x, w)
        rebuilt = np.concatenate([xm.data.T.ravel(), x[n - xm.dropped_tail:]])
        assert np.array_equal(rebuilt, x)
        assert xm.column_span(1) == (w, 2 * w)

    def test_bad_w(self):
        with pytest.raises(ValueError):
            windowize(np.arange(10.0), 1)
        with pytest.raises(ValueError):
            windowize(np.arange(10.0), 6)

    def test_accepts_trace(self):
        xm = windowize(Trace(np.arange(12.0), 1.0), 4)
        assert xm.n_cols == 3


class TestMatrix:
    def test_identical_columns(self):
        data = np.tile(np.linspace(-1, 1, 8)[:, None], (1, 4))
        c = correntropy_matrix(WindowMatrix.from_array(data), 0.5).values
        assert np.allclose(c, gaussian_kernel(0.0, 0.5), rtol=1e-14)
        z = similarity_vector(CorrentropyMatrix(c, 0.5)).z
        assert np.allclose(z, 4 * gaussian_kernel(0.0, 0.5), rtol=1e-14)

    def test_brute_force_6x8(self, rng):
        data = rng.standard_normal((8, 6))
        c_ref, z_ref = naive_c_and_z(data, 0.3)
        c = correntropy_matrix(WindowMatrix.from_array(data), 0.3)
        assert np.max(np.abs(c.values - c_ref)) <= 1e-12
        assert np.max(np.abs(similarity_vector(c).z - z_ref)) <= 1e-12

    def test_diagonal_and_bounds(self, rng):
        data = rng.standard_normal((30, 40))
        c = correntropy_matrix(WindowMatrix.from_array(data), 0.2).values
        k0 = gaussian_kernel(0.0, 0.2)
        assert np.all(np.diag(c) == k0)
        assert np.all(c > 0) and np.all(c <= k0)
        assert np.array_equal(c, c.T)

    def test_far_pairs_do_not_underflow_badly(self):
        data = np.array([[0.0, 1e3], [0.0, -1e3]])
        c = correntropy_matrix(WindowMatrix.from_array(data), 0.1).values
        assert c[0, 1] >= 0 and np.isfinite(c).all()

    def test_outlier_column_minimum(self, rng):
        data = 0.1 * rng.standard_normal((50, 20))
        data[:, 7] = 8 * rng.standard_normal(50)
        z = similarity_vector(correntropy_matrix(WindowMatrix.from_array(data), 0.1)).z
        assert int(np.argmin(z)) == 7

    @pytest.mark.parametrize("workers", [2, 3, 5])
    def test_workers_bitwise(self, rng, workers):
        data = rng.standard_normal((40, 97))
        base = correntropy_matrix(WindowMatrix.from_array(data), 0.3).values
        par = correntropy_matrix(WindowMatrix.from_array(data), 0.3, workers=workers).values
        assert np.array_equal(base, par)

    def test_against_numpy_exp(self, rng):
        data = rng.standard_normal((150, 60))
        c = correntropy_matrix(WindowMatrix.from_array(data), 0.05).values
        d = data[:, :, None] - data[:, None, :]
        ref = gaussian_kernel(d, 0.05).mean(axis=0)
        assert np.max(np.abs(c - ref)) <= 1e-12 * gaussian_kernel(0.0, 0.05)

    def test_scale_leaves_ranking(self, rng):
        data = rng.standard_normal((20, 30))
        c = correntropy_matrix(WindowMatrix.from_array(data), 0.4)
        z = similarity_vector(c).z
        z2 = similarity_vector(CorrentropyMatrix(c.values * 3.7, c.sigma)).z
        assert np.array_equal(np.argsort(z, kind="stable"), np.argsort(z2, kind="stable"))

    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 6)),
                  elements=st.floats(-5, 5)), st.floats(0.05, 3))
    def test_oracle_property(self, data, sigma):
        c_ref, z_ref = naive_c_and_z(data, sigma)
        c = correntropy_matrix(WindowMatrix.from_array(data), sigma)
        assert np.max(np.abs(c.values - c_ref)) <= 1e-12
        assert np.max(np.abs(similarity_vector(c).z - z_ref)) <= 1e-12

    def test_z_bounds(self, rng):
        data = rng.standard_normal((10, 12))
        z = similarity_vector(correntropy_matrix(WindowMatrix.from_array(data), 0.5)).z
        assert np.all(z > 0) and np.all(z <= 12 * gaussian_kernel(0.0, 0.5))

    def test_window_matrix_needs_two_columns(self):
        with pytest.raises(ValueError):
            WindowMatrix.from_array(np.zeros((5, 1)))
