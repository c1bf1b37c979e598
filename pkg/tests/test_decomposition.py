import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from corrdecomp.correntropy import WindowMatrix, correntropy_matrix, similarity_vector, windowize
from corrdecomp.decomposition import (
    NoEventsError,
    Snippet,
    decompose,
    detect,
    find_snippets,
    percentile,
    sample_skewness,
    split_by_percentile,
    sweep_w,
    threshold_gamma,
)
from corrdecomp.pipeline import synthetic_case
from corrdecomp.signals import GroundTruth, Trace


class TestSkewness:
    def test_symmetric(self):
        assert sample_skewness([-2, -1, 0, 1, 2]) == 0.0

    def test_hand_moments(self):
        assert sample_skewness([0, 0, 0, 1]) == pytest.approx(0.09375 / 0.1875**1.5, rel=1e-14)
        assert sample_skewness([0, 0, 0, 1]) == pytest.approx(1.1547, abs=1e-4)

    @given(arrays(np.float64, st.integers(3, 40), elements=st.floats(-100, 100)),
           st.floats(-10, 10).filter(lambda a: abs(a) > 1e-2), st.floats(-50, 50))
    def test_affine(self, x, a, b):
        if np.ptp(x) < 1e-3:
            return
        assert sample_skewness(a * x + b) == pytest.approx(np.sign(a) * sample_skewness(x), abs=1e-6)

    def test_zero_variance(self):
        with pytest.raises(ValueError):
            sample_skewness([3.0, 3.0, 3.0])


class TestPercentile:
    def test_examples(self):
        assert percentile([1, 2, 3, 4], 50) == 2.5
        assert percentile([10, 20, 30], 25) == 15.0

    @given(arrays(np.float64, st.integers(1, 50), elements=st.floats(-1e6, 1e6)))
    def test_endpoints_and_numpy(self, v):
        assert percentile(v, 0) == v.min()
        assert percentile(v, 100) == v.max()
        for p in (1, 33, 50, 99):
            assert percentile(v, p) == pytest.approx(np.percentile(v, p), rel=1e-12, abs=1e-9)

    @pytest.mark.parametrize("p", [-1, 101])
    def test_out_of_range(self, p):
        with pytest.raises(ValueError):
            percentile([1, 2], p)


class TestSplit:
    def test_example(self):
        il, is_ = split_by_percentile(np.array([1.0, 2.0, 3.0, 4.0]), 50)
        assert il.tolist() == [2, 3] and is_.tolist() == [0, 1]

    def test_all_equal(self):
        with pytest.raises(ValueError):
            split_by_percentile(np.ones(5), 50)

    @given(arrays(np.float64, st.integers(2, 60), elements=st.floats(0, 10)), st.integers(1, 99))
    def test_disjoint(self, z, rho):
        try:
            il, is_ = split_by_percentile(z, rho)
        except ValueError:
            return
        assert not set(il) & set(is_)

    def test_ties_join_neither(self):
        z = np.array([1.0, 2.0, 2.0, 2.0, 5.0])
        il, is_ = split_by_percentile(z, 50)  # t = 2
        assert il.tolist() == [4] and is_.tolist() == [0]

    def test_rho_range(self):
        with pytest.raises(ValueError):
            split_by_percentile(np.arange(5.0), 0)


def sweep_direct(xm, z, rho):
    il, _ = split_by_percentile(z, rho)
    return sample_skewness(xm.data[:, il])


class TestDecompose:
    def test_sweep_matches_direct(self, rng):
        xm = WindowMatrix.from_array(rng.standard_normal((30, 80)) ** 3)
        res = decompose(xm, 0.3)
        for k, rho in enumerate(res.sweep.rho_grid):
            assert res.sweep.skewness_by_rho[k] == pytest.approx(sweep_direct(xm, res.z, rho), abs=1e-10)
        assert res.rho_star == res.sweep.rho_grid[np.nanargmin(np.abs(res.sweep.skewness_by_rho))]

    def test_deterministic(self, rng):
        xm = WindowMatrix.from_array(rng.standard_normal((20, 50)))
        a, b = decompose(xm, 0.4), decompose(xm, 0.4)
        assert a.rho_star == b.rho_star
        assert np.array_equal(a.l_indices, b.l_indices) and np.array_equal(a.s_indices, b.s_indices)

    def test_permutation(self, rng):
        data = rng.standard_normal((25, 40))
        data[:, [3, 17]] *= 6
        perm = rng.permutation(40)
        a = decompose(WindowMatrix.from_array(data), 0.3)
        b = decompose(WindowMatrix.from_array(data[:, perm]), 0.3)
        assert np.allclose(a.z[perm], b.z, rtol=1e-13)
        assert a.rho_star == b.rho_star
        assert sorted(perm[b.s_indices]) == a.s_indices.tolist()
        assert sorted(perm[b.l_indices]) == a.l_indices.tolist()

    def test_split_sides(self, rng):
        xm = WindowMatrix.from_array(rng.standard_normal((20, 60)))
        res = decompose(xm, 0.4)
        assert res.z[res.s_indices].max() < res.z[res.l_indices].min()
        covered = set(res.l_indices) | set(res.s_indices) | set(res.tie_indices)
        assert covered == set(range(60))

    def test_reconstruct(self, rng):
        xm = WindowMatrix.from_array(rng.standard_normal((10, 30)))
        res = decompose(xm, 0.5)
        l, s = res.reconstruct(xm)
        assert np.array_equal(l + s, xm.data.T.ravel())
        assert np.all(s[: 10 * 30].reshape(30, 10)[res.l_indices] == 0)

    def test_bad_r(self, rng):
        with pytest.raises(ValueError):
            decompose(WindowMatrix.from_array(rng.standard_normal((5, 5))), 0.5, r=100)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            decompose(WindowMatrix.from_array(np.zeros((5, 6))), 0.5)

    def test_background_only_boundary_set(self):
        # generator output without events: I_S should be a small boundary set
        fractions, skews = [], []
        for seed in range(20):
            trace, _ = synthetic_case(seed, band=None, n_events=0)
            xm = windowize(trace, 150)
            res = decompose(xm, 1.06 * np.std(trace.samples, ddof=1) * len(trace) ** -0.2 / 1.5)
            fractions.append(res.s_indices.size / res.n_cols)
            skews.append(sample_skewness(xm.data[:, res.l_indices]))
        assert max(fractions) < 0.05, fractions
        assert max(abs(s) for s in skews) <= 0.1

    def test_large_events_land_in_s(self):
        trace, truth = synthetic_case(4, band=None, n_events=10, event_amplitude=8.0)
        res = detect(trace, 150)
        event_cols = {c for a, n in truth.events for c in range(a // 150, (a + n - 1) // 150 + 1)}
        assert event_cols <= set(res.s_indices.tolist())


class TestEventsMapLow:
    @pytest.mark.parametrize("seed,w", [(0, 150), (1, 125), (2, 175), (3, 150)])
    def test_mean_z(self, seed, w):
        trace, truth = synthetic_case(seed, event_amplitude=3.0)
        xm = windowize(trace, w)
        from corrdecomp.correntropy import kernel_config

        z = similarity_vector(correntropy_matrix(xm, kernel_config(trace).sigma)).z
        ev = np.zeros(xm.n_cols, dtype=bool)
        for a, n in truth.events:
            ev[a // w:min((a + n - 1) // w, xm.n_cols - 1) + 1] = True
        assert z[ev].mean() < z[~ev].mean()


class TestSnippets:
    def test_empty(self):
        assert find_snippets(np.zeros(1000), [], 150, 150) == []

    def test_one_run(self, rng):
        x = 0.1 * rng.standard_normal(3000)
        x[800:900] += 3 * np.sin(np.arange(100))
        snips = find_snippets(x, [4, 5, 6], 150, 150)
        assert len(snips) == 1
        s = snips[0]
        assert 600 <= s.start_sample and s.stop_sample <= 1050
        # energy-argmax oracle over the span
        energies = [np.sum(x[k:k + 150] ** 2) for k in range(600, 1050 - 150 + 1)]
        assert s.start_sample == 600 + int(np.argmax(energies))
        assert s.norm == pytest.approx(np.sqrt(np.sum(s.samples ** 2)), abs=1e-12)
        assert s.length == 150

    def test_two_runs(self, rng):
        assert len(find_snippets(rng.standard_normal(3000), [2, 7], 150, 150)) == 2

    def test_short_span_centred_and_clamped(self):
        x = np.zeros(500)
        x[5] = 10.0
        s = find_snippets(x, [0], 50, 150)[0]
        assert s.start_sample == 0 and s.length == 150
        x = np.zeros(500)
        x[260] = 10.0
        s = find_snippets(x, [5], 50, 150)[0]
        assert s.start_sample == 260 - 75

    def test_bad_m(self):
        with pytest.raises(ValueError):
            find_snippets(np.zeros(10), [0], 5, 0)


class TestGamma:
    def make(self, norm):
        return Snippet(0, 1, np.array([norm]), norm)

    def test_min(self):
        assert threshold_gamma([self.make(3.0), self.make(2.5), self.make(4.1)]) == 2.5
        assert threshold_gamma([self.make(1.7)]) == 1.7

    def test_empty(self):
        with pytest.raises(NoEventsError):
            threshold_gamma([])

    def test_tracks_smaller_family(self, rng):
        a = 2.0
        x = 0.01 * rng.standard_normal(6000)
        t = np.arange(150)
        burst = np.hanning(150) * np.sin(2 * np.pi * 13 * t / 200)
        cols = []
        for k, amp in enumerate([a, 2 * a, a, 2 * a]):
            col = 4 + 8 * k
            x[col * 150:(col + 1) * 150] += amp * burst
            cols.append(col)
        g = threshold_gamma(find_snippets(x, cols, 150, 150))
        assert g == pytest.approx(a * np.linalg.norm(burst), rel=0.01)


class TestSweep:
    def test_single_element(self):
        trace, _ = synthetic_case(0, duration_s=120, n_events=4)
        sw = sweep_w(trace, [150])
        assert sw.w_star == 150 and len(sw.points) == 1

    def test_undefined_points_reported(self):
        trace, _ = synthetic_case(0, duration_s=120, n_events=4)
        sw = sweep_w(trace, [150, 20000])
        assert sw.curve[1] == (20000, None)
        assert sw.w_star == 150

    def test_all_undefined(self):
        trace, _ = synthetic_case(0, duration_s=60, n_events=2)
        with pytest.raises(NoEventsError):
            sweep_w(trace, [10000, 20000])

    def test_argmax(self):
        trace, _ = synthetic_case(1, duration_s=120, n_events=4)
        sw = sweep_w(trace, [100, 150, 200])
        defined = [(g, w) for w, g in sw.curve if g is not None]
        assert sw.w_star == max(defined, key=lambda p: (p[0], -p[1]))[1]


class TestDetect:
    def test_gamma_positive_and_sides(self):
        trace, _ = synthetic_case(2, duration_s=120, n_events=5)
        res = detect(trace, 150)
        assert res.gamma > 0
        assert res.gamma == min(s.norm for s in res.snippets)
        assert res.sigma_used == pytest.approx(1.06 * np.std(trace.samples, ddof=1) * len(trace) ** -0.2 / 1.5)

    def test_no_events_carries_result(self):
        # two groups of identical columns: the low-Z group ties at the split
        # value for the chosen rho, so neither side claims it and I_S is empty
        t = np.arange(50)
        a_col, b_col = np.sin(0.3 * t), np.cos(1.1 * t) * 1.5
        x = np.concatenate([a_col] * 15 + [b_col] * 5)
        with pytest.raises(NoEventsError) as info:
            detect(Trace(x, 200.0), 50, m=50)
        res = info.value.result
        assert res.s_indices.size == 0 and res.l_indices.size == 15
        assert res.tie_indices.size == 5

    def test_ground_truth_type(self):
        _, truth = synthetic_case(0, duration_s=60, n_events=3)
        assert isinstance(truth, GroundTruth)
