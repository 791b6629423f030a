import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from splitinv.mc_engine import (ExperimentConfig, ReplicationError, child_seed, child_seeds,
                                counter_uniforms, empirical_quantile, map_replications, mix64,
                                mix64_array, rng_for, run, tree_sum)


class TestSeeds:
    def test_deterministic(self):
        assert child_seed(42, 7) == child_seed(42, 7)
        assert child_seed(42, 7) != child_seed(42, 8)
        assert child_seed(42, 7) != child_seed(43, 7)

    def test_no_collisions(self):
        ids = np.arange(1_000_000, dtype=np.uint64)
        seeds = child_seeds(2024, ids)
        assert np.unique(seeds).size == 1_000_000

    @given(root=st.integers(0, 2**64 - 1), sid=st.integers(0, 2**40))
    def test_vectorised_matches_scalar(self, root, sid):
        assert int(child_seeds(root, [sid])[0]) == child_seed(root, sid)

    def test_mix_is_bijective_on_sample(self):
        z = np.arange(200_000, dtype=np.uint64)
        assert np.unique(mix64_array(z)).size == z.size
        assert int(mix64_array(np.array([12345], dtype=np.uint64))[0]) == mix64(12345)

    def test_adjacent_streams_uncorrelated(self):
        a = rng_for(child_seed(9, 0)).standard_normal(100_000)
        b = rng_for(child_seed(9, 1)).standard_normal(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 3 / math.sqrt(100_000)

    def test_counter_uniforms(self):
        u = counter_uniforms([1, 2, 3], 1000)
        assert u.shape == (3, 1000)
        assert np.all((u > 0) & (u < 1))
        assert abs(u.mean() - 0.5) < 0.02
        # blocks of a stream are addressable by offset
        assert np.array_equal(counter_uniforms([2], 10, offset=500)[0], u[1, 500:510])
        # uniforms invert to normals without infinities
        assert np.all(np.isfinite(special.ndtri(u)))


class TestMapReplications:
    def test_order_and_parallelism(self):
        fn = lambda i, s: (i, rng_for(s).standard_normal())  # noqa: E731
        a = map_replications(fn, 3, 50, 1)
        b = map_replications(fn, 3, 50, 8)
        assert a == b
        assert [r[0] for r in a] == list(range(50))

    def test_error_carries_index(self):
        def fn(i, s):
            if i == 7:
                raise ValueError("boom")
            return i

        with pytest.raises(ReplicationError) as info:
            map_replications(fn, 0, 10, 2)
        assert info.value.index == 7 and isinstance(info.value.cause, ValueError)

    @pytest.mark.parametrize("reps,par", [(0, 1), (5, 0)])
    def test_rejected(self, reps, par):
        with pytest.raises(ValueError):
            map_replications(lambda i, s: i, 0, reps, par)


class TestQuantile:
    def test_reference(self):
        x = np.arange(1, 101, dtype=float)
        assert empirical_quantile(x, 0.5)[0] == 50.0
        assert empirical_quantile(x, 0.95)[0] == 95.0
        assert empirical_quantile(x, 1.0)[0] == 100.0
        est, lo, hi = empirical_quantile(x, 0.9)
        assert lo <= est <= hi

    def test_interval_coverage(self):
        rng = np.random.default_rng(0)
        samples = np.sort(rng.standard_normal((1000, 400)), axis=1)
        true = 1.6448536269514722
        hits = 0
        for row in samples:
            _, lo, hi = empirical_quantile(row, 0.95)
            hits += lo <= true <= hi
        assert hits / 1000 >= 0.93

    @pytest.mark.parametrize("q", [0.0, 1.5])
    def test_rejected(self, q):
        with pytest.raises(ValueError):
            empirical_quantile([1.0, 2.0], q)
        with pytest.raises(ValueError):
            empirical_quantile([], 0.5)


class TestRun:
    def payload(self, s):
        x = rng_for(s).standard_normal(10)
        return [x.mean(), x.var()]

    def test_parallel_identical(self):
        cfg = lambda p: ExperimentConfig(self.payload, 40, 5, p, labels=["m", "v"])  # noqa: E731
        assert run(cfg(1)).to_dict() == run(cfg(8)).to_dict()

    def test_aggregates_recomputable(self):
        rep = run(ExperimentConfig(self.payload, 30, 2, labels=["m", "v"]))
        assert np.allclose(rep.mean, rep.values.mean(axis=0), rtol=1e-14)
        assert np.allclose(rep.std_error, rep.values.std(axis=0, ddof=1) / math.sqrt(30))
        d = rep.to_dict()
        assert d["config"]["reps"] == 30 and d["config"]["root_seed"] == 2
        assert set(d["quantiles"]) == {"m", "v"}

    def test_labels_width(self):
        with pytest.raises(ValueError):
            run(ExperimentConfig(self.payload, 3, 0, labels=["only"]))

    def test_zero_reps(self):
        with pytest.raises(ValueError):
            run(ExperimentConfig(self.payload, 0))

    def test_tree_sum(self):
        v = np.random.default_rng(1).standard_normal((100, 3))
        assert np.allclose(tree_sum(v), v.sum(axis=0))
