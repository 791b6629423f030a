import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitinv.errors import ConfigError, DataError
from splitinv.increments import (WindowRule, beta, coarse_lags, increment_statistic,
                                 increment_study, window_length, window_max)
from splitinv.processes import MDep, ProcessSpec, Recurrence

POWER = WindowRule("power", rho=0.6)
FULL = WindowRule("power", rho=1.0)


def brute(x, a):
    s = np.concatenate([[0.0], np.cumsum(x)])
    n = len(x)
    best = (-1.0, 0, 0)
    for k in range(1, n - a + 1):
        for ell in range(1, a + 1):
            v = abs(s[k + ell] - s[k])
            if v > best[0]:
                best = (v, k, ell)
    return best


class TestWindowRule:
    def test_forms(self):
        assert POWER.a(100.0) == pytest.approx(100 ** 0.6)
        assert WindowRule("proportional", c=0.25).a(40.0) == 10.0
        assert WindowRule("explicit", table=[(50, 5), (10, 2)]).a(10.0) == 2.0

    @pytest.mark.parametrize("kw", [dict(form="power", rho=0.0), dict(form="power", rho=1.5),
                                    dict(form="proportional", c=2.0), dict(form="explicit"),
                                    dict(form="log")])
    def test_rejected(self, kw):
        with pytest.raises(ConfigError):
            WindowRule(**kw)

    def test_explicit_lookup_and_range(self):
        rule = WindowRule("explicit", table=[(10, 20)])
        with pytest.raises(ConfigError):
            rule.a(10.0)
        with pytest.raises(ConfigError):
            rule.a(11.0)

    def test_check_grid(self):
        POWER.check_grid([10, 100, 1000])
        bad = WindowRule("explicit", table=[(10, 1), (20, 10)])
        with pytest.raises(ConfigError):
            bad.check_grid([10, 20])


class TestBeta:
    def test_reference_value(self):
        T = math.exp(math.e)
        assert beta(FULL, T) == pytest.approx((2 * math.exp(math.e)) ** -0.5, rel=1e-12)
        assert beta(FULL, T) == pytest.approx(0.18164, abs=1e-5)

    def test_decreasing_in_window(self):
        T = 1000.0
        a = WindowRule("explicit", table=[(T, 10.0)])
        b = WindowRule("explicit", table=[(T, 20.0)])
        assert beta(b, T) < beta(a, T)

    def test_small_T(self):
        with pytest.raises(ConfigError):
            beta(POWER, math.e)


class TestWindowMax:
    def test_constant_path(self):
        res = window_max(np.full(20, -1.5), 7)
        assert (res.value, res.k, res.ell) == (1.5 * 7, 1, 7)

    def test_small_example(self):
        res = window_max(np.array([1.0, -1.0, 2.0]), 2)
        assert (res.value, res.k, res.ell) == (1.0, 1, 1)

    def test_brute_force(self, backend):
        rng = np.random.default_rng(12)
        for _ in range(200):
            n = int(rng.integers(3, 60))
            a = int(rng.integers(1, n))
            x = rng.standard_normal(n)
            res = window_max(x, a)
            v, k, ell = brute(x, a)
            assert res.value == pytest.approx(v, rel=1e-12)
            assert (res.k, res.ell) == (k, ell)

    def test_monotone_while_maximiser_stays_feasible(self):
        # k <= n - a_n shrinks as a_n grows, so monotonicity only holds while
        # the previous maximiser keeps a feasible start
        x = np.random.default_rng(2).standard_normal(300)
        res = [window_max(x, a) for a in range(1, 300)]
        for a, (r0, r1) in enumerate(zip(res, res[1:]), start=1):
            if r0.k <= 300 - (a + 1):
                assert r1.value >= r0.value
        assert any(r1.value < r0.value for r0, r1 in zip(res, res[1:]))

    def test_coarse_is_lower_bound(self):
        x = np.random.default_rng(3).standard_normal(2000)
        assert window_max(x, 500, coarse=True).value <= window_max(x, 500).value
        lags = coarse_lags(500)
        assert lags[0] == 1 and lags[-1] == 500 and np.all(np.diff(lags) > 0)

    @pytest.mark.parametrize("a", [0, 10])
    def test_range(self, a):
        with pytest.raises(ConfigError):
            window_max(np.zeros(10), a)


class TestIncrementStatistic:
    def test_zero_path(self):
        assert increment_statistic(np.zeros(100), POWER, 1.0) == 0.0

    def test_window_length_floor(self):
        assert window_length(WindowRule("power", rho=0.5), 100) == 10
        # 100000 ** 0.6 evaluates to 999.99...; the guarded floor returns 1000
        assert window_length(POWER, 100_000) == 1000

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32), c=st.floats(1e-3, 1e3))
    def test_homogeneous(self, seed, c):
        x = np.random.default_rng(seed).standard_normal(200)
        assert increment_statistic(c * x, POWER, c) == pytest.approx(
            increment_statistic(x, POWER, 1.0), rel=1e-10)

    def test_bad_sigma(self):
        with pytest.raises(ConfigError):
            increment_statistic(np.zeros(100), POWER, 0.0)
        with pytest.raises(DataError):
            increment_statistic(np.zeros(2), POWER, 1.0)


class TestStudy:
    def test_report(self):
        spec = ProcessSpec(MDep(0, (1.0,)))
        rep = increment_study(spec, 2000, POWER, 20, 4)
        assert rep.values.shape == (20, 1)
        assert 0.5 < rep.mean[0] < 1.5
        assert rep.config["params"]["window"] == math.floor(2000 ** 0.6)

    def test_parallel_identical(self):
        spec = ProcessSpec(MDep(0, (1.0,)))
        a = increment_study(spec, 500, POWER, 12, 4, parallelism=1).to_dict()
        b = increment_study(spec, 500, POWER, 12, 4, parallelism=4).to_dict()
        assert a == b

    def test_sigma_required(self):
        with pytest.raises(ConfigError):
            increment_study(ProcessSpec(Recurrence(0.5)), 500, POWER, 5, 1)
