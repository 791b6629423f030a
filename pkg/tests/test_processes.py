import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from splitinv.errors import ConfigError, StationarityError
from splitinv.mc_engine import rng_for
from splitinv.processes import (AugGarch, ErgodicDoubling, InnovationSpec, Linear,
                                LinearDependent, MDep, ProcessSpec, Recurrence,
                                coupling_l2_error, generate, generate_coupled,
                                inject_epidemic, parse_inner, simulate_batch,
                                spec_from_mapping, spec_to_mapping, theoretical_sigma2)

NORMAL = InnovationSpec()
AR = ProcessSpec(Recurrence(0.5, burn_in=200))
LIN2 = ProcessSpec(Linear("exponential", rho=0.5))
LINC = ProcessSpec(Linear("exponential", rho=0.5, causal=True))
GARCH = ProcessSpec(AugGarch(0.1, 0.1, 0.8, burn_in=300))
ERG = ProcessSpec(ErgodicDoubling("cos"), InnovationSpec("uniform-bit"))
LD = ProcessSpec(LinearDependent(Linear("exponential", rho=0.3), AR))


class TestGenerate:
    def test_identity_filter_reproduces_innovations(self):
        spec = ProcessSpec(Linear("explicit", coeffs=(1.0,), causal=True))
        path = generate(spec, 50, 11)
        assert np.array_equal(path.values, rng_for(11).standard_normal((1, 50))[0])

    def test_iid_mean(self):
        y = generate(ProcessSpec(MDep(0, (1.0,))), 100_000, 3).values
        assert abs(y.mean()) < 4 / math.sqrt(100_000)

    @pytest.mark.parametrize("spec", [AR, LIN2, GARCH, ERG, LD], ids=["ar", "lin", "garch", "erg", "ld"])
    def test_deterministic_in_seed(self, spec):
        a = generate(spec, 300, 5).values
        assert np.array_equal(a, generate(spec, 300, 5).values)
        assert not np.array_equal(a, generate(spec, 300, 6).values)
        assert np.all(np.isfinite(a))

    def test_coupled_y_equals_generate(self):
        cp = generate_coupled(AR, 400, 7, 9)
        assert np.array_equal(cp.y, generate(AR, 400, 9).values)

    def test_n_must_be_positive(self):
        with pytest.raises(ConfigError):
            generate(AR, 0, 1)

    def test_student_t_unit_variance(self):
        spec = ProcessSpec(MDep(0, (1.0,)), InnovationSpec("student-t", df=5))
        y, _ = simulate_batch(spec, 1, 200_000, 4)
        assert abs(y.var() - 1.0) < 0.05


class TestCoupling:
    def test_finite_support_exact(self):
        spec = ProcessSpec(Linear("explicit", coeffs=(0.2, -0.5, 1.0, 0.3, 0.1)))
        cp = generate_coupled(spec, 200, 4, 1)
        assert np.array_equal(cp.y, cp.y_approx)

    def test_mdep_below_window_is_zero(self):
        spec = ProcessSpec(MDep(3, (1.0, 0.5, 0.25, 0.125)))
        cp = generate_coupled(spec, 100, 1, 2)
        assert np.all(cp.y_approx == 0.0)
        assert coupling_l2_error(spec, 1) == pytest.approx(math.sqrt(1 + 0.25 + 0.0625 + 0.015625))

    def test_closed_form_error(self):
        # tail of rho^|j| beyond |j| <= 2, both sides
        assert coupling_l2_error(LIN2, 4) == pytest.approx(0.2041241452, rel=1e-9)
        y, ya = simulate_batch(LIN2, 1, 100_000, 8, m=4)
        rms = math.sqrt(np.mean((y - ya) ** 2))
        assert abs(rms - 0.2041241452) < 0.003

    def test_constant_schedule_matches_scalar(self):
        for spec in (AR, LIN2, GARCH, ERG):
            a = generate_coupled(spec, 120, 6, 4)
            b = generate_coupled(spec, 120, np.full(120, 6), 4)
            assert np.array_equal(a.y_approx, b.y_approx)

    @pytest.mark.parametrize("spec", [AR, LIN2, GARCH, ERG, LD], ids=["ar", "lin", "garch", "erg", "ld"])
    def test_schedule_reuses_per_index_streams(self, spec):
        n = 60
        sched = np.where(np.arange(n) < 30, 8, 12)
        mixed = generate_coupled(spec, n, sched, 4).y_approx
        assert np.array_equal(mixed[:30], generate_coupled(spec, n, 8, 4).y_approx[:30])
        assert np.array_equal(mixed[30:], generate_coupled(spec, n, 12, 4).y_approx[30:])

    def test_bad_schedule(self):
        with pytest.raises(ConfigError):
            generate_coupled(AR, 10, np.ones(9), 1)
        with pytest.raises(ConfigError):
            generate_coupled(AR, 10, -1, 1)

    @pytest.mark.parametrize("spec,m", [(AR, 40), (LIN2, 60), (GARCH, 60), (ERG, 8), (LD, 200)],
                             ids=["ar", "lin", "garch", "erg", "ld"])
    def test_marginals_agree(self, spec, m):
        y, ya = simulate_batch(spec, 1, 10_000, 21, m=m)
        # five kinds tested; Bonferroni at 0.01
        assert stats.ks_2samp(y[:, 0], ya[:, 0], method="asymp").pvalue > 0.01 / 5

    @pytest.mark.parametrize("spec", [AR, LIN2, GARCH, ERG, LD], ids=["ar", "lin", "garch", "erg", "ld"])
    def test_independent_beyond_window(self, spec):
        m, reps = 3, 4000
        _, ya = simulate_batch(spec, m + 2, reps, 31, m=m)
        r = np.corrcoef(ya[:, 0], ya[:, m + 1])[0, 1]
        assert abs(r) <= 3 / math.sqrt(reps)
        # GARCH values are uncorrelated; their squares are not
        f = np.square if spec is GARCH else (lambda v: v)
        if spec is not ERG:
            assert np.corrcoef(f(ya[:, 0]), f(ya[:, 1]))[0, 1] > 3 / math.sqrt(reps)

    def test_approximation_improves_with_m(self):
        errs = [math.sqrt(np.mean(np.subtract(*simulate_batch(AR, 1, 20_000, 5, m=m)) ** 2))
                for m in (2, 4, 8)]
        assert errs[0] > errs[1] > errs[2]


class TestEpidemic:
    def test_zero_shift_is_identity(self):
        p = generate(AR, 50, 1)
        assert np.array_equal(inject_epidemic(p, 10, 20, 0.0).values, p.values)

    def test_shift_segment(self):
        p = generate(AR, 50, 1)
        q = inject_epidemic(p, 10, 20, 2.5)
        d = q.values - p.values
        assert np.all(d[:10] == 0) and np.all(d[20:] == 0)
        assert np.allclose(d[10:20], 2.5)
        assert q.epidemic == (10, 20, 2.5)

    @pytest.mark.parametrize("m1,m2", [(0, 5), (5, 5), (3, 51)])
    def test_bounds(self, m1, m2):
        with pytest.raises(ConfigError):
            inject_epidemic(generate(AR, 50, 1), m1, m2, 1.0)


class TestClosedForms:
    def test_sigma2(self):
        assert theoretical_sigma2(ProcessSpec(MDep(0, (1.0,)))) == 1.0
        assert theoretical_sigma2(LINC) == pytest.approx(4.0)
        assert theoretical_sigma2(LIN2) == pytest.approx(9.0)
        assert theoretical_sigma2(AR) is None

    def test_polynomial_sigma2(self):
        spec = ProcessSpec(Linear("polynomial", decay=2.0, causal=True))
        assert theoretical_sigma2(spec) == pytest.approx((1 + 1.2020569031595942) ** 2)


class TestValidation:
    def test_explosive_garch(self):
        with pytest.raises(StationarityError):
            ProcessSpec(AugGarch(0.1, 1.5, 0.9)).validate()

    @pytest.mark.parametrize("build", [
        lambda: Recurrence(1.0),
        lambda: InnovationSpec("student-t", df=2.0),
        lambda: Linear("exponential", rho=1.0),
        lambda: Linear("explicit", coeffs=(1.0, 2.0)),
        lambda: MDep(2, (1.0,)),
        lambda: ProcessSpec(AR.kind, InnovationSpec("uniform-bit")).validate(),
        lambda: ProcessSpec(ErgodicDoubling(), NORMAL).validate(),
    ])
    def test_rejected(self, build):
        with pytest.raises(ConfigError):
            build()


class TestConfigMapping:
    @pytest.mark.parametrize("spec", [AR, LIN2, GARCH, ERG, LD,
                                      ProcessSpec(MDep(1, (1.0, 0.5)), InnovationSpec("student-t", df=6.0))])
    def test_round_trip(self, spec):
        assert spec_from_mapping(spec_to_mapping(spec)) == spec

    def test_inner_string(self):
        cfg = {"kind": "linear-dependent", "rho": "0.3",
               "inner": "recurrence: phi=0.5; burn-in=200"}
        assert spec_from_mapping(cfg) == LD
        assert parse_inner("mdep: weights=1 2") == {"kind": "mdep", "weights": "1 2"}

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            spec_from_mapping({"kind": "arma"})

    def test_missing_setting(self):
        with pytest.raises(ConfigError):
            spec_from_mapping({"kind": "recurrence"})


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**63), m=st.integers(0, 12))
def test_linear_coupling_error_matches_closed_form(seed, m):
    y, ya = simulate_batch(LIN2, 1, 20_000, seed, m=m)
    err = coupling_l2_error(LIN2, m)
    rms = math.sqrt(np.mean((y - ya) ** 2))
    # E(Y - Y^(m))^2 is Gaussian with variance err^2: sd of mean-square ~ err^2 sqrt(2/N)
    assert abs(rms ** 2 - err ** 2) <= 5 * err ** 2 * math.sqrt(2 / 20_000) + 1e-15
