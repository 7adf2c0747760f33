import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from noisyop.stats import StatsError, bh_correct, dispersion, kolmogorov_sf, ks_test, normal_cdf

FIXTURES = Path(__file__).parent / "fixtures"


def series_cdf(x, terms=200):
    """Phi from the Taylor series of erf, summed in exact-ish float arithmetic."""
    z = x / math.sqrt(2.0)
    total, term = 0.0, z
    for n in range(terms):
        total += term / (2 * n + 1)
        term *= -z * z / (n + 1)
    return 0.5 + total / math.sqrt(math.pi)


def brute_bh(p, alpha):
    """Reject the largest sorted prefix whose last member meets k*alpha/m."""
    m = len(p)
    order = sorted(range(m), key=lambda i: (p[i], i))
    best = 0
    for k in range(1, m + 1):
        if p[order[k - 1]] <= alpha * k / m:
            best = k
    out = [False] * m
    for i in order[:best]:
        out[i] = True
    return out


class TestNormalCdf:
    def test_at_mean(self):
        assert normal_cdf(3.0, 3.0, 2.0) == 0.5

    def test_one_sd(self):
        assert normal_cdf(1.0 + math.sqrt(4.0), 1.0, 4.0) == pytest.approx(0.8413447460685429, abs=1e-12)

    def test_against_series(self):
        for x in np.linspace(-4, 4, 33):
            assert normal_cdf(x) == pytest.approx(series_cdf(x), abs=1e-12)

    def test_tails(self):
        assert normal_cdf(-60.0) == 0.0
        assert normal_cdf(-10.0) == pytest.approx(7.619853024160527e-24, rel=1e-10)

    @settings(max_examples=100)
    @given(st.floats(-30, 30))
    def test_symmetry(self, x):
        assert normal_cdf(x) + normal_cdf(-x) == pytest.approx(1.0, abs=1e-12)

    def test_monotone(self):
        assert np.all(np.diff(normal_cdf(np.linspace(-8, 8, 2001))) >= 0)

    def test_bad_variance(self):
        with pytest.raises(StatsError):
            normal_cdf(0.0, 0.0, 0.0)


class TestKolmogorov:
    def test_matches_scipy_limit(self):
        for lam in (0.3, 0.5, 0.8, 1.0, 1.36, 2.0, 3.0):
            assert kolmogorov_sf(lam) == pytest.approx(sps.kstwobign.sf(lam), abs=1e-12)

    def test_edges(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert 0.0 < kolmogorov_sf(10.0) < 1e-80


class TestKs:
    def test_exact_quantiles(self):
        n = 50
        x = sps.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        assert ks_test(x).d_stat == pytest.approx(0.5 / n, abs=1e-12)

    def test_all_zero(self):
        assert ks_test(np.zeros(10)).d_stat == 0.5

    def test_hand_formula(self, rng):
        x = rng.normal(0.3, 1.5, size=40)
        xs = np.sort(x)
        g = np.array([series_cdf((v - 0.1) / math.sqrt(2.0)) for v in xs])
        d = max(max((i + 1) / 40 - g[i], g[i] - i / 40) for i in range(40))
        res = ks_test(x, 0.1, 2.0)
        assert res.d_stat == pytest.approx(d, abs=1e-12)
        assert res.p_value == pytest.approx(sps.kstwobign.sf(math.sqrt(40) * d), abs=1e-10)
        assert res.n == 40

    def test_invariant_under_monotone_transform(self, rng):
        x = rng.normal(0, 2, 200)
        # exp maps N(0, 4) to a lognormal; compare through the matching CDF
        direct = ks_test(x, 0.0, 4.0).d_stat
        y = np.exp(x)
        g = normal_cdf(np.log(np.sort(y)), 0.0, 4.0)
        i = np.arange(1, 201)
        assert direct == pytest.approx(max(np.max(i / 200 - g), np.max(g - (i - 1) / 200)), abs=1e-14)

    def test_empty(self):
        with pytest.raises(StatsError):
            ks_test([])

    def test_null_calibration(self):
        rng = np.random.default_rng(42)
        rejects = sum(ks_test(rng.standard_normal(1000)).p_value < 0.05 for _ in range(2000))
        assert 0.03 <= rejects / 2000 <= 0.07


class TestBH:
    def test_all_rejected(self):
        assert bh_correct([0.005, 0.01, 0.03, 0.04], 0.05).rejected.tolist() == [True] * 4

    def test_none_rejected(self):
        assert bh_correct([0.9, 0.95], 0.05).n_rejected == 0

    def test_single(self):
        assert bh_correct([0.04], 0.05).rejected.tolist() == [True]
        assert bh_correct([0.06], 0.05).rejected.tolist() == [False]

    def test_step_up_rescues_earlier(self):
        # p_(1) fails its own threshold but p_(2) passes, so both go
        out = bh_correct([0.03, 0.04, 0.9], 0.06)
        assert out.rejected.tolist() == [True, True, False]
        assert out.adjusted_threshold_rank == 2

    def test_ties_and_empty(self):
        assert bh_correct([0.01, 0.01, 0.01], 0.05).n_rejected == 3
        assert bh_correct([], 0.05).n_rejected == 0

    @settings(max_examples=200)
    @given(st.lists(st.sampled_from([0.0, 0.001, 0.01, 0.02, 0.03, 0.04, 0.05, 0.2, 0.5, 1.0])
                    | st.floats(0, 1), min_size=1, max_size=12), st.floats(0.001, 0.5))
    def test_against_brute_force(self, p, alpha):
        assert bh_correct(p, alpha).rejected.tolist() == brute_bh(p, alpha)

    @settings(max_examples=100)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.floats(0.001, 0.4), st.floats(0.001, 0.4))
    def test_monotone_in_alpha(self, p, a1, a2):
        lo, hi = sorted((a1, a2))
        assert bh_correct(p, hi).n_rejected >= bh_correct(p, lo).n_rejected

    @settings(max_examples=100)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.floats(0.001, 0.5))
    def test_rejections_are_sorted_prefix(self, p, alpha):
        out = bh_correct(p, alpha)
        order = np.argsort(p, kind="stable")
        flags = out.rejected[order]
        assert not np.any(flags[1:] & ~flags[:-1])

    def test_exhaustive_small_grid(self):
        grid = [0.001, 0.012, 0.025, 0.04, 0.3]
        for p in itertools.product(grid, repeat=4):
            assert bh_correct(list(p), 0.05).rejected.tolist() == brute_bh(list(p), 0.05)

    @pytest.mark.parametrize("bad", [[0.1, 1.2], [-0.1], [float("nan")]])
    def test_bad_pvalues(self, bad):
        with pytest.raises(StatsError):
            bh_correct(bad)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2])
    def test_bad_alpha(self, alpha):
        with pytest.raises(StatsError):
            bh_correct([0.1], alpha)


class TestDispersion:
    def test_constant(self):
        assert dispersion([3.0] * 5) == {"msd": 0.0, "mad": 0.0}

    def test_pair(self):
        assert dispersion([-1.0, 1.0]) == {"msd": 1.0, "mad": 1.0}

    def test_heavy_tail_ranks_oppose(self):
        # a few outliers inflate msd while mad stays small
        tight = np.r_[np.linspace(-0.3, 0.3, 95), [-4.0, -3.5, 3.5, 4.0, 5.0]]
        broad = np.linspace(-1.2, 1.2, 100)
        a, b = dispersion(tight), dispersion(broad)
        assert a["msd"] > b["msd"] and a["mad"] < b["mad"]

    def test_gu_fixture_ranks_oppose(self):
        # terminal opinions of GU runs (beta=100) on a sparse and a dense ER graph
        data = np.loadtxt(FIXTURES / "gu_terminal.csv", delimiter=",", skiprows=1)
        sparse, dense = dispersion(data[:, 0]), dispersion(data[:, 1])
        assert dense["msd"] > sparse["msd"]
        assert dense["mad"] < sparse["mad"]
        assert sparse["msd"] == pytest.approx(0.17536634731742207, rel=1e-12)
        assert dense["mad"] == pytest.approx(0.047360590099012057, rel=1e-12)

    def test_fixture_values(self):
        x = [0.0, 1.0, 2.0, 10.0]
        out = dispersion(x)
        assert out["msd"] == pytest.approx(np.var(x))
        assert out["mad"] == 1.0

    def test_empty(self):
        with pytest.raises(StatsError):
            dispersion([])
