import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from nonuniform_be.optimizer import bound_function
from nonuniform_be.verifier import (
    DiscreteDistribution,
    _sup_discrepancy,
    ci_bound,
    ci_terms,
    convolve,
    exact_convolution_cdf,
    monte_carlo_cdf,
    normal_cdf_complement,
    parse_atoms,
    verify_bound,
)

mpmath = pytest.importorskip("mpmath")

COARSE_C = bound_function(0.004, 0.004)


def mp_tail(t):
    with mpmath.workdps(60):
        return mpmath.erfc(mpmath.mpf(t) / mpmath.sqrt(2)) / 2


def brute_force_law(dist, n):
    """Enumerate all k^n outcomes; returns {sum: prob} with sums rounded for merging."""
    out = {}
    for combo in itertools.product(range(len(dist.values)), repeat=n):
        s = round(sum(dist.values[i] for i in combo) / math.sqrt(n), 9)
        out[s] = out.get(s, 0.0) + math.prod(dist.probs[i] for i in combo)
    return out


class TestNormalTail:
    @pytest.mark.parametrize("t", [0.0, 1.0, 2.0, 3.18, 5.0, 8.0, 10.0, 20.0, 37.0])
    def test_relative_accuracy(self, t):
        ref = mp_tail(t)
        assert abs(normal_cdf_complement(t) - float(ref)) <= 1e-12 * float(ref)

    @pytest.mark.parametrize("t", [5.0, 20.0, 40.0, 100.0])
    def test_log_form(self, t):
        ref = float(mpmath.log(mp_tail(t)))
        np.testing.assert_allclose(normal_cdf_complement(t, log=True), ref, rtol=1e-13)

    def test_underflow_boundary(self):
        assert normal_cdf_complement(40.0) == 0.0
        assert math.isfinite(normal_cdf_complement(40.0, log=True))

    def test_vectorized(self):
        ts = np.array([0.0, 1.0, 3.0])
        out = normal_cdf_complement(ts)
        assert out.shape == (3,)
        assert out[0] == 0.5
        np.testing.assert_allclose(out, stats.norm.sf(ts), rtol=1e-14)

    @given(st.floats(-30, 30))
    def test_symmetry(self, t):
        np.testing.assert_allclose(normal_cdf_complement(t) + normal_cdf_complement(-t), 1.0, rtol=1e-15)


class TestDiscreteDistribution:
    def test_rademacher(self):
        d = DiscreteDistribution.rademacher()
        assert d.rho == 1.0
        assert d.atoms == [(-1.0, 0.5), (1.0, 0.5)]

    @pytest.mark.parametrize("rho, p", [(1.5, 0.23724), (2.5, 0.11476)])
    def test_two_point_with_rho(self, rho, p):
        d = DiscreteDistribution.two_point_with_rho(rho)
        np.testing.assert_allclose(d.rho, rho, rtol=1e-12)
        assert d.probs[1] == pytest.approx(p, abs=1e-5)
        assert d.values[1] > 0 > d.values[0]

    def test_two_point_with_rho_one_is_rademacher(self):
        d = DiscreteDistribution.two_point_with_rho(1.0)
        np.testing.assert_allclose(d.values, [-1.0, 1.0], rtol=1e-12)

    def test_rho_never_below_one(self):
        d = DiscreteDistribution.from_atoms([(0.9999999999999999, 0.5), (-1.0, 0.5)])
        assert d.rho == 1.0

    def test_three_point(self):
        d = DiscreteDistribution.three_point(1.5, 2.0)
        np.testing.assert_allclose(sum(d.probs), 1.0, rtol=1e-15)
        assert d.values == (-1.5, 0.0, 2.0)

    def test_standardized(self):
        d = DiscreteDistribution.standardized([0.0, 1.0, 5.0], [1, 1, 2])
        v, p = np.array(d.values), np.array(d.probs)
        np.testing.assert_allclose([p @ v, p @ v**2], [0.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize(
        "atoms, match",
        [
            ([(-1.0, 0.5), (1.0, 0.4)], "sum"),
            ([(-1.0, 0.5), (2.0, 0.5)], "E X ="),
            ([(-2.0, 0.5), (2.0, 0.5)], "E X\\^2"),
            ([(1.0, 0.5), (1.0, 0.5)], "distinct"),
            ([(-1.0, 1.0), (1.0, 0.0)], "positive"),
            ([], "non-empty"),
        ],
    )
    def test_rejects(self, atoms, match):
        with pytest.raises(ValueError, match=match):
            DiscreteDistribution.from_atoms(atoms)

    @pytest.mark.parametrize("bad", [0.5, math.nan])
    def test_rho_domain(self, bad):
        with pytest.raises(ValueError):
            DiscreteDistribution.two_point_with_rho(bad)

    def test_three_point_domain(self):
        with pytest.raises(ValueError):
            DiscreteDistribution.three_point(0.5, 1.0)


class TestParseAtoms:
    def test_roundtrip(self):
        assert parse_atoms("(-1,0.5),(1,0.5)") == [(-1.0, 0.5), (1.0, 0.5)]
        assert parse_atoms(" ( -1 , 0.5 ) , ( 1 , 0.5 ) ") == [(-1.0, 0.5), (1.0, 0.5)]

    @pytest.mark.parametrize("bad", ["", "(1)", "(1,2),x", "1,2"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_atoms(bad)


class TestConvolution:
    def test_rademacher_single(self):
        d = DiscreteDistribution.rademacher()
        assert exact_convolution_cdf(d, 1, 0.0) == 0.5
        assert exact_convolution_cdf(d, 1, -1.0) == 0.5
        assert exact_convolution_cdf(d, 1, -1.0001) == 0.0

    def test_rademacher_four(self):
        law = convolve(DiscreteDistribution.rademacher(), 4)
        np.testing.assert_allclose(law.support, [-2, -1, 0, 1, 2])
        assert law.cdf(2.0) == 1.0
        assert law.cdf_left(2.0) == 0.9375
        assert law.sf(1.0) == 0.0625

    @pytest.mark.parametrize("n", [1, 7, 20, 64])
    @pytest.mark.parametrize("p", [0.5, 0.23724, 0.05])
    def test_binomial_oracle(self, n, p):
        d = DiscreteDistribution.two_point(p)
        law = convolve(d, n)
        k = np.arange(n + 1)
        # k successes on the positive atom
        values = (k * d.values[1] + (n - k) * d.values[0]) / math.sqrt(n)
        pmf = stats.binom.pmf(k, n, p)
        np.testing.assert_allclose(law.support, values, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(law.probs, pmf, rtol=1e-10, atol=1e-300)

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_three_point_enumeration(self, n):
        d = DiscreteDistribution.three_point(1.5, 2.0)
        ref = brute_force_law(d, n)
        law = convolve(d, n)
        got = {round(float(v), 9): float(p) for v, p in zip(law.support, law.probs)}
        assert got.keys() == ref.keys()
        np.testing.assert_allclose([got[k] for k in ref], list(ref.values()), rtol=1e-12)

    def test_mass_and_order(self):
        law = convolve(DiscreteDistribution.three_point(1.5, 2.0), 64)
        assert abs(law.total_mass - 1.0) < 1e-12
        assert np.all(np.diff(law.support) > 0)

    def test_head_and_tail_agree(self):
        law = convolve(DiscreteDistribution.two_point(0.2), 30)
        for x in law.support[::5]:
            np.testing.assert_allclose(law.cdf(x) + law.sf(x), 1.0, rtol=1e-13)
            np.testing.assert_allclose(law.cdf_left(x) + law.sf_left(x), 1.0, rtol=1e-13)

    def test_state_cap(self):
        with pytest.raises(ValueError, match="states"):
            convolve(DiscreteDistribution.three_point(1.5, 2.0), 64, max_states=100)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            convolve(DiscreteDistribution.rademacher(), 0)

    def test_monte_carlo_within_three_sigma(self):
        d = DiscreteDistribution.two_point_with_rho(1.5)
        exact = exact_convolution_cdf(d, 16, 0.3)
        est, se = monte_carlo_cdf(d, 16, 0.3, size=200_000, seed=12345)
        assert abs(est - exact) <= 3 * se


class TestVerifyBound:
    def test_rademacher_holds(self):
        report = verify_bound(DiscreteDistribution.rademacher(), 16, [3.3, 3.6, 4.0], COARSE_C)
        assert report.ok
        assert 0 < report.max_ratio < 1
        assert len(report.ratios) == len(report.worst_x) == 3

    def test_detects_violation(self):
        # a bound far too small must be flagged
        report = verify_bound(DiscreteDistribution.rademacher(), 4, [3.3], lambda t: 1e-9)
        assert not report.ok
        assert report.violations == [3.3]

    def test_single_atom_sum_is_exact(self):
        # n=1 Rademacher: F=1 beyond 1, so the sup is x^3 Phi-bar(x) at x=t
        t = 3.5
        report = verify_bound(DiscreteDistribution.rademacher(), 1, [t], lambda _: 1.0)
        np.testing.assert_allclose(report.ratios[0], t**3 * normal_cdf_complement(t), rtol=1e-14)
        assert report.worst_x == [t]

    @pytest.mark.parametrize("n", [3, 8, 25])
    def test_symmetric_tails_agree(self, n):
        d = DiscreteDistribution.rademacher()
        up = verify_bound(d, n, [3.3, 4.0], COARSE_C, tail="upper")
        lo = verify_bound(d, n, [3.3, 4.0], COARSE_C, tail="lower")
        np.testing.assert_allclose(up.ratios, lo.ratios, rtol=1e-12)

    def test_asymmetric_tails_differ(self):
        d = DiscreteDistribution.two_point_with_rho(2.5)
        up = verify_bound(d, 8, [3.3], COARSE_C, tail="upper")
        lo = verify_bound(d, 8, [3.3], COARSE_C, tail="lower")
        assert up.ratios != lo.ratios

    def test_rejects_small_t(self):
        with pytest.raises(ValueError, match="3.18"):
            verify_bound(DiscreteDistribution.rademacher(), 4, [3.0], COARSE_C)

    def test_rejects_tail(self):
        with pytest.raises(ValueError):
            verify_bound(DiscreteDistribution.rademacher(), 4, [3.3], COARSE_C, tail="both")

    def test_empty_grid(self):
        report = verify_bound(DiscreteDistribution.rademacher(), 4, [], COARSE_C)
        assert report.ok and report.max_ratio == 0.0

    @settings(max_examples=60, deadline=None)
    @given(
        st.sampled_from([1, 2, 5, 9, 16]),
        st.sampled_from([1.0, 1.5, 2.5]),
        st.floats(3.18, 6.0),
        st.floats(0.0, 1.0),
    )
    def test_sup_dominates_pointwise(self, n, rho, t, frac):
        # the atom scan is exhaustive: no x in [t, 2t] beats it
        d = DiscreteDistribution.two_point_with_rho(rho)
        law = convolve(d, n)
        sup, _ = _sup_discrepancy(law, t, 2 * t, n, d.rho)
        x = t + frac * t
        val = math.sqrt(n) * x**3 * abs(law.sf(x) - normal_cdf_complement(x)) / d.rho
        assert val <= sup * (1 + 1e-12)


class TestCI:
    def test_reference(self):
        res = ci_terms(100, 0.5)
        assert res.t == 5.0
        np.testing.assert_allclose(res.normal_term, float(mp_tail(5.0)), rtol=1e-12)
        np.testing.assert_allclose(res.correction_term, res.c_value / (10 * 125), rtol=1e-15)
        assert res.bound == 2 * (res.normal_term + res.correction_term)
        assert ci_bound(100, 0.5) == res.bound

    def test_rho_scales_correction(self):
        a, b = ci_terms(400, 0.2, 1.0, COARSE_C), ci_terms(400, 0.2, 3.0, COARSE_C)
        np.testing.assert_allclose(b.correction_term, 3 * a.correction_term, rtol=1e-15)

    @pytest.mark.parametrize("n, eps", [(4, 0.5), (1, 3.0), (100, 0.3)])
    def test_below_domain(self, n, eps):
        with pytest.raises(ValueError, match="sqrt\\(n\\)\\*eps"):
            ci_terms(n, eps)

    @pytest.mark.parametrize("n, eps, rho", [(0, 1.0, 1.0), (10, 0.0, 1.0), (10, 1.0, 0.5)])
    def test_rejects(self, n, eps, rho):
        with pytest.raises(ValueError):
            ci_terms(n, eps, rho)
