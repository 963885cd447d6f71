"""
Tests for recovery certificates and analytic bounds.
"""
import math

import pytest

from recovery.conditions import (
    Bound,
    ConditionReport,
    Relation,
    admissible_pairs,
    analytic_bound,
    count_admissible_pairs,
    nsp_ratios,
    partial_erc,
    prip,
    projected_coherence,
    ric,
    theta_nsp,
    theta_oxx,
)
from recovery.dictionary import SupportSet, Variant, generate, mutual_coherence
from recovery.exceptions import InvalidParams, OutOfDomain, SparkTooSmall, TooLarge


@pytest.fixture
def gaussian():
    """Generic 4x6 dictionary: every 4 atoms are independent."""
    D, _ = generate('random', m=4, n=6, seed=1)
    return D


@pytest.fixture
def identity():
    D, _ = generate('identity', n=4)
    return D


class TestConditionReport:
    def test_strict_threshold(self):
        assert ConditionReport('x', 0.1, 0.2).satisfied
        assert not ConditionReport('x', 0.2, 0.2).satisfied

    def test_relations(self):
        assert ConditionReport('x', 0.2, 0.2, relation='<=').satisfied
        assert ConditionReport('x', 5, 4, relation=Relation.GT).satisfied
        assert not ConditionReport('x', 4, 4, relation=Relation.GT).satisfied

    def test_nan_is_never_satisfied(self):
        assert not ConditionReport('x', math.nan, 1.0).satisfied


class TestAdmissiblePairs:
    def test_count_matches_enumeration(self):
        pairs = list(admissible_pairs(6, 2, 1, 1))
        assert len(pairs) == count_admissible_pairs(6, 2, 1, 1) == 120
        assert all(q.good_bad(q_star) == (1, 1) for q_star, q in pairs)
        assert len(set(pairs)) == len(pairs)

    def test_count_outside_domain(self):
        assert count_admissible_pairs(4, 3, 0, 2) == 0


class TestPartialErc:
    def test_orthonormal_atoms(self, identity):
        assert partial_erc(identity, SupportSet((0, 1)), SupportSet((0,))) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_q_containing_q_star(self, identity):
        with pytest.raises(InvalidParams, match='g < k'):
            partial_erc(identity, SupportSet((0,)), SupportSet((0, 1)))

    def test_two_atom_example(self):
        D, _ = generate('equiangular', k=2, g=0, b=0)
        # one missing atom: the ERC is the largest |<a_0, a_i>|
        value = partial_erc(D, SupportSet((0,)), SupportSet())
        assert value == pytest.approx(1.0 / 3.0, abs=1e-9)


class TestThetaOxx:
    """Exhaustive maxima of the partial ERC."""

    @pytest.mark.parametrize('variant', ['omp', 'ols'])
    def test_matches_pairwise_maximum(self, gaussian, variant):
        expected = max(
            partial_erc(gaussian, q_star, q, variant)
            for q_star, q in admissible_pairs(gaussian.n, 2, 1, 1)
        )
        assert theta_oxx(gaussian, 2, 1, 1, variant) == pytest.approx(expected)

    def test_identity_is_zero(self, identity):
        assert theta_oxx(identity, 2, 1, 1, Variant.OLS) == pytest.approx(0.0, abs=1e-12)

    def test_example1_ols_below_one(self):
        D, _ = generate('example1', n=6, gamma=0.2)
        assert theta_oxx(D, 2, 1, 0, Variant.OLS) < 1.0

    def test_enumeration_guard(self, gaussian, settings):
        settings.SPARSECERT_MAX_SUBSETS = 5
        with pytest.raises(TooLarge):
            theta_oxx(gaussian, 2, 1, 1)

    def test_invalid_cell(self, gaussian):
        with pytest.raises(InvalidParams):
            theta_oxx(gaussian, 4, 1, 3)


class TestThetaNsp:
    """Truncated null space constants."""

    @pytest.mark.parametrize('n', [5, 6, 8])
    def test_example1_values(self, n):
        gamma = 0.8 / (n - 2)
        D, _ = generate('example1', n=n, gamma=gamma)
        theta_0 = theta_nsp(D, 2, 1, 0, 0.0)
        theta_1 = theta_nsp(D, 2, 1, 0, 1.0)
        assert theta_0.exact
        assert theta_0.value == pytest.approx(1.0 / (n - 2), abs=1e-9)
        assert theta_1.value == pytest.approx(1.25, abs=1e-9)

    @pytest.mark.parametrize('p', [0.0, 0.5, 1.0])
    def test_equiangular_is_exactly_one(self, p):
        D, _ = generate('equiangular', k=3, g=1, b=1)
        result = theta_nsp(D, 3, 1, 1, p)
        assert result.value == pytest.approx(1.0, abs=1e-9)
        assert result.kernel_dim == 1

    def test_non_decreasing_in_p(self):
        D, _ = generate('random_kernel', n=7, seed=4)
        values = [theta_nsp(D, 2, 0, 1, p).value for p in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert all(lower <= upper + 1e-9 for lower, upper in zip(values, values[1:]))
        assert values[-1] <= theta_oxx(D, 2, 0, 1, Variant.OMP) + 1e-9

    def test_trivial_kernel(self, identity):
        result = theta_nsp(identity, 2, 0, 0, 1.0)
        assert result.value == 0.0
        assert result.trivial_kernel
        assert result.exact

    def test_spark_too_small(self):
        D, _ = generate('lemma1', k=4, g=3, b=1)
        with pytest.raises(SparkTooSmall):
            theta_nsp(D, 4, 3, 1, 1.0)

    def test_sampled_kernel_is_a_lower_bound(self):
        D, _ = generate('random', m=3, n=5, seed=2)
        result = theta_nsp(D, 1, 0, 0, 1.0, seed=0)
        assert not result.exact
        assert result.kernel_dim == 2
        # the kernel basis vectors are among the samples
        assert result.value >= float(nsp_ratios(D.kernel()[:, 0], 1, 0, 0, 1.0, 1e-10)[0]) - 1e-12

    def test_p_out_of_range(self, identity):
        with pytest.raises(InvalidParams):
            theta_nsp(identity, 2, 0, 0, 1.5)


class TestRic:
    @pytest.mark.parametrize('k,g,b,expected', [
        (3, 1, 0, 1.0 / math.sqrt(2.0)),
        (4, 1, 1, 0.5773502691896258),
        (4, 3, 1, 1.0),
    ])
    def test_lemma1_construction(self, k, g, b, expected):
        D, _ = generate('lemma1', k=k, g=g, b=b)
        assert ric(D, k + b + 1) == pytest.approx(expected, abs=1e-9)

    def test_identity(self, identity):
        assert ric(identity, 3) == pytest.approx(0.0, abs=1e-12)

    def test_example2_fails_the_informed_condition(self):
        D, meta = generate('example2', k=8, g=2, alpha=0.9)
        delta = ric(D, 9)
        assert delta == pytest.approx(8 * meta.notes['design_mu'], abs=1e-9)
        assert analytic_bound('coherence_main', k=8, g=2, b=0, mu=mutual_coherence(D)).satisfied
        assert not analytic_bound('ric_omp_informed', k=8, g=2, b=0, delta=delta).satisfied

    def test_example3_passes_the_informed_condition(self):
        mu = 0.9 / (math.sqrt(6.0) + 1.0)
        D, _ = generate('example3', k=8, mu=mu)
        delta = ric(D, 9)
        assert delta == pytest.approx(mu, abs=1e-9)
        assert not analytic_bound('coherence_main', k=8, g=2, b=0, mu=mutual_coherence(D)).satisfied
        assert analytic_bound('ric_omp_informed', k=8, g=2, b=0, delta=delta).satisfied

    def test_order_out_of_range(self, identity):
        with pytest.raises(InvalidParams):
            ric(identity, 5)


class TestProjectedConstants:
    def test_prip_on_orthonormal_atoms(self, identity):
        constants = prip(identity, 2, 1)
        assert constants.delta_low == pytest.approx(0.0, abs=1e-12)
        assert constants.delta_up == pytest.approx(0.0, abs=1e-12)

    def test_prip_without_projection_is_ric(self, gaussian):
        constants = prip(gaussian, 3, 0)
        assert max(constants.delta_low, constants.delta_up) == pytest.approx(ric(gaussian, 3))

    def test_projected_coherence_without_projection(self, gaussian):
        assert projected_coherence(gaussian, 0, Variant.OLS) == pytest.approx(mutual_coherence(gaussian))

    def test_projected_ols_coherence_bound(self, gaussian):
        mu = mutual_coherence(gaussian)
        measured = projected_coherence(gaussian, 1, Variant.OLS)
        assert measured <= analytic_bound('lemma5_bound', mu=mu, l=1).value + 1e-9


class TestAnalyticBound:
    """Closed-form conditions and bounds."""

    def test_prop1_bound(self):
        report = analytic_bound(Bound.PROP1_BOUND, mu=0.1, k=3, g=1, b=0)
        assert report.value == pytest.approx(0.25)
        assert report.satisfied

    def test_prop1_bound_domain(self):
        with pytest.raises(OutOfDomain):
            analytic_bound('prop1_bound', mu=0.5, k=3, g=1, b=1)

    def test_coherence_main_at_the_threshold(self):
        report = analytic_bound('coherence_main', k=3, g=1, b=1, mu=0.2)
        assert report.threshold == pytest.approx(0.2)
        assert not report.satisfied

    def test_coherence_classic(self):
        assert analytic_bound('coherence_classic', k=2, mu=0.3).satisfied
        assert analytic_bound('coherence_classic', k=2, mu=0.3).threshold == pytest.approx(1.0 / 3.0)

    def test_ric_thresholds(self):
        assert analytic_bound('ric_omp_informed', k=5, g=1, b=0, delta=0.0).threshold == pytest.approx(1.0 / 3.0)
        classic = analytic_bound('ric_omp_classic', k=3, delta=0.4)
        assert classic.threshold == pytest.approx(0.5)
        assert classic.notes['near_tightness_delta'] == pytest.approx(1.0 / math.sqrt(3.0))
        l1 = analytic_bound('ric_l1_informed', k=4, g=1, b=1, delta=0.2)
        assert l1.threshold == pytest.approx(1.0 / (1.0 + math.sqrt(2.0)))

    def test_lemma4_values(self):
        report = analytic_bound('lemma4_values', mu=0.1, q=2, l=1)
        assert report.context['delta_up'] == pytest.approx(0.1)
        assert report.context['delta_low'] == pytest.approx(0.1 + 0.01 * 2)

    def test_lemma5_threshold_with_sparsity(self):
        report = analytic_bound('lemma5_bound', mu=0.1, l=2, k=3, g=1)
        assert report.value == pytest.approx(0.125)
        assert report.threshold == pytest.approx(1.0 / 3.0)

    def test_lemma3_and_lemma10(self):
        assert analytic_bound('lemma3_bound', delta_up2=0.1, delta_low2=0.1, delta_low_kg=0.2,
                              k=3, g=1).value == pytest.approx(0.25)
        assert analytic_bound('lemma10_bound', delta_up2=0.2, delta_low2=0.4).value == pytest.approx(0.3)

    def test_spark_condition(self):
        assert analytic_bound('spark_ols_kminus1', k=2, b=1, spark=math.inf).satisfied
        assert not analytic_bound('spark_ols_kminus1', k=2, b=1, spark=4).satisfied

    def test_unknown_bound(self):
        with pytest.raises(OutOfDomain, match='unknown bound'):
            analytic_bound('welch', mu=0.1)

    def test_missing_argument(self):
        with pytest.raises(OutOfDomain):
            analytic_bound('prop1_bound', mu=0.1)

    def test_invalid_sparsity(self):
        with pytest.raises(OutOfDomain):
            analytic_bound('coherence_main', k=2, g=2, b=0, mu=0.1)
