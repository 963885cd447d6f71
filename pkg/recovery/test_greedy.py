"""
Tests for OMP_Q / OLS_Q: selection rule, tie policies, termination,
success, reachability and the worst-case inputs.
"""
import numpy as np
import pytest

from recovery.conditions import admissible_pairs, partial_erc
from recovery.dictionary import SupportSet, Variant, build, generate
from recovery.exceptions import InvalidParams, NoCandidates, RankDeficient
from recovery.greedy import (
    GreedyConfig,
    TerminationReason,
    TiePolicy,
    adversarial_instance,
    intermediate_failure_instance,
    reachability_input,
    run,
    select_next,
    success,
)
from recovery.linalg import project_complement
from recovery.services.banks import cells, random_kernel_bank, sparse_signal


@pytest.fixture
def identity():
    """Four orthonormal atoms."""
    D, _ = generate('identity', n=4)
    return D


@pytest.fixture
def gaussian():
    """Generic 6x8 dictionary for oracle comparisons."""
    D, _ = generate('random', m=6, n=8, seed=3)
    return D


class TestGreedyConfig:
    def test_coerces_strings(self):
        config = GreedyConfig(variant='ols', tie_policy='lexicographic')
        assert config.variant is Variant.OLS
        assert config.tie_policy is TiePolicy.LEXICOGRAPHIC

    def test_rejects_bad_iteration_limit(self):
        with pytest.raises(InvalidParams):
            GreedyConfig(max_iterations=0)

    def test_limit_cannot_exceed_remaining_atoms(self, identity):
        config = GreedyConfig(max_iterations=4)
        with pytest.raises(InvalidParams):
            config.iteration_limit(identity.n, SupportSet((0,)))


class TestRun:
    """Full greedy runs."""

    def test_identity_recovers_in_two_iterations(self, identity):
        y = np.array([1.0, 0.0, 2.0, 0.0])
        q_star = SupportSet((0, 2))
        trace = run(identity, y, SupportSet(), GreedyConfig(), q_star)
        assert trace.selections == [2, 0]
        assert trace.terminated_reason is TerminationReason.RESIDUAL_ZERO
        assert trace.final_support.indices == (0, 2)
        assert trace.iterations[-1].residual_norm == pytest.approx(0.0, abs=1e-12)
        assert success(trace, q_star, SupportSet())

    def test_informed_start_needs_one_step(self, identity):
        y = np.array([1.0, 0.0, 2.0, 0.0])
        q_star = SupportSet((0, 2))
        trace = run(identity, y, SupportSet((0,)), GreedyConfig(variant='ols'), q_star)
        assert trace.selections == [2]
        assert trace.initial_residual_norm == pytest.approx(2.0)
        assert success(trace, q_star, SupportSet((0,)))

    def test_residual_already_zero(self, identity):
        y = np.array([1.0, 0.0, 0.0, 0.0])
        trace = run(identity, y, SupportSet((0,)), GreedyConfig())
        assert trace.iterations == []
        assert trace.terminated_reason is TerminationReason.RESIDUAL_ZERO

    def test_iteration_limit(self, identity):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        trace = run(identity, y, SupportSet(), GreedyConfig(max_iterations=2))
        assert trace.selections == [3, 2]
        assert trace.terminated_reason is TerminationReason.MAX_ITERATIONS

    def test_rank_deficient_initial_support(self):
        D = build([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(RankDeficient):
            run(D, np.array([1.0, 1.0]), SupportSet((0, 1)), GreedyConfig())

    def test_selecting_a_repeated_atom_stops_the_run(self):
        D, meta = generate('lemma1', k=4, g=3, b=1)
        y = D.sub(meta.canonical_q_star) @ np.ones(4)
        q = meta.canonical_q
        trace = run(D, y, q, GreedyConfig(), meta.canonical_q_star)
        # atoms 4 and 5 coincide; the adversarial policy takes the one outside Q*
        assert trace.selections[0] == 5
        assert not success(trace, meta.canonical_q_star, q)

    def test_wrong_data_length(self, identity):
        with pytest.raises(InvalidParams):
            run(identity, np.ones(3), SupportSet(), GreedyConfig())

    @pytest.mark.parametrize('variant', ['omp', 'ols'])
    @pytest.mark.parametrize('seed', range(5))
    def test_prior_projection_does_not_change_the_run(self, gaussian, variant, seed):
        y = np.random.default_rng(seed).standard_normal(gaussian.m)
        Q = SupportSet((0, 1))
        config = GreedyConfig(variant=variant, tie_policy='lexicographic', max_iterations=3)
        direct = run(gaussian, y, Q, config)
        projected = run(gaussian, project_complement(gaussian.sub(Q), y), Q, config)
        assert projected.selections == direct.selections

    @pytest.mark.parametrize('variant', ['omp', 'ols'])
    @pytest.mark.parametrize('seed', range(5))
    def test_residual_norm_never_grows(self, gaussian, variant, seed):
        y = np.random.default_rng(seed).standard_normal(gaussian.m)
        trace = run(gaussian, y, SupportSet(), GreedyConfig(variant=variant, max_iterations=5))
        norms = [trace.initial_residual_norm] + [iteration.residual_norm for iteration in trace.iterations]
        assert len(norms) == 6
        assert all(later <= earlier + 1e-12 for earlier, later in zip(norms, norms[1:]))


class TestSelectNext:
    def test_adversarial_prefers_wrong_atom_on_tie(self, identity):
        y = np.array([1.0, 1.0, 0.0, 0.0])
        q_star = SupportSet((0, 2))
        adversarial = select_next(identity, SupportSet(), y, GreedyConfig(), q_star)
        lexicographic = select_next(identity, SupportSet(), y, GreedyConfig(tie_policy='lexicographic'), q_star)
        assert adversarial.index == 1
        assert lexicographic.index == 0
        assert adversarial.tie
        assert adversarial.margin == 0.0

    def test_adversarial_without_true_support_is_lexicographic(self, identity):
        y = np.array([0.0, 1.0, 1.0, 0.0])
        assert select_next(identity, SupportSet(), y, GreedyConfig()).index == 1

    def test_no_candidates(self, identity):
        with pytest.raises(NoCandidates):
            select_next(identity, SupportSet((0, 1, 2, 3)), np.ones(4), GreedyConfig())

    @pytest.mark.parametrize('seed', range(100))
    def test_ols_picks_the_best_completion(self, gaussian, seed):
        """OLS selects the atom whose addition leaves the smallest residual."""
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(gaussian.m)
        Q = SupportSet((0, 1))
        r = project_complement(gaussian.sub(Q), y)
        selection = select_next(gaussian, Q, r, GreedyConfig(variant='ols'))
        residuals = {
            i: np.linalg.norm(project_complement(gaussian.sub(sorted([0, 1, i])), y))
            for i in range(2, gaussian.n)
        }
        assert selection.index == min(residuals, key=residuals.get)

    @pytest.mark.parametrize('seed', [0, 1, 2])
    def test_omp_scores_projected_correlations(self, gaussian, seed):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(gaussian.m)
        Q = SupportSet((3,))
        r = project_complement(gaussian.sub(Q), y)
        selection = select_next(gaussian, Q, r, GreedyConfig())
        a_q = gaussian.atom(3)
        expected = [
            abs((gaussian.atom(i) - a_q * (a_q @ gaussian.atom(i))) @ r)
            for i in selection.candidates
        ]
        assert list(selection.scores) == pytest.approx(expected)
        assert selection.index == selection.candidates[int(np.argmax(expected))]

    @pytest.mark.parametrize('seed', range(5))
    def test_omp_and_ols_agree_when_projected_norms_are_equal(self, seed):
        D, _ = generate('equiangular', k=3, g=1, b=1)
        y = np.random.default_rng(seed).standard_normal(D.m)
        config = GreedyConfig(tie_policy='lexicographic')
        for q in (SupportSet(), SupportSet((0, 1))):
            r = project_complement(D.sub(q), y)
            omp = select_next(D, q, r, config)
            ols = select_next(D, q, r, GreedyConfig(variant='ols', tie_policy='lexicographic'))
            assert omp.index == ols.index


class TestSuccess:
    def test_order_inside_target_is_free(self, identity):
        y = np.array([1.0, 0.0, 3.0, 2.0])
        q_star = SupportSet((0, 2, 3))
        trace = run(identity, y, SupportSet(), GreedyConfig(), q_star)
        assert trace.selections == [2, 3, 0]
        assert success(trace, q_star, SupportSet())

    def test_too_few_selections(self, identity):
        y = np.array([1.0, 2.0, 0.0, 0.0])
        trace = run(identity, y, SupportSet(), GreedyConfig(max_iterations=1))
        assert not success(trace, SupportSet((0, 1)), SupportSet())

    def test_partial_erc_below_one_guarantees_recovery(self):
        rng = np.random.default_rng(0)
        checked = 0
        for D in random_kernel_bank(3, [6], seed=0):
            for k, g, b in cells(D.n, 2, 1):
                for q_star, q in admissible_pairs(D.n, k, g, b):
                    if partial_erc(D, q_star, q) >= 1.0 - 1e-3:
                        continue
                    _, y = sparse_signal(D, q_star, rng)
                    trace = run(D, y, q, GreedyConfig(max_iterations=k - g), q_star)
                    assert success(trace, q_star, q)
                    checked += 1
        assert checked > 0


class TestReachability:
    """Inputs that force a prescribed selection order."""

    def test_prefix_is_selected_in_order(self):
        D, _ = generate('equiangular', k=3, g=1, b=0)
        config = GreedyConfig(tie_policy='lexicographic')
        y, epsilons = reachability_input(D, [2, 0, 4], config)
        assert len(epsilons) == 2
        trace = run(D, y, SupportSet(), GreedyConfig(tie_policy='lexicographic', max_iterations=3))
        assert trace.selections == [2, 0, 4]
        assert all(iteration.margin > config.tie_tol for iteration in trace.iterations)

    def test_rejects_repeated_atoms(self):
        D, _ = generate('equiangular', k=3, g=1, b=0)
        with pytest.raises(InvalidParams):
            reachability_input(D, [1, 1], GreedyConfig())

    def test_rejects_prefix_longer_than_n_minus_two(self):
        D, _ = generate('equiangular', k=2, g=0, b=0)
        with pytest.raises(InvalidParams):
            reachability_input(D, [0, 1, 2], GreedyConfig())


class TestWorstCaseInputs:
    @pytest.mark.parametrize('variant', ['omp', 'ols'])
    @pytest.mark.parametrize('k,g,b', [(2, 0, 0), (3, 1, 1), (4, 1, 0)])
    def test_adversarial_instance_defeats_first_step(self, variant, k, g, b):
        D, _ = generate('equiangular', k=k, g=g, b=b)
        instance = adversarial_instance(D, k, g, b, variant)
        assert len(instance.q_star) == k
        assert instance.q.good_bad(instance.q_star) == (g, b)
        assert np.allclose(D.atoms @ instance.coefficients, instance.y)
        config = GreedyConfig(variant=variant)
        trace = run(D, instance.y, instance.q, config, instance.q_star)
        assert trace.iterations[0].tie
        assert trace.iterations[0].selected not in instance.q_star
        assert not success(trace, instance.q_star, instance.q)

    def test_adversarial_instance_checks_shape(self):
        D, _ = generate('equiangular', k=3, g=1, b=1)
        with pytest.raises(InvalidParams):
            adversarial_instance(D, 3, 1, 0)

    @pytest.mark.parametrize('variant', ['omp', 'ols'])
    def test_intermediate_failure(self, variant):
        D, _ = generate('equiangular', k=3, g=1, b=0)
        config = GreedyConfig(variant=variant)
        instance = intermediate_failure_instance(D, 3, 1, config)
        trace = run(D, instance.y, SupportSet(), config, instance.q_star)
        assert trace.selections[0] == 0
        assert trace.selections[1] not in instance.q_star
