"""
Tests for the reproduction suite: claim registry, individual claims and
recording runs in the database.
"""
import math

import pytest

from recovery.exceptions import UnknownClaim
from recovery.models import ClaimRun
from recovery.services import ReproduceService, ReproReport, list_claims, reproduce_suite, run_claim
from recovery.services.claims import EQUIANGULAR_GRID, ClaimCheck, Comparison

DETERMINISTIC_CLAIMS = ['lemma1', 'eq90-tie', 'example1', 'example2', 'example3']


class TestClaimCheck:
    def test_equality_with_tolerance(self):
        assert ClaimCheck('x', 1.0 + 1e-12, 1.0, tolerance=1e-9).passed
        assert not ClaimCheck('x', 1.1, 1.0, tolerance=1e-9).passed

    def test_relations(self):
        assert ClaimCheck('x', 0.5, 1.0, Comparison.BELOW).passed
        assert not ClaimCheck('x', 1.0, 1.0, Comparison.BELOW).passed
        assert ClaimCheck('x', 1.0, 1.0, Comparison.AT_MOST).passed
        assert ClaimCheck('x', 3, 1, '>=').passed

    def test_nan_fails(self):
        assert not ClaimCheck('x', math.nan, 0.0, Comparison.AT_MOST).passed


class TestRegistry:
    def test_every_claim_is_listed(self):
        ids = {claim.claim_id for claim in list_claims()}
        assert {
            'thm3-sufficient', 'thm3-converse', 'thm5-sufficient', 'thm5-converse', 'thm6-ordering',
            'thm7-ordering', 'lemma1', 'lemma2', 'lemma8', 'lemma9', 'example1', 'example2', 'example3',
            'prop1-bound', 'lemma3-bound', 'lemma4-bound', 'lemma5-bound', 'lemma10-bound',
            'lemma12-identities', 'eq90-tie', 'thm4-consistency', 'ols-l0-equivalence',
        } <= ids

    def test_unknown_claim(self):
        with pytest.raises(UnknownClaim):
            run_claim('thm99')

    def test_suite_rejects_unknown_before_running(self):
        with pytest.raises(UnknownClaim, match='thm99'):
            reproduce_suite(['lemma1', 'thm99'])

    def test_report_without_checks_fails(self):
        assert not ReproReport('empty').passed


class TestDeterministicClaims:
    """Claims built on fixed constructions."""

    @pytest.mark.parametrize('claim_id', DETERMINISTIC_CLAIMS)
    def test_claim_passes(self, claim_id):
        report = run_claim(claim_id)
        assert report.passed, [(c.name, c.measured, c.expected) for c in report.checks if not c.passed]

    def test_lemma1_delta(self):
        report = run_claim('lemma1')
        checks = {check.name: check for check in report.checks}
        assert checks['delta_6(k=4,g=1,b=1)'].measured == pytest.approx(0.5773502691896258, abs=1e-9)
        assert checks['delta_6(k=4,g=3,b=1)'].measured == pytest.approx(1.0, abs=1e-9)

    def test_example1_witness_objective(self):
        report = run_claim('example1', overrides={'n_values': [6]})
        checks = {check.name: check for check in report.checks}
        assert checks['l1_witness_objective(n=6)'].measured == pytest.approx(0.8, abs=1e-9)
        assert checks['theta_1(n=6)'].measured == pytest.approx(1.25, abs=1e-9)
        assert report.parameters['n_values'] == [6]
        assert report.parameters['seed'] == 0

    def test_converse_constructions(self):
        grid = [[2, 0, 0], [3, 1, 1]]
        for claim_id in ('thm3-converse', 'thm5-converse', 'lemma8'):
            report = run_claim(claim_id, overrides={'grid': grid})
            assert report.passed, claim_id

    @pytest.mark.parametrize('claim_id', ['thm3-converse', 'thm5-converse'])
    def test_converse_constructions_on_the_full_grid(self, claim_id):
        report = run_claim(claim_id)
        assert report.parameters['grid'] == EQUIANGULAR_GRID
        assert report.passed, [(c.name, c.measured, c.expected) for c in report.checks if not c.passed]

    def test_lp_converse_counts_every_verdict(self):
        report = run_claim('thm5-converse')
        checks = {check.name: check for check in report.checks}
        assert checks['verdicts'].measured == 2 * 3 * len(EQUIANGULAR_GRID)
        assert checks['unique_or_inconclusive_verdicts'].measured == 0

    def test_intermediate_failure_and_reachability(self):
        assert run_claim('lemma2', overrides={'k_values': [2, 3]}).passed
        assert run_claim('lemma9', overrides={'k_values': [2]}).passed

    def test_projected_gram_identities(self):
        report = run_claim('lemma12-identities', overrides={'grid': [[2, 1, 1]], 'bank_size': 1, 'max_r': 2})
        assert report.passed


class TestRandomizedClaims:
    """Small banks of random dictionaries with one-dimensional kernels."""

    def test_prop1_bound(self):
        assert run_claim('prop1-bound', seed=3, overrides={'bank_size': 3}).passed

    def test_coherence_guarantee(self):
        report = run_claim('thm3-sufficient', seed=1, overrides={'bank_size': 2, 'draws': 1, 'k_max': 2})
        assert report.passed

    def test_lemma5_bound(self):
        assert run_claim('lemma5-bound', overrides={'bank_size': 3}).passed

    def test_lp_guarantee_below_the_coherence_threshold(self):
        assert run_claim('thm5-sufficient', overrides={'bank_size': 3}).passed

    def test_theta_chain_is_ordered(self):
        report = run_claim('thm6-ordering', overrides={'bank_size': 2, 'example1_n': [5, 6]})
        assert report.passed, [(c.name, c.measured) for c in report.checks if not c.passed]

    def test_kernel_ratios_stay_below_partial_erc(self):
        assert run_claim('thm7-ordering', overrides={'bank_size': 2}).passed

    def test_projected_rip_bounds(self):
        assert run_claim('lemma3-bound', overrides={'bank_size': 2}).passed
        assert run_claim('lemma4-bound', overrides={'bank_size': 3}).passed

    def test_projected_omp_coherence_bound(self):
        assert run_claim('lemma10-bound', overrides={'bank_size': 2, 'samples': 20}).passed

    def test_theta_p_decides_uniqueness(self):
        report = run_claim('thm4-consistency')
        assert report.passed, [(c.name, c.measured) for c in report.checks if not c.passed]

    def test_ols_step_matches_informed_l0(self):
        report = run_claim('ols-l0-equivalence')
        assert report.passed, [(c.name, c.measured) for c in report.checks if not c.passed]


class TestSuite:
    def test_order_is_kept_with_parallel_jobs(self):
        reports = reproduce_suite(['example2', 'eq90-tie', 'example3'], jobs=2)
        assert [report.claim_id for report in reports] == ['example2', 'eq90-tie', 'example3']
        assert all(report.passed for report in reports)

    def test_overrides_are_per_claim(self):
        reports = reproduce_suite(['example2'], overrides={'example2': {'alpha': 0.5}})
        assert reports[0].parameters['alpha'] == 0.5
        assert reports[0].passed


@pytest.mark.django_db
class TestRecord:
    """Persisting reports as ClaimRun rows."""

    def test_record_creates_claim_runs(self):
        reports = reproduce_suite(['eq90-tie', 'example3'], seed=5)
        runs = ReproduceService.record(reports, seed=5)
        assert len(runs) == 2
        assert ClaimRun.objects.count() == 2
        run = ClaimRun.objects.get(claim_id='eq90-tie')
        assert run.passed
        assert run.seed == 5
        assert run.report['claim_id'] == 'eq90-tie'
        assert 'runtime_s' in run.report
        assert str(run) == 'eq90-tie (pass, seed 5)'
