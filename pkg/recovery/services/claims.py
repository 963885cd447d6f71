"""
Registered reproduction claims.

Every claim runs a desk-scale experiment and returns ClaimChecks that set a
measured value against the value its statement predicts. Claims whose
statement is a failure (converse constructions) pass when the failure is
observed.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from ..conditions import (
    Bound,
    admissible_pairs,
    analytic_bound,
    count_admissible_pairs,
    partial_erc,
    prip,
    projected_coherence,
    ric,
    theta_nsp,
    theta_oxx,
)
from ..dictionary import (
    Construction,
    Dictionary,
    SupportSet,
    Variant,
    equiangular_projection_constants,
    generate,
    mutual_coherence,
    projected_dictionary,
    projected_gram_expansion,
    spark_exceeds,
)
from ..exceptions import RankDeficient
from ..greedy import (
    GreedyConfig,
    TiePolicy,
    adversarial_instance,
    intermediate_failure_instance,
    reachability_input,
    run,
    select_next,
    success,
)
from ..linalg import Tolerances, ensure_full_rank, project_complement
from ..relax import VerdictStatus, solve_p0_informed, verify_lp_minimizer
from .banks import cells, random_kernel_bank, sparse_signal

logger = logging.getLogger(__name__)

EQUIANGULAR_GRID = [
    [k, g, b] for k in (2, 3, 4) for g in (0, 1) for b in (0, 1) if g < k
]
IDENTITY_TOL = 1e-9


class Comparison(str, Enum):
    EQUAL = '=='
    AT_MOST = '<='
    BELOW = '<'
    AT_LEAST = '>='


@dataclass
class ClaimCheck:
    """One measured quantity against its predicted value."""
    name: str
    measured: float
    expected: float
    relation: Comparison = Comparison.EQUAL
    tolerance: float = 0.0
    provenance: str = ''
    passed: bool = field(init=False)

    def __post_init__(self):
        self.relation = Comparison(self.relation)
        self.measured = float(self.measured)
        self.expected = float(self.expected)
        if math.isnan(self.measured):
            self.passed = False
        elif self.relation is Comparison.EQUAL:
            self.passed = abs(self.measured - self.expected) <= self.tolerance
        elif self.relation is Comparison.AT_MOST:
            self.passed = self.measured <= self.expected + self.tolerance
        elif self.relation is Comparison.BELOW:
            self.passed = self.measured < self.expected - self.tolerance
        else:
            self.passed = self.measured >= self.expected - self.tolerance


@dataclass(frozen=True)
class Claim:
    claim_id: str
    runner: Callable[..., list[ClaimCheck]]
    description: str
    defaults: dict


CLAIMS: dict[str, Claim] = {}


def register(claim_id: str, description: str, **defaults):
    """Add the decorated runner to CLAIMS; defaults are its desk-scale parameters."""
    def decorator(runner):
        CLAIMS[claim_id] = Claim(claim_id, runner, description, defaults)
        return runner
    return decorator


def _zero(name: str, count: int, provenance: str) -> ClaimCheck:
    return ClaimCheck(name, count, 0, Comparison.EQUAL, 0.0, provenance)


def _covered(name: str, count: int, provenance: str) -> ClaimCheck:
    return ClaimCheck(name, count, 1, Comparison.AT_LEAST, 0.0, provenance)


def _adversarial(variant: Variant, tol: Tolerances, **kwargs) -> GreedyConfig:
    return GreedyConfig(variant=variant, tie_policy=TiePolicy.ADVERSARIAL, tie_tol=tol.tie_tol, **kwargs)


def _full_rank(D: Dictionary, support: SupportSet, tol: Tolerances) -> bool:
    try:
        ensure_full_rank(D.sub(support), tol)
    except RankDeficient:
        return False
    return True


def _coherence_cells(D: Dictionary, k_max: int, b_max: int, tol: Tolerances):
    mu = mutual_coherence(D)
    return cells(D.n, k_max, b_max, lambda k, g, b: analytic_bound(
        Bound.COHERENCE_MAIN, k=k, g=g, b=b, mu=mu, cert_tol=tol.cert_tol,
    ).satisfied)


def _example1(n: int, scale: float) -> Dictionary:
    return generate(Construction.EXAMPLE1, n=n, gamma=scale / (n - 2))[0]


@register('thm3-sufficient', 'OMP_Q and OLS_Q recover every k-sparse input when mu < 1/(2k-g+b-1)',
          bank_size=50, n_values=[5, 6], k_max=3, b_max=1, draws=5)
def thm3_sufficient(tol, seed, bank_size, n_values, k_max, b_max, draws):
    rng = np.random.default_rng(seed)
    runs = failures = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        for k, g, b in _coherence_cells(D, k_max, b_max, tol):
            for q_star, q in admissible_pairs(D.n, k, g, b):
                for _ in range(draws):
                    _, y = sparse_signal(D, q_star, rng)
                    for variant in Variant:
                        trace = run(D, y, q, _adversarial(variant, tol), q_star, tol)
                        runs += 1
                        if not success(trace, q_star, q):
                            failures += 1
                            logger.warning(f"thm3-sufficient: {variant.value} failed on Q*={q_star} Q={q} ({D!r})")
    provenance = 'coherence below 1/(2k-g+b-1) guarantees k-g correct greedy steps from Q'
    return [_zero('recovery_failures', failures, provenance), _covered('greedy_runs', runs, provenance)]


@register('thm3-converse', 'the equiangular construction defeats OMP_Q and OLS_Q at their first step',
          grid=EQUIANGULAR_GRID)
def thm3_converse(tol, seed, grid):
    bad_first = untied = recovered = outside_span = 0
    for k, g, b in grid:
        D, _ = generate(Construction.EQUIANGULAR, k=k, g=g, b=b)
        for variant in Variant:
            instance = adversarial_instance(D, k, g, b, variant, tol)
            trace = run(D, instance.y, instance.q, _adversarial(variant, tol), instance.q_star, tol)
            first = trace.iterations[0]
            bad_first += first.selected not in instance.q_star
            untied += not first.tie
            recovered += success(trace, instance.q_star, instance.q)
            residual = project_complement(D.sub(instance.q_star), instance.y, tol)
            outside_span += np.linalg.norm(residual) > 1e-8 * np.linalg.norm(instance.y)
    provenance = 'at mu = 1/(2k-g+b-1) a k-sparse input exists for which a wrong atom ties for the first selection'
    return [
        ClaimCheck('bad_first_selections', bad_first, 2 * len(grid), provenance=provenance),
        _zero('untied_first_selections', untied, provenance),
        _zero('successful_runs', recovered, provenance),
        _zero('inputs_outside_true_span', outside_span, provenance),
    ]


@register('thm5-sufficient', 'x* uniquely solves the informed lp problem when mu < 1/(2k-g+b-1)',
          bank_size=10, n_values=[5, 6], k_max=2, b_max=1, p_values=[0.0, 0.5, 1.0])
def thm5_sufficient(tol, seed, bank_size, n_values, k_max, b_max, p_values):
    rng = np.random.default_rng(seed)
    checked = failures = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        for k, g, b in _coherence_cells(D, k_max, b_max, tol):
            for q_star, q in admissible_pairs(D.n, k, g, b):
                x, _ = sparse_signal(D, q_star, rng)
                for p in p_values:
                    verdict = verify_lp_minimizer(D, x, q, p, tol)
                    checked += 1
                    if verdict.status is not VerdictStatus.UNIQUE_MINIMIZER:
                        failures += 1
                        logger.warning(f"thm5-sufficient: p={p} Q*={q_star} Q={q} gave {verdict.status.value}")
    provenance = 'coherence below 1/(2k-g+b-1) makes x* the unique minimizer for every p in [0, 1]'
    return [_zero('non_unique_verdicts', failures, provenance), _covered('verdicts', checked, provenance)]


@register('thm5-converse', 'on the equiangular construction x* is not the unique lp minimizer',
          grid=EQUIANGULAR_GRID, p_values=[0.0, 0.5, 1.0])
def thm5_converse(tol, seed, grid, p_values):
    checked = unique = 0
    for k, g, b in grid:
        D, _ = generate(Construction.EQUIANGULAR, k=k, g=g, b=b)
        for variant in Variant:
            instance = adversarial_instance(D, k, g, b, variant, tol)
            for p in p_values:
                verdict = verify_lp_minimizer(D, instance.coefficients, instance.q, p, tol)
                checked += 1
                unique += verdict.status in (VerdictStatus.UNIQUE_MINIMIZER, VerdictStatus.INCONCLUSIVE)
    provenance = 'the two disjoint (k-g)-term representations give an equally good feasible point'
    return [_zero('unique_or_inconclusive_verdicts', unique, provenance), _covered('verdicts', checked, provenance)]


def _ordering_dictionaries(equiangular, example1_n, example1_scale, bank_size, n_values, seed):
    dictionaries = [generate(Construction.EQUIANGULAR, k=k, g=g, b=b)[0] for k, g, b in equiangular]
    dictionaries += [_example1(n, example1_scale) for n in example1_n]
    dictionaries += random_kernel_bank(bank_size, n_values, seed)
    return dictionaries


@register('thm6-ordering', 'theta_p is non-decreasing in p and theta_1 <= theta_OMP',
          equiangular=[[2, 0, 0], [3, 1, 0], [3, 1, 1]], example1_n=[5, 6, 8], example1_scale=0.8,
          bank_size=20, n_values=[6, 7], k_max=3, b_max=1,
          p_values=[0.0, 0.25, 0.5, 0.75, 1.0], enumeration_limit=100_000)
def thm6_ordering(tol, seed, equiangular, example1_n, example1_scale, bank_size, n_values,
                  k_max, b_max, p_values, enumeration_limit):
    checked = violations = 0
    for D in _ordering_dictionaries(equiangular, example1_n, example1_scale, bank_size, n_values, seed):
        for k, g, b in cells(D.n, k_max, b_max, lambda k, g, b: (
            spark_exceeds(D, k + b, tol) and count_admissible_pairs(D.n, k, g, b) <= enumeration_limit
        )):
            chain = [theta_nsp(D, k, g, b, p, tol, seed).value for p in sorted(p_values)]
            chain.append(theta_oxx(D, k, g, b, Variant.OMP, tol))
            checked += 1
            for lower, upper in itertools.pairwise(chain):
                if lower > upper + tol.cert_tol:
                    violations += 1
                    logger.warning(f"thm6-ordering: chain {chain} breaks at ({k},{g},{b}) on {D!r}")
    provenance = 'theta_0 <= theta_p <= theta_q <= theta_1 <= theta_OMP for p <= q whenever spark > k+b'
    return [_zero('ordering_violations', violations, provenance), _covered('cells', checked, provenance)]


@register('thm7-ordering', 'every kernel vector ratio is bounded by the partial ERC of its pair',
          example1_n=[6], example1_scale=0.8, bank_size=5, n_values=[6, 7], k_max=3, b_max=1)
def thm7_ordering(tol, seed, example1_n, example1_scale, bank_size, n_values, k_max, b_max):
    checked = violations = 0
    for D in _ordering_dictionaries([], example1_n, example1_scale, bank_size, n_values, seed):
        v = np.abs(D.kernel(tol)[:, 0])
        for k, g, b in cells(D.n, k_max, b_max, lambda k, g, b: spark_exceeds(D, k + b, tol)):
            for q_star, q in admissible_pairs(D.n, k, g, b):
                outside = list((q_star | q).complement(D.n))
                denominator = float(np.sum(v[outside]))
                if denominator <= tol.rank_tol:
                    continue
                ratio = float(np.sum(v[list(q_star - q)])) / denominator
                erc = partial_erc(D, q_star, q, Variant.OMP, tol)
                checked += 1
                if ratio > erc + tol.cert_tol:
                    violations += 1
                    logger.warning(f"thm7-ordering: ratio {ratio} exceeds ERC {erc} at Q*={q_star} Q={q}")
    provenance = '||v_{Q* minus Q}||_1 / ||v outside Q* and Q||_1 is at most the partial ERC, hence theta_1 <= theta_OMP'
    return [_zero('ratio_violations', violations, provenance), _covered('pairs', checked, provenance)]


@register('lemma1', 'RIC delta_{k+b+1} = 1/sqrt(k-g) on the block construction, and OMP_Q fails there',
          cells=[[3, 1, 0], [4, 1, 1], [4, 3, 1]])
def lemma1(tol, seed, cells):
    checks = []
    provenance = 'the block construction has delta_{k+b+1} = 1/sqrt(k-g) and a tie that OMP_Q loses'
    for k, g, b in cells:
        D, meta = generate(Construction.LEMMA1, k=k, g=g, b=b)
        order = k + b + 1
        delta = ric(D, order, tol)
        label = f"k={k},g={g},b={b}"
        checks.append(ClaimCheck(f"delta_{order}({label})", delta, 1.0 / math.sqrt(k - g),
                                 tolerance=IDENTITY_TOL, provenance=provenance))
        report = analytic_bound(Bound.RIC_OMP_INFORMED, k=k, g=g, b=b, delta=delta, cert_tol=tol.cert_tol)
        checks.append(ClaimCheck(f"ric_omp_informed_satisfied({label})", report.satisfied, 0, provenance=provenance))
        y = D.sub(meta.canonical_q_star) @ np.ones(k)
        trace = run(D, y, meta.canonical_q, _adversarial(Variant.OMP, tol), meta.canonical_q_star, tol)
        checks.append(ClaimCheck(f"omp_success({label})",
                                 success(trace, meta.canonical_q_star, meta.canonical_q), 0, provenance=provenance))
    return checks


@register('lemma2', 'a run can be correct for g steps and still fail at step g+1',
          k_values=[2, 3, 4])
def lemma2(tol, seed, k_values):
    built = failures = 0
    for k in k_values:
        for g in range(k):
            D, _ = generate(Construction.EQUIANGULAR, k=k, g=g, b=0)
            for variant in Variant:
                config = _adversarial(variant, tol)
                instance = intermediate_failure_instance(D, k, g, config, tol)
                trace = run(D, instance.y, SupportSet(), config, instance.q_star, tol)
                selections = trace.selections
                built += 1
                if selections[:g] != list(range(g)) or len(selections) <= g or selections[g] in instance.q_star:
                    failures += 1
                    logger.warning(f"lemma2: {variant.value} k={k} g={g} selected {selections}")
    provenance = 'y = y1 + eps*y2 reaches Q_g in order and then meets the equiangular tie'
    return [_zero('runs_not_failing_at_step_g_plus_1', failures, provenance), _covered('instances', built, provenance)]


@register('lemma8', 'the adversarial input has two disjoint (k-g)-term representations outside Q',
          grid=EQUIANGULAR_GRID)
def lemma8(tol, seed, grid):
    wrong = 0
    gap = 0.0
    for k, g, b in grid:
        D, _ = generate(Construction.EQUIANGULAR, k=k, g=g, b=b)
        for variant in Variant:
            instance = adversarial_instance(D, k, g, b, variant, tol)
            solution = solve_p0_informed(D, instance.y, instance.q, max_extra=k - g, tol=tol)
            found = {tuple(support) for support in solution.extra_supports}
            if solution.unique or found != {tuple(instance.q_one), tuple(instance.q_two)}:
                wrong += 1
                logger.warning(f"lemma8: ({k},{g},{b}) {variant.value} found extra supports {sorted(found)}")
            columns = projected_dictionary(D, instance.q, tol).c_tilde(variant)
            total = columns[:, list(instance.q_one)].sum(axis=1) + columns[:, list(instance.q_two)].sum(axis=1)
            gap = max(gap, float(np.linalg.norm(total)))
    provenance = 'the projected atoms outside Q sum to zero, so Q1 and Q2 represent the same residual'
    return [
        _zero('instances_without_two_disjoint_solutions', wrong, provenance),
        ClaimCheck('projected_sum_norm', gap, 0.0, tolerance=IDENTITY_TOL, provenance=provenance),
    ]


@register('lemma9', 'any ordered set of at most spark-2 atoms is reachable by OMP with strict margins',
          k_values=[2, 3, 4])
def lemma9(tol, seed, k_values):
    reached = failures = 0
    config = GreedyConfig(variant=Variant.OMP, tie_policy=TiePolicy.LEXICOGRAPHIC, tie_tol=tol.tie_tol)
    for k in k_values:
        for g in range(k):
            D, _ = generate(Construction.EQUIANGULAR, k=k, g=g, b=0)
            for p in range(1, D.n - 1):
                order = list(range(p))
                y, _ = reachability_input(D, order, config, tol)
                trace = run(D, y, SupportSet(), GreedyConfig(
                    variant=Variant.OMP, tie_policy=TiePolicy.LEXICOGRAPHIC, tie_tol=tol.tie_tol, max_iterations=p,
                ), tol=tol)
                margins = [iteration.margin for iteration in trace.iterations]
                if trace.selections != order or any(margin <= tol.tie_tol for margin in margins):
                    failures += 1
                    logger.warning(f"lemma9: equiangular({k},{g},0) reached {trace.selections} for {order}")
                else:
                    reached += 1
    provenance = 'y_{p+1} = y_p + eps*a_{R[p]} keeps the selected prefix for small enough eps'
    return [_zero('unreached_prefixes', failures, provenance), _covered('reached_prefixes', reached, provenance)]


@register('example1', 'the OLS ERC certificate holds where theta_1 > 1', n_values=[5, 6, 8], scale=0.8)
def example1(tol, seed, n_values, scale):
    checks = []
    for n in n_values:
        D = _example1(n, scale)
        gamma = scale / (n - 2)
        checks.append(ClaimCheck(f"theta_ols(n={n})", theta_oxx(D, 2, 1, 0, Variant.OLS, tol), 1.0,
                                 Comparison.BELOW, tol.cert_tol, 'the OLS certificate is below 1'))
        checks.append(ClaimCheck(f"theta_0(n={n})", theta_nsp(D, 2, 1, 0, 0.0, tol, seed).value, 1.0 / (n - 2),
                                 tolerance=IDENTITY_TOL, provenance='theta_0 = 1/(n-2)'))
        checks.append(ClaimCheck(f"theta_1(n={n})", theta_nsp(D, 2, 1, 0, 1.0, tol, seed).value,
                                 1.0 / ((n - 2) * gamma), tolerance=IDENTITY_TOL,
                                 provenance='theta_1 = 1/((n-2)gamma) > 1'))
        x_star = np.zeros(n)
        x_star[n - 2:] = 1.0
        verdict = verify_lp_minimizer(D, x_star, SupportSet((n - 2,)), 1.0, tol)
        checks.append(ClaimCheck(f"l1_not_minimizer(n={n})", verdict.status is VerdictStatus.NOT_MINIMIZER, 1,
                                 provenance='x* = (0,...,0,1,1) is beaten on the kernel line'))
        checks.append(ClaimCheck(f"l1_witness_objective(n={n})",
                                 math.nan if verdict.objective_witness is None else verdict.objective_witness,
                                 (n - 2) * gamma, tolerance=IDENTITY_TOL,
                                 provenance='the witness objective is (n-2)gamma'))
    return checks


@register('example2', 'the coherence condition holds while the informed RIC condition fails',
          k=8, g=2, alpha=0.9)
def example2(tol, seed, k, g, alpha):
    D, meta = generate(Construction.EXAMPLE2, k=k, g=g, alpha=alpha)
    mu = mutual_coherence(D)
    delta = ric(D, k + 1, tol)
    coherence = analytic_bound(Bound.COHERENCE_MAIN, k=k, g=g, b=0, mu=mu, cert_tol=tol.cert_tol)
    informed = analytic_bound(Bound.RIC_OMP_INFORMED, k=k, g=g, b=0, delta=delta, cert_tol=tol.cert_tol)
    provenance = 'on k+1 equiangular atoms with mu = alpha/(2k-g-1), delta_{k+1} = k*mu'
    return [
        ClaimCheck('delta_k_plus_1', delta, k * meta.notes['design_mu'], tolerance=IDENTITY_TOL, provenance=provenance),
        ClaimCheck('coherence_main_satisfied', coherence.satisfied, 1, provenance=provenance),
        ClaimCheck('ric_omp_informed_satisfied', informed.satisfied, 0, provenance=provenance),
    ]


@register('example3', 'the informed RIC condition holds while the coherence condition fails',
          k=8, g=2, alpha=0.9)
def example3(tol, seed, k, g, alpha):
    mu = alpha / (math.sqrt(k - g) + 1.0)
    D, _ = generate(Construction.EXAMPLE3, k=k, mu=mu)
    delta = ric(D, k + 1, tol)
    coherence = analytic_bound(Bound.COHERENCE_MAIN, k=k, g=g, b=0, mu=mutual_coherence(D), cert_tol=tol.cert_tol)
    informed = analytic_bound(Bound.RIC_OMP_INFORMED, k=k, g=g, b=0, delta=delta, cert_tol=tol.cert_tol)
    provenance = 'a single correlated pair among orthonormal atoms gives delta_{k+1} = mu'
    return [
        ClaimCheck('delta_k_plus_1', delta, mu, tolerance=IDENTITY_TOL, provenance=provenance),
        ClaimCheck('coherence_main_satisfied', coherence.satisfied, 0, provenance=provenance),
        ClaimCheck('ric_omp_informed_satisfied', informed.satisfied, 1, provenance=provenance),
    ]


@register('prop1-bound', 'partial ERC <= (k-g)mu / (1-(k+b-1)mu)',
          bank_size=30, n_values=[6, 7], k_max=3, b_max=1)
def prop1_bound(tol, seed, bank_size, n_values, k_max, b_max):
    checked = violations = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        mu = mutual_coherence(D)
        for k, g, b in cells(D.n, k_max, b_max, lambda k, g, b: (k + b - 1) * mu < 1.0):
            bound = analytic_bound(Bound.PROP1_BOUND, mu=mu, k=k, g=g, b=b, cert_tol=tol.cert_tol).value
            for q_star, q in admissible_pairs(D.n, k, g, b):
                erc = partial_erc(D, q_star, q, Variant.OMP, tol)
                checked += 1
                if erc > bound + tol.cert_tol:
                    violations += 1
                    logger.warning(f"prop1-bound: ERC {erc} above {bound} at Q*={q_star} Q={q}")
    provenance = 'partial ERC of OMP is bounded through the coherence'
    return [_zero('bound_violations', violations, provenance), _covered('pairs', checked, provenance)]


@register('lemma3-bound', 'partial ERC <= (k-g)(delta_up2 + delta_low2) / (2(1-delta_low_{k-g}))',
          bank_size=10, n_values=[6, 7], k_max=3, b_max=1)
def lemma3_bound(tol, seed, bank_size, n_values, k_max, b_max):
    checked = violations = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        for k, g, b in cells(D.n, k_max, b_max):
            pair = prip(D, 2, g + b, tol)
            block = prip(D, k - g, g + b, tol)
            if block.delta_low >= 1.0:
                continue
            bound = analytic_bound(Bound.LEMMA3_BOUND, delta_up2=pair.delta_up, delta_low2=pair.delta_low,
                                   delta_low_kg=block.delta_low, k=k, g=g, cert_tol=tol.cert_tol).value
            for q_star, q in admissible_pairs(D.n, k, g, b):
                erc = partial_erc(D, q_star, q, Variant.OMP, tol)
                checked += 1
                if erc > bound + tol.cert_tol:
                    violations += 1
                    logger.warning(f"lemma3-bound: ERC {erc} above {bound} at Q*={q_star} Q={q}")
    provenance = 'partial ERC of OMP is bounded through the projected RIP constants'
    return [_zero('bound_violations', violations, provenance), _covered('pairs', checked, provenance)]


@register('lemma4-bound', 'projected RIP constants are bounded through the coherence',
          bank_size=30, n_values=[6, 7], q_max=3, l_max=2)
def lemma4_bound(tol, seed, bank_size, n_values, q_max, l_max):
    checked = violations = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        mu = mutual_coherence(D)
        for q in range(1, q_max + 1):
            for l in range(l_max + 1):
                if q + l > D.n or (l >= 2 and (l - 1) * mu >= 1.0):
                    continue
                measured = prip(D, q, l, tol)
                predicted = analytic_bound(Bound.LEMMA4_VALUES, mu=mu, q=q, l=l, cert_tol=tol.cert_tol).context
                checked += 1
                if measured.delta_up > predicted['delta_up'] + tol.cert_tol:
                    violations += 1
                if measured.delta_low > predicted['delta_low'] + tol.cert_tol:
                    violations += 1
    provenance = 'delta_up(q,l) <= (q-1)mu and delta_low(q,l) <= (q-1)mu + mu^2 ql/(1-(l-1)mu)'
    return [_zero('bound_violations', violations, provenance), _covered('configurations', checked, provenance)]


@register('lemma5-bound', 'projected OLS coherence mu_l <= mu/(1-l*mu)',
          bank_size=30, n_values=[6, 7], l_max=2)
def lemma5_bound(tol, seed, bank_size, n_values, l_max):
    checked = violations = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        mu = mutual_coherence(D)
        for l in range(min(l_max, D.n - 2) + 1):
            if l * mu >= 1.0:
                continue
            measured = projected_coherence(D, l, Variant.OLS, tol)
            bound = analytic_bound(Bound.LEMMA5_BOUND, mu=mu, l=l, cert_tol=tol.cert_tol).value
            checked += 1
            if measured > bound + tol.cert_tol:
                violations += 1
                logger.warning(f"lemma5-bound: mu_{l} = {measured} above {bound} on {D!r}")
    provenance = 'normalized projected atoms stay mu/(1-l*mu)-coherent'
    return [_zero('bound_violations', violations, provenance), _covered('configurations', checked, provenance)]


@register('lemma10-bound', 'projected OMP coherence is bounded by the 2-atom projected RIP constants',
          bank_size=30, n_values=[6, 7], l_max=2, samples=100)
def lemma10_bound(tol, seed, bank_size, n_values, l_max, samples):
    rng = np.random.default_rng(seed)
    checked = violations = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        for l in range(min(l_max, D.n - 2) + 1):
            mu_l = projected_coherence(D, l, Variant.OMP, tol)
            constants = prip(D, 2, l, tol)
            bound = analytic_bound(Bound.LEMMA10_BOUND, delta_up2=constants.delta_up,
                                   delta_low2=constants.delta_low, cert_tol=tol.cert_tol).value
            checked += 1
            if mu_l > bound + tol.cert_tol:
                violations += 1
                logger.warning(f"lemma10-bound: mu_{l} = {mu_l} above {bound} on {D!r}")
            for _ in range(samples):
                order = rng.permutation(D.n)
                q = SupportSet.of(order[:l])
                rest = order[l:]
                first = int(rng.integers(1, min(2, len(rest) - 1) + 1))
                second = int(rng.integers(1, min(2, len(rest) - first) + 1))
                columns = projected_dictionary(D, q, tol).a_tilde
                left = columns[:, rest[:first]]
                right = columns[:, rest[first:first + second]]
                u = rng.standard_normal(second)
                lhs = float(np.linalg.norm(left.T @ right @ u))
                rhs = mu_l * math.sqrt(first * second) * float(np.linalg.norm(u))
                checked += 1
                if lhs > rhs + tol.cert_tol:
                    violations += 1
    provenance = 'mu_l^OMP <= (delta_up(2,l) + delta_low(2,l))/2 and the cross-Gram norm is at most mu_l*sqrt(|Q\'||Q\'\'|)'
    return [_zero('bound_violations', violations, provenance), _covered('configurations', checked, provenance)]


@register('lemma12-identities', 'closed-form projected Gram entries',
          grid=EQUIANGULAR_GRID, bank_size=5, n_values=[6, 7], max_r=3)
def lemma12_identities(tol, seed, grid, bank_size, n_values, max_r):
    closed_form = 0.0
    expansion = 0.0
    equiangular = [generate(Construction.EQUIANGULAR, k=k, g=g, b=b)[0] for k, g, b in grid]
    for D in equiangular + random_kernel_bank(bank_size, n_values, seed):
        for r in range(min(max_r, D.n - 2) + 1):
            for support in itertools.combinations(range(D.n), r):
                R = SupportSet(support)
                projected = projected_dictionary(D, R, tol).a_tilde
                expansion = max(expansion, float(np.max(np.abs(projected.T @ projected - projected_gram_expansion(D, R)))))
    for D in equiangular:
        mu = 1.0 / (D.n - 1)
        for r in range(min(max_r, D.n - 2) + 1):
            for support in itertools.combinations(range(D.n), r):
                R = SupportSet(support)
                outside = list(R.complement(D.n))
                projected = projected_dictionary(D, R, tol).a_tilde[:, outside]
                inner, square = equiangular_projection_constants(D, R, mu)
                expected = np.full((len(outside), len(outside)), inner)
                np.fill_diagonal(expected, square)
                closed_form = max(closed_form, float(np.max(np.abs(projected.T @ projected - expected))))
    provenance = 'projected inner products follow from the Gram matrix alone'
    return [
        ClaimCheck('gram_expansion_deviation', expansion, 0.0, tolerance=IDENTITY_TOL, provenance=provenance),
        ClaimCheck('equiangular_closed_form_deviation', closed_form, 0.0, tolerance=IDENTITY_TOL,
                   provenance='equiangular projections give -mu - mu^2 s off the diagonal and 1 - mu^2 s on it'),
    ]


@register('eq90-tie', 'every post-Q correlation equals 1 on the block construction', cell=[4, 1, 1])
def eq90_tie(tol, seed, cell):
    k, g, b = cell
    D, meta = generate(Construction.LEMMA1, k=k, g=g, b=b)
    q, q_star = meta.canonical_q, meta.canonical_q_star
    y = D.sub(q_star) @ np.ones(k)
    residual = project_complement(D.sub(q), y, tol)
    candidates = list(q.complement(D.n))
    provenance = 'after projecting Q out, the residual correlates equally with every remaining atom'
    checks = []
    for variant in Variant:
        columns = projected_dictionary(D, q, tol).c_tilde(variant)[:, candidates]
        scores = np.abs(columns.T @ residual)
        checks.append(ClaimCheck(f"{variant.value}_max_score_deviation", float(np.max(np.abs(scores - 1.0))), 0.0,
                                 tolerance=IDENTITY_TOL, provenance=provenance))
        selection = select_next(D, q, residual, _adversarial(variant, tol), q_star, tol)
        checks.append(ClaimCheck(f"{variant.value}_selects_bad_atom", selection.index not in q_star, 1,
                                 provenance=provenance))
    return checks


def _counterexample(v: np.ndarray, k: int, g: int, b: int) -> tuple[np.ndarray, SupportSet]:
    """x* = -v on the k-g largest kernel entries, so x* + v moves that mass outside Q."""
    order = np.argsort(-np.abs(v), kind='stable')
    top = order[:k - g]
    middle = order[k - g:k + b]
    x_star = np.zeros(len(v))
    x_star[top] = -v[top]
    x_star[middle[:g]] = 1.0
    return x_star, SupportSet.of(middle)


@register('thm4-consistency', 'theta_p < 1 gives unique minimizers and theta_p > 1 gives a counterexample',
          bank_size=6, n_values=[5, 6], k_max=2, b_max=1, p_values=[0.0, 0.5, 1.0])
def thm4_consistency(tol, seed, bank_size, n_values, k_max, b_max, p_values):
    rng = np.random.default_rng(seed)
    direct = converse = violations = 0
    for D in random_kernel_bank(bank_size, n_values, seed):
        v = D.kernel(tol)[:, 0]
        for k, g, b in cells(D.n, k_max, b_max, lambda k, g, b: spark_exceeds(D, k + b, tol)):
            for p in p_values:
                theta = theta_nsp(D, k, g, b, p, tol, seed).value
                if theta < 1.0 - tol.cert_tol:
                    for q_star, q in admissible_pairs(D.n, k, g, b):
                        x, _ = sparse_signal(D, q_star, rng)
                        direct += 1
                        if verify_lp_minimizer(D, x, q, p, tol).status is not VerdictStatus.UNIQUE_MINIMIZER:
                            violations += 1
                elif theta > 1.0 + tol.cert_tol:
                    x_star, q = _counterexample(v, k, g, b)
                    converse += 1
                    status = verify_lp_minimizer(D, x_star, q, p, tol).status
                    if status not in (VerdictStatus.NOT_MINIMIZER, VerdictStatus.MINIMIZER_NOT_UNIQUE):
                        violations += 1
                        logger.warning(f"thm4-consistency: theta_{p}({k},{g},{b}) = {theta} but verdict {status.value}")
    provenance = 'x* is the unique lp minimizer for all inputs iff theta_p < 1'
    return [
        _zero('verdict_violations', violations, provenance),
        _covered('direct_instances', direct, provenance),
        _covered('converse_instances', converse, provenance),
    ]


@register('ols-l0-equivalence', 'with one atom missing, OLS_Q succeeds iff the informed l0 problem is uniquely solved',
          bank_size=5, m=4, n=6, degenerate=[[3, 2, 0], [4, 3, 1]], k_max=3, b_max=1)
def ols_l0_equivalence(tol, seed, bank_size, m, n, degenerate, k_max, b_max):
    rng = np.random.default_rng(seed)
    dictionaries = [generate(Construction.RANDOM, m=m, n=n, seed=seed + index)[0] for index in range(bank_size)]
    dictionaries += [generate(Construction.LEMMA1, k=k, g=g, b=b)[0] for k, g, b in degenerate]
    checked = mismatches = 0
    for D in dictionaries:
        for k, g, b in cells(D.n, k_max, b_max, lambda k, g, b: g == k - 1 and k + b <= D.m):
            for q_star, q in admissible_pairs(D.n, k, g, b):
                if not _full_rank(D, q_star | q, tol):
                    continue
                _, y = sparse_signal(D, q_star, rng)
                trace = run(D, y, q, _adversarial(Variant.OLS, tol), q_star, tol)
                solution = solve_p0_informed(D, y, q, max_extra=1, tol=tol)
                checked += 1
                if success(trace, q_star, q) != (solution.unique and solution.extra_size == 1):
                    mismatches += 1
                    logger.warning(f"ols-l0-equivalence: mismatch at Q*={q_star} Q={q} on {D!r}")
    provenance = 'one OLS step from Q picks the atom that best completes y, which is the informed l0 solution'
    return [_zero('mismatches', mismatches, provenance), _covered('instances', checked, provenance)]
