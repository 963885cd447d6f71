"""
OMP_Q and OLS_Q: greedy support recovery started from an informed support.

Each iteration projects the data vector away from the current support,
scores every remaining atom by |⟨c̃_i, r⟩| and adds the best one. Ties within
tie_tol are resolved either lexicographically or adversarially (a wrong
atom wins whenever one is tied and the true support is known).
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .dictionary import Dictionary, SupportSet, Variant, projected_dictionary
from .exceptions import EpsilonSearchFailed, InvalidParams, NoCandidates, RankDeficient
from .linalg import Tolerances, ensure_full_rank, project_complement, resolve

logger = logging.getLogger(__name__)

MAX_HALVINGS = 60


class TiePolicy(str, Enum):
    ADVERSARIAL = 'adversarial'
    LEXICOGRAPHIC = 'lexicographic'


class TerminationReason(str, Enum):
    RESIDUAL_ZERO = 'residual_zero'
    MAX_ITERATIONS = 'max_iterations'
    RANK_FAILURE = 'rank_failure'


@dataclass(frozen=True)
class GreedyConfig:
    variant: Variant = Variant.OMP
    tie_policy: TiePolicy = TiePolicy.ADVERSARIAL
    tie_tol: float = 1e-9
    max_iterations: int | None = None

    def __post_init__(self):
        object.__setattr__(self, 'variant', Variant(self.variant))
        object.__setattr__(self, 'tie_policy', TiePolicy(self.tie_policy))
        if self.tie_tol < 0:
            raise InvalidParams(f"tie_tol must be non-negative (got {self.tie_tol})")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidParams(f"max_iterations must be positive (got {self.max_iterations})")

    @classmethod
    def from_tolerances(cls, tol: Tolerances, **kwargs) -> 'GreedyConfig':
        return cls(tie_tol=tol.tie_tol, **kwargs)

    def iteration_limit(self, n: int, q_init: SupportSet) -> int:
        available = n - len(q_init)
        if self.max_iterations is None:
            return available
        if self.max_iterations > available:
            raise InvalidParams(
                f"max_iterations {self.max_iterations} exceeds the {available} atoms outside the initial support"
            )
        return self.max_iterations


@dataclass(frozen=True)
class Selection:
    index: int
    candidates: tuple[int, ...]
    scores: tuple[float, ...]
    tie: bool
    margin: float


@dataclass(frozen=True)
class Iteration:
    selected: int
    candidates: tuple[int, ...]
    scores: tuple[float, ...]
    tie: bool
    margin: float
    residual_norm: float


@dataclass
class GreedyTrace:
    variant: Variant
    tie_policy: TiePolicy
    initial_support: SupportSet
    iterations: list[Iteration] = field(default_factory=list)
    final_support: SupportSet = field(default_factory=SupportSet)
    terminated_reason: TerminationReason = TerminationReason.MAX_ITERATIONS
    initial_residual_norm: float = 0.0

    @property
    def selections(self) -> list[int]:
        return [iteration.selected for iteration in self.iterations]


def select_next(
    D: Dictionary,
    q_current: SupportSet,
    r,
    config: GreedyConfig,
    q_star: SupportSet | None = None,
    tol: Tolerances | None = None,
) -> Selection:
    """Pick the atom maximizing |⟨c̃_i, r⟩| over i ∉ Q_current.

    Raises:
        NoCandidates: Q_current already holds every atom
        RankDeficient: A_{Q_current} is not full column rank
    """
    candidates = q_current.complement(D.n)
    if not len(candidates):
        raise NoCandidates(f"all {D.n} atoms are already in the support")
    projected = projected_dictionary(D, q_current, tol)
    columns = projected.c_tilde(config.variant)[:, list(candidates)]
    scores = np.abs(columns.T @ np.asarray(r, dtype=float))

    best = float(np.max(scores))
    tied = [i for i, score in zip(candidates, scores) if score >= best - config.tie_tol]
    ordered = np.sort(scores)[::-1]
    margin = float(ordered[0] - ordered[1]) if len(ordered) > 1 else float('inf')

    if config.tie_policy is TiePolicy.ADVERSARIAL and q_star is not None:
        bad = [i for i in tied if i not in q_star]
        index = bad[0] if bad else tied[0]
    else:
        index = tied[0]
    return Selection(int(index), tuple(candidates), tuple(float(s) for s in scores), len(tied) > 1, margin)


def run(
    D: Dictionary,
    y,
    q_init: SupportSet,
    config: GreedyConfig,
    q_star: SupportSet | None = None,
    tol: Tolerances | None = None,
) -> GreedyTrace:
    """Iterate select_next from Q_init, re-projecting y from scratch after every selection.

    Stops when ‖r‖ < rank_tol·‖y‖, after the iteration limit, or when the
    grown support loses full rank.
    """
    tol = resolve(tol)
    y = np.asarray(y, dtype=float)
    if y.shape != (D.m,):
        raise InvalidParams(f"y must have length {D.m} (got shape {y.shape})")
    q_init.validate(D.n)
    if q_star is not None:
        q_star.validate(D.n)
    ensure_full_rank(D.sub(q_init), tol)
    if config.tie_policy is TiePolicy.ADVERSARIAL and q_star is None:
        logger.warning("Adversarial tie policy without a true support, falling back to lexicographic order")

    limit = config.iteration_limit(D.n, q_init)
    support = list(q_init)
    residual = project_complement(D.sub(support), y, tol)
    floor = tol.rank_tol * float(np.linalg.norm(y))
    trace = GreedyTrace(config.variant, config.tie_policy, q_init, initial_residual_norm=float(np.linalg.norm(residual)))

    if trace.initial_residual_norm <= floor:
        trace.terminated_reason = TerminationReason.RESIDUAL_ZERO
    else:
        for _ in range(limit):
            current = SupportSet.of(support)
            selection = select_next(D, current, residual, config, q_star, tol)
            support.append(selection.index)
            try:
                residual = project_complement(D.sub(sorted(support)), y, tol)
            except RankDeficient:
                trace.iterations.append(Iteration(
                    selection.index, selection.candidates, selection.scores, selection.tie,
                    selection.margin, float(np.linalg.norm(residual)),
                ))
                trace.terminated_reason = TerminationReason.RANK_FAILURE
                break
            norm = float(np.linalg.norm(residual))
            trace.iterations.append(Iteration(
                selection.index, selection.candidates, selection.scores, selection.tie, selection.margin, norm,
            ))
            logger.debug(f"{config.variant.value} selected atom {selection.index} (tie={selection.tie}), residual {norm:.3e}")
            if norm < floor or norm == 0.0:
                trace.terminated_reason = TerminationReason.RESIDUAL_ZERO
                break

    trace.final_support = SupportSet.of(support)
    return trace


def success(trace: GreedyTrace, q_star: SupportSet, q_init: SupportSet) -> bool:
    """True iff the first k − g selections all lie in Q*∖Q_init (order inside is free)."""
    target = q_star - q_init
    needed = len(target)
    selections = trace.selections[:needed]
    return len(selections) == needed and all(index in target for index in selections)


def _selects_in_order(D, y, prefix, config, tol) -> bool:
    ordered = replace(config, tie_policy=TiePolicy.LEXICOGRAPHIC, max_iterations=len(prefix))
    trace = run(D, y, SupportSet(), ordered, tol=tol)
    if trace.selections[:len(prefix)] != list(prefix) or len(trace.iterations) < len(prefix):
        return False
    return all(iteration.margin > config.tie_tol for iteration in trace.iterations[:len(prefix)])


def reachability_input(
    D: Dictionary,
    R: Sequence[int],
    config: GreedyConfig,
    tol: Tolerances | None = None,
) -> tuple[np.ndarray, list[float]]:
    """Build y such that the greedy run selects the atoms of R first, in the given order.

    y₁ = a_{R[0]} and y_{p+1} = y_p + ε_{p+1}·a_{R[p]}, with each ε halved
    from 1 until the prefix is selected with strict margins.

    Returns:
        (y, epsilons) with one ε per atom after the first

    Raises:
        EpsilonSearchFailed: no ε within the halving schedule works
        InvalidParams: R is empty, repeats atoms or is longer than n − 2
    """
    tol = resolve(tol)
    order = [int(i) for i in R]
    if not order or len(set(order)) != len(order):
        raise InvalidParams(f"R must be a non-empty sequence of distinct atoms (got {order})")
    SupportSet.of(order).validate(D.n)
    if len(order) > D.n - 2:
        raise InvalidParams(f"|R| = {len(order)} exceeds n - 2 = {D.n - 2}")

    y = np.array(D.atom(order[0]))
    if not _selects_in_order(D, y, order[:1], config, tol):
        raise EpsilonSearchFailed(f"atom {order[0]} is not the strict first selection for y = a_{order[0]}")

    epsilons = []
    for p in range(1, len(order)):
        epsilon = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = y + epsilon * D.atom(order[p])
            if _selects_in_order(D, candidate, order[:p + 1], config, tol):
                break
            epsilon /= 2.0
        else:
            raise EpsilonSearchFailed(f"no epsilon reaches prefix {order[:p + 1]} after {MAX_HALVINGS} halvings")
        y = candidate
        epsilons.append(epsilon)
        logger.debug(f"Reached prefix {order[:p + 1]} with epsilon {epsilon:g}")
    return y, epsilons


@dataclass
class AdversarialInstance:
    y: np.ndarray
    q_star: SupportSet
    q: SupportSet
    q_good: SupportSet
    q_bad: SupportSet
    q_one: SupportSet
    q_two: SupportSet
    selected: int
    coefficients: np.ndarray


def adversarial_instance(
    D: Dictionary,
    k: int,
    g: int,
    b: int,
    variant: Variant | str = Variant.OMP,
    tol: Tolerances | None = None,
) -> AdversarialInstance:
    """Worst-case input on an equiangular(k, g, b) dictionary.

    Q = Q_g ∪ Q_b are the first g + b atoms and the rest split into Q₁, Q₂
    of size k − g each. Since the all-ones vector spans the kernel,
    ỹ₂ = C̃_{Q₁}x_{Q₁} = C̃_{Q₂}x_{Q₂} has two disjoint representations. The
    atom j that the greedy step picks from ỹ₂ decides Q*: the half not
    containing j, together with Q_g.
    """
    tol = resolve(tol)
    variant = Variant(variant)
    size = 2 * k - g + b
    if not 0 <= g < k or b < 0 or D.n != size:
        raise InvalidParams(f"expected an equiangular({k}, {g}, {b}) dictionary with {size} atoms, got {D.n}")

    q_good = SupportSet(tuple(range(g)))
    q_bad = SupportSet(tuple(range(g, g + b)))
    q = q_good | q_bad
    q_one = SupportSet(tuple(range(g + b, k + b)))
    q_two = SupportSet(tuple(range(k + b, size)))

    projected = projected_dictionary(D, q, tol)
    columns = projected.c_tilde(variant)
    # x_{Q₁} multiplies raw atoms: 1 for OMP, 1/‖ã_i‖ for OLS
    scale = np.ones(D.n) if variant is Variant.OMP else 1.0 / np.where(projected.norms > 0, projected.norms, 1.0)
    y_tilde = columns[:, list(q_one)] @ np.ones(len(q_one))

    config = GreedyConfig(variant=variant, tie_policy=TiePolicy.LEXICOGRAPHIC, tie_tol=tol.tie_tol)
    selected = select_next(D, q, y_tilde, config, tol=tol).index

    coefficients = np.zeros(D.n)
    coefficients[list(q_good)] = 1.0
    if selected in q_two:
        chosen, sign = q_one, 1.0
    else:
        chosen, sign = q_two, -1.0
    coefficients[list(chosen)] = sign * scale[list(chosen)]
    y = D.atoms @ coefficients

    logger.info(f"Adversarial instance k={k} g={g} b={b} {variant.value}: greedy picks {selected}, Q* = {q_good | chosen}")
    return AdversarialInstance(
        y=y, q_star=q_good | chosen, q=q, q_good=q_good, q_bad=q_bad,
        q_one=q_one, q_two=q_two, selected=selected, coefficients=coefficients,
    )


@dataclass
class IntermediateFailure:
    y: np.ndarray
    q_star: SupportSet
    epsilon: float
    reach_epsilons: list[float]


def intermediate_failure_instance(
    D: Dictionary,
    k: int,
    g: int,
    config: GreedyConfig,
    tol: Tolerances | None = None,
) -> IntermediateFailure:
    """Input on equiangular(k, g, 0) that is handled correctly for g steps, then fails.

    y = y₁ + ε·y₂ where y₁ reaches the first g atoms in order and y₂ is the
    adversarial vector of the (k, g, 0) converse construction. ε is halved
    from 1 until the first g selections from the empty support are exactly
    Q_g with strict margins.
    """
    tol = resolve(tol)
    worst = adversarial_instance(D, k, g, 0, config.variant, tol)
    y_two = D.atoms @ np.where(np.isin(np.arange(D.n), list(worst.q_good)), 0.0, worst.coefficients)
    if g == 0:
        return IntermediateFailure(y_two, worst.q_star, 1.0, [])

    order = list(worst.q_good)
    y_one, reach = reachability_input(D, order, config, tol)
    epsilon = 1.0
    for _ in range(MAX_HALVINGS + 1):
        candidate = y_one + epsilon * y_two
        if _selects_in_order(D, candidate, order, config, tol):
            return IntermediateFailure(candidate, worst.q_star, epsilon, reach)
        epsilon /= 2.0
    raise EpsilonSearchFailed(f"no epsilon keeps the first {g} selections on Q_g")
