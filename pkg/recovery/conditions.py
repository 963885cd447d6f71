"""
Exact-recovery certificates and the analytic bounds that relate them.

Exhaustive certificates (partial ERC maxima, RIC, P-RIP, projected
coherences) stream subsets from itertools.combinations and refuse to run
when the number of subset evaluations exceeds SPARSECERT_MAX_SUBSETS.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .dictionary import Dictionary, SupportSet, Variant, projected_dictionary, spark_exceeds
from .exceptions import InvalidParams, OutOfDomain, SparkTooSmall
from .linalg import (
    Tolerances,
    ensure_full_rank,
    guard_enumeration,
    least_squares,
    resolve,
    subset_spectra,
)

logger = logging.getLogger(__name__)

NSP_SAMPLES = 10_000
NSP_REFINEMENT_STEPS = 50


class Relation(str, Enum):
    LT = '<'
    LE = '<='
    GT = '>'


def compare(value: float, threshold: float, relation: Relation, cert_tol: float) -> bool:
    if math.isnan(value) or math.isnan(threshold):
        return False
    if relation is Relation.LT:
        return value < threshold - cert_tol
    if relation is Relation.LE:
        return value <= threshold + cert_tol
    return value > threshold + cert_tol


@dataclass
class ConditionReport:
    """A certificate value checked against its threshold.

    exact is False when value is only a lower bound on the true certificate.
    """
    name: str
    value: float
    threshold: float
    relation: Relation = Relation.LT
    exact: bool = True
    context: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    cert_tol: float = 1e-9
    satisfied: bool = field(init=False)

    def __post_init__(self):
        self.relation = Relation(self.relation)
        self.value = float(self.value)
        self.threshold = float(self.threshold)
        self.satisfied = compare(self.value, self.threshold, self.relation, self.cert_tol)


def _check_kgb(k: int, g: int, b: int, n: int) -> None:
    if k < 1 or g < 0 or b < 0 or g >= k:
        raise InvalidParams(f"need k >= 1, 0 <= g < k and b >= 0 (got k={k}, g={g}, b={b})")
    if k + b > n:
        raise InvalidParams(f"k + b = {k + b} exceeds the {n} atoms")


def count_admissible_pairs(n: int, k: int, g: int, b: int) -> int:
    """Number of (Q*, Q) with |Q*| = k, |Q* ∩ Q| = g, |Q ∖ Q*| = b."""
    if k + b > n or g > k:
        return 0
    return math.factorial(n) // (
        math.factorial(g) * math.factorial(b) * math.factorial(k - g) * math.factorial(n - k - b)
    )


def admissible_pairs(n: int, k: int, g: int, b: int) -> Iterator[tuple[SupportSet, SupportSet]]:
    """Yield every admissible (Q*, Q), enumerating Q first."""
    for q in itertools.combinations(range(n), g + b):
        rest = [i for i in range(n) if i not in q]
        for good in itertools.combinations(q, g):
            for missing in itertools.combinations(rest, k - g):
                yield SupportSet(tuple(sorted(good + missing))), SupportSet(q)


def _erc_value(columns: np.ndarray, missing, outside, tol: Tolerances) -> float:
    if not len(outside):
        return 0.0
    coefficients = least_squares(columns[:, list(missing)], columns[:, list(outside)], tol)
    return float(np.max(np.sum(np.abs(coefficients), axis=0)))


def partial_erc(
    D: Dictionary,
    q_star: SupportSet,
    q: SupportSet,
    variant: Variant | str = Variant.OMP,
    tol: Tolerances | None = None,
) -> float:
    """max over i ∉ Q* of ‖C̃†_{Q*∖Q} c̃_i‖₁ (atoms of Q contribute zero).

    Raises:
        RankDeficient: A_{Q* ∪ Q} is not full column rank
        InvalidParams: Q already contains Q*
    """
    tol = resolve(tol)
    q_star.validate(D.n)
    q.validate(D.n)
    g, _ = q.good_bad(q_star)
    if g >= len(q_star):
        raise InvalidParams(f"g < k is required (Q contains all {len(q_star)} atoms of Q*)")
    ensure_full_rank(D.sub(q_star | q), tol)
    projected = projected_dictionary(D, q, tol)
    outside = (q_star | q).complement(D.n)
    return _erc_value(projected.c_tilde(variant), q_star - q, outside, tol)


def theta_oxx(
    D: Dictionary,
    k: int,
    g: int,
    b: int,
    variant: Variant | str = Variant.OMP,
    tol: Tolerances | None = None,
) -> float:
    """Largest partial ERC over every admissible (Q*, Q).

    The partial ERC depends on Q and on Q*∖Q only, so each projection is
    computed once per Q and the choice of good atoms inside Q is skipped.
    """
    tol = resolve(tol)
    _check_kgb(k, g, b, D.n)
    guard_enumeration(count_admissible_pairs(D.n, k, g, b), f"theta_oxx({k},{g},{b})")
    value = 0.0
    for q in itertools.combinations(range(D.n), g + b):
        projected = projected_dictionary(D, SupportSet(q), tol)
        columns = projected.c_tilde(variant)
        rest = [i for i in range(D.n) if i not in q]
        for missing in itertools.combinations(rest, k - g):
            outside = [i for i in rest if i not in missing]
            value = max(value, _erc_value(columns, missing, outside, tol))
    return value


@dataclass
class NspResult:
    value: float
    exact: bool
    kernel_dim: int
    trivial_kernel: bool = False


def nsp_ratios(vectors: np.ndarray, k: int, g: int, b: int, p: float, rank_tol: float) -> np.ndarray:
    """θ_p ratio of every column of vectors.

    Numerator sums the (k−g) largest |v_i|^p, denominator the (n−k−b)
    smallest; the g+b magnitudes in between are absorbed by Q.
    """
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    norms = np.linalg.norm(vectors, axis=0)
    magnitudes = np.sort(np.abs(vectors / np.where(norms > 0, norms, 1.0)), axis=0)[::-1]
    if p == 0:
        powered = (magnitudes > rank_tol).astype(float)
    else:
        powered = magnitudes ** p
    numerator = powered[:k - g].sum(axis=0)
    denominator = powered[k + b:].sum(axis=0)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), np.inf)
    return ratios


def theta_nsp(
    D: Dictionary,
    k: int,
    g: int,
    b: int,
    p: float,
    tol: Tolerances | None = None,
    seed: int = 0,
) -> NspResult:
    """Truncated null space constant θ_p(k, g, b).

    Exact for kernels of dimension 1; for larger kernels the unit sphere of
    the kernel is sampled and the best sample locally refined, giving a
    lower bound (exact = False).

    Raises:
        SparkTooSmall: spark(D) <= k + b
    """
    tol = resolve(tol)
    _check_kgb(k, g, b, D.n)
    if not 0.0 <= p <= 1.0:
        raise InvalidParams(f"p must lie in [0, 1] (got {p})")
    if not spark_exceeds(D, k + b, tol):
        raise SparkTooSmall(f"spark {D.spark(tol)} does not exceed k + b = {k + b}")
    kernel = D.kernel(tol)
    dim = kernel.shape[1]
    if dim == 0:
        return NspResult(0.0, True, 0, trivial_kernel=True)
    if dim == 1:
        return NspResult(float(nsp_ratios(kernel[:, 0], k, g, b, p, tol.rank_tol)[0]), True, 1)

    rng = np.random.default_rng(seed)
    coefficients = np.hstack([np.eye(dim), rng.standard_normal((dim, NSP_SAMPLES))])
    ratios = nsp_ratios(kernel @ coefficients, k, g, b, p, tol.rank_tol)
    best_index = int(np.argmax(ratios))
    best = float(ratios[best_index])
    point = coefficients[:, best_index] / np.linalg.norm(coefficients[:, best_index])
    step = 0.1
    for _ in range(NSP_REFINEMENT_STEPS):
        trial = point + step * rng.standard_normal(dim)
        trial /= np.linalg.norm(trial)
        value = float(nsp_ratios(kernel @ trial, k, g, b, p, tol.rank_tol)[0])
        if value > best:
            best, point = value, trial
        else:
            step *= 0.7
    logger.warning(f"theta_{p}({k},{g},{b}) on a {dim}-dimensional kernel is a sampled lower bound")
    return NspResult(best, False, dim)


def ric(D: Dictionary, order: int, tol: Tolerances | None = None) -> float:
    """Symmetric restricted isometry constant δ_order by exhaustive enumeration."""
    if not 1 <= order <= D.n:
        raise InvalidParams(f"order must lie in [1, {D.n}] (got {order})")
    guard_enumeration(math.comb(D.n, order), f"ric({order})")
    delta = 0.0
    for _, spectra in subset_spectra(D.gram, itertools.combinations(range(D.n), order)):
        delta = max(delta, float(np.max(1.0 - spectra[:, 0])), float(np.max(spectra[:, -1] - 1.0)))
    return delta


@dataclass
class PripConstants:
    delta_low: float
    delta_up: float


def prip(D: Dictionary, q: int, l: int, tol: Tolerances | None = None) -> PripConstants:
    """Tightest projected RIP constants over disjoint (Q', Q), |Q'| = q, |Q| = l.

    delta_up = max(λ_max − 1) and delta_low = max(1 − λ_min) of the Gram of
    the projected atoms Ã_{Q'}; delta_up may be negative.
    """
    tol = resolve(tol)
    if q < 1 or l < 0 or q + l > D.n:
        raise InvalidParams(f"need q >= 1, l >= 0 and q + l <= {D.n} (got q={q}, l={l})")
    guard_enumeration(math.comb(D.n, l) * math.comb(D.n - l, q), f"prip({q},{l})")
    delta_low = -math.inf
    delta_up = -math.inf
    for support in itertools.combinations(range(D.n), l):
        projected = projected_dictionary(D, SupportSet(support), tol)
        gram = projected.a_tilde.T @ projected.a_tilde
        rest = [i for i in range(D.n) if i not in support]
        for _, spectra in subset_spectra(gram, itertools.combinations(rest, q)):
            delta_low = max(delta_low, float(np.max(1.0 - spectra[:, 0])))
            delta_up = max(delta_up, float(np.max(spectra[:, -1] - 1.0)))
    return PripConstants(delta_low, delta_up)


def projected_coherence(
    D: Dictionary,
    l: int,
    variant: Variant | str = Variant.OLS,
    tol: Tolerances | None = None,
) -> float:
    """μ_l: largest |⟨c̃_i, c̃_j⟩| over |Q| = l and distinct i, j ∉ Q."""
    tol = resolve(tol)
    if not 0 <= l <= D.n:
        raise InvalidParams(f"l must lie in [0, {D.n}] (got {l})")
    guard_enumeration(math.comb(D.n, l), f"projected_coherence({l})")
    best = 0.0
    for support in itertools.combinations(range(D.n), l):
        rest = [i for i in range(D.n) if i not in support]
        if len(rest) < 2:
            continue
        columns = projected_dictionary(D, SupportSet(support), tol).c_tilde(variant)[:, rest]
        inner = np.abs(columns.T @ columns)
        np.fill_diagonal(inner, 0.0)
        best = max(best, float(np.max(inner)))
    return best


class Bound(str, Enum):
    COHERENCE_MAIN = 'coherence_main'
    COHERENCE_CLASSIC = 'coherence_classic'
    RIC_OMP_CLASSIC = 'ric_omp_classic'
    RIC_OMP_INFORMED = 'ric_omp_informed'
    RIC_L1_INFORMED = 'ric_l1_informed'
    PROP1_BOUND = 'prop1_bound'
    PROP2_OLS = 'prop2_ols'
    LEMMA3_BOUND = 'lemma3_bound'
    LEMMA4_VALUES = 'lemma4_values'
    LEMMA5_BOUND = 'lemma5_bound'
    LEMMA10_BOUND = 'lemma10_bound'
    SPARK_OLS_KMINUS1 = 'spark_ols_kminus1'


def _domain_kgb(k, g, b):
    if k < 1 or g < 0 or b < 0 or g >= k:
        raise OutOfDomain(f"need k >= 1, 0 <= g < k and b >= 0 (got k={k}, g={g}, b={b})")


def _coherence_main(k, g, b, mu=math.nan, cert_tol=1e-9):
    _domain_kgb(k, g, b)
    return ConditionReport('coherence_main', mu, 1.0 / (2 * k - g + b - 1),
                           context={'k': k, 'g': g, 'b': b}, cert_tol=cert_tol)


def _coherence_classic(k, mu=math.nan, cert_tol=1e-9):
    _domain_kgb(k, 0, 0)
    return ConditionReport('coherence_classic', mu, 1.0 / (2 * k - 1), context={'k': k}, cert_tol=cert_tol)


def _ric_omp_classic(k, delta=math.nan, cert_tol=1e-9):
    _domain_kgb(k, 0, 0)
    return ConditionReport(
        'ric_omp_classic', delta, 1.0 / math.sqrt(k + 1),
        context={'k': k, 'order': k + 1}, cert_tol=cert_tol,
        notes={
            'displayed_threshold': '1/sqrt(k+1)',
            'near_tightness_delta': 1.0 / math.sqrt(k),
            'discrepancy': 'the accompanying tightness discussion quotes delta_{k+1} = 1/sqrt(k); '
                           'the displayed inequality is the one evaluated',
        },
    )


def _ric_omp_informed(k, g, b, delta=math.nan, cert_tol=1e-9):
    _domain_kgb(k, g, b)
    return ConditionReport('ric_omp_informed', delta, 1.0 / (math.sqrt(k - g) + 1.0),
                           context={'k': k, 'g': g, 'b': b, 'order': k + b + 1}, cert_tol=cert_tol)


def _ric_l1_informed(k, g, b, delta=math.nan, cert_tol=1e-9):
    _domain_kgb(k, g, b)
    threshold = 1.0 / (1.0 + math.sqrt(2.0 * (1.0 + (b - g) / k)))
    return ConditionReport('ric_l1_informed', delta, threshold,
                           context={'k': k, 'g': g, 'b': b, 'order': 2 * k}, cert_tol=cert_tol)


def _prop1_bound(mu, k, g, b, cert_tol=1e-9):
    _domain_kgb(k, g, b)
    if k + b - 1 > 0 and mu >= 1.0 / (k + b - 1):
        raise OutOfDomain(f"prop1_bound needs mu < 1/(k+b-1) = {1.0 / (k + b - 1):.6g} (got {mu})")
    value = (k - g) * mu / (1.0 - (k + b - 1) * mu)
    return ConditionReport('prop1_bound', value, 1.0,
                           context={'k': k, 'g': g, 'b': b, 'mu': mu}, cert_tol=cert_tol)


def _prop2_ols(mu_ols, k, g, cert_tol=1e-9):
    _domain_kgb(k, g, 0)
    return ConditionReport('prop2_ols', mu_ols, 1.0 / (2 * k - 2 * g - 1),
                           context={'k': k, 'g': g}, cert_tol=cert_tol)


def _lemma3_bound(delta_up2, delta_low2, delta_low_kg, k, g, cert_tol=1e-9):
    _domain_kgb(k, g, 0)
    if delta_low_kg >= 1.0:
        raise OutOfDomain(f"lemma3_bound needs delta_low(k-g, g+b) < 1 (got {delta_low_kg})")
    value = (k - g) * (delta_up2 + delta_low2) / (2.0 * (1.0 - delta_low_kg))
    return ConditionReport('lemma3_bound', value, 1.0, cert_tol=cert_tol, context={
        'k': k, 'g': g, 'delta_up2': delta_up2, 'delta_low2': delta_low2, 'delta_low_kg': delta_low_kg,
    })


def _lemma4_values(mu, q, l, cert_tol=1e-9):
    if q < 0 or l < 0:
        raise OutOfDomain(f"need q >= 0 and l >= 0 (got q={q}, l={l})")
    if l >= 2 and mu >= 1.0 / (l - 1):
        raise OutOfDomain(f"lemma4_values needs mu < 1/(l-1) = {1.0 / (l - 1):.6g} (got {mu})")
    delta_up = (q - 1) * mu
    delta_low = (q - 1) * mu + mu ** 2 * q * l / (1.0 - (l - 1) * mu)
    return ConditionReport('lemma4_values', delta_low, 1.0, cert_tol=cert_tol,
                           context={'mu': mu, 'q': q, 'l': l, 'delta_up': delta_up, 'delta_low': delta_low})


def _lemma5_bound(mu, l, k=None, g=None, cert_tol=1e-9):
    if l < 0:
        raise OutOfDomain(f"l must be non-negative (got {l})")
    if l >= 1 and mu >= 1.0 / l:
        raise OutOfDomain(f"lemma5_bound needs mu < 1/l = {1.0 / l:.6g} (got {mu})")
    value = mu / (1.0 - l * mu)
    threshold = 1.0
    context = {'mu': mu, 'l': l}
    if k is not None and g is not None:
        _domain_kgb(k, g, 0)
        threshold = 1.0 / (2 * k - 2 * g - 1)
        context.update(k=k, g=g)
    return ConditionReport('lemma5_bound', value, threshold, context=context, cert_tol=cert_tol)


def _lemma10_bound(delta_up2, delta_low2, cert_tol=1e-9):
    value = (delta_up2 + delta_low2) / 2.0
    return ConditionReport('lemma10_bound', value, 1.0, cert_tol=cert_tol,
                           context={'delta_up2': delta_up2, 'delta_low2': delta_low2})


def _spark_ols_kminus1(k, b, spark, cert_tol=1e-9):
    if k < 1 or b < 0:
        raise OutOfDomain(f"need k >= 1 and b >= 0 (got k={k}, b={b})")
    return ConditionReport('spark_ols_kminus1', spark, k + b + 1, relation=Relation.GT,
                           context={'k': k, 'b': b}, cert_tol=cert_tol)


_BOUNDS = {
    Bound.COHERENCE_MAIN: _coherence_main,
    Bound.COHERENCE_CLASSIC: _coherence_classic,
    Bound.RIC_OMP_CLASSIC: _ric_omp_classic,
    Bound.RIC_OMP_INFORMED: _ric_omp_informed,
    Bound.RIC_L1_INFORMED: _ric_l1_informed,
    Bound.PROP1_BOUND: _prop1_bound,
    Bound.PROP2_OLS: _prop2_ols,
    Bound.LEMMA3_BOUND: _lemma3_bound,
    Bound.LEMMA4_VALUES: _lemma4_values,
    Bound.LEMMA5_BOUND: _lemma5_bound,
    Bound.LEMMA10_BOUND: _lemma10_bound,
    Bound.SPARK_OLS_KMINUS1: _spark_ols_kminus1,
}


def analytic_bound(name: Bound | str, **params) -> ConditionReport:
    """Evaluate a named closed-form condition or bound.

    Condition entries (coherence_*, ric_*, prop2_ols, spark_ols_kminus1)
    take the measured quantity as a keyword (mu, delta, mu_ols, spark) and
    report it against the threshold; bound entries report the bound itself
    against 1 unless the statement fixes a tighter target.

    Raises:
        OutOfDomain: a parameter violates the domain of the formula
    """
    try:
        bound = Bound(name)
    except ValueError:
        raise OutOfDomain(f"unknown bound {name!r}") from None
    try:
        return _BOUNDS[bound](**params)
    except TypeError as exc:
        raise OutOfDomain(f"{bound.value}: {exc}") from exc
