"""
Certificate sweeps over (k, g, b) grids, one CSV row per cell.
"""
import csv
import logging
import math

import numpy as np
from joblib import Parallel, delayed

from ..conditions import Bound, admissible_pairs, analytic_bound, count_admissible_pairs, ric, theta_nsp, theta_oxx
from ..dictionary import Construction, Dictionary, Variant, generate, mutual_coherence, spark_exceeds
from ..exceptions import InvalidParams, RankDeficient
from ..greedy import GreedyConfig, TiePolicy, run, success
from ..linalg import Tolerances, ensure_full_rank, guard_enumeration, resolve
from .banks import sparse_signal

logger = logging.getLogger(__name__)

# constructions whose shape follows the cell; the others are built once from params
CELL_CONSTRUCTIONS = {Construction.EQUIANGULAR, Construction.LEMMA1}

SWEEP_COLUMNS = [
    'construction', 'k', 'g', 'b', 'm', 'n', 'mu',
    'coherence_threshold', 'coherence_satisfied', 'spark',
    'theta_omp', 'theta_ols', 'theta_p0', 'theta_p05', 'theta_p1', 'theta_exact', 'ric',
    'omp_adversarial', 'omp_lexicographic', 'ols_adversarial', 'ols_lexicographic',
]


def _dictionary(construction: Construction, k: int, g: int, b: int, params: dict) -> Dictionary:
    if construction in CELL_CONSTRUCTIONS:
        return generate(construction, k=k, g=g, b=b)[0]
    return generate(construction, **params)[0]


def _success_rates(D: Dictionary, k: int, g: int, b: int, rng, draws: int, tol: Tolerances) -> dict:
    outcomes = {(variant, policy): [] for variant in Variant for policy in TiePolicy}
    for q_star, q in admissible_pairs(D.n, k, g, b):
        try:
            ensure_full_rank(D.sub(q_star | q), tol)
        except RankDeficient:
            continue
        for _ in range(draws):
            _, y = sparse_signal(D, q_star, rng)
            for variant, policy in outcomes:
                config = GreedyConfig(variant=variant, tie_policy=policy, tie_tol=tol.tie_tol)
                outcomes[(variant, policy)].append(success(run(D, y, q, config, q_star, tol), q_star, q))
    rates = {}
    for (variant, policy), results in outcomes.items():
        short = 'lexicographic' if policy is TiePolicy.LEXICOGRAPHIC else 'adversarial'
        rates[f"{variant.value}_{short}"] = float(np.mean(results)) if results else math.nan
    return rates


def sweep_cell(
    construction: Construction | str,
    k: int,
    g: int,
    b: int,
    params: dict | None = None,
    seed: int = 0,
    draws: int = 1,
    tol: Tolerances | None = None,
) -> dict:
    """Certificates and greedy success rates for one (k, g, b) cell.

    Certificates that need spark > k + b are left blank when it fails.
    """
    tol = resolve(tol)
    construction = Construction(construction)
    D = _dictionary(construction, k, g, b, params or {})
    if k + b > D.n:
        raise InvalidParams(f"cell ({k},{g},{b}) needs {k + b} atoms, dictionary has {D.n}")
    rng = np.random.default_rng([seed, k, g, b])

    mu = mutual_coherence(D) if D.n >= 2 else 0.0
    coherence = analytic_bound(Bound.COHERENCE_MAIN, k=k, g=g, b=b, mu=mu, cert_tol=tol.cert_tol)
    row = dict.fromkeys(SWEEP_COLUMNS, math.nan)
    row.update(
        construction=construction.value, k=k, g=g, b=b, m=D.m, n=D.n, mu=mu,
        coherence_threshold=coherence.threshold, coherence_satisfied=coherence.satisfied,
        spark=D.spark(tol),
    )
    if k + b + 1 <= D.n:
        row['ric'] = ric(D, k + b + 1, tol)
    if spark_exceeds(D, k + b, tol):
        row['theta_omp'] = theta_oxx(D, k, g, b, Variant.OMP, tol)
        row['theta_ols'] = theta_oxx(D, k, g, b, Variant.OLS, tol)
        exact = True
        for column, p in (('theta_p0', 0.0), ('theta_p05', 0.5), ('theta_p1', 1.0)):
            result = theta_nsp(D, k, g, b, p, tol, seed)
            row[column] = result.value
            exact = exact and result.exact
        row['theta_exact'] = exact
    row.update(_success_rates(D, k, g, b, rng, draws, tol))
    logger.debug(f"Sweep cell {construction.value} ({k},{g},{b}) done")
    return row


def sweep(
    construction: Construction | str,
    k_values,
    g_values,
    b_values,
    params: dict | None = None,
    seed: int = 0,
    draws: int = 1,
    tol: Tolerances | None = None,
    jobs: int = 1,
) -> list[dict]:
    """One row per valid cell (g < k), in grid order.

    Raises:
        TooLarge: a cell needs more subset evaluations than the guard allows
    """
    construction = Construction(construction)
    params = dict(params or {})
    if construction in (Construction.RANDOM, Construction.RANDOM_KERNEL):
        params.setdefault('seed', seed)
    grid = [(k, g, b) for k in k_values for g in g_values for b in b_values if 0 <= g < k and b >= 0]
    if not grid:
        raise InvalidParams('the sweep grid has no cell with 0 <= g < k')
    if construction not in CELL_CONSTRUCTIONS:
        n = _dictionary(construction, 1, 0, 0, params).n
        grid = [(k, g, b) for k, g, b in grid if k + b <= n]
        for k, g, b in grid:
            guard_enumeration(count_admissible_pairs(n, k, g, b) * max(draws, 1), f"sweep cell ({k},{g},{b})")
    logger.info(f"Sweeping {construction.value} over {len(grid)} cell(s) with {jobs} job(s)")
    tasks = (delayed(sweep_cell)(construction, k, g, b, params, seed, draws, tol) for k, g, b in grid)
    return Parallel(n_jobs=jobs, prefer='threads')(tasks)


def _cell_text(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if math.isfinite(value) else ('inf' if value == math.inf else '')
    return str(value)


def write_sweep_csv(rows: list[dict], stream) -> None:
    """Write rows as CSV; floats keep full precision, undefined cells are empty."""
    writer = csv.DictWriter(stream, fieldnames=SWEEP_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({column: _cell_text(row[column]) for column in SWEEP_COLUMNS})
