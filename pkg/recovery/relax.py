"""
Informed ℓp problems: min ‖x_{Q̄}‖_p^p subject to Ax = y, for p in [0, 1].

Every feasible point is x* + Kt with K a kernel basis, so on low-dimensional
kernels optimality of a candidate x* is decided by scanning the points where
coordinates outside Q vanish.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dictionary import Dictionary, SupportSet
from .exceptions import Infeasible, InvalidParams, KernelTooLarge, RankDeficient
from .linalg import DEFAULT_RANK_TOL, Tolerances, ensure_full_rank, guard_enumeration, least_squares, resolve

logger = logging.getLogger(__name__)

LINE_GRID_POINTS = 10_000
PLANE_GRID_SIDE = 100
FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Coefficient vector; its support is read at rank_tol."""
    entries: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float).ravel()
        entries.flags.writeable = False
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def on_support(cls, n: int, support: SupportSet, values, rank_tol: float = DEFAULT_RANK_TOL) -> 'SparseVector':
        support.validate(n)
        entries = np.zeros(n)
        entries[list(support)] = values
        return cls(entries, rank_tol)

    @property
    def length(self) -> int:
        return self.entries.shape[0]

    @property
    def support(self) -> SupportSet:
        return SupportSet(tuple(int(i) for i in np.flatnonzero(np.abs(self.entries) > self.rank_tol)))


def _objectives(points: np.ndarray, outside: list[int], p: float, rank_tol: float) -> np.ndarray:
    """
    ℓp objective of every column of points, restricted to the outside indices.

    Entries at or below rank_tol times the column scale count as zero for every p.
    """
    scale = np.maximum(np.max(np.abs(points), axis=0), 1.0)
    magnitudes = np.abs(points[outside])
    magnitudes = np.where(magnitudes > rank_tol * scale, magnitudes, 0.0)
    if p == 0:
        return np.sum(magnitudes > 0.0, axis=0).astype(float)
    return np.sum(magnitudes ** p, axis=0)


def lp_objective(x, Q: SupportSet, p: float, tol: Tolerances | None = None) -> float:
    """Σ_{i∉Q} |x_i|^p, or the number of entries above rank_tol outside Q when p = 0."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParams(f"p must lie in [0, 1] (got {p})")
    if isinstance(x, SparseVector):
        entries, rank_tol = x.entries, x.rank_tol
    else:
        entries, rank_tol = np.asarray(x, dtype=float).ravel(), resolve(tol).rank_tol
    outside = list(Q.validate(entries.shape[0]).complement(entries.shape[0]))
    return float(_objectives(entries[:, None], outside, p, rank_tol)[0])


@dataclass
class P0Solution:
    solutions: list[SparseVector]
    extra_supports: list[SupportSet]
    unique: bool

    @property
    def extra_size(self) -> int:
        return len(self.extra_supports[0])


def solve_p0_informed(
    D: Dictionary,
    y,
    Q: SupportSet,
    max_extra: int | None = None,
    tol: Tolerances | None = None,
) -> P0Solution:
    """All minimal supports S ⊆ Q̄ with y ∈ span(A_{Q∪S}), by increasing |S|.

    max_extra defaults to min(|Q̄|, m), not the sparsity k: any y in the
    range of A is reached with at most m columns, so the default search
    visits Σ_{s≤m} C(n−|Q|, s) subsets. Pass max_extra=k to cap it at
    Σ_{s≤k} C(n−|Q|, s); inputs needing more than k atoms outside Q then
    raise Infeasible.

    Raises:
        Infeasible: no S of size up to max_extra fits y
        RankDeficient: A_Q is not full column rank
    """
    tol = resolve(tol)
    y = np.asarray(y, dtype=float)
    if y.shape != (D.m,):
        raise InvalidParams(f"y must have length {D.m} (got shape {y.shape})")
    Q.validate(D.n)
    ensure_full_rank(D.sub(Q), tol)
    outside = list(Q.complement(D.n))
    limit = min(len(outside), D.m) if max_extra is None else int(max_extra)
    if limit < 0:
        raise InvalidParams(f"max_extra must be non-negative (got {max_extra})")
    guard_enumeration(sum(math.comb(len(outside), s) for s in range(limit + 1)), 'solve_p0_informed')
    threshold = FEASIBILITY_TOL * float(np.linalg.norm(y))

    for size in range(limit + 1):
        solutions, supports = [], []
        for extra in itertools.combinations(outside, size):
            columns = sorted(set(Q) | set(extra))
            matrix = D.sub(columns)
            try:
                coefficients = least_squares(matrix, y, tol)
            except RankDeficient:
                continue
            if np.linalg.norm(matrix @ coefficients - y) <= threshold:
                entries = np.zeros(D.n)
                entries[columns] = coefficients
                solutions.append(SparseVector(entries, tol.rank_tol))
                supports.append(SupportSet(extra))
        if solutions:
            logger.debug(f"solve_p0_informed: {len(solutions)} minimal support(s) with {size} extra atom(s)")
            return P0Solution(solutions, supports, len(solutions) == 1)
    raise Infeasible(f"no support with at most {limit} atoms outside Q represents y")


class VerdictStatus(str, Enum):
    UNIQUE_MINIMIZER = 'unique_minimizer'
    MINIMIZER_NOT_UNIQUE = 'minimizer_not_unique'
    NOT_MINIMIZER = 'not_minimizer'
    INCONCLUSIVE = 'inconclusive'


@dataclass
class MinimizerVerdict:
    status: VerdictStatus
    objective_star: float
    kernel_dim: int
    witness: np.ndarray | None = None
    objective_witness: float | None = None
    step: list[float] | None = None


def _verdict(status, x, kernel, t, objective_star, objective_witness):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    witness = x + kernel @ t
    return MinimizerVerdict(status, objective_star, kernel.shape[1], witness, float(objective_witness), t.tolist())


def _nonzero_steps(steps: np.ndarray, scale: float) -> np.ndarray:
    size = np.linalg.norm(steps.reshape(len(steps), -1), axis=1)
    return steps[size > 1e-12 * max(1.0, scale)]


def _decide(x, kernel, candidates, grid, outside, p, tol, objective_star, tie_status):
    """Shared verdict logic for the line and plane searches."""
    values = _objectives(x[:, None] + kernel @ candidates.T, outside, p, tol.rank_tol) if len(candidates) else np.array([])
    if len(values):
        best = int(np.argmin(values))
        if values[best] < objective_star - tol.cert_tol:
            return _verdict(VerdictStatus.NOT_MINIMIZER, x, kernel, candidates[best], objective_star, values[best])
    if grid is not None and len(grid):
        grid_values = _objectives(x[:, None] + kernel @ grid.T, outside, p, tol.rank_tol)
        floor = min(objective_star, float(np.min(values))) if len(values) else objective_star
        if float(np.min(grid_values)) < floor - tol.cert_tol:
            logger.warning(f"l{p} verification: a grid point beats every breakpoint, verdict inconclusive")
            return MinimizerVerdict(VerdictStatus.INCONCLUSIVE, objective_star, kernel.shape[1])
    if len(values):
        ties = np.flatnonzero(np.abs(values - objective_star) <= tol.cert_tol)
        if ties.size:
            index = int(ties[0])
            if tie_status is VerdictStatus.INCONCLUSIVE:
                return MinimizerVerdict(VerdictStatus.INCONCLUSIVE, objective_star, kernel.shape[1])
            return _verdict(tie_status, x, kernel, candidates[index], objective_star, values[index])
    return MinimizerVerdict(VerdictStatus.UNIQUE_MINIMIZER, objective_star, kernel.shape[1])


def _verify_line(x, kernel, outside, p, tol, objective_star):
    direction = kernel[:, 0]
    active = [i for i in outside if abs(direction[i]) > tol.rank_tol]
    if not active:
        # objective is constant along the kernel line
        return _verdict(VerdictStatus.MINIMIZER_NOT_UNIQUE, x, kernel, [1.0], objective_star, objective_star)
    breakpoints = np.unique(-x[active] / direction[active])
    scale = float(np.max(np.abs(breakpoints)))
    candidates = _nonzero_steps(breakpoints, scale).reshape(-1, 1)
    grid = None
    if p < 1:
        low = min(float(breakpoints[0]), 0.0)
        high = max(float(breakpoints[-1]), 0.0)
        pad = 0.1 * (high - low) + 1e-3
        grid = np.linspace(low - pad, high + pad, LINE_GRID_POINTS).reshape(-1, 1)
    return _decide(x, kernel, candidates, grid, outside, p, tol, objective_star, VerdictStatus.MINIMIZER_NOT_UNIQUE)


def _verify_plane(x, kernel, outside, p, tol, objective_star):
    rows = {i: kernel[i] for i in outside if np.linalg.norm(kernel[i]) > tol.rank_tol}
    if not rows:
        return _verdict(VerdictStatus.MINIMIZER_NOT_UNIQUE, x, kernel, [1.0, 0.0], objective_star, objective_star)
    points = []
    for i, row in rows.items():
        # point of the line x_i + row·t = 0 closest to the origin
        points.append(-x[i] * row / float(row @ row))
    for (i, row_i), (j, row_j) in itertools.combinations(rows.items(), 2):
        system = np.vstack([row_i, row_j])
        if abs(np.linalg.det(system)) > 1e-12 * np.linalg.norm(row_i) * np.linalg.norm(row_j):
            points.append(np.linalg.solve(system, [-x[i], -x[j]]))
    points = np.array(points)
    scale = float(np.max(np.abs(points)))
    candidates = _nonzero_steps(points, scale)

    span = np.vstack([points, np.zeros((1, 2))])
    low = span.min(axis=0)
    high = span.max(axis=0)
    pad = 0.1 * (high - low) + 1e-3
    axis_one = np.linspace(low[0] - pad[0], high[0] + pad[0], PLANE_GRID_SIDE)
    axis_two = np.linspace(low[1] - pad[1], high[1] + pad[1], PLANE_GRID_SIDE)
    grid = np.array(np.meshgrid(axis_one, axis_two)).reshape(2, -1).T
    return _decide(x, kernel, candidates, grid, outside, p, tol, objective_star, VerdictStatus.INCONCLUSIVE)


def verify_lp_minimizer(
    D: Dictionary,
    x_star,
    Q: SupportSet,
    p: float,
    tol: Tolerances | None = None,
) -> MinimizerVerdict:
    """Decide whether x_star uniquely minimizes ‖x_{Q̄}‖_p^p over {x : Ax = Ax_star}.

    Raises:
        KernelTooLarge: the kernel of A has dimension above 2
    """
    tol = resolve(tol)
    if not 0.0 <= p <= 1.0:
        raise InvalidParams(f"p must lie in [0, 1] (got {p})")
    x = x_star.entries if isinstance(x_star, SparseVector) else np.asarray(x_star, dtype=float).ravel()
    if x.shape != (D.n,):
        raise InvalidParams(f"x_star must have length {D.n} (got shape {x.shape})")
    Q.validate(D.n)
    outside = list(Q.complement(D.n))
    objective_star = float(_objectives(x[:, None], outside, p, tol.rank_tol)[0])

    kernel = D.kernel(tol)
    dim = kernel.shape[1]
    if dim == 0:
        return MinimizerVerdict(VerdictStatus.UNIQUE_MINIMIZER, objective_star, 0)
    if dim > 2:
        raise KernelTooLarge(f"kernel dimension {dim} exceeds 2")
    if dim == 1:
        return _verify_line(x, kernel, outside, p, tol, objective_star)
    return _verify_plane(x, kernel, outside, p, tol, objective_star)
