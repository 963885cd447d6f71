"""
Dense linear algebra for small matrices.

Least squares and complement projectors go through a QR factorization, the
symmetric eigensolver is a cyclic Jacobi sweep, and kernel, rank and spark
are all read off eigenvalues of MᵀM. Every matrix handled here is at most a
few dozen columns wide.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from django.conf import settings
from scipy.linalg import solve_triangular

from .exceptions import InvalidParams, NotSymmetric, RankDeficient, TooLarge

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-10
DEFAULT_TIE_TOL = 1e-9
DEFAULT_CERT_TOL = 1e-9
DEFAULT_MAX_SUBSETS = 1_000_000
TOLERANCE_CEILING = 1e-3

# Spark of a matrix whose columns are all independent
NO_DEPENDENT_SUBSET = math.inf


@dataclass(frozen=True)
class Tolerances:
    """Numerical cutoffs shared by every module.

    rank_tol: eigenvalue cutoff for rank decisions on MᵀM
    tie_tol: width within which two greedy scores count as tied
    cert_tol: width applied when a certificate is compared to its threshold
    """
    rank_tol: float = DEFAULT_RANK_TOL
    tie_tol: float = DEFAULT_TIE_TOL
    cert_tol: float = DEFAULT_CERT_TOL

    def __post_init__(self):
        for name in ('rank_tol', 'tie_tol', 'cert_tol'):
            value = getattr(self, name)
            if not 0.0 <= value < TOLERANCE_CEILING:
                raise InvalidParams(f"{name} must lie in [0, {TOLERANCE_CEILING}) (got {value})")

    @classmethod
    def from_settings(cls, **overrides) -> 'Tolerances':
        """Build tolerances from Django settings, with explicit overrides taking precedence."""
        values = {
            'rank_tol': getattr(settings, 'SPARSECERT_RANK_TOL', DEFAULT_RANK_TOL),
            'tie_tol': getattr(settings, 'SPARSECERT_TIE_TOL', DEFAULT_TIE_TOL),
            'cert_tol': getattr(settings, 'SPARSECERT_CERT_TOL', DEFAULT_CERT_TOL),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


def resolve(tol: Tolerances | None) -> Tolerances:
    return tol if tol is not None else Tolerances()


def max_subsets() -> int:
    return getattr(settings, 'SPARSECERT_MAX_SUBSETS', DEFAULT_MAX_SUBSETS)


def guard_enumeration(count: int, what: str) -> None:
    """Raise TooLarge when an exhaustive enumeration exceeds the configured guard."""
    limit = max_subsets()
    if count > limit:
        raise TooLarge(f"{what} needs {count} subset evaluations, above the limit of {limit}")
    logger.debug(f"{what}: {count} subset evaluations")


def as_matrix(values, name: str = 'matrix') -> np.ndarray:
    """Return a float64 2-D copy of values after checking shape and finiteness."""
    matrix = np.array(values, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise InvalidParams(f"{name} must be a non-empty 2-D array (got shape {matrix.shape})")
    if not np.all(np.isfinite(matrix)):
        raise InvalidParams(f"{name} contains NaN or infinite entries")
    return matrix


def ensure_full_rank(M: np.ndarray, tol: Tolerances | None = None) -> None:
    """Raise RankDeficient unless the smallest eigenvalue of MᵀM clears rank_tol."""
    tol = resolve(tol)
    rows, cols = M.shape
    if cols == 0:
        return
    if cols > rows:
        raise RankDeficient(f"{cols} columns in dimension {rows} cannot be independent")
    singular = np.linalg.svd(M, compute_uv=False)
    smallest = float(singular[-1]) ** 2
    scale = max(1.0, float(singular[0]) ** 2)
    if smallest < tol.rank_tol * scale:
        raise RankDeficient(
            f"smallest eigenvalue of MᵀM is {smallest:.3e}, below rank_tol {tol.rank_tol:.1e}"
        )


def least_squares(M, y, tol: Tolerances | None = None) -> np.ndarray:
    """Solve min ‖Mx − y‖ for full-column-rank M.

    y may be a vector or a matrix of right-hand sides.

    Raises:
        RankDeficient: if MᵀM is singular at rank_tol
        InvalidParams: if the row counts disagree
    """
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    if M.ndim != 2 or M.shape[0] != y.shape[0]:
        raise InvalidParams(f"cannot fit a right-hand side of shape {y.shape} with a matrix of shape {M.shape}")
    if M.shape[1] == 0:
        return np.zeros((0,) + y.shape[1:])
    ensure_full_rank(M, tol)
    q, r = np.linalg.qr(M)
    return solve_triangular(r, q.T @ y)


def project_complement(M, v, tol: Tolerances | None = None) -> np.ndarray:
    """Return P⊥v, the part of v orthogonal to the columns of M (v itself when M is empty)."""
    M = np.asarray(M, dtype=float)
    v = np.asarray(v, dtype=float)
    if M.ndim != 2 or M.shape[1] == 0:
        return v.copy()
    return v - M @ least_squares(M, v, tol)


def symmetric_eig(G, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns:
        (eigenvalues sorted descending, matrix whose columns are the matching
        orthonormal eigenvectors)

    Raises:
        NotSymmetric: if G is not square or not symmetric within 1e-12
    """
    a = np.array(G, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asymmetry = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asymmetry > 1e-12 * scale:
        raise NotSymmetric(f"matrix asymmetry {asymmetry:.3e} exceeds 1e-12")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    vectors = np.eye(n)

    for sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= 1e-14 * max(float(np.linalg.norm(a)), 1e-300):
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                # negligible next to both diagonal entries
                if abs(apq) <= max(1e-15 * math.sqrt(abs(a[p, p] * a[q, q])), 1e-300):
                    a[p, q] = a[q, p] = 0.0
                    continue
                rotated = True
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.hypot(theta, 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
        if not rotated:
            break
    else:
        logger.warning(f"Jacobi eigensolver stopped after {max_sweeps} sweeps on a {n}x{n} matrix")

    values = np.diag(a).copy()
    order = np.argsort(-values, kind='stable')
    return values[order], vectors[:, order]


def kernel_basis(M, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of {v : Mv = 0}; zero columns when the kernel is trivial."""
    tol = resolve(tol)
    M = as_matrix(M)
    values, vectors = symmetric_eig(M.T @ M)
    cutoff = tol.rank_tol * max(float(values[0]), 0.0)
    mask = values <= cutoff
    return vectors[:, mask]


def rank(M, tol: Tolerances | None = None) -> int:
    M = as_matrix(M)
    return M.shape[1] - kernel_basis(M, tol).shape[1]


def subset_spectra(
    gram: np.ndarray,
    subsets: Iterable[tuple[int, ...]],
    chunk_size: int = 2048,
) -> Iterator[tuple[list[tuple[int, ...]], np.ndarray]]:
    """Stream eigenvalues (ascending per row) of the Gram blocks indexed by each subset.

    Subsets are consumed lazily in chunks; every subset in a chunk must have
    the same cardinality.
    """
    iterator = iter(subsets)
    while True:
        chunk = list(itertools.islice(iterator, chunk_size))
        if not chunk:
            return
        index = np.array(chunk, dtype=np.intp)
        blocks = gram[index[:, :, None], index[:, None, :]]
        yield chunk, np.linalg.eigvalsh(blocks)


def spark(M, tol: Tolerances | None = None) -> float:
    """Smallest number of linearly dependent columns of M.

    Cardinalities are tested in increasing order and the search stops at the
    first dependent subset. Returns NO_DEPENDENT_SUBSET (+inf) when every
    column subset is independent.
    """
    tol = resolve(tol)
    M = as_matrix(M)
    n = M.shape[1]
    gram = M.T @ M
    diagonal = np.diag(gram)
    if np.any(diagonal <= tol.rank_tol * max(1.0, float(np.max(diagonal)))):
        return 1
    guard_enumeration(2 ** n - 1, 'spark')
    cutoff = tol.rank_tol * max(1.0, float(np.max(diagonal)))
    for size in range(2, n + 1):
        for chunk, spectra in subset_spectra(gram, itertools.combinations(range(n), size)):
            dependent = np.flatnonzero(spectra[:, 0] < cutoff)
            if dependent.size:
                logger.debug(f"spark {size}: first dependent subset {chunk[dependent[0]]}")
                return size
    return NO_DEPENDENT_SUBSET
