"""
Dictionaries: normalized atoms, cached Gram matrix, coherence, the
worst-case constructions and projected dictionaries Ã / B̃.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np
from scipy.linalg import block_diag, null_space

from .exceptions import InvalidParams, NotNormalized, ZeroColumn
from .linalg import (
    NO_DEPENDENT_SUBSET,
    Tolerances,
    as_matrix,
    kernel_basis,
    project_complement,
    resolve,
    spark,
    symmetric_eig,
)

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-8
GRAM_MATCH_TOL = 1e-9


class Variant(str, Enum):
    """Greedy variant; also selects C̃ = Ã (OMP) or C̃ = B̃ (OLS)."""
    OMP = 'omp'
    OLS = 'ols'


@dataclass(frozen=True)
class SupportSet:
    """Strictly increasing tuple of column indices."""
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in indices):
            raise InvalidParams(f"support indices must be non-negative: {indices}")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise InvalidParams(f"support indices must be strictly increasing without duplicates: {indices}")
        object.__setattr__(self, 'indices', indices)

    @classmethod
    def of(cls, values: Iterable[int] = ()) -> 'SupportSet':
        """Build a support from any iterable; duplicates are rejected."""
        values = [int(v) for v in values]
        if len(set(values)) != len(values):
            raise InvalidParams(f"duplicate support indices: {values}")
        return cls(tuple(sorted(values)))

    @classmethod
    def parse(cls, text: str | None) -> 'SupportSet':
        """Parse a comma separated index list such as "0,3,4"; blank means empty."""
        if text is None or not text.strip():
            return cls()
        try:
            return cls.of(int(token) for token in text.split(',') if token.strip())
        except ValueError as exc:
            if isinstance(exc, InvalidParams):
                raise
            raise InvalidParams(f"cannot parse support list {text!r}") from exc

    def validate(self, n: int) -> 'SupportSet':
        if self.indices and self.indices[-1] >= n:
            raise InvalidParams(f"support index {self.indices[-1]} out of range for {n} atoms")
        return self

    def complement(self, n: int) -> 'SupportSet':
        members = set(self.indices)
        return SupportSet(tuple(i for i in range(n) if i not in members))

    def good_bad(self, q_star: 'SupportSet') -> tuple[int, int]:
        """Return (g, b): members inside and outside the true support."""
        good = len(self & q_star)
        return good, len(self) - good

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, index):
        return index in self.indices

    def __or__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(tuple(sorted(set(self.indices) | set(other))))

    def __and__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(tuple(sorted(set(self.indices) & set(other))))

    def __sub__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(tuple(sorted(set(self.indices) - set(other))))

    def __str__(self):
        return ','.join(str(i) for i in self.indices)


class Dictionary:
    """Unit-norm atoms with their Gram matrix, both read-only.

    Use build() to construct one; the constructor assumes validated atoms.
    """

    def __init__(self, atoms: np.ndarray):
        atoms = np.array(atoms, dtype=float)
        gram = atoms.T @ atoms
        gram = (gram + gram.T) / 2.0
        atoms.flags.writeable = False
        gram.flags.writeable = False
        self.atoms = atoms
        self.gram = gram
        self._kernels: dict[float, np.ndarray] = {}
        self._sparks: dict[float, float] = {}

    @property
    def m(self) -> int:
        return self.atoms.shape[0]

    @property
    def n(self) -> int:
        return self.atoms.shape[1]

    def atom(self, index: int) -> np.ndarray:
        return self.atoms[:, index]

    def sub(self, indices: Iterable[int]) -> np.ndarray:
        return self.atoms[:, list(indices)]

    def kernel(self, tol: Tolerances | None = None) -> np.ndarray:
        tol = resolve(tol)
        if tol.rank_tol not in self._kernels:
            self._kernels[tol.rank_tol] = kernel_basis(self.atoms, tol)
        return self._kernels[tol.rank_tol]

    def spark(self, tol: Tolerances | None = None) -> float:
        tol = resolve(tol)
        if tol.rank_tol not in self._sparks:
            self._sparks[tol.rank_tol] = spark(self.atoms, tol)
        return self._sparks[tol.rank_tol]

    def __repr__(self):
        return f"<Dictionary {self.m}x{self.n}>"


def build(raw, normalize: bool = False) -> Dictionary:
    """Validate raw atoms and wrap them in a Dictionary.

    Args:
        raw: m×n matrix of atoms
        normalize: rescale every column to unit norm; otherwise columns must
            already be unit norm within 1e-8

    Raises:
        ZeroColumn: a column has zero norm
        NotNormalized: a column norm deviates from 1 and normalize is unset
    """
    atoms = as_matrix(raw, 'dictionary')
    norms = np.linalg.norm(atoms, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroColumn(f"column {int(zero[0])} has zero norm")
    if not normalize:
        deviation = np.abs(norms - 1.0)
        worst = int(np.argmax(deviation))
        if deviation[worst] > NORMALIZATION_TOL:
            raise NotNormalized(
                f"column {worst} has norm {norms[worst]:.12g}; pass normalize to rescale"
            )
    return Dictionary(atoms / norms)


def mutual_coherence(D: Dictionary) -> float:
    """Largest absolute inner product between two distinct atoms."""
    if D.n < 2:
        raise InvalidParams("mutual coherence needs at least two atoms")
    off = np.abs(D.gram)
    np.fill_diagonal(off, 0.0)
    return min(float(np.max(off)), 1.0)


class Construction(str, Enum):
    EQUIANGULAR = 'equiangular'
    EXAMPLE1 = 'example1'
    LEMMA1 = 'lemma1'
    EXAMPLE2 = 'example2'
    EXAMPLE3 = 'example3'
    IDENTITY = 'identity'
    RANDOM = 'random'
    RANDOM_KERNEL = 'random_kernel'


@dataclass
class GeneratorMetadata:
    construction: str
    params: dict
    k: int | None = None
    g: int | None = None
    b: int | None = None
    mu: float | None = None
    canonical_q: SupportSet | None = None
    canonical_q_star: SupportSet | None = None
    notes: dict = field(default_factory=dict)


def _integer(name: str, value, minimum: int) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise InvalidParams(f"{name} must be an integer (got {value!r})")
    value = int(value)
    if value < minimum:
        raise InvalidParams(f"{name} must be >= {minimum} (got {value})")
    return value


def _check_kgb(k, g, b) -> tuple[int, int, int]:
    k = _integer('k', k, 1)
    g = _integer('g', g, 0)
    b = _integer('b', b, 0)
    if g >= k:
        raise InvalidParams(f"g < k is required (got g={g}, k={k})")
    return k, g, b


def _factor_gram(target: np.ndarray, rows: int) -> np.ndarray:
    """Return a rows×N matrix A with AᵀA = target, as ΥUᵀ from G = UΛUᵀ."""
    values, vectors = symmetric_eig(target)
    if values[rows - 1] < -GRAM_MATCH_TOL or (rows < len(values) and np.max(np.abs(values[rows:])) > GRAM_MATCH_TOL):
        raise InvalidParams(f"target Gram is not positive semidefinite of rank {rows}: eigenvalues {values}")
    scale = np.sqrt(np.clip(values[:rows], 0.0, None))
    return scale[:, None] * vectors[:, :rows].T


def _equiangular(k, g, b):
    k, g, b = _check_kgb(k, g, b)
    size = 2 * k - g + b
    mu = 1.0 / (size - 1)
    target = (1.0 + mu) * np.eye(size) - mu * np.ones((size, size))
    q = SupportSet(tuple(range(g + b)))
    q_star = SupportSet(tuple(range(g)) + tuple(range(g + b, k + b)))
    meta = GeneratorMetadata('equiangular', {'k': k, 'g': g, 'b': b}, k, g, b,
                             canonical_q=q, canonical_q_star=q_star)
    return _factor_gram(target, size - 1), target, meta


def _example1(n, gamma):
    n = _integer('n', n, 3)
    gamma = float(gamma)
    if not 0.0 < abs(gamma) < 1.0 / (n - 2):
        raise InvalidParams(f"0 < |gamma| < 1/(n-2) = {1.0 / (n - 2):.6g} is required (got {gamma})")
    alpha = 0.5 * gamma ** 2 * (n - 2) - 1.0
    beta = -gamma / 2.0
    target = np.eye(n)
    target[:n - 2, n - 2:] = beta
    target[n - 2:, :n - 2] = beta
    target[n - 2, n - 1] = target[n - 1, n - 2] = alpha
    meta = GeneratorMetadata('example1', {'n': n, 'gamma': gamma}, 2, 1, 0,
                             canonical_q=SupportSet((n - 2,)),
                             canonical_q_star=SupportSet((n - 2, n - 1)),
                             notes={'alpha': alpha, 'beta': beta})
    return _factor_gram(target, n - 1), target, meta


def _lemma1(k, g, b):
    k, g, b = _check_kgb(k, g, b)
    d = k - g
    # d == 1 yields [[1, 1], [0, 0]]: two identical columns
    block = np.zeros((d + 1, d + 1))
    block[:d, :d] = np.eye(d)
    block[:d, d] = 1.0 / d
    block[d, d] = math.sqrt((d - 1) / d)
    atoms = block_diag(np.eye(g + b), block) if g + b else block
    meta = GeneratorMetadata('lemma1', {'k': k, 'g': g, 'b': b}, k, g, b,
                             canonical_q=SupportSet(tuple(range(g + b))),
                             canonical_q_star=SupportSet(tuple(range(b, k + b))),
                             notes={'degenerate': d == 1})
    return atoms, atoms.T @ atoms, meta


def _example2(k, g, alpha):
    k, g, _ = _check_kgb(k, g, 0)
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidParams(f"alpha must lie in (0, 1) (got {alpha})")
    mu = alpha / (2 * k - g - 1)
    if mu > 1.0 / k:
        raise InvalidParams(f"mu = alpha/(2k-g-1) = {mu:.6g} must not exceed 1/k = {1.0 / k:.6g}")
    size = k + 1
    target = (1.0 + mu) * np.eye(size) - mu * np.ones((size, size))
    meta = GeneratorMetadata('example2', {'k': k, 'g': g, 'alpha': alpha}, k, g, 0,
                             canonical_q=SupportSet(tuple(range(g))),
                             canonical_q_star=SupportSet(tuple(range(k))),
                             notes={'design_mu': mu})
    return _factor_gram(target, size), target, meta


def _example3(k, mu):
    k = _integer('k', k, 1)
    mu = float(mu)
    if not 0.0 <= mu < 1.0:
        raise InvalidParams(f"mu must lie in [0, 1) (got {mu})")
    size = k + 1
    # a1 = e1, a2 in span(e1, e2), H = remaining standard basis vectors
    atoms = np.eye(size)
    atoms[0, 1] = mu
    atoms[1, 1] = math.sqrt(1.0 - mu ** 2)
    target = np.eye(size)
    target[0, 1] = target[1, 0] = mu
    meta = GeneratorMetadata('example3', {'k': k, 'mu': mu}, k, None, 0,
                             notes={'design_mu': mu})
    return atoms, target, meta


def _identity(n):
    n = _integer('n', n, 1)
    return np.eye(n), np.eye(n), GeneratorMetadata('identity', {'n': n})


def _random(m, n, seed=0):
    m = _integer('m', m, 1)
    n = _integer('n', n, 1)
    rng = np.random.default_rng(_integer('seed', seed, 0))
    return rng.standard_normal((m, n)), None, GeneratorMetadata('random', {'m': m, 'n': n, 'seed': seed})


def _random_kernel(n, seed=0):
    n = _integer('n', n, 3)
    rng = np.random.default_rng(_integer('seed', seed, 0))
    direction = rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], n)
    atoms = null_space(direction[None, :]).T
    meta = GeneratorMetadata('random_kernel', {'n': n, 'seed': seed},
                             notes={'kernel_direction': direction.tolist()})
    return atoms, None, meta


_GENERATORS = {
    Construction.EQUIANGULAR: _equiangular,
    Construction.EXAMPLE1: _example1,
    Construction.LEMMA1: _lemma1,
    Construction.EXAMPLE2: _example2,
    Construction.EXAMPLE3: _example3,
    Construction.IDENTITY: _identity,
    Construction.RANDOM: _random,
    Construction.RANDOM_KERNEL: _random_kernel,
}


def generate(construction: Construction | str, **params) -> tuple[Dictionary, GeneratorMetadata]:
    """Build one of the named constructions.

    Returns:
        (dictionary, metadata) where metadata records (k, g, b, μ) and the
        canonical Q / Q* layouts used by the tightness arguments

    Raises:
        InvalidParams: unknown construction, missing or out-of-domain parameters
    """
    try:
        construction = Construction(construction)
    except ValueError:
        choices = ', '.join(c.value for c in Construction)
        raise InvalidParams(f"unknown construction {construction!r} (choose from {choices})") from None
    try:
        raw, target, meta = _GENERATORS[construction](**params)
    except TypeError as exc:
        raise InvalidParams(f"{construction.value}: {exc}") from exc

    dictionary = build(raw, normalize=target is None)
    if target is not None:
        deviation = float(np.max(np.abs(dictionary.gram - target)))
        if deviation > GRAM_MATCH_TOL:
            raise InvalidParams(f"{construction.value}: Gram deviates from target by {deviation:.3e}")
    if dictionary.n >= 2:
        meta.mu = mutual_coherence(dictionary)
    logger.info(f"Generated {construction.value} {dictionary.m}x{dictionary.n} dictionary with params {meta.params}")
    return dictionary, meta


@dataclass(frozen=True)
class ProjectedDictionary:
    """Atoms projected onto the orthogonal complement of span(A_Q)."""
    base: Dictionary
    q_set: SupportSet
    a_tilde: np.ndarray
    b_tilde: np.ndarray

    def c_tilde(self, variant: Variant | str) -> np.ndarray:
        return self.a_tilde if Variant(variant) is Variant.OMP else self.b_tilde

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.a_tilde, axis=0)

    def candidates(self) -> SupportSet:
        return self.q_set.complement(self.base.n)


def projected_dictionary(D: Dictionary, Q: SupportSet, tol: Tolerances | None = None) -> ProjectedDictionary:
    """Project every atom orthogonally to span(A_Q).

    ã_i = P⊥_Q a_i (zero for i ∈ Q); b̃_i = ã_i/‖ã_i‖, or zero when
    ‖ã_i‖² falls below rank_tol.

    Raises:
        RankDeficient: A_Q is not full column rank
    """
    tol = resolve(tol)
    Q.validate(D.n)
    a_tilde = project_complement(D.sub(Q), D.atoms, tol) if len(Q) else np.array(D.atoms)
    a_tilde[:, list(Q)] = 0.0
    norms = np.linalg.norm(a_tilde, axis=0)
    nonzero = norms ** 2 >= tol.rank_tol
    nonzero[list(Q)] = False
    b_tilde = np.zeros_like(a_tilde)
    b_tilde[:, nonzero] = a_tilde[:, nonzero] / norms[nonzero]
    a_tilde.flags.writeable = False
    b_tilde.flags.writeable = False
    return ProjectedDictionary(D, Q, a_tilde, b_tilde)


def gram_submatrix_eigen(D: Dictionary, S: SupportSet) -> np.ndarray:
    """Eigenvalues of (A_S)ᵀA_S in descending order."""
    if not len(S):
        raise InvalidParams("gram_submatrix_eigen needs a non-empty support")
    S.validate(D.n)
    index = list(S)
    values, _ = symmetric_eig(D.gram[np.ix_(index, index)])
    return values


def projected_gram_expansion(D: Dictionary, R: SupportSet) -> np.ndarray:
    """⟨a_i, a_j⟩ − a_iᵀA_R(A_RᵀA_R)⁻¹A_Rᵀa_j for all i, j, from the Gram alone."""
    R.validate(D.n)
    if not len(R):
        return np.array(D.gram)
    index = list(R)
    cross = D.gram[index, :]
    return D.gram - cross.T @ np.linalg.solve(D.gram[np.ix_(index, index)], cross)


def equiangular_projection_constants(D: Dictionary, R: SupportSet, mu: float) -> tuple[float, float]:
    """Closed-form (⟨ã_i, ã_j⟩, ‖ã_i‖²) for an equiangular dictionary and i ≠ j outside R.

    With s = 1ᵀ(A_RᵀA_R)⁻¹1 these are −μ − μ²s and 1 − μ²s.
    """
    R.validate(D.n)
    if not len(R):
        return -mu, 1.0
    index = list(R)
    ones = np.ones(len(index))
    s = float(ones @ np.linalg.solve(D.gram[np.ix_(index, index)], ones))
    return -mu - mu ** 2 * s, 1.0 - mu ** 2 * s


def spark_exceeds(D: Dictionary, threshold: int, tol: Tolerances | None = None) -> bool:
    """spark(D) > threshold, treating the no-dependent-subset sentinel as +inf."""
    value = D.spark(tol)
    return value == NO_DEPENDENT_SUBSET or value > threshold
