"""
Seeded dictionary banks and coefficient draws shared by claims and sweeps.
"""
import numpy as np

from ..dictionary import Construction, Dictionary, SupportSet, generate


def draw_coefficients(rng: np.random.Generator, size: int) -> np.ndarray:
    """Magnitudes uniform in [0.5, 1.5] with random signs."""
    return rng.uniform(0.5, 1.5, size) * rng.choice([-1.0, 1.0], size)


def sparse_signal(D: Dictionary, support: SupportSet, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Return (x, y = Ax) with x drawn on the given support."""
    x = np.zeros(D.n)
    x[list(support)] = draw_coefficients(rng, len(support))
    return x, D.atoms @ x


def random_kernel_bank(size: int, n_values, seed: int) -> list[Dictionary]:
    """size dictionaries with 1-D kernels, cycling through the atom counts n_values."""
    n_values = list(n_values)
    return [
        generate(Construction.RANDOM_KERNEL, n=n_values[index % len(n_values)], seed=seed + index)[0]
        for index in range(size)
    ]


def cells(n: int, k_max: int, b_max: int, predicate=None) -> list[tuple[int, int, int]]:
    """Every (k, g, b) with 1 <= k <= k_max, g < k, b <= b_max and k + b < n that passes predicate."""
    found = []
    for k in range(1, k_max + 1):
        for g in range(k):
            for b in range(b_max + 1):
                if k + b < n and (predicate is None or predicate(k, g, b)):
                    found.append((k, g, b))
    return found
