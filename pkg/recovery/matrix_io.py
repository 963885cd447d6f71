"""
Plain-text CSV format for matrices and vectors.

One matrix row per line, comma separated, with an optional leading comment
line "# rows cols". Values are written with 17 significant digits so a
read/write round trip is lossless.
"""
import logging
import re
from pathlib import Path

import numpy as np

from .exceptions import InvalidParams

logger = logging.getLogger(__name__)

HEADER_PATTERN = re.compile(r'^\s*#\s*(\d+)\s+(\d+)\s*$')


def _declared_shape(path: Path) -> tuple[int, int] | None:
    with path.open() as handle:
        first = handle.readline()
    match = HEADER_PATTERN.match(first)
    if not match:
        return None
    return int(match.group(1)), int(match.group(2))


def read_matrix(path) -> np.ndarray:
    """Load a matrix CSV file.

    Raises:
        InvalidParams: if the file is missing, empty, non-numeric, contains
            non-finite values or disagrees with its "# rows cols" header
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidParams(f"matrix file not found: {path}")
    try:
        matrix = np.loadtxt(path, delimiter=',', comments='#', ndmin=2, dtype=float)
    except ValueError as exc:
        raise InvalidParams(f"{path}: {exc}") from exc
    if matrix.size == 0:
        raise InvalidParams(f"{path}: no matrix entries")
    if not np.all(np.isfinite(matrix)):
        raise InvalidParams(f"{path}: NaN or infinite entries")
    declared = _declared_shape(path)
    if declared is not None and declared != matrix.shape:
        raise InvalidParams(f"{path}: header declares shape {declared}, data has shape {matrix.shape}")
    logger.debug(f"Read {matrix.shape[0]}x{matrix.shape[1]} matrix from {path}")
    return matrix


def read_vector(path) -> np.ndarray:
    """Load a vector stored either as a single row or as a single column."""
    matrix = read_matrix(path)
    if min(matrix.shape) != 1:
        raise InvalidParams(f"{path}: expected a single row or column, got shape {matrix.shape}")
    return matrix.ravel()


def write_matrix(path, matrix) -> Path:
    path = Path(path)
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = matrix.shape
    np.savetxt(path, matrix, delimiter=',', fmt='%.17g', header=f'{rows} {cols}', comments='# ')
    return path


def write_vector(path, vector) -> Path:
    """Write a vector as a single column."""
    return write_matrix(path, np.asarray(vector, dtype=float).reshape(-1, 1))
