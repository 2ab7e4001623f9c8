"""Small dense linear-algebra and sampling kernel.

Matrices and vectors are plain ``numpy`` arrays.  Random state is always
passed in explicitly as a ``numpy.random.Generator``; :func:`make_rng`
builds one from an integer seed plus optional stream keys on top of the
counter-based Philox bit generator, so independent streams can be split
off deterministically (e.g. one per replication).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite

PIVOT_FLOOR = 1e-12
SYMMETRY_RTOL = 1e-10


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a reproducible generator for stream ``(seed, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def cholesky(m) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == m``.

    Raises NotPositiveDefinite when ``m`` is not symmetric (relative
    tolerance 1e-10) or any pivot ``L[j, j]**2`` falls to 1e-12 or below.
    """
    m = _as_square(m)
    scale = max(np.abs(m).max(), 1.0) if m.size else 1.0
    if m.size and np.abs(m - m.T).max() > SYMMETRY_RTOL * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(L) ** 2
    if pivots.size and not np.all(pivots > PIVOT_FLOOR):
        j = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {pivots[j]:.3e} at index {j} is below {PIVOT_FLOOR}")
    return L


def solve_spd(m, rhs) -> np.ndarray:
    """Solve ``m x = rhs`` for symmetric positive definite ``m``."""
    L = cholesky(m)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != L.shape[0]:
        raise DimensionMismatch(f"rhs has length {rhs.shape[0]}, matrix is {L.shape[0]}x{L.shape[0]}")
    return scipy.linalg.cho_solve((L, True), rhs, check_finite=False)


def sample_mvn(mean, chol_lower, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``mean + L z`` with ``z`` standard normal.

    With ``size=None`` a single vector is returned, otherwise an array of
    shape ``(size, p)`` with one draw per row.
    """
    mean = np.asarray(mean, dtype=float)
    L = np.asarray(chol_lower, dtype=float)
    if mean.ndim != 1 or L.shape != (mean.size, mean.size):
        raise DimensionMismatch(f"mean has length {mean.size} but factor has shape {L.shape}")
    if size is None:
        return mean + L @ rng.standard_normal(mean.size)
    z = rng.standard_normal((int(size), mean.size))
    return mean + z @ L.T
