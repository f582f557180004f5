"""Sure independence screening: keep the columns most correlated with Y."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class ScreenResult:
    kept: np.ndarray  # column indices, descending score, ties by ascending index
    scores: np.ndarray


def screening_scores(Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """``C_j = |sum_i Y_i Z_ij|`` for every column."""
    Y = np.asarray(Y, dtype=float)
    if Z.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"Y has {Y.shape[0]} entries, Z has {Z.shape[0]} rows")
    return np.abs(Z.T @ Y)


def sis_screen(Y: np.ndarray, Z: np.ndarray, N_max: int | None = None) -> ScreenResult:
    """Keep the ``N_max`` columns with the largest ``C_j`` (default ``N_max = n``)."""
    scores = screening_scores(Y, Z)
    N = scores.shape[0]
    N_max = Z.shape[0] if N_max is None else N_max
    if N_max < 1:
        raise ValueError(f"N_max must be >= 1, got {N_max}")
    k = min(N_max, N)
    # stable sort on the negated scores keeps ascending index among ties
    order = np.argsort(-scores, kind="stable")[:k]
    return ScreenResult(kept=order, scores=scores[order])
