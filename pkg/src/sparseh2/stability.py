"""Stability selection over random half-subsamples.

Each subsample of ``floor(n/2)`` rows (drawn without replacement, with its
own substream) is screened down to ``floor(n/2)`` columns, then a Lasso path
is fitted on the screened matrix. A column counts as selected in that
subsample when it is active at the smallest penalty of the path. Selection
frequencies do not depend on the threshold, so a threshold sweep only
re-thresholds one frequency table.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import parallel
from .errors import EmptySelection, ValidationError
from .lasso import lasso_path
from .screening import sis_screen

DEFAULT_THRESHOLD = 0.76
# frequencies are multiples of 1/n_subsamples; absorbs round-off in threshold grids
_FREQ_EPS = 1e-9


@dataclass(frozen=True)
class StabilityConfig:
    n_subsamples: int = 50
    subsample_fraction: float = 0.5
    threshold: float = DEFAULT_THRESHOLD
    seed: int = 0
    n_lambdas: int = 100
    lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.n_subsamples < 2:
            raise ValidationError(f"n_subsamples must be >= 2, got {self.n_subsamples}")
        if not 0.0 < self.subsample_fraction < 1.0:
            raise ValidationError("subsample_fraction must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class SelectionResult:
    frequencies: np.ndarray  # one entry per column of Z
    threshold: float
    n_subsamples: int

    @property
    def selected(self) -> np.ndarray:
        return np.flatnonzero(self.frequencies >= self.threshold - _FREQ_EPS)

    @property
    def N_final(self) -> int:
        return int(self.selected.size)

    def at(self, threshold: float) -> "SelectionResult":
        return replace(self, threshold=float(threshold))


def _subsample_active(Y, Z, size, screen_N_max, cfg, index):
    rng = parallel.substream(cfg.seed, parallel.SUBSAMPLES, index)
    rows = np.sort(rng.choice(Y.shape[0], size=size, replace=False))
    Y_sub = Y[rows]
    Z_sub = Z[rows]
    kept = sis_screen(Y_sub, Z_sub, screen_N_max).kept
    path = lasso_path(
        Y_sub, Z_sub[:, kept], n_lambdas=cfg.n_lambdas, lambda_min_ratio=cfg.lambda_min_ratio
    )
    return kept[path.last.active_set]


def selection_frequencies(
    Y: np.ndarray,
    Z: np.ndarray,
    cfg: StabilityConfig = StabilityConfig(),
    screen_N_max: int | None = None,
    workers: int | None = 1,
) -> SelectionResult:
    """Fraction of subsamples in which each column is active at the smallest penalty.

    ``screen_N_max`` defaults to the subsample size.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if n < 4:
        raise ValidationError(f"stability selection needs n >= 4, got {n}")
    size = int(np.floor(n * cfg.subsample_fraction))
    N_max = size if screen_N_max is None else screen_N_max
    actives = parallel.pmap(
        lambda i: _subsample_active(Y, Z, size, N_max, cfg, i), range(cfg.n_subsamples), workers
    )
    counts = np.zeros(Z.shape[1], dtype=np.int64)
    for active in actives:
        counts[active] += 1
    return SelectionResult(
        frequencies=counts / cfg.n_subsamples,
        threshold=cfg.threshold,
        n_subsamples=cfg.n_subsamples,
    )


def stability_select(
    Y: np.ndarray,
    Z: np.ndarray,
    cfg: StabilityConfig = StabilityConfig(),
    screen_N_max: int | None = None,
    workers: int | None = 1,
) -> SelectionResult:
    """Selection frequencies plus the thresholded set.

    Raises:
        EmptySelection: no column reaches the threshold; the exception carries
            the frequency table as ``result``.
    """
    result = selection_frequencies(Y, Z, cfg, screen_N_max, workers)
    if result.N_final == 0:
        raise EmptySelection(
            f"no column selected in at least {cfg.threshold:.2f} of the subsamples", result=result
        )
    return result
