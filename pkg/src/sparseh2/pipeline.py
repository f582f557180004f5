"""End-to-end estimation: projection, selection, likelihood fit, bootstrap.

Three estimators share the same machinery:

* ``esther``: stability selection, then the fit on the selected columns;
* ``hilmm``: the fit on every column, no selection;
* ``oracle``: the fit on a known support.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .bootstrap import DEFAULT_K, BootstrapResult, bootstrap_ci
from .errors import DimensionMismatch, EmptySelection, ValidationError
from .mle import HeritabilityFit, KinshipEigen, Mode, fit_heritability, kinship_eigen
from .projection import build_projector, project
from .stability import SelectionResult, StabilityConfig, selection_frequencies


@dataclass(frozen=True)
class PipelineConfig:
    mode: Mode = Mode.ESTHER
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    support: tuple[int, ...] | None = None
    screen_N_max: int | None = None
    bootstrap_K: int = DEFAULT_K
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.ORACLE and not self.support:
            raise ValidationError("oracle mode needs a non-empty support")
        if self.support is not None:
            object.__setattr__(self, "support", tuple(int(j) for j in self.support))


class RunResult(NamedTuple):
    fit: HeritabilityFit
    bootstrap: BootstrapResult
    selection: SelectionResult | None
    timings: dict


@dataclass(frozen=True, eq=False)
class Prepared:
    """Observations and genotypes after fixed effects are removed."""

    Y: np.ndarray
    Z: np.ndarray
    d: int


def prepare(Y: np.ndarray, Z: np.ndarray, X: np.ndarray | None = None, workers: int | None = 1) -> Prepared:
    """Project ``Y`` and ``Z`` onto the orthogonal complement of ``[1, X]``.

    The intercept is always part of the fixed effects. Centering alone would
    leave ``1/sqrt(n)`` as a null direction of the kinship matrix carrying
    no observation, and the likelihood would then grow without bound as
    ``eta`` approaches 1.
    """
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z)
    n = Y.shape[0]
    if Z.shape[0] != n:
        raise DimensionMismatch(f"Y has {n} entries, Z has {Z.shape[0]} rows")
    design = np.ones((n, 1))
    if X is not None and np.asarray(X).size:
        X = np.asarray(X, dtype=float).reshape(n, -1) if np.asarray(X).shape[0] == n else None
        if X is None:
            raise DimensionMismatch(f"fixed effects do not have {n} rows")
        design = np.column_stack([design, X])
    P = build_projector(design)
    Yt, Zt = project(P, Y, Z, workers)
    if np.linalg.norm(Yt) <= 1e-12 * max(np.linalg.norm(Y), np.finfo(float).tiny):
        # Y lies in the span of the fixed effects; keep the round-off out of the selection
        Yt = np.zeros_like(Yt)
    return Prepared(Y=Yt, Z=Zt, d=P.d)


def estimate(
    data: Prepared,
    columns: np.ndarray | None,
    mode: Mode,
    K: int = DEFAULT_K,
    seed: int = 0,
    workers: int | None = 1,
) -> tuple[KinshipEigen, HeritabilityFit, BootstrapResult]:
    """Likelihood fit and bootstrap on a column subset (``None``: all columns)."""
    Z_sel = data.Z if columns is None else data.Z[:, columns]
    ke = kinship_eigen(Z_sel, data.Y)
    fit = fit_heritability(ke, mode)
    boot = bootstrap_ci(ke, fit, K=K, seed=seed, workers=workers)
    return ke, fit, boot


def run(
    Y: np.ndarray,
    Z: np.ndarray,
    X: np.ndarray | None = None,
    cfg: PipelineConfig = PipelineConfig(),
    workers: int | None = 1,
) -> RunResult:
    """Estimate heritability with its bootstrap interval.

    ``cfg.seed`` seeds both the subsampling and the bootstrap (on distinct
    streams); the seed inside ``cfg.stability`` is ignored.

    Raises:
        EmptySelection: in ``esther`` mode when nothing reaches the threshold.
        DegenerateLikelihood: when the likelihood cannot be evaluated.
    """
    timings = {}
    t0 = time.perf_counter()
    data = prepare(Y, Z, X, workers)
    timings["prepare"] = time.perf_counter() - t0
    selection = None
    if cfg.mode is Mode.ESTHER:
        t0 = time.perf_counter()
        stab = replace(cfg.stability, seed=cfg.seed)
        selection = selection_frequencies(data.Y, data.Z, stab, cfg.screen_N_max, workers)
        timings["selection"] = time.perf_counter() - t0
        columns = selection.selected
        if columns.size == 0:
            raise EmptySelection(
                f"no column selected at threshold {cfg.stability.threshold:.2f}", result=selection
            )
    elif cfg.mode is Mode.ORACLE:
        columns = np.asarray(sorted(set(cfg.support)), dtype=np.intp)
        if columns.max() >= data.Z.shape[1]:
            raise DimensionMismatch(f"support index {columns.max()} out of range")
    else:
        columns = None
    t0 = time.perf_counter()
    _, fit, boot = estimate(data, columns, cfg.mode, cfg.bootstrap_K, cfg.seed, workers)
    timings["estimate"] = time.perf_counter() - t0
    return RunResult(fit=fit, bootstrap=boot, selection=selection, timings=timings)
