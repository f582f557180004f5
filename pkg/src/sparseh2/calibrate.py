"""Threshold calibration by simulation and the selection-versus-no-selection rule.

The decision rule sweeps the stability threshold over a grid (16 values from
0.70 to 0.85 by default), computes a bootstrap interval at each threshold,
and averages over thresholds the number of intervals that intersect each
one. A mean above the cutoff (10) means the estimate is stable in the
threshold and the selection-based estimator is used; otherwise the
estimate on all columns is returned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from . import parallel
from .bootstrap import DEFAULT_K, BootstrapResult
from .data import TraitParams
from .errors import NumericalError, ValidationError
from .mle import HeritabilityFit, Mode, fit_heritability, kinship_eigen
from .pipeline import Prepared, estimate, prepare
from .simulate import simulate_effects, simulate_phenotype, solve_sigma_e
from .stability import DEFAULT_THRESHOLD, SelectionResult, StabilityConfig, selection_frequencies

log = logging.getLogger(__name__)

DEFAULT_SWEEP = tuple(round(0.70 + 0.01 * i, 2) for i in range(16))
DEFAULT_CUTOFF = 10.0


@dataclass(frozen=True)
class ThresholdEstimate:
    threshold: float
    eta_hat: float
    ci_low: float
    ci_high: float
    N_final: int

    @property
    def empty(self) -> bool:
        return self.N_final == 0


@dataclass(frozen=True)
class ThresholdSweep:
    thresholds: tuple[float, ...]
    per_threshold: tuple[ThresholdEstimate, ...]
    overlap_count: float

    def __post_init__(self):
        t = np.asarray(self.thresholds)
        if t.size and np.any(np.diff(t) <= 0):
            raise ValidationError("sweep thresholds must be strictly increasing")
        if len(self.per_threshold) != t.size:
            raise ValidationError("one estimate per threshold required")


@dataclass(frozen=True)
class Decision:
    verdict: Mode
    overlap_count: float
    cutoff: float = DEFAULT_CUTOFF
    flags: tuple[str, ...] = ()


class DecisionOutcome(NamedTuple):
    decision: Decision
    fit: HeritabilityFit
    bootstrap: BootstrapResult
    sweep: ThresholdSweep
    selection: SelectionResult
    threshold: float | None  # threshold behind the returned fit, None for the no-selection fit


def overlap_count(intervals: Sequence[tuple[float, float]]) -> float:
    """Mean over intervals of the number of intervals (itself included) intersecting it."""
    iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
    if iv.shape[0] < 2:
        raise ValueError("need at least two intervals")
    lo, hi = iv[:, 0], iv[:, 1]
    meets = (lo[:, None] <= hi[None, :]) & (lo[None, :] <= hi[:, None])
    return float(meets.sum(axis=1).mean())


def verdict(count: float, cutoff: float = DEFAULT_CUTOFF) -> Mode:
    return Mode.ESTHER if count > cutoff else Mode.HILMM


def threshold_sweep(
    data: Prepared,
    selection: SelectionResult,
    thresholds: Sequence[float] = DEFAULT_SWEEP,
    K: int = DEFAULT_K,
    seed: int = 0,
    workers: int | None = 1,
) -> tuple[ThresholdSweep, dict]:
    """Estimate and interval at every threshold from one frequency table.

    A threshold that selects nothing is recorded as ``eta_hat = 0`` with the
    degenerate interval ``[0, 0]``. Returns the sweep and the fitted
    ``(fit, bootstrap)`` pairs keyed by threshold.
    """
    rows = []
    fits = {}
    for t in thresholds:
        cols = selection.at(t).selected
        if cols.size == 0:
            rows.append(ThresholdEstimate(float(t), 0.0, 0.0, 0.0, 0))
            continue
        _, fit, boot = estimate(data, cols, Mode.ESTHER, K, seed, workers)
        fits[float(t)] = (fit, boot)
        rows.append(ThresholdEstimate(float(t), fit.eta_hat, boot.ci_low, boot.ci_high, int(cols.size)))
    count = overlap_count([(r.ci_low, r.ci_high) for r in rows])
    sweep = ThresholdSweep(tuple(float(t) for t in thresholds), tuple(rows), count)
    return sweep, fits


def decide(
    Y: np.ndarray,
    Z: np.ndarray,
    X: np.ndarray | None = None,
    thresholds: Sequence[float] = DEFAULT_SWEEP,
    cutoff: float = DEFAULT_CUTOFF,
    threshold: float = DEFAULT_THRESHOLD,
    stability: StabilityConfig = StabilityConfig(),
    K: int = DEFAULT_K,
    seed: int = 0,
    workers: int | None = 1,
) -> DecisionOutcome:
    """Choose between the selection-based and the no-selection estimator.

    ``threshold`` is the stability threshold whose fit is returned when the
    verdict favours selection.
    """
    data = prepare(Y, Z, X, workers)
    stab = replace(stability, seed=seed)
    selection = selection_frequencies(data.Y, data.Z, stab, workers=workers)
    sweep, fits = threshold_sweep(data, selection, thresholds, K, seed, workers)
    flags = []
    if all(r.empty for r in sweep.per_threshold):
        flags.append("all_thresholds_empty")
        chosen = Mode.HILMM
    else:
        chosen = verdict(sweep.overlap_count, cutoff)
    chosen_threshold = None
    if chosen is Mode.ESTHER:
        key = float(threshold)
        if key not in fits:
            cols = selection.at(threshold).selected
            if cols.size:
                _, fit, boot = estimate(data, cols, Mode.ESTHER, K, seed, workers)
                fits[key] = (fit, boot)
        if key in fits:
            fit, boot = fits[key]
            chosen_threshold = key
        else:
            flags.append("empty_selection_at_threshold")
            chosen = Mode.HILMM
    if chosen is Mode.HILMM:
        _, fit, boot = estimate(data, None, Mode.HILMM, K, seed, workers)
    decision = Decision(verdict=chosen, overlap_count=sweep.overlap_count, cutoff=cutoff, flags=tuple(flags))
    return DecisionOutcome(decision, fit, boot, sweep, selection.at(threshold), chosen_threshold)


@dataclass(frozen=True)
class CalibrationCell:
    eta: float
    q: float
    threshold: float
    mean_abs_error: float  # nan when every replicate failed
    n_ok: int
    n_failed: int


@dataclass(frozen=True)
class CalibrationResult:
    best_threshold: float
    cells: tuple[CalibrationCell, ...] = field(repr=False)
    worst_error: dict = field(default_factory=dict)  # threshold -> max over (eta, q) of mean error


def _calibration_replicate(Z, eta, q, sigma_u2, thresholds, stability, seed):
    n, N = Z.shape
    params = TraitParams(q=q, sigma_u2=sigma_u2, sigma_e2=solve_sigma_e(N, q, sigma_u2, eta))
    u, _ = simulate_effects(N, params, parallel.substream(seed, parallel.EFFECTS))
    Y, _ = simulate_phenotype(Z, u, params.sigma_e2, parallel.substream(seed, parallel.NOISE))
    data = prepare(Y, Z)
    selection = selection_frequencies(data.Y, data.Z, replace(stability, seed=seed))
    out = []
    for t in thresholds:
        cols = selection.at(t).selected
        if cols.size == 0:
            out.append(np.nan)
            continue
        try:
            out.append(fit_heritability(kinship_eigen(data.Z[:, cols], data.Y)).eta_hat)
        except NumericalError as exc:
            log.debug("calibration fit failed: %s", exc)
            out.append(np.nan)
    return np.asarray(out)


def calibrate_threshold(
    Z: np.ndarray,
    eta_grid: Sequence[float],
    q_grid: Sequence[float],
    thresholds: Sequence[float],
    reps: int,
    seed: int = 0,
    sigma_u2: float = 1.0,
    stability: StabilityConfig = StabilityConfig(),
    workers: int | None = 1,
) -> CalibrationResult:
    """Pick the threshold with the smallest worst-case mean ``|eta - eta_hat|``.

    For every ``(eta, q)`` cell, ``reps`` phenotypes are simulated on ``Z``;
    each gets one stability run whose frequency table serves all thresholds.
    A replicate that selects nothing at a threshold counts as failed there.
    """
    if not len(eta_grid) or not len(q_grid) or not len(thresholds):
        raise ValidationError("calibration grids must be non-empty")
    if reps < 2:
        raise ValidationError("calibration needs reps >= 2")
    Z = np.asarray(Z, dtype=float)
    thresholds = [float(t) for t in thresholds]
    jobs = [(i, eta, q, r) for i, (eta, q, r) in enumerate(
        (eta, q, r) for eta in eta_grid for q in q_grid for r in range(reps)
    )]

    def job(item):
        i, eta, q, _ = item
        rep_seed = int(parallel.substream(seed, parallel.CALIBRATION, i).integers(2**62))
        return _calibration_replicate(Z, eta, q, sigma_u2, thresholds, stability, rep_seed)

    estimates = parallel.pmap(job, jobs, workers)
    cells = []
    worst = {t: 0.0 for t in thresholds}
    for eta in eta_grid:
        for q in q_grid:
            block = np.array([est for (_, e, qq, _), est in zip(jobs, estimates) if e == eta and qq == q])
            for k, t in enumerate(thresholds):
                col = block[:, k]
                ok = col[np.isfinite(col)]
                err = float(np.mean(np.abs(eta - ok))) if ok.size else float("nan")
                cells.append(CalibrationCell(float(eta), float(q), t, err, int(ok.size), int(col.size - ok.size)))
                worst[t] = max(worst[t], err if ok.size else np.inf)
    best = min(thresholds, key=lambda t: (worst[t], t))
    return CalibrationResult(best_threshold=best, cells=tuple(cells), worst_error=worst)
