"""Whiten, resample, recolor bootstrap for the heritability estimate.

The rotated observations have diagonal covariance ``Gamma`` with
``Gamma_ii = sigma2 * (eta * lambda_i + 1 - eta)``. They are whitened with
the fitted ``Gamma``, resampled with replacement, recolored, and refitted.
Bounds of the 95% interval are the ``floor(0.025 K)``-th and
``floor(0.975 K)``-th smallest replicate estimates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import parallel
from .errors import NumericalError
from .mle import HeritabilityFit, KinshipEigen, fit_heritability

log = logging.getLogger(__name__)

DEFAULT_K = 80
MAX_DROPPED = 0.10

RECOLOR_SQRT = "sqrt"
RECOLOR_FULL = "full"  # multiply by Gamma itself; kept as a compatibility variant


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    replicate_etas: np.ndarray  # sorted ascending
    ci_low: float
    ci_high: float
    variance: float
    K: int
    dropped: int = 0

    @property
    def width(self) -> float:
        return self.ci_high - self.ci_low


def fitted_covariance(ke: KinshipEigen, fit: HeritabilityFit) -> np.ndarray:
    """Diagonal of the fitted covariance of the rotated observations."""
    return fit.sigma2_hat * (fit.eta_hat * ke.lambdas + 1.0 - fit.eta_hat)


def whiten(ke: KinshipEigen, fit: HeritabilityFit) -> np.ndarray:
    return ke.rotated / np.sqrt(fitted_covariance(ke, fit))


def recolor(white: np.ndarray, gamma: np.ndarray, scheme: str = RECOLOR_SQRT) -> np.ndarray:
    if scheme == RECOLOR_SQRT:
        return white * np.sqrt(gamma)
    if scheme == RECOLOR_FULL:
        return white * gamma
    raise ValueError(f"unknown recolor scheme {scheme!r}")


def order_statistic_bounds(values: np.ndarray) -> tuple[float, float]:
    """95% bounds as the floor(0.025K)-th and floor(0.975K)-th smallest values (1-based)."""
    ordered = np.sort(values)
    K = ordered.size
    lo = max(int(np.floor(0.025 * K)), 1)
    hi = max(int(np.floor(0.975 * K)), 1)
    return float(ordered[lo - 1]), float(ordered[hi - 1])


def bootstrap_ci(
    ke: KinshipEigen,
    fit: HeritabilityFit,
    K: int = DEFAULT_K,
    seed: int = 0,
    recolor_scheme: str = RECOLOR_SQRT,
    workers: int | None = 1,
) -> BootstrapResult:
    """Bootstrap the heritability estimate ``fit`` obtained from ``ke``.

    Replicate ``k`` draws its resampling indices from its own substream.
    Replicates whose refit fails are dropped; more than 10% dropped raises
    ``NumericalError``.
    """
    if K < 20:
        raise ValueError(f"need K >= 20 bootstrap replicates, got {K}")
    gamma = fitted_covariance(ke, fit)
    white = ke.rotated / np.sqrt(gamma)
    n = ke.n
    _ = ke._grid  # build once before replicates share it

    def replicate(k):
        rng = parallel.substream(seed, parallel.BOOTSTRAP, k)
        idx = rng.integers(0, n, size=n)
        sample = recolor(white[idx], gamma, recolor_scheme)
        try:
            return fit_heritability(ke.with_rotated(sample), fit.mode).eta_hat
        except NumericalError as exc:
            log.debug("bootstrap replicate %d dropped: %s", k, exc)
            return np.nan

    etas = np.asarray(parallel.pmap(replicate, range(K), workers), dtype=float)
    ok = etas[np.isfinite(etas)]
    dropped = K - ok.size
    if dropped > MAX_DROPPED * K:
        raise NumericalError(f"{dropped} of {K} bootstrap refits failed")
    lo, hi = order_statistic_bounds(ok)
    return BootstrapResult(
        replicate_etas=np.sort(ok),
        ci_low=lo,
        ci_high=hi,
        variance=float(np.var(ok, ddof=1)) if ok.size > 1 else 0.0,
        K=K,
        dropped=int(dropped),
    )
