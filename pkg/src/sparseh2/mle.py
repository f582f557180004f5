"""Maximum-likelihood heritability from the kinship eigenstructure.

With ``R = Z Z' / N`` diagonalized as ``U R U' = diag(lambda)`` and
``Yt = U' Y``, the Gaussian model ``Y ~ N(0, sigma2 (eta R + (1 - eta) I))``
has independent coordinates with variances ``sigma2 * (eta (lambda_i - 1) + 1)``.
Profiling out ``sigma2`` leaves

    L(eta) = -log(mean(Yt**2 / D)) - mean(log D),   D = eta (lambda - 1) + 1,

which is maximized over ``[0, 1 - 1e-9]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import optimize

from .errors import DegenerateLikelihood

ETA_MAX = 1.0 - 1e-9
GRID_POINTS = 1000
EIGEN_FLOOR = 1e-10
_DENOM_FLOOR = 1e-12
_FD_STEP = 1e-4


class Mode(str, enum.Enum):
    ESTHER = "esther"
    HILMM = "hilmm"
    ORACLE = "oracle"


@dataclass(frozen=True, eq=False)
class KinshipEigen:
    lambdas: np.ndarray
    rotated: np.ndarray
    N_sel: int

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    def with_rotated(self, rotated: np.ndarray) -> "KinshipEigen":
        """Same spectrum, different observations (shares the cached grid)."""
        new = replace(self, rotated=np.asarray(rotated, dtype=float))
        if "_grid" in self.__dict__:
            new.__dict__["_grid"] = self.__dict__["_grid"]
        return new

    @cached_property
    def _grid(self):
        etas = np.linspace(0.0, ETA_MAX, GRID_POINTS)
        D = etas[:, None] * (self.lambdas[None, :] - 1.0) + 1.0
        return etas, 1.0 / D, np.log(D).mean(axis=1)


@dataclass(frozen=True, eq=False)
class HeritabilityFit:
    eta_hat: float
    sigma2_hat: float
    loglik: float
    se: float
    mode: Mode = Mode.HILMM
    lambdas_used: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    flags: tuple[str, ...] = ()

    @property
    def boundary(self) -> bool:
        return "boundary" in self.flags

    @property
    def unidentifiable(self) -> bool:
        return "unidentifiable" in self.flags


def kinship_eigen(Z_sel: np.ndarray, Y: np.ndarray) -> KinshipEigen:
    """Eigendecomposition of ``Z_sel Z_sel' / N_sel`` and the rotated observations."""
    Z_sel = np.asarray(Z_sel, dtype=float)
    if Z_sel.ndim == 1:
        Z_sel = Z_sel[:, None]
    N_sel = Z_sel.shape[1]
    if N_sel < 1:
        raise ValueError("kinship needs at least one column")
    R = (Z_sel @ Z_sel.T) / N_sel
    return eigen_from_kinship(R, Y, N_sel)


def eigen_from_kinship(R: np.ndarray, Y: np.ndarray, N_sel: int) -> KinshipEigen:
    lambdas, U = np.linalg.eigh(R)
    lambdas = np.where(lambdas < EIGEN_FLOOR, 0.0, lambdas)
    return KinshipEigen(lambdas=lambdas, rotated=U.T @ np.asarray(Y, dtype=float), N_sel=N_sel)


def _denominators(eta, lambdas):
    D = eta * (lambdas - 1.0) + 1.0
    if D.min() <= _DENOM_FLOOR:
        raise DegenerateLikelihood(f"variance factor vanishes at eta={eta}")
    return D


def profile_loglik(eta: float, ke: KinshipEigen) -> float:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    D = _denominators(eta, ke.lambdas)
    s = np.mean(ke.rotated**2 / D)
    if s <= 0.0:
        raise DegenerateLikelihood("observations are identically zero")
    return float(-np.log(s) - np.mean(np.log(D)))


def profile_loglik_derivative(eta: float, ke: KinshipEigen) -> float:
    lam1 = ke.lambdas - 1.0
    D = _denominators(eta, ke.lambdas)
    y2 = ke.rotated**2
    s = np.mean(y2 / D)
    ds = -np.mean(y2 * lam1 / D**2)
    return float(-ds / s - np.mean(lam1 / D))


def _refine(ke: KinshipEigen, etas: np.ndarray, i: int) -> float:
    """Polish grid maximizer ``etas[i]`` on its neighbouring cells."""
    lo = etas[max(i - 1, 0)]
    hi = etas[min(i + 1, etas.size - 1)]
    d_lo = profile_loglik_derivative(lo, ke)
    d_hi = profile_loglik_derivative(hi, ke)
    if i == 0 and d_lo <= 0.0:
        return 0.0
    if i == etas.size - 1 and d_hi >= 0.0:
        return ETA_MAX
    if d_lo > 0.0 > d_hi:
        return optimize.brentq(profile_loglik_derivative, lo, hi, args=(ke,), xtol=1e-14, rtol=1e-14)
    res = optimize.minimize_scalar(
        lambda x: -profile_loglik(x, ke), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    return float(res.x)


def observed_information(eta: float, ke: KinshipEigen, h: float = _FD_STEP) -> float:
    """``-d^2/deta^2 (n/2) L`` by Richardson-refined central differences.

    The stencil is shifted inside ``[0, ETA_MAX]`` when ``eta`` is near a bound.
    """
    c = min(max(eta, h), ETA_MAX - h)
    f = lambda x: 0.5 * ke.n * profile_loglik(x, ke)  # noqa: E731
    f0 = f(c)

    def second(step):
        return (f(c + step) - 2.0 * f0 + f(c - step)) / step**2

    return -(4.0 * second(h / 2) - second(h)) / 3.0


def fit_heritability(ke: KinshipEigen, mode: Mode = Mode.HILMM) -> HeritabilityFit:
    """Maximize ``L`` on ``[0, 1 - 1e-9]``: 1000-point grid, then root-finding on ``L'``.

    A flat likelihood (all eigenvalues equal) gives ``eta_hat = 0`` flagged
    ``unidentifiable``. Estimates on a bound are flagged ``boundary`` and
    their standard error ``se_unreliable``.
    """
    lambdas = ke.lambdas
    y2 = ke.rotated**2
    if not np.any(y2 > 0):
        raise DegenerateLikelihood("observations are identically zero")
    if np.ptp(lambdas) <= 1e-12 * max(1.0, float(np.max(lambdas))):
        return HeritabilityFit(
            eta_hat=0.0,
            sigma2_hat=float(np.mean(y2)),
            loglik=profile_loglik(0.0, ke),
            se=float("nan"),
            mode=mode,
            lambdas_used=lambdas,
            flags=("unidentifiable",),
        )
    etas, inv_d, mean_log_d = ke._grid
    values = -np.log(inv_d @ y2 / ke.n) - mean_log_d
    i = int(np.argmax(values))
    eta = _refine(ke, etas, i)
    loglik = profile_loglik(eta, ke)
    if loglik < values[i]:
        eta, loglik = float(etas[i]), float(values[i])
    flags = []
    if eta <= 1e-8 or eta >= ETA_MAX - 1e-8:
        flags += ["boundary", "se_unreliable"]
    info = observed_information(eta, ke)
    se = 1.0 / np.sqrt(info) if info > 0 else float("nan")
    if not np.isfinite(se) and "se_unreliable" not in flags:
        flags.append("se_unreliable")
    return HeritabilityFit(
        eta_hat=float(eta),
        sigma2_hat=float(np.mean(y2 / (eta * (lambdas - 1.0) + 1.0))),
        loglik=float(loglik),
        se=float(se),
        mode=mode,
        lambdas_used=lambdas,
        flags=tuple(flags),
    )


def gaussian_loglik(eta: float, sigma2: float, ke: KinshipEigen) -> float:
    """Exact log-density of the rotated observations, constant included."""
    v = sigma2 * _denominators(eta, ke.lambdas)
    return float(-0.5 * np.sum(np.log(2 * np.pi * v)) - 0.5 * np.sum(ke.rotated**2 / v))


def _eta_given_sigma2(sigma2, ke, grid):
    lam1 = ke.lambdas - 1.0
    y2 = ke.rotated**2

    def score(eta):
        D = eta * lam1 + 1.0
        return float(-0.5 * np.sum(lam1 / D) + 0.5 * np.sum(y2 * lam1 / (sigma2 * D**2)))

    values = [gaussian_loglik(e, sigma2, ke) for e in grid]
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    s_lo, s_hi = score(lo), score(hi)
    if s_lo > 0.0 > s_hi:
        # plain bisection on the score keeps this route independent of the main fit
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if score(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        return 0.5 * (lo + hi)
    return float(grid[i]) if i not in (0, grid.size - 1) else (0.0 if i == 0 else ETA_MAX)


def fit_full_gaussian(ke: KinshipEigen, max_iter: int = 100000, tol: float = 1e-13):
    """Two-parameter maximum likelihood by alternating updates.

    ``sigma2`` has the closed form ``mean(Yt**2 / D(eta))``; ``eta`` is found
    by a grid scan plus bisection on the score at fixed ``sigma2``. Used as an
    independent check of the profiled fit. Returns ``(eta, sigma2)``.
    """
    y2 = ke.rotated**2
    if not np.any(y2 > 0):
        raise DegenerateLikelihood("observations are identically zero")
    grid = np.linspace(0.0, ETA_MAX, 401)
    eta = 0.5
    sigma2 = float(np.mean(y2 / (eta * (ke.lambdas - 1.0) + 1.0)))
    for _ in range(max_iter):
        new_eta = _eta_given_sigma2(sigma2, ke, grid)
        sigma2 = float(np.mean(y2 / (new_eta * (ke.lambdas - 1.0) + 1.0)))
        if abs(new_eta - eta) < tol:
            eta = new_eta
            break
        eta = new_eta
    return eta, sigma2
