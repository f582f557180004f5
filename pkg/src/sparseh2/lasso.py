"""Lasso by cyclic coordinate descent.

Minimizes ``||Y - Z u||_2^2 + lam * ||u||_1`` (residual sum of squares not
halved). Works on the Gram matrix ``G = Z'Z`` and keeps ``c = Z'(Y - Z u)``
up to date, so one coordinate update costs O(p) whatever ``n`` is.

Stationarity is checked on the KKT conditions with gradient ``g_j = 2 c_j``:
``|g_j| <= lam`` when ``u_j == 0`` and ``g_j == lam * sign(u_j)`` otherwise,
both up to ``tol * lam_max``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import NonConvergence

# sweeps between attempts at an exact active-set solve
_CHUNK = 10
_MAX_NEWTON = 20


@dataclass(frozen=True, eq=False)
class LassoFit:
    lam: float
    coefficients: np.ndarray
    objective: float
    iterations: int
    kkt_violation: float
    objective_trace: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def active_set(self) -> np.ndarray:
        return np.flatnonzero(self.coefficients)


@dataclass(frozen=True, eq=False)
class LassoPath:
    lambdas: np.ndarray
    fits: list

    @property
    def last(self) -> LassoFit:
        return self.fits[-1]


@njit(cache=True, nogil=True)
def _kkt(c, u, lam, active_only):
    worst = 0.0
    for j in range(u.shape[0]):
        g = 2.0 * c[j]
        if u[j] == 0.0:
            if active_only:
                continue
            v = abs(g) - lam
        elif u[j] > 0.0:
            v = abs(g - lam)
        else:
            v = abs(g + lam)
        if v > worst:
            worst = v
    return worst


@njit(cache=True, nogil=True)
def _sweep(G, diag, lam, u, c, active_only):
    half = 0.5 * lam
    p = u.shape[0]
    for j in range(p):
        uj = u[j]
        if active_only and uj == 0.0:
            continue
        dj = diag[j]
        if dj <= 0.0:
            continue
        rho = c[j] + dj * uj
        if rho > half:
            new = (rho - half) / dj
        elif rho < -half:
            new = (rho + half) / dj
        else:
            new = 0.0
        delta = new - uj
        if delta != 0.0:
            u[j] = new
            # G is symmetric; row access is contiguous
            for k in range(p):
                c[k] -= delta * G[j, k]


@njit(cache=True, nogil=True)
def _objective(yy, b, u, c, lam):
    # ||Y - Zu||^2 = yy - 2 u'b + u'Gu and u'Gu = u'b - u'c
    s = yy
    l1 = 0.0
    for j in range(u.shape[0]):
        s -= u[j] * (b[j] + c[j])
        l1 += abs(u[j])
    return s + lam * l1


@njit(cache=True, nogil=True)
def _cd(G, b, yy, lam, u, tol_abs, max_iter, trace):
    """Active-set cyclic descent. Returns ``(sweeps, kkt_violation)``."""
    p = u.shape[0]
    diag = np.empty(p)
    for j in range(p):
        diag[j] = G[j, j]
    c = np.empty(p)
    sweeps = 0
    viol = np.inf
    while sweeps < max_iter:
        # exact gradient once per outer pass limits drift of the running update
        c[:] = b - G @ u
        _sweep(G, diag, lam, u, c, False)
        trace[sweeps] = _objective(yy, b, u, c, lam)
        sweeps += 1
        viol = _kkt(c, u, lam, False)
        if viol <= tol_abs:
            break
        while sweeps < max_iter and _kkt(c, u, lam, True) > tol_abs:
            _sweep(G, diag, lam, u, c, True)
            trace[sweeps] = _objective(yy, b, u, c, lam)
            sweeps += 1
    return sweeps, viol


def lambda_max(Y: np.ndarray, Z: np.ndarray) -> float:
    """Smallest penalty whose solution is identically zero."""
    return 2.0 * float(np.max(np.abs(Z.T @ Y))) if Z.shape[1] else 0.0


def _newton_step(G, b, lam, u):
    """Move ``u`` towards the exact minimizer on its active set and signs.

    The restricted minimizer solves ``G_AA u_A = b_A - (lam / 2) sign(u_A)``.
    If it changes a sign, the step stops where the first coordinate reaches
    zero and that coordinate leaves the active set. The restricted objective
    is convex along the segment, so the step never increases it. Returns
    ``None`` when the system is singular.
    """
    active = np.flatnonzero(u)
    if active.size == 0:
        return None
    signs = np.sign(u[active])
    try:
        target = np.linalg.solve(G[np.ix_(active, active)], b[active] - 0.5 * lam * signs)
    except np.linalg.LinAlgError:
        return None
    current = u[active]
    out = np.zeros_like(u)
    crossing = np.sign(target) != signs
    if not crossing.any():
        out[active] = target
        return out
    step = current[crossing] / (current[crossing] - target[crossing])
    first = np.argmin(step)
    t = step[first]
    moved = current + t * (target - current)
    moved[np.flatnonzero(crossing)[first]] = 0.0
    out[active] = moved
    return out


def _solve_gram(G, b, yy, lam, init, tol_abs, max_iter):
    u = np.zeros(b.shape[0]) if init is None else np.array(init, dtype=float)
    trace = np.empty(max_iter + max_iter // _CHUNK + 2)
    done = 0
    steps = 0
    viol = np.inf
    previous = None
    while done < max_iter:
        sweeps, viol = _cd(G, b, yy, float(lam), u, float(tol_abs), min(_CHUNK, max_iter - done), trace[steps:])
        done += sweeps
        steps += sweeps
        if viol <= tol_abs:
            break
        pattern = np.sign(u)
        if previous is not None and np.array_equal(pattern, previous):
            before = _objective(yy, b, u, b - G @ u, float(lam))
            saved = u.copy()
            for _ in range(_MAX_NEWTON):
                stepped = _newton_step(G, b, lam, u)
                if stepped is None:
                    break
                partial = np.count_nonzero(stepped) < np.count_nonzero(u)
                u[:] = stepped
                if not partial:
                    break
            # an ill-conditioned active block can give an inaccurate solve; keep descent strict
            if _objective(yy, b, u, b - G @ u, float(lam)) > before:
                u[:] = saved
            c = b - G @ u
            trace[steps] = _objective(yy, b, u, c, float(lam))
            steps += 1
            viol = _kkt(c, u, float(lam), False)
            if viol <= tol_abs:
                break
            pattern = np.sign(u)
        previous = pattern
    return u, done, viol, trace[:steps].copy()


def _finish(Y, Z, lam, u, sweeps, viol, trace, tol_abs, max_iter):
    r = Y - Z @ u
    fit = LassoFit(
        lam=float(lam),
        coefficients=u,
        objective=float(r @ r + lam * np.abs(u).sum()),
        iterations=int(sweeps),
        kkt_violation=float(viol),
        objective_trace=trace,
    )
    if viol > tol_abs:
        raise NonConvergence(f"lasso did not converge in {max_iter} sweeps at lambda={lam:g}", best=fit)
    return fit


def lasso_solve(
    Y: np.ndarray,
    Z: np.ndarray,
    lam: float,
    init: np.ndarray | None = None,
    tol: float = 1e-7,
    max_iter: int = 10000,
) -> LassoFit:
    """Solve one Lasso problem.

    Args:
        Y: response, length n.
        Z: design, n x p.
        lam: penalty, >= 0.
        init: optional warm start.
        tol: KKT tolerance relative to ``lambda_max(Y, Z)``.
        max_iter: maximum number of coordinate sweeps.

    Raises:
        NonConvergence: carrying the last iterate as ``best``.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    G = np.ascontiguousarray(Z.T @ Z)
    b = Z.T @ Y
    lmax = 2.0 * float(np.max(np.abs(b))) if b.size else 0.0
    tol_abs = tol * lmax
    u, sweeps, viol, trace = _solve_gram(G, b, float(Y @ Y), lam, init, tol_abs, max_iter)
    return _finish(Y, Z, lam, u, sweeps, viol, trace, tol_abs, max_iter)


def lambda_grid(lmax: float, n_lambdas: int = 100, lambda_min_ratio: float = 1e-3) -> np.ndarray:
    if n_lambdas < 2:
        raise ValueError("n_lambdas must be >= 2")
    if lmax <= 0:
        lmax = 1.0
    return np.geomspace(lmax, lmax * lambda_min_ratio, n_lambdas)


def lasso_path(
    Y: np.ndarray,
    Z: np.ndarray,
    n_lambdas: int = 100,
    lambda_min_ratio: float = 1e-3,
    tol: float = 1e-7,
    max_iter: int = 10000,
) -> LassoPath:
    """Warm-started fits on a log-spaced grid from ``lambda_max`` downwards."""
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    G = np.ascontiguousarray(Z.T @ Z)
    b = Z.T @ Y
    yy = float(Y @ Y)
    lmax = 2.0 * float(np.max(np.abs(b))) if b.size else 0.0
    lambdas = lambda_grid(lmax, n_lambdas, lambda_min_ratio)
    tol_abs = tol * lmax
    fits = []
    u = None
    for lam in lambdas:
        u, sweeps, viol, trace = _solve_gram(G, b, yy, lam, u, tol_abs, max_iter)
        fits.append(_finish(Y, Z, lam, u.copy(), sweeps, viol, trace, tol_abs, max_iter))
    return LassoPath(lambdas=lambdas, fits=fits)


def active_set_at_smallest(Y: np.ndarray, Z: np.ndarray, **kwargs) -> np.ndarray:
    """Indices selected by the fit at the last (smallest) grid penalty."""
    return lasso_path(Y, Z, **kwargs).last.active_set
