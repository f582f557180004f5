"""Removal of fixed effects by projection onto the orthogonal complement of Im(X).

The projector ``A`` (n x (n-d), orthonormal columns, ``A A' = P_X``) is never
formed unless asked for: it is the trailing block of the complete ``Q`` of a
Householder QR of an orthonormal basis of Im(X), and ``A' v`` is applied with
LAPACK ``ormqr`` in O(n d) per column.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from . import parallel
from .errors import DegenerateDesign, DimensionMismatch

_BLOCK = 2048


@dataclass(frozen=True, eq=False)
class Projector:
    n: int
    d: int
    _qr: np.ndarray
    _tau: np.ndarray

    def _apply_qt(self, C: np.ndarray) -> np.ndarray:
        C = np.asfortranarray(C, dtype=float)
        if self.d == 0:
            return C.copy(order="F")
        lwork = max(1, C.shape[1]) * 64
        out, _, info = sla.lapack.dormqr("L", "T", self._qr, self._tau, C, lwork)
        if info != 0:
            raise RuntimeError(f"dormqr failed with info={info}")
        return out

    def apply(self, v: np.ndarray, workers: int | None = 1) -> np.ndarray:
        """Return ``A' v`` for a vector or an n-row matrix."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise DimensionMismatch(f"expected {self.n} rows, got {v.shape[0]}")
        if v.ndim == 1:
            return self._apply_qt(v[:, None])[self.d :, 0]
        blocks = parallel.chunks(v.shape[1], _BLOCK)
        out = np.empty((self.n - self.d, v.shape[1]), order="F")

        def work(block):
            a, b = block
            out[:, a:b] = self._apply_qt(v[:, a:b])[self.d :]

        parallel.pmap(work, blocks, workers)
        return out

    @cached_property
    def A(self) -> np.ndarray:
        """Dense n x (n-d) orthonormal basis of the complement of Im(X)."""
        if self.d == 0:
            return np.eye(self.n)
        C = np.zeros((self.n, self.n - self.d), order="F")
        C[self.d :, :] = np.eye(self.n - self.d)
        lwork = max(1, C.shape[1]) * 64
        out, _, info = sla.lapack.dormqr("L", "N", self._qr, self._tau, C, lwork)
        if info != 0:
            raise RuntimeError(f"dormqr failed with info={info}")
        return out


def build_projector(X: np.ndarray) -> Projector:
    """Projector onto Im(X)^perp, with ``d`` the numerical rank of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if X.shape[1] == 0:
        return Projector(n, 0, np.zeros((n, 0), order="F"), np.zeros(0))
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    tol = n * np.finfo(float).eps * (s[0] if s.size else 0.0)
    d = int(np.sum(s > tol))
    if d >= n:
        raise DegenerateDesign(f"fixed effects have rank {d} = n")
    if d == 0:
        return Projector(n, 0, np.zeros((n, 0), order="F"), np.zeros(0))
    (qr, tau), _ = sla.qr(U[:, :d], mode="raw")
    return Projector(n, d, np.asfortranarray(qr), tau)


def project(P: Projector, Y: np.ndarray, Z: np.ndarray, workers: int | None = 1):
    """Return ``(A' Y, A' Z)``; the result has ``n - d`` rows."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] != P.n or Z.shape[0] != P.n:
        raise DimensionMismatch(f"projector is for n={P.n}, got Y with {Y.shape[0]} and Z with {Z.shape[0]} rows")
    return P.apply(Y), P.apply(Z, workers)
