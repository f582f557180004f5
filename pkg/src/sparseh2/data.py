"""Core domain types: genotypes, standardized genotypes, phenotypes, fixed effects.

Standardization divides each column by its population standard deviation
(denominator ``n``), so every retained column satisfies ``sum(z**2) == n``
and the kinship matrix ``Z Z' / N`` has trace ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .parallel import chunks
from .errors import AllColumnsConstant, DimensionMismatch, ValidationError

# relative sd below which a column counts as constant
_CONSTANT_SD = 1e-12


@dataclass(frozen=True, eq=False)
class GenotypeMatrix:
    """Allele counts, one row per individual and one column per SNP."""

    values: np.ndarray
    snp_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise ValidationError(f"genotype matrix must be 2-D, got shape {values.shape}")
        n, N = values.shape
        if n < 2 or N < 1:
            raise ValidationError(f"need n >= 2 and N >= 1, got n={n}, N={N}")
        bad = ~np.isin(values, (0, 1, 2))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ValidationError(
                f"genotype entry at row {i}, column {j} is {values[i, j]!r}; expected 0, 1 or 2"
            )
        values = values.astype(np.int8, copy=False)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.snp_ids is None:
            object.__setattr__(self, "snp_ids", tuple(f"snp{j}" for j in range(N)))
        elif len(self.snp_ids) != N:
            raise DimensionMismatch(f"{len(self.snp_ids)} SNP ids for {N} columns")
        else:
            object.__setattr__(self, "snp_ids", tuple(self.snp_ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class StandardizedMatrix:
    """Centered, unit-variance genotype columns.

    ``source_column_index[k]`` is the column of the original genotype matrix
    that became column ``k``; constant columns are absent and listed in
    ``excluded``.
    """

    values: np.ndarray
    source_column_index: np.ndarray
    excluded: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    snp_ids: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def ids(self) -> list[str]:
        if self.snp_ids is None:
            return [f"snp{j}" for j in self.source_column_index]
        return [self.snp_ids[j] for j in self.source_column_index]


@dataclass(frozen=True, eq=False)
class Phenotype:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise ValidationError("phenotype contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class FixedEffects:
    X: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValidationError(f"fixed-effect matrix must be 2-D, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("fixed-effect matrix contains non-finite values")
        if X.shape[1] >= X.shape[0]:
            raise ValidationError(f"need p < n, got p={X.shape[1]}, n={X.shape[0]}")
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class TraitParams:
    """Sparse effect model: ``u_j ~ (1-q) delta_0 + q N(0, sigma_u2)``, noise variance ``sigma_e2``."""

    q: float
    sigma_u2: float = 1.0
    sigma_e2: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValidationError(f"q must lie in (0, 1], got {self.q}")
        if not self.sigma_u2 > 0.0:
            raise ValidationError(f"sigma_u2 must be positive, got {self.sigma_u2}")
        if not self.sigma_e2 >= 0.0:
            raise ValidationError(f"sigma_e2 must be non-negative, got {self.sigma_e2}")


def center_scale(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Center and scale columns of a real matrix.

    Returns the standardized copy of the non-constant columns and the boolean
    mask of columns that were kept.
    """
    values = np.asarray(values, dtype=float)
    mean = values.mean(axis=0)
    centered = values - mean
    sd = np.sqrt((centered**2).mean(axis=0))
    scale = np.maximum(np.abs(values).max(axis=0), 1.0)
    keep = sd > _CONSTANT_SD * scale
    return centered[:, keep] / sd[keep], keep


def standardize(W: GenotypeMatrix, block: int = 4096) -> StandardizedMatrix:
    """Center and normalize genotype columns, dropping monomorphic SNPs.

    Works in column blocks so full-scale matrices never need more than one
    float copy of the data.
    """
    values = W.values
    keep = np.empty(W.N, dtype=bool)
    for start, stop in chunks(W.N, block):
        col = values[:, start:stop]
        keep[start:stop] = col.max(axis=0) != col.min(axis=0)
    if not keep.any():
        raise AllColumnsConstant("every genotype column is constant")
    kept = np.flatnonzero(keep)
    Z = np.empty((W.n, kept.size), order="F")
    for start, stop in chunks(kept.size, block):
        Z[:, start:stop], _ = center_scale(values[:, kept[start:stop]])
    return StandardizedMatrix(
        values=Z,
        source_column_index=kept,
        excluded=np.flatnonzero(~keep),
        snp_ids=W.snp_ids,
    )


def implied_heritability(params: TraitParams, N: int) -> float:
    """Share of phenotypic variance carried by the genetic effects."""
    genetic = N * params.q * params.sigma_u2
    total = genetic + params.sigma_e2
    return genetic / total if total > 0 else 0.0
