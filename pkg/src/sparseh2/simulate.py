"""Synthetic genotypes, sparse genetic effects and phenotypes.

Genotype column ``j`` holds ``n`` i.i.d. Binomial(2, p_j) allele counts with
``p_j ~ Uniform(maf_range)``. Effects follow the spike-and-slab law
``(1 - q) delta_0 + q N(0, sigma_u2)`` and ``Y = X beta + Z u + e``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import parallel
from .data import (
    FixedEffects,
    GenotypeMatrix,
    Phenotype,
    StandardizedMatrix,
    TraitParams,
    implied_heritability,
    standardize,
)
from .errors import DimensionMismatch, ValidationError

# columns per genotype substream; changing it changes every simulated matrix
GENOTYPE_BLOCK = 1024


@dataclass(frozen=True)
class SimConfig:
    n: int = 500
    N: int = 5000
    params: TraitParams = field(default_factory=lambda: TraitParams(q=0.002))
    target_eta: float | None = None
    maf_range: tuple[float, float] = (0.1, 0.5)
    fixed_effect_count: int = 0
    seed: int = 0
    n_causal: int | None = None  # exact support size; overrides params.q when set

    def __post_init__(self):
        if self.n < 2 or self.N < 1:
            raise ValidationError(f"need n >= 2 and N >= 1, got n={self.n}, N={self.N}")
        lo, hi = self.maf_range
        if not 0.0 < lo <= hi <= 0.5:
            raise ValidationError(f"maf_range must lie in (0, 0.5], got {self.maf_range}")
        if self.target_eta is not None and not 0.0 < self.target_eta < 1.0:
            raise ValidationError(f"target_eta must lie in (0, 1), got {self.target_eta}")
        if self.fixed_effect_count < 0:
            raise ValidationError("fixed_effect_count must be >= 0")
        if self.fixed_effect_count + 1 >= self.n and self.fixed_effect_count > 0:
            raise ValidationError("too many fixed effects for the sample size")
        if self.n_causal is not None:
            if not 1 <= self.n_causal <= self.N:
                raise ValidationError(f"n_causal must lie in [1, N], got {self.n_causal}")
            object.__setattr__(self, "params", replace(self.params, q=self.n_causal / self.N))

    def resolved_params(self) -> TraitParams:
        """Trait parameters with ``sigma_e2`` solved from ``target_eta`` when set."""
        if self.target_eta is None:
            return self.params
        sigma_e2 = solve_sigma_e(self.N, self.params.q, self.params.sigma_u2, self.target_eta)
        return replace(self.params, sigma_e2=sigma_e2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["maf_range"] = list(self.maf_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValidationError(f"unknown simulation config keys: {sorted(unknown)}")
        if "params" in d:
            d["params"] = TraitParams(**d["params"])
        if "maf_range" in d:
            d["maf_range"] = tuple(float(x) for x in d["maf_range"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class SimOutput:
    W: GenotypeMatrix
    Z: StandardizedMatrix
    u: np.ndarray
    support: np.ndarray
    e: np.ndarray
    Y: Phenotype
    params: TraitParams
    X: FixedEffects | None = None
    beta: np.ndarray | None = None

    @property
    def eta(self) -> float:
        return implied_heritability(self.params, self.W.N)

    def genetic_part(self) -> np.ndarray:
        return self.Z.values @ self.u[self.Z.source_column_index]


def solve_sigma_e(N: int, q: float, sigma_u2: float, target_eta: float) -> float:
    """Noise variance giving heritability ``target_eta``."""
    if not 0.0 < target_eta < 1.0:
        raise ValidationError(f"target_eta must lie in (0, 1), got {target_eta}")
    return N * q * sigma_u2 * (1.0 - target_eta) / target_eta


def _genotype_block(n, width, maf_range, seed, index):
    rng = parallel.substream(seed, parallel.GENOTYPES, index)
    p = rng.uniform(maf_range[0], maf_range[1], size=width)
    return rng.binomial(2, p, size=(n, width)).astype(np.int8)


def simulate_genotypes(
    n: int, N: int, maf_range=(0.1, 0.5), seed: int = 0, workers: int | None = 1
) -> GenotypeMatrix:
    """Independent SNP columns of Binomial(2, p_j) allele counts.

    Columns are generated in fixed blocks of ``GENOTYPE_BLOCK``, each with its
    own substream, so the matrix does not depend on ``workers``.
    """
    blocks = parallel.chunks(N, GENOTYPE_BLOCK)
    parts = parallel.pmap(
        lambda ib: _genotype_block(n, ib[1][1] - ib[1][0], maf_range, seed, ib[0]),
        list(enumerate(blocks)),
        workers,
    )
    return GenotypeMatrix(np.concatenate(parts, axis=1))


def simulate_effects(N: int, params: TraitParams, rng: np.random.Generator):
    """Spike-and-slab effects; returns ``(u, support)``."""
    causal = rng.random(N) < params.q
    u = rng.normal(0.0, np.sqrt(params.sigma_u2), size=N) * causal
    return u, np.flatnonzero(u)


def simulate_phenotype(
    Z: np.ndarray,
    u: np.ndarray,
    sigma_e2: float,
    rng: np.random.Generator,
    X: np.ndarray | None = None,
    beta: np.ndarray | None = None,
):
    """Return ``(Y, e)`` with ``Y = X beta + Z u + e`` and ``e ~ N(0, sigma_e2 I)``."""
    Z = np.asarray(Z)
    n = Z.shape[0]
    if u.shape[0] != Z.shape[1]:
        raise DimensionMismatch(f"u has length {u.shape[0]}, Z has {Z.shape[1]} columns")
    e = rng.normal(0.0, np.sqrt(sigma_e2), size=n) if sigma_e2 > 0 else np.zeros(n)
    Y = Z @ u + e
    if X is not None:
        if beta is None or X.shape[0] != n or X.shape[1] != beta.shape[0]:
            raise DimensionMismatch("X and beta do not conform with Z")
        Y = Y + X @ beta
    return Y, e


def simulate_fixed_effects(n: int, count: int, rng: np.random.Generator):
    """Intercept plus ``count`` standard Gaussian covariates, Gaussian coefficients."""
    X = np.column_stack([np.ones(n), rng.standard_normal((n, count))])
    beta = rng.standard_normal(count + 1)
    return X, beta


def simulate(cfg: SimConfig, W: GenotypeMatrix | None = None, workers: int | None = 1) -> SimOutput:
    """Full synthetic data set; pass ``W`` to reuse a genotype matrix."""
    if W is None:
        W = simulate_genotypes(cfg.n, cfg.N, cfg.maf_range, cfg.seed, workers)
    elif W.n != cfg.n or W.N != cfg.N:
        raise DimensionMismatch(f"W is {W.n}x{W.N}, config says {cfg.n}x{cfg.N}")
    return simulate_from_standardized(cfg, W, standardize(W))


def simulate_from_standardized(cfg: SimConfig, W: GenotypeMatrix, Z: StandardizedMatrix) -> SimOutput:
    """Draw effects, covariates and phenotype on an existing genotype matrix."""
    params = cfg.resolved_params()
    rng = parallel.substream(cfg.seed, parallel.EFFECTS)
    if cfg.n_causal is None:
        u, _ = simulate_effects(W.N, params, rng)
        # monomorphic columns are not in Z, so they cannot carry an effect
        u[Z.excluded] = 0.0
    else:
        u = np.zeros(W.N)
        k = min(cfg.n_causal, Z.N)
        chosen = rng.choice(Z.source_column_index, size=k, replace=False)
        u[chosen] = rng.normal(0.0, np.sqrt(params.sigma_u2), size=k)
    support = np.flatnonzero(u)
    X = beta = None
    if cfg.fixed_effect_count > 0:
        X, beta = simulate_fixed_effects(
            W.n, cfg.fixed_effect_count, parallel.substream(cfg.seed, parallel.FIXED_EFFECTS)
        )
    Y, e = simulate_phenotype(
        Z.values,
        u[Z.source_column_index],
        params.sigma_e2,
        parallel.substream(cfg.seed, parallel.NOISE),
        X,
        beta,
    )
    return SimOutput(
        W=W,
        Z=Z,
        u=u,
        support=support,
        e=e,
        Y=Phenotype(Y),
        params=params,
        X=None if X is None else FixedEffects(X),
        beta=beta,
    )
