import numpy as np
import pytest

from sparseh2 import parallel
from sparseh2.data import TraitParams, implied_heritability
from sparseh2.errors import ValidationError
from sparseh2.simulate import (
    SimConfig,
    simulate,
    simulate_effects,
    simulate_genotypes,
    simulate_phenotype,
    solve_sigma_e,
)


def test_solve_sigma_e_values():
    assert solve_sigma_e(100000, 1e-3, 1.0, 0.5) == pytest.approx(100.0)
    assert solve_sigma_e(100000, 1e-3, 1.0, 0.999) == pytest.approx(0.1001, rel=1e-3)
    assert solve_sigma_e(1, 1.0, 1.0, 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("eta", [0.05, 0.3, 0.5, 0.77, 0.99])
def test_solved_noise_hits_target(eta):
    s = solve_sigma_e(5000, 0.002, 2.0, eta)
    assert abs(implied_heritability(TraitParams(q=0.002, sigma_u2=2.0, sigma_e2=s), 5000) - eta) < 1e-12


def test_binomial_half_moments():
    W = simulate_genotypes(20000, 3, maf_range=(0.5, 0.5), seed=1).values
    mean = W.mean(axis=0)
    var = W.var(axis=0)
    # Binomial(2, 0.5): mean 1, variance 0.5; Monte-Carlo sd of the mean is sqrt(0.5/n)
    assert np.all(np.abs(mean - 1.0) < 5 * np.sqrt(0.5 / 20000))
    assert np.all(np.abs(var - 0.5) < 0.02)


def test_rare_allele_frequency_of_twos():
    W = simulate_genotypes(20000, 5, maf_range=(0.1, 0.1), seed=2).values
    frac = (W == 2).mean()
    assert abs(frac - 0.01) < 5 * np.sqrt(0.01 * 0.99 / W.size)
    assert set(np.unique(W)) <= {0, 1, 2}


def test_effects_dense_and_sparse():
    u, support = simulate_effects(300, TraitParams(q=1.0), parallel.substream(0, parallel.EFFECTS))
    assert support.size == 300
    counts = [
        simulate_effects(100000, TraitParams(q=1e-3), parallel.substream(s, parallel.EFFECTS))[1].size
        for s in range(20)
    ]
    # Binomial(1e5, 1e-3): mean 100, sd ~10; the mean of 20 draws has sd ~2.2
    assert abs(np.mean(counts) - 100) < 11


def test_q_zero_rejected():
    with pytest.raises(ValidationError):
        SimConfig(params=TraitParams(q=0.0))


def test_noise_only_and_noise_free(rng):
    Z = rng.standard_normal((4000, 3))
    Y, e = simulate_phenotype(Z, np.zeros(3), 1.0, rng)
    assert abs(Y.var() - 1.0) < 0.1
    u = rng.standard_normal(3)
    Y, e = simulate_phenotype(Z, u, 0.0, rng)
    np.testing.assert_array_equal(Y, Z @ u)


def test_reproducible_across_workers():
    cfg = SimConfig(n=40, N=2500, params=TraitParams(q=0.01), target_eta=0.5, fixed_effect_count=2, seed=9)
    a = simulate(cfg, workers=1)
    b = simulate(cfg, workers=3)
    np.testing.assert_array_equal(a.W.values, b.W.values)
    np.testing.assert_array_equal(a.Y.values, b.Y.values)
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.X.X, b.X.X)


def test_config_round_trip():
    cfg = SimConfig(n=50, N=70, params=TraitParams(q=0.1, sigma_u2=2.0), target_eta=0.4, seed=3)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValidationError):
        SimConfig.from_dict({"n": 10, "bogus": 1})


def test_genetic_share_concentrates_at_target():
    shares = []
    W = None
    for seed in range(200):
        cfg = SimConfig(n=500, N=5000, params=TraitParams(q=0.02), target_eta=0.5, seed=seed)
        out = simulate(cfg, W=W)
        W = out.W  # reuse genotypes; effects and noise vary with the seed
        g = out.genetic_part()
        shares.append(g.var() / out.Y.values.var())
    assert abs(np.mean(shares) - 0.5) < 0.05


def test_support_excludes_monomorphic_columns():
    cfg = SimConfig(n=3, N=200, params=TraitParams(q=1.0), target_eta=0.5, seed=0)
    out = simulate(cfg)
    assert out.Z.excluded.size > 0
    assert not np.isin(out.support, out.Z.excluded).any()


def test_exact_causal_count():
    out = simulate(SimConfig(n=60, N=300, n_causal=7, target_eta=0.4, seed=5))
    assert out.support.size == 7
    assert out.params.q == pytest.approx(7 / 300)
    assert out.eta == pytest.approx(0.4)
    with pytest.raises(ValidationError):
        SimConfig(N=10, n_causal=11)
