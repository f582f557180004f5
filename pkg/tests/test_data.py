import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparseh2.data import (
    FixedEffects,
    GenotypeMatrix,
    Phenotype,
    TraitParams,
    center_scale,
    implied_heritability,
    standardize,
)
from sparseh2.errors import AllColumnsConstant, DimensionMismatch, ValidationError


def test_symmetric_column_standardizes_to_plus_minus_one():
    Z = standardize(GenotypeMatrix(np.array([[0], [1], [2]])))
    sd = np.sqrt(2 / 3)
    np.testing.assert_allclose(Z.values[:, 0], np.array([-1, 0, 1]) / sd)


def test_constant_column_dropped_and_recorded():
    W = GenotypeMatrix(np.array([[1, 0], [1, 1], [1, 2]]))
    Z = standardize(W)
    assert Z.N == 1
    assert Z.excluded.tolist() == [0]
    assert Z.source_column_index.tolist() == [1]
    assert Z.ids() == ["snp1"]


def test_mirrored_columns_are_negations():
    Z = standardize(GenotypeMatrix(np.array([[0, 2], [1, 1], [2, 0]])))
    np.testing.assert_array_equal(Z.values[:, 0], -Z.values[:, 1])


def test_all_constant_raises():
    with pytest.raises(AllColumnsConstant):
        standardize(GenotypeMatrix(np.ones((4, 3), dtype=int)))


def test_bad_entry_reports_location():
    values = np.zeros((3, 3), dtype=int)
    values[2, 1] = 3
    with pytest.raises(ValidationError, match="row 2, column 1"):
        GenotypeMatrix(values)


def test_snp_id_count_checked():
    with pytest.raises(DimensionMismatch):
        GenotypeMatrix(np.zeros((3, 2), dtype=int), snp_ids=("a",))


def test_blockwise_standardize_matches_single_block(rng):
    W = GenotypeMatrix(rng.integers(0, 3, size=(30, 50)))
    a = standardize(W, block=7).values
    b = standardize(W, block=1000).values
    np.testing.assert_array_equal(a, b)


@settings(max_examples=40, deadline=None)
@given(arrays(np.int8, st.tuples(st.integers(2, 25), st.integers(1, 12)), elements=st.integers(0, 2)))
def test_standardized_columns_have_zero_mean_and_norm_n(values):
    W = GenotypeMatrix(values)
    try:
        Z = standardize(W)
    except AllColumnsConstant:
        assert np.all(values == values[0])
        return
    n = W.n
    assert np.all(np.abs(Z.values.sum(axis=0)) <= 1e-8)
    np.testing.assert_allclose((Z.values**2).sum(axis=0), n, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 20), st.integers(1, 6)),
              elements=st.floats(-100, 100, allow_nan=False)))
def test_center_scale_idempotent(values):
    once, keep = center_scale(values)
    if once.shape[1] == 0:
        return
    twice, keep2 = center_scale(once)
    assert keep2.all()
    np.testing.assert_allclose(twice, once, atol=1e-10)


def test_implied_heritability_values():
    assert implied_heritability(TraitParams(q=1.0, sigma_u2=1.0, sigma_e2=0.0), 17) == 1.0
    assert implied_heritability(TraitParams(q=0.5, sigma_u2=1e-12, sigma_e2=1.0), 10) < 1e-10
    assert implied_heritability(TraitParams(q=1e-3, sigma_u2=1.0, sigma_e2=100.0), 100000) == pytest.approx(0.5)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10))
def test_implied_heritability_monotone(su, se, bump):
    base = implied_heritability(TraitParams(q=0.1, sigma_u2=su, sigma_e2=se), 100)
    assert implied_heritability(TraitParams(q=0.1, sigma_u2=su + bump, sigma_e2=se), 100) > base
    assert implied_heritability(TraitParams(q=0.1, sigma_u2=su, sigma_e2=se + bump), 100) < base


@pytest.mark.parametrize("kwargs", [dict(q=0.0), dict(q=1.5), dict(q=0.1, sigma_u2=0.0), dict(q=0.1, sigma_e2=-1.0)])
def test_trait_params_validation(kwargs):
    with pytest.raises(ValidationError):
        TraitParams(**kwargs)


def test_phenotype_and_fixed_effects_validation():
    with pytest.raises(ValidationError):
        Phenotype(np.array([1.0, np.nan]))
    with pytest.raises(ValidationError):
        FixedEffects(np.ones((3, 3)))
    assert FixedEffects(np.arange(4.0)).p == 1
