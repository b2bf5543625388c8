import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcbwave.dwt import decompose, filter_coefficients
from pcbwave.errors import NonDyadic
from pcbwave.features import (BandSet, Standardizer, extract_features, feature_schema,
                              features_to_csv, subband_mean, subband_sd)


def test_mean_and_sd_small_cases():
    assert subband_mean(np.full((3, 3), 5.0)) == 5.0
    assert subband_mean(np.array([[1.0, 2.0], [3.0, 4.0]])) == 2.5
    assert subband_sd(np.full((4, 4), 7.0)) == 0.0
    assert subband_sd(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(math.sqrt(1.25), abs=1e-15)


def test_mean_sd_against_plain_loops():
    band = np.random.default_rng(0).normal(3, 2, (16, 16))
    vals = [float(v) for v in band.ravel()]
    total = 0.0
    for v in vals:
        total += v
    m = total / len(vals)
    sq = 0.0
    for v in vals:
        sq += (v - m) ** 2
    assert abs(subband_mean(band) - m) < 1e-12
    assert abs(subband_sd(band) - math.sqrt(sq / len(vals))) < 1e-12


def test_sd_is_population_not_sample():
    band = np.array([[0.0, 2.0]])
    assert subband_sd(band) == 1.0


@pytest.mark.parametrize("level,length", [(1, 8), (2, 14), (3, 20)])
def test_lengths(level, length):
    img = np.random.default_rng(level).uniform(0, 255, (64, 64))
    fv = extract_features(img, level)
    assert len(fv) == length == len(fv.schema)
    assert all(fv.values[1::2] >= 0)


def test_schema_order():
    assert feature_schema(2) == (
        "LH1_mean", "LH1_sd", "HL1_mean", "HL1_sd", "HH1_mean", "HH1_sd",
        "LH2_mean", "LH2_sd", "HL2_mean", "HL2_sd", "HH2_mean", "HH2_sd",
        "LL2_mean", "LL2_sd")
    assert feature_schema(3, "final-level-only") == (
        "LH3_mean", "LH3_sd", "HL3_mean", "HL3_sd", "HH3_mean", "HH3_sd", "LL3_mean", "LL3_sd")


@pytest.mark.parametrize("level", [1, 2, 3])
def test_constant_image_closed_form(level):
    v = 77.0
    fv = extract_features(np.full((64, 64), v), level)
    expected = np.zeros(len(fv))
    expected[-2] = 2 ** level * v
    assert np.abs(fv.values - expected).max() < 1e-10


def test_compositional_oracle_level3():
    img = np.random.default_rng(5).uniform(0, 255, (64, 64))
    f = filter_coefficients("db4")
    fv = extract_features(img, 3, f)
    pyr = decompose(img, 3, f)
    expected = []
    for b in pyr.bands():
        expected += [subband_mean(b.coefficients), subband_sd(b.coefficients)]
    assert np.array_equal(fv.values, np.array(expected))


def test_final_level_only_values():
    img = np.random.default_rng(6).uniform(0, 255, (32, 32))
    full = extract_features(img, 2)
    narrow = extract_features(img, 2, bands=BandSet.FINAL_LEVEL_ONLY)
    assert np.array_equal(narrow.values, full.values[6:])


def test_bad_level_and_size():
    with pytest.raises(ValueError):
        extract_features(np.zeros((64, 64)), 4)
    with pytest.raises(NonDyadic):
        extract_features(np.zeros((12, 12)), 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-100, 100), st.integers(1, 3))
def test_intensity_shift(seed, c, level):
    img = np.random.default_rng(seed).uniform(0, 255, (16, 16))
    a = extract_features(img, level).values
    b = extract_features(img + c, level).values
    diff = b - a
    assert abs(diff[-2] - 2 ** level * c) < 1e-10
    assert np.abs(np.delete(diff, -2)).max() < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100), st.integers(1, 3))
def test_intensity_scale(seed, s, level):
    img = np.random.default_rng(seed).uniform(0, 255, (16, 16))
    a = extract_features(img, level).values
    b = extract_features(img * s, level).values
    assert np.allclose(b, s * a, rtol=1e-10, atol=1e-10 * s)


def test_schema_stable_and_csv():
    assert feature_schema(1) == feature_schema(1)
    text = features_to_csv(feature_schema(1), np.array([[0.5] * 8]), ["true"])
    header, row = text.splitlines()
    assert header == "LH1_mean,LH1_sd,HL1_mean,HL1_sd,HH1_mean,HH1_sd,LL1_mean,LL1_sd,label"
    assert row.endswith(",true") and row.count(",") == 8


def test_standardizer():
    X = np.array([[1.0, 5.0], [3.0, 5.0]])
    sc = Standardizer.fit(X)
    Z = sc.transform(X)
    assert np.allclose(Z[:, 0], [-1, 1])
    assert np.allclose(Z[:, 1], 0)
    again = Standardizer.from_dict(sc.to_dict())
    assert np.array_equal(again.transform(X), Z)
