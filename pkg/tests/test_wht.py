import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from forrlab.wht import (DimensionError, fwht, forr, forr_naive, hadamard_matrix, mod2_inner,
                         naive_hadamard_apply)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def vectors(max_n=10):
    return st.integers(0, max_n).flatmap(lambda n: arrays(np.float64, 2 ** n, elements=finite))


def test_first_column():
    np.testing.assert_allclose(fwht(np.array([1.0, 0, 0, 0])), [0.5] * 4, atol=1e-15)


def test_all_ones_concentrates_on_row_zero():
    np.testing.assert_allclose(fwht(np.ones(4)), [2, 0, 0, 0], atol=1e-15)


def test_two_by_two():
    a, b = 0.3, -1.7
    np.testing.assert_allclose(naive_hadamard_apply(np.array([a, b])),
                               [(a + b) / math.sqrt(2), (a - b) / math.sqrt(2)], atol=1e-15)


def test_involution_large(rng):
    v = rng.normal(size=2 ** 10)
    assert np.abs(fwht(fwht(v)) - v).max() < 1e-10


def test_matches_naive_on_random_batch(rng):
    v = rng.normal(size=(100, 2 ** 10))
    assert np.abs(fwht(v) - naive_hadamard_apply(v)).max() < 1e-10


def test_fwht_leaves_input_untouched(rng):
    v = rng.normal(size=16)
    keep = v.copy()
    fwht(v)
    np.testing.assert_array_equal(v, keep)


@pytest.mark.parametrize("bad", [3, 6, 12, 0])
def test_bad_length(bad):
    with pytest.raises(DimensionError):
        fwht(np.ones(bad))


def test_naive_guard():
    with pytest.raises(DimensionError):
        naive_hadamard_apply(np.ones(2 ** 13))


@given(vectors())
def test_involution_property(v):
    assert np.abs(fwht(fwht(v)) - v).max() <= 1e-10 * max(1.0, np.abs(v).max())


@given(vectors())
def test_norm_preserved(v):
    assert abs(np.linalg.norm(fwht(v)) - np.linalg.norm(v)) <= 1e-10 * max(1.0, np.linalg.norm(v))


@given(vectors(8))
def test_oracle_equivalence(v):
    assert np.abs(fwht(v) - naive_hadamard_apply(v)).max() <= 1e-10 * max(1.0, np.abs(v).max())


def test_mod2_inner_examples():
    assert all(mod2_inner(0, j) == 0 for j in range(16))
    assert mod2_inner(1, 1) == 1
    assert mod2_inner(3, 3) == 0
    assert mod2_inner(2, 3) == 1


def test_hadamard_matrix_is_symmetric_orthogonal():
    H = hadamard_matrix(8)
    np.testing.assert_allclose(H, H.T)
    np.testing.assert_allclose(H @ H, np.eye(8), atol=1e-15)
    assert H[1, 1] == pytest.approx(-1 / math.sqrt(8))


def test_forr_examples():
    assert forr(np.ones(8)) == pytest.approx(0.5)
    assert forr(np.array([1.0, 0, 1, -1])) == pytest.approx(0.0)


def test_forr_of_transform_pair(rng):
    x = rng.normal(size=2 ** 8)
    z = np.concatenate([x, fwht(x)])
    assert abs(forr(z) - x @ x / 2 ** 8) < 1e-12


def test_forr_matches_naive(rng):
    z = rng.normal(size=(5, 64))
    for row, value in zip(z, forr(z)):
        assert value == pytest.approx(forr_naive(row), abs=1e-12)


@pytest.mark.parametrize("bad", [3, 6, 10])
def test_forr_bad_length(bad):
    with pytest.raises(DimensionError):
        forr(np.ones(bad))


@given(st.integers(1, 7).flatmap(lambda n: arrays(np.int8, 2 ** (n + 1), elements=st.sampled_from([-1, 1]))))
def test_forr_sign_inputs_bounded(z):
    assert -1 - 1e-12 <= forr(z.astype(float)) <= 1 + 1e-12


@given(st.integers(1, 6).flatmap(lambda n: arrays(np.float64, 2 ** (n + 1), elements=finite)))
def test_forr_cauchy_schwarz(z):
    N = z.size // 2
    bound = np.linalg.norm(z[:N]) * np.linalg.norm(z[N:]) / N
    assert abs(forr(z)) <= bound * (1 + 1e-12) + 1e-12
