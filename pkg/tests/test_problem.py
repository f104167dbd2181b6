import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forrlab.params import ForrelationParams, paper_epsilon
from forrlab.problem import (PromiseLabel, label, label_codes, label_k, label_k_codes, promise_statistics)
from forrlab.rng import stream
from forrlab.wht import DimensionError, fwht


def test_default_epsilon():
    p = ForrelationParams(1024, 2)
    assert p.eps == pytest.approx(1 / (60 * 4 * math.log(1024)))
    assert p.n == 10
    assert p.no_threshold < p.yes_threshold < 1


@pytest.mark.parametrize("kwargs", [dict(N=6), dict(N=1), dict(N=4, k=0), dict(N=4, eps=1.5), dict(N=4, eps=0.0)])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        ForrelationParams(**kwargs)


def test_label_codes_thresholds_inclusive():
    p = ForrelationParams(4, 1, 0.2)
    codes = label_codes([0.1, 0.0, 0.06, 0.05, 0.3], p)
    assert codes.tolist() == [-1, 1, 0, 1, -1]


def _vector_with_forr(value, N=4):
    # z = (x, H x) gives forr = |x|^2 / N
    x = np.zeros(N)
    x[0] = math.sqrt(value * N)
    return np.concatenate([x, fwht(x)])


def test_label_examples():
    p = ForrelationParams(4, 1, 0.2)
    assert label(_vector_with_forr(p.eps / 2), p) is PromiseLabel.YES
    assert label(_vector_with_forr(0.0), p) is PromiseLabel.NO
    assert label(_vector_with_forr(0.3 * p.eps), p) is PromiseLabel.OUTSIDE


def test_label_dimension_check():
    with pytest.raises(DimensionError):
        label(np.ones(6), ForrelationParams(4, 1, 0.2))
    with pytest.raises(DimensionError):
        label_k(np.ones(8), ForrelationParams(4, 2, 0.2))


def test_label_k_examples():
    p = ForrelationParams(4, 3, 0.2)
    yes, no, out = _vector_with_forr(0.15), _vector_with_forr(0.0), _vector_with_forr(0.07)
    assert label_k(np.concatenate([no, no, no]), p) is PromiseLabel.NO
    assert label_k(np.concatenate([no, yes, no]), p) is PromiseLabel.YES
    assert label_k(np.concatenate([yes, yes, no]), p) is PromiseLabel.NO
    assert label_k(np.concatenate([no, out, yes]), p) is PromiseLabel.OUTSIDE


def test_promise_label_numeric():
    assert PromiseLabel.YES.numeric == -1
    assert PromiseLabel.NO.numeric == 1
    with pytest.raises(ValueError):
        PromiseLabel.OUTSIDE.numeric
    assert PromiseLabel.parse("Yes") is PromiseLabel.YES
    assert PromiseLabel.parse("+1") is PromiseLabel.NO


@given(st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=4), st.floats(0.05, 0.9))
def test_label_k_is_product_of_copy_labels(values, eps):
    p = ForrelationParams(4, len(values), eps)
    z = np.concatenate([_vector_with_forr(max(v, 0.0)) for v in values])
    per_copy = label_codes([max(v, 0.0) for v in values], p)
    got = int(label_k_codes(z, p))
    if np.all(per_copy != 0):
        assert got == int(np.prod(per_copy.astype(int)))
    else:
        assert got == 0


@given(st.floats(0.0, 1.0), st.floats(0.01, 0.3), st.floats(0.5, 2.0))
def test_thresholds_rescale_with_eps(f, eps, c):
    eps2 = eps * c
    if not 0 < eps2 < 1:
        return
    a = ForrelationParams(4, 1, eps)
    b = ForrelationParams(4, 1, eps2)
    assert label_codes(f, a) == label_codes(f * c, b)


def test_paper_epsilon_shape():
    assert paper_epsilon(2 ** 12, 2) * 4 == pytest.approx(paper_epsilon(2 ** 12, 1))


def test_promise_statistics_desk_scale():
    big = ForrelationParams(2 ** 12, 2, 0.2)
    assert promise_statistics(big, "even", 2000, stream(1, 0)).estimate >= 0.95
    one = ForrelationParams(2 ** 12, 1, 0.2)
    assert promise_statistics(one, "odd", 2000, stream(1, 1)).estimate >= 0.95
    assert promise_statistics(one, "uniform", 2000, stream(1, 2)).estimate >= 0.99


def test_promise_statistics_validates():
    p = ForrelationParams(16, 1, 0.2)
    with pytest.raises(ValueError):
        promise_statistics(p, "even", 10, stream(0))
    with pytest.raises(ValueError):
        promise_statistics(p, "gaussian", 1000, stream(0))
