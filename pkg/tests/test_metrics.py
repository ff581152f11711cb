import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsesec.metrics import (kernel_matrix, mmd_analysis, mmd_estimate, mmd_estimate_pairwise,
                               mmd_kernel, normalized_distance, security_score)


def test_normalized_distance_examples():
    assert normalized_distance(78.4, 784, "l1") == pytest.approx(0.1)
    assert normalized_distance(0.7, 100, "l2") == pytest.approx(0.07)
    assert normalized_distance(0.3, 784, "linf") == 0.3
    assert normalized_distance(0.0, 5, "l2") == 0.0


def test_normalized_distance_rejects():
    with pytest.raises(ValueError):
        normalized_distance(-0.1, 10, "l1")
    with pytest.raises(ValueError):
        normalized_distance(0.1, 0, "l1")


def test_box_diameter_normalizes_to_one():
    for f in (1, 7, 784):
        assert normalized_distance(float(f), f, "l1") == pytest.approx(1.0)
        assert normalized_distance(np.sqrt(f), f, "l2") == pytest.approx(1.0)
        assert normalized_distance(1.0, f, "linf") == 1.0


def test_security_score_example():
    s = security_score({"l1": 0.1, "l2": 0.07, "linf": 0.04})
    assert s.value == pytest.approx(0.07)
    assert security_score({"l2": 0.25}).value == 0.25
    with pytest.raises(ValueError):
        security_score({})


@settings(max_examples=100, deadline=None)
@given(base=st.lists(st.floats(0, 1), min_size=1, max_size=3), bump=st.floats(0, 1),
       which=st.integers(0, 2))
def test_security_score_monotone(base, bump, which):
    d = {f"n{i}": v for i, v in enumerate(base)}
    up = dict(d)
    key = f"n{which % len(base)}"
    up[key] += bump
    assert security_score(up).value >= security_score(d).value


def test_kernel_examples():
    assert mmd_kernel([1.0, 0.0], [1.0, 0.0]) == 1.0
    assert mmd_kernel([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert mmd_kernel([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.5)
    assert mmd_kernel([0.0, 0.0], [1.0, 1.0]) == 0.0


@settings(max_examples=200, deadline=None)
@given(x=arrays(np.float64, 6, elements=st.floats(0, 1)),
       z=arrays(np.float64, 6, elements=st.floats(0, 1)),
       a=st.floats(1e-3, 1e3), c=st.floats(1e-3, 1e3))
def test_kernel_scale_invariant_and_symmetric(x, z, a, c):
    k = mmd_kernel(x, z)
    assert k == pytest.approx(mmd_kernel(z, x), abs=1e-12)
    assert mmd_kernel(a * x, c * z) == pytest.approx(k, abs=1e-12)


def test_kernel_matrix_shape():
    rng = np.random.default_rng(0)
    assert kernel_matrix(rng.random((3, 4)), rng.random((5, 4))).shape == (3, 5)


def test_mmd_identities():
    rng = np.random.default_rng(1)
    X = rng.random((40, 10))
    Z = rng.random((25, 10))
    assert mmd_estimate(X, X).value == pytest.approx(0.0, abs=1e-15)
    assert mmd_estimate(X, Z).value == pytest.approx(mmd_estimate(Z, X).value, abs=1e-15)
    assert mmd_estimate(X, Z).value >= 0
    assert mmd_estimate([[1.0, 0.0]], [[0.0, 1.0]]).value == pytest.approx(2.0)


def test_mmd_matches_pairwise_sums():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n, m, f = rng.integers(1, 30, size=3)
        X = rng.random((n, f + 1))
        Z = rng.random((m, f + 1))
        X[0] = 0.0  # an all-zero row contributes a zero kernel row
        assert mmd_estimate(X, Z).value == pytest.approx(mmd_estimate_pairwise(X, Z), abs=1e-12)


def test_mmd_rejects_empty():
    with pytest.raises(ValueError):
        mmd_estimate(np.zeros((0, 3)), np.ones((2, 3)))


def test_mmd_analysis_same_distribution():
    rng = np.random.default_rng(3)
    tr = {c: rng.random((200, 8)) for c in (0, 1)}
    te = {c: rng.random((200, 8)) for c in (0, 1)}
    rows = mmd_analysis(tr, te, te)
    assert [r.label for r in rows] == [0, 1]
    for r in rows:
        assert r.adversarial == r.baseline
        assert r.ratio == 1.0
        assert r.n_train == r.n_test == r.n_adversarial == 200


def test_mmd_analysis_detects_shift():
    rng = np.random.default_rng(4)
    tr = {0: rng.random((300, 8))}
    te = {0: rng.random((300, 8))}
    adv = {0: np.clip(rng.random((300, 8)) + np.array([0.4] + [0.0] * 7), 0, 1)}
    (row,) = mmd_analysis(tr, te, adv)
    assert row.ratio > 10


def test_mmd_analysis_missing_adversarial():
    with pytest.raises(ValueError, match="adversarial"):
        mmd_analysis({0: np.ones((2, 2))}, {0: np.ones((2, 2))}, {})
