import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import grid_projection, l1_projection_kkt
from sparsesec.projection import lp_norm, project, project_l1, project_l2, project_linf


def test_l1_feasible_input_unchanged():
    np.testing.assert_array_equal(project_l1([0.5, -0.3], 1.0), [0.5, -0.3])


def test_l1_symmetric_pair():
    np.testing.assert_allclose(project_l1([1.0, 1.0], 1.0), [0.5, 0.5], atol=1e-15)


def test_l1_worked_example():
    # theta = 0.1, rho = 3; agrees with l1_projection_kkt and a 0.01 grid search
    expected = np.array([0.6, 0.1, -0.3])
    np.testing.assert_allclose(project_l1([0.7, 0.2, -0.4], 1.0), expected, atol=1e-12)
    np.testing.assert_allclose(l1_projection_kkt([0.7, 0.2, -0.4], 1.0), expected, atol=1e-12)


def test_l2_examples():
    np.testing.assert_allclose(project_l2([3.0, 4.0], 1.0), [0.6, 0.8], atol=1e-15)
    np.testing.assert_array_equal(project_l2([0.0, 0.0], 1.0), [0.0, 0.0])
    v = np.array([0.6, 0.8])
    np.testing.assert_array_equal(project_l2(v, 1.0), v)


def test_linf_examples():
    np.testing.assert_array_equal(project_linf([2.0, -0.5], 1.0), [1.0, -0.5])
    np.testing.assert_array_equal(project_linf([0.2, -0.5], 1.0), [0.2, -0.5])
    np.testing.assert_array_equal(project_linf([-3.0, 3.0], 0.25), [-0.25, 0.25])


@pytest.mark.parametrize("fn", [project_l1, project_l2, project_linf])
def test_rejects_bad_input(fn):
    with pytest.raises(ValueError):
        fn([np.nan, 1.0], 1.0)
    with pytest.raises(ValueError):
        fn([np.inf, 1.0], 1.0)
    with pytest.raises(ValueError):
        fn([1.0, 1.0], 0.0)


def test_unknown_norm():
    with pytest.raises(ValueError):
        project([1.0], 1.0, "l0")


def test_l1_ties_do_not_matter():
    rng = np.random.default_rng(3)
    base = np.array([0.9, 0.9, 0.9, 0.2, -0.9])
    ref = project_l1(base, 1.0)
    for _ in range(20):
        perm = rng.permutation(base.size)
        np.testing.assert_allclose(project_l1(base[perm], 1.0), ref[perm], atol=1e-15)


def test_l1_keeps_signs_and_zeros():
    rng = np.random.default_rng(0)
    for _ in range(200):
        v = rng.normal(size=8) * (rng.random(8) < 0.7)
        w = project_l1(v, 0.5)
        assert np.all((w == 0) | (np.sign(w) == np.sign(v)))


def test_l1_matches_kkt_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = rng.integers(1, 6)
        v = rng.uniform(-2, 2, n)
        d = rng.choice([0.5, 1.0, 2.0])
        np.testing.assert_allclose(project_l1(v, d), l1_projection_kkt(v, d), atol=1e-10)


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_minimal_against_grid_2d(norm):
    rng = np.random.default_rng(5)
    for _ in range(5):
        v = rng.uniform(-2, 2, 2)
        w = project(v, 1.0, norm)
        _, grid_best = grid_projection(v, 1.0, norm, 0.01)
        assert np.linalg.norm(w - v) <= grid_best + 1e-6


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_minimal_against_grid_3d(norm):
    rng = np.random.default_rng(6)
    for _ in range(3):
        v = rng.uniform(-2, 2, 3)
        w = project(v, 1.0, norm)
        _, grid_best = grid_projection(v, 1.0, norm, 0.05)
        assert np.linalg.norm(w - v) <= grid_best + 1e-6


vectors = arrays(np.float64, st.integers(1, 30),
                 elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False))
radii = st.floats(1e-3, 5.0)


@settings(max_examples=300, deadline=None)
@given(v=vectors, d=radii, norm=st.sampled_from(["l1", "l2", "linf"]))
def test_feasible_idempotent(v, d, norm):
    w = project(v, d, norm)
    assert lp_norm(w, norm) <= d + 1e-9
    np.testing.assert_allclose(project(w, d, norm), w, rtol=0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(v=vectors, d=radii, norm=st.sampled_from(["l1", "l2", "linf"]))
def test_identity_when_feasible(v, d, norm):
    if lp_norm(v, norm) <= d:
        np.testing.assert_array_equal(project(v, d, norm), v)


@settings(max_examples=200, deadline=None)
@given(data=st.data(), n=st.integers(1, 12), d=radii,
       norm=st.sampled_from(["l1", "l2", "linf"]))
def test_non_expansive(data, n, d, norm):
    el = st.floats(-5, 5, allow_nan=False)
    u = data.draw(arrays(np.float64, n, elements=el))
    v = data.draw(arrays(np.float64, n, elements=el))
    pu, pv = project(u, d, norm), project(v, d, norm)
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-9
