from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from r1lab.errors import DimensionError, InvalidSpaceError, InvalidSpecError
from r1lab.matrix_core import (
    SYMMETRIC,
    MinorSpec,
    SquareMatrix,
    all_minors,
    conformal_norms,
    conformal_split,
    from_complex_pair,
    index_array,
    index_of,
    minor,
    minor_count,
    minor_specs,
    minors_array,
    numerical_rank,
    signed_singular_values,
    signed_svd,
    to_complex_pair,
)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def leibniz_det(a):
    """Permutation-sum determinant, independent of LAPACK."""
    n = len(a)
    total = 0.0
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = sign
        for i in range(n):
            term *= a[i][perm[i]]
        total += term
    return total


def test_square_matrix_is_read_only():
    m = SquareMatrix([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        m.entries[0, 0] = 5


def test_symmetric_tag_rejects_asymmetry_and_names_entry():
    with pytest.raises(InvalidSpaceError, match=r"\(1,2\)"):
        SquareMatrix([[1, 2], [3, 4]], SYMMETRIC)


def test_non_square_rejected():
    with pytest.raises(DimensionError):
        SquareMatrix(np.zeros((2, 3)))


def test_square_matrix_json_round_trip():
    m = SquareMatrix([[1.0, 2.0], [2.0, -1.5]], SYMMETRIC)
    assert SquareMatrix.from_json(m.to_json()) == m


def test_minor_examples():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert minor(np.eye(2), MinorSpec((1, 2), (1, 2))) == 1.0
    assert minor(A, MinorSpec((1,), (2,))) == 2.0
    assert minor(A, MinorSpec((1, 2), (1, 2))) == pytest.approx(-2.0, abs=1e-15)


@pytest.mark.parametrize("rows, cols", [((1, 3), (1, 2)), ((2, 1), (1, 2)), ((1,), (1, 2)), ((0,), (1,))])
def test_bad_minor_specs(rows, cols):
    with pytest.raises(InvalidSpecError):
        minor(np.eye(2), MinorSpec(rows, cols))


def test_minor_spec_label_round_trip():
    spec = MinorSpec((1, 3), (2, 4))
    assert spec.label == "1,3:2,4"
    assert MinorSpec.parse(spec.label) == spec
    with pytest.raises(InvalidSpecError):
        MinorSpec.parse("1,2")


def test_all_minors_examples():
    np.testing.assert_array_equal(all_minors(np.eye(2)).values, [1, 0, 0, 1, 1])
    assert len(all_minors(np.eye(2))) == 5
    np.testing.assert_array_equal(all_minors(np.zeros((2, 2))).values, np.zeros(5))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_minor_count_matches_enumeration(n):
    from math import comb
    assert minor_count(n) == len(list(minor_specs(n))) == comb(2 * n, n) - 1


def test_minors_array_matches_leibniz():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(4, 4))
    got = minors_array(A)
    want = [leibniz_det(A[np.ix_(np.array(s.rows) - 1, np.array(s.cols) - 1)]) for s in minor_specs(4)]
    np.testing.assert_allclose(got, want, atol=1e-12)
    mv = all_minors(A)
    np.testing.assert_allclose(mv.of_order(4), [np.linalg.det(A)], atol=1e-12)


def test_signed_svd_examples():
    np.testing.assert_allclose(signed_svd(np.diag([2.0, -3.0])).sigma, [3, -2], atol=1e-14)
    np.testing.assert_allclose(signed_svd(np.eye(3)).sigma, [1, 1, 1], atol=1e-14)
    th = 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    np.testing.assert_allclose(signed_svd(rot).sigma, [1, 1], atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.sampled_from([(2, 2), (3, 3), (4, 4)]), elements=finite))
def test_signed_svd_properties(A):
    svd = signed_svd(A)
    n = A.shape[0]
    assert np.linalg.norm(svd.reconstruct() - A) <= 1e-10 * (1 + np.linalg.norm(A))
    for M in (svd.Q, svd.R):
        np.testing.assert_allclose(M @ M.T, np.eye(n), atol=1e-10)
        assert abs(np.linalg.det(M) - 1) < 1e-10
    assert np.all(svd.sigma[:-1] >= 0)
    d = np.linalg.det(A)
    if abs(d) > 1e-8:
        assert np.sign(svd.sigma[-1]) == np.sign(d)
    # oracle: squared singular values are the eigenvalues of A A^T
    ref = np.linalg.eigvalsh(A @ A.T)[::-1]
    np.testing.assert_allclose(svd.sigma ** 2, ref, rtol=0, atol=1e-10 * (1 + np.sum(A * A)))
    np.testing.assert_allclose(signed_singular_values(A), svd.sigma, atol=1e-10)


def test_conformal_split_examples():
    s = conformal_split(np.diag([2.0, -3.0]))
    np.testing.assert_array_equal(s.a_plus, [[-0.5, 0], [0, -0.5]])
    np.testing.assert_array_equal(s.a_minus, [[2.5, 0], [0, -2.5]])
    assert -12 == 0.5 - 12.5  # hand identity 2 det = |A+|^2 - |A-|^2
    zp, zm = conformal_norms(np.diag([2.0, -3.0]))
    assert 2 * -6 == pytest.approx(zp ** 2 - zm ** 2, abs=1e-13)
    np.testing.assert_array_equal(conformal_split(np.array([[1.0, -1.0], [1.0, 1.0]])).a_minus, 0)


def test_conformal_split_needs_2x2():
    with pytest.raises(DimensionError):
        conformal_split(np.eye(3))


@settings(max_examples=80, deadline=None)
@given(arrays(float, (2, 2), elements=finite))
def test_conformal_split_properties(A):
    s = conformal_split(A)
    # exact up to rounding of (a+d)/2 + (a-d)/2
    np.testing.assert_allclose(s.a_plus + s.a_minus, A, rtol=0, atol=4 * np.finfo(float).eps * np.abs(A).max())
    p, q = s.a_plus[0, 0], s.a_plus[1, 0]
    assert s.a_plus[1, 1] == p and s.a_plus[0, 1] == -q
    r, t = s.a_minus[0, 0], s.a_minus[0, 1]
    assert s.a_minus[1, 1] == -r and s.a_minus[1, 0] == t
    nplus, nminus = np.linalg.norm(s.a_plus), np.linalg.norm(s.a_minus)
    assert abs(2 * leibniz_det(A) - (nplus ** 2 - nminus ** 2)) <= 1e-10 * (1 + np.sum(A * A))
    zw = to_complex_pair(A)
    assert abs(abs(zw[0]) ** 2 - 2 * nplus ** 2) <= 1e-10 * (1 + nplus ** 2)
    assert abs(abs(zw[1]) ** 2 - 2 * nminus ** 2) <= 1e-10 * (1 + nminus ** 2)
    np.testing.assert_allclose(from_complex_pair(zw), A, atol=1e-12)


def test_rank_one_has_equal_conformal_norms():
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=(2, 100, 2))
    zp, zm = conformal_norms(u[:, :, None] * v[:, None, :])
    np.testing.assert_allclose(zp, zm, atol=1e-10)


def test_index_examples():
    assert index_of(np.eye(3)) == 0
    assert index_of(-np.eye(3)) == 3
    assert index_of(np.diag([-1.0, 2.0, -5.0])) == 2
    assert index_of(np.diag([1.0, 0.0])) is None
    with pytest.raises(InvalidSpaceError):
        index_of(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_index_array_matches_eigenvalue_count(n):
    rng = np.random.default_rng(n)
    X = rng.uniform(-2, 2, (5000, n, n))
    S = (X + np.swapaxes(X, 1, 2)) / 2
    want = np.sum(np.linalg.eigvalsh(S) < 0, axis=1)
    np.testing.assert_array_equal(index_array(S), want)


def test_index_array_flags_near_singular():
    S = np.array([np.diag([1.0, 1e-13, -2.0]), np.diag([1.0, 2.0, 3.0]), np.zeros((3, 3))])
    np.testing.assert_array_equal(index_array(S), [-1, 0, -1])


def test_numerical_rank():
    assert numerical_rank(np.outer([1.0, 2.0], [3.0, -1.0])) == 1
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.zeros((2, 2))) == 0


@pytest.mark.parametrize("s", [1, 2, 3])
def test_minors_above_rank_vanish(s):
    rng = np.random.default_rng(s)
    A = rng.normal(size=(4, s)) @ rng.normal(size=(s, 4))
    for order in range(s + 1, 5):
        assert np.max(np.abs(minors_array(A, order=order))) < 1e-10 * (1 + np.linalg.norm(A)) ** order
