import numpy as np
import pytest
from scipy import integrate

from r1lab import integrands as zoo
from r1lab.convexity import ScanConfig, homogeneity_check, isotropy_check
from r1lab.errors import DimensionError, InvalidParameterError, InvalidSpaceError
from r1lab.matrix_core import MinorSpec


def pair(z, w):
    return np.array([z, w], dtype=complex)


def test_truncated_minor_examples():
    det_plus = zoo.det_plus(2)
    assert det_plus(np.diag([1.0, 1.0])) == 1.0
    assert det_plus(np.diag([1.0, -1.0])) == 0.0
    assert zoo.det_minus(2)(np.diag([1.0, -1.0])) == 1.0
    m11 = zoo.truncated_minor(MinorSpec((1,), (1,)), "plus", 2)
    assert m11(np.array([[-3.0, 1.0], [2.0, 5.0]])) == 0.0
    assert m11.name == "minor:1:1:+"


def test_sverak_F_examples():
    assert zoo.sverak_F(0, 2)(np.diag([1.0, 2.0])) == 2.0
    assert zoo.sverak_F(0, 2)(np.diag([1.0, -2.0])) == 0.0
    A = np.diag([-1.0, -2.0])
    assert zoo.sverak_F(2, 2)(A) == 2.0
    assert zoo.det_plus(2)(A) == 2.0 == sum(zoo.sverak_F(k, 2)(A) for k in (0, 2))
    with pytest.raises(InvalidParameterError):
        zoo.sverak_F(3, 2)


def test_sverak_F_rejects_non_symmetric():
    with pytest.raises(InvalidSpaceError):
        zoo.sverak_F(0, 2)(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_burkholder_examples():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2))
    np.testing.assert_allclose(zoo.burkholder(2)(x), np.abs(x[:, 0]) ** 2 - np.abs(x[:, 1]) ** 2, atol=1e-12)
    assert zoo.burkholder(1.5)(pair(1, 0)) == pytest.approx(2.0, abs=1e-15)
    assert zoo.burkholder(3)(pair(1, 2)) == 0.0
    with pytest.raises(InvalidParameterError):
        zoo.burkholder(1.0)


def test_burkholder_plus_examples():
    assert zoo.burkholder_plus(2)(pair(1, 2)) == 0.0
    assert zoo.burkholder_plus(2)(pair(2, 1)) == pytest.approx(3.0)


def test_matrix_burkholder_is_twice_det():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(200, 2, 2))
    lifted = zoo.lift_to_matrix(zoo.burkholder_plus(2))
    np.testing.assert_allclose(lifted(A), 2 * zoo.det_plus(2)(A), atol=1e-12)
    assert lifted.params["pair_scale"] == pytest.approx(2 ** -0.5)


def test_L_examples():
    L = zoo.sverak_L()
    assert L(pair(0, 0)) == 0.0
    assert L(pair(0.3, 0.2)) == pytest.approx(0.05, abs=1e-15)
    assert L(pair(2, 1)) == 3.0


def test_L_continuous_on_switching_curve():
    r = np.linspace(0, 1, 101)
    L = zoo.sverak_L()
    inside = L(np.stack([r, 1 - r], axis=-1).astype(complex))
    np.testing.assert_allclose(inside, 2 * r - 1, atol=1e-12)


def test_identity_hand_case():
    lhs, rhs = zoo.lb_integral_identity(1, 0, 1.5)
    assert lhs == pytest.approx(16 / 3, abs=1e-12)
    assert rhs == pytest.approx(16 / 3, abs=1e-12)
    assert zoo.lb_integral_quadrature(1, 0, 1.5) == pytest.approx(16 / 3, abs=1e-6)


def test_identity_vanishes_on_cone_and_scales():
    p = 1.4
    c = zoo.burkholder_constant(p)
    lhs, rhs = zoo.lb_integral_identity(0.5, c * 0.5j, p)
    assert abs(lhs) < 1e-12 and abs(rhs) < 1e-12
    l1, _ = zoo.lb_integral_identity(0.3 + 0.1j, 0.2, p)
    l2, _ = zoo.lb_integral_identity(0.6 + 0.2j, 0.4, p)
    assert l2 == pytest.approx(2 ** p * l1, rel=1e-12)


def test_identity_against_independent_quadrature():
    # oracle: plain quad of t^(p-1) L(z/t, w/t) with breakpoint at |z|+|w|
    z, w, p = 0.7 - 0.2j, 0.3j, 1.7
    L = zoo.sverak_L()
    t0 = abs(z) + abs(w)
    f = lambda t: t ** (p - 1) * L(pair(z / t, w / t))  # noqa: E731
    head, _ = integrate.quad(f, 1e-300, t0, limit=200, epsrel=1e-11)
    tail, _ = integrate.quad(f, t0, np.inf, limit=200, epsrel=1e-11)
    lhs, rhs = zoo.lb_integral_identity(z, w, p)
    assert head + tail == pytest.approx(rhs, rel=1e-7)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, 2.5])
def test_identity_rejects_divergent_p(p):
    with pytest.raises(InvalidParameterError):
        zoo.lb_integral_identity(1, 0, p)


def test_homogenize_examples():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(100, 2, 2))
    hd = zoo.homogenize(zoo.det_plus(2), 2)
    np.testing.assert_allclose(hd(A), zoo.det_plus(2)(A), atol=1e-12)
    one = zoo.IntegrandHandle("one", "full", lambda a: np.ones(a.shape[:-2]), n=2)
    np.testing.assert_allclose(zoo.homogenize(one, 3)(A), np.linalg.norm(A, axis=(1, 2)) ** 3)
    assert hd(np.zeros((2, 2))) == 0.0


def test_decomposition_identities():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(1000, 3, 3))
    np.testing.assert_allclose(zoo.abs_det(3)(A), zoo.det_plus(3)(A) + zoo.det_minus(3)(A), atol=1e-12)
    S = (A + np.swapaxes(A, 1, 2)) / 2
    F = [zoo.sverak_F(k, 3)(S) for k in range(4)]
    np.testing.assert_allclose(zoo.det_plus(3)(S), F[0] + F[2], atol=1e-12)
    np.testing.assert_allclose(zoo.det_minus(3)(S), F[1] + F[3], atol=1e-12)


def test_dimension_checked():
    with pytest.raises(DimensionError):
        zoo.det_plus(3)(np.eye(2))
    with pytest.raises(DimensionError):
        zoo.burkholder(2)(np.ones(3, dtype=complex))


@pytest.mark.parametrize("ident, n", [
    ("det+", 2), ("det-", 3), ("absdet", 2), ("minor:1,2:1,3:+", 3), ("minor:1:2", 2), ("F:1", 3),
    ("burkholder:1.5", 2), ("burkholder+:3", 2), ("L", 2), ("homog:2:det+", 2), ("neg:det", 2),
    ("pow:2:det+", 2), ("mat:burkholder+:1.2", 2), ("sqnorm", 3),
])
def test_integrand_ids_round_trip(ident, n):
    assert zoo.integrand_from_id(ident, n).name == ident


@pytest.mark.parametrize("ident", ["nope", "F:x", "minor:1", "burkholder:0.5", "minor:1:1:*"])
def test_bad_integrand_ids(ident):
    with pytest.raises(InvalidParameterError):
        zoo.integrand_from_id(ident)


@pytest.mark.parametrize("f", [zoo.det_plus(3), zoo.abs_det(2), zoo.sverak_F(1, 3), zoo.burkholder(1.3),
                               zoo.burkholder_plus(3), zoo.lift_to_matrix(zoo.burkholder_plus(1.5)),
                               zoo.truncated_minor(MinorSpec((1, 2), (2, 3)), "-", 3)],
                         ids=lambda f: f.name)
def test_declared_metadata(f):
    cfg = ScanConfig(seed=11, n_base_points=300)
    assert homogeneity_check(f, cfg).passed
    if f.isotropic:
        assert isotropy_check(f, cfg).passed
