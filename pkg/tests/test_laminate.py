import json

import numpy as np
import pytest

from r1lab import integrands as zoo
from r1lab.errors import DomainError, InvalidInputError, NonConvexError, ValidationError
from r1lab.laminate import (
    DiscreteMeasure,
    Extreme1DSpec,
    choquet_decompose_1d,
    default_family,
    extreme_1d,
    jensen_gap,
    test_measure as laminate_test,
)
from r1lab.matrix_core import FULL, SYMMETRIC
from r1lab.prelaminate import HomSplitRequest, diagonal_homogeneity_split, lemma_hom_split, to_measure

I2 = np.eye(2)


def measure(*atoms, space=FULL):
    return DiscreteMeasure(space, len(atoms[0][1]), list(atoms))


def test_measure_validation():
    with pytest.raises(ValidationError, match="weights sum to 1.1"):
        measure((0.5, I2), (0.6, -I2))
    with pytest.raises(ValidationError, match=r"\(1,2\)"):
        measure((1.0, np.array([[1.0, 2.0], [3.0, 1.0]])), space=SYMMETRIC)
    with pytest.raises(ValidationError):
        measure((1.0, I2), (0.0, -I2))


def test_measure_json_round_trip():
    nu = measure((0.25, np.array([[1.0, 2.0], [3.0, 4.0]])), (0.75, -I2))
    again = DiscreteMeasure.from_json(json.loads(nu.dumps()))
    assert again.to_json() == nu.to_json()


def test_jensen_gap_examples():
    f = zoo.det_plus(2)
    assert jensen_gap(f, DiscreteMeasure.dirac(np.array([[1.0, 2.0], [0.0, 3.0]]))) == 0.0
    nu = measure((0.5, np.diag([1.0, 1.0])), (0.5, np.diag([1.0, -1.0])))
    assert jensen_gap(zoo.det(2), nu) == 0.0
    assert jensen_gap(f, nu) == 0.5


def test_jensen_gap_domain_mismatch():
    with pytest.raises(InvalidInputError):
        jensen_gap(zoo.det_plus(3), measure((1.0, I2)))
    with pytest.raises(InvalidInputError):
        jensen_gap(zoo.sverak_F(0, 2), measure((1.0, I2)))


def test_not_a_laminate():
    rep = laminate_test(measure((0.5, I2), (0.5, -I2)))
    assert rep.verdict == "not_laminate"
    assert rep.witness["check"] == "det equality"
    assert abs(abs(rep.witness["gap"]) - 1) <= 1e-12


def test_rank_one_pair_is_consistent():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(2, 2))
    X = np.outer(rng.normal(size=2), rng.normal(size=2))
    rep = laminate_test(measure((0.3, A + X), (0.7, A - 0.3 / 0.7 * X)))
    assert rep.passed
    assert abs(rep.per_integrand_gaps["det"]) <= 1e-12
    assert abs(rep.per_integrand_gaps["neg:det"]) <= 1e-12


def test_prelaminate_measures_consistent():
    P, _, _ = lemma_hom_split(HomSplitRequest(2.5, 1 + 1j, 0.3, 3))
    assert laminate_test(to_measure(P)).passed
    S = np.array([[1.0, 0.5, 0.0], [0.5, -2.0, 0.3], [0.0, 0.3, 0.7]])
    assert laminate_test(to_measure(diagonal_homogeneity_split(S, 2.0, SYMMETRIC))).passed


def test_family_order_irrelevant():
    nu = measure((0.5, I2), (0.5, -I2))
    fam = default_family(FULL, 2)
    assert laminate_test(nu, fam).to_json() == laminate_test(nu, fam[::-1]).to_json()


def test_empty_family():
    with pytest.raises(InvalidInputError):
        laminate_test(measure((1.0, I2)), [])


def test_extreme_1d_examples():
    for y in (0.0, 0.3, 0.9):
        phi = Extreme1DSpec("phi", y)
        assert extreme_1d(phi, y) == 0.0 and extreme_1d(phi, 1.0) == 1.0
        assert extreme_1d(phi, 0.0) + extreme_1d(phi, 1.0) == 1.0
    psi = Extreme1DSpec("psi", 0.5)
    assert extreme_1d(psi, 0.0) == 1.0 and extreme_1d(psi, 0.5) == 0.0
    assert extreme_1d(Extreme1DSpec("psi", 0.0), 0.0) == 1.0
    assert extreme_1d(Extreme1DSpec("phi", 1.0), 0.99) == 0.0
    with pytest.raises(DomainError):
        extreme_1d(psi, 1.5)
    with pytest.raises(DomainError):
        Extreme1DSpec("chi", 0.5)


def test_choquet_x_squared():
    x = np.linspace(0, 1, 1001)
    rep, err = choquet_decompose_1d(x ** 2)
    assert err <= 1e-5
    np.testing.assert_allclose(rep.density, 2.0, atol=1e-8)


def test_choquet_affine_exact():
    x = np.linspace(0, 1, 101)
    rep, err = choquet_decompose_1d(3 - 2 * x)
    assert err <= 1e-12
    assert np.max(np.abs(rep.density)) <= 1e-10


def test_choquet_kink():
    x = np.linspace(0, 1, 201)
    f = extreme_1d(Extreme1DSpec("phi", 0.5), x)
    rep, err = choquet_decompose_1d(f)
    peak = rep.nodes[np.argmax(rep.masses)]
    assert abs(peak - 0.5) <= 1 / 200
    assert err <= 1 / 200


def test_choquet_rejects_concave_with_index():
    x = np.linspace(0, 1, 11)
    with pytest.raises(NonConvexError) as exc:
        choquet_decompose_1d(-(x - 0.5) ** 2)
    assert exc.value.index == 1


def test_extreme_weights_reconstruct():
    x = np.linspace(0, 1, 101)
    f = (x - 0.3) ** 2 + 0.1
    rep, _ = choquet_decompose_1d(f)
    weights = rep.extreme_weights()
    assert all(w >= -1e-12 for _, w in weights)
    total = sum(w * extreme_1d(s, x) for s, w in weights)
    np.testing.assert_allclose(total, f, atol=1e-12)


def test_choquet_error_is_second_order():
    errs = []
    for N in (50, 100, 200):
        x = np.linspace(0, 1, N + 1)
        errs.append(choquet_decompose_1d(np.exp(x), np.exp)[1])
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5
