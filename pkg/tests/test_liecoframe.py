"""Lie algebras and coframe algebras: bracket plumbing, the differential,
the Jacobi <-> d-squared equivalence, derivations, and Koszul curvature."""

import numpy as np
import pytest

import oracle
from g2calc import catalog
from g2calc.forms import DIM, KForm, Metric7, dim_forms
from g2calc.liecoframe import (CoframeAlgebra, JacobiError, LieAlgebra7,
                               derivations, ricci_koszul,
                               sectional_curvature)


@pytest.fixture
def rng():
    return np.random.default_rng(1408)


def random_valid_lie(rng):
    """A genuine Lie algebra: a catalog algebra in a random basis."""
    base = (catalog.build("htype", a=float(rng.uniform(0.3, 2.5))).lie
            if rng.integers(2)
            else catalog.build("triple", a=float(rng.uniform(0.2, 2.0)),
                               b=1.0, c=0.5).lie)
    while True:
        P = np.eye(DIM) + rng.normal(scale=0.4, size=(DIM, DIM))
        if abs(np.linalg.det(P)) > 0.2:
            return oracle.change_basis(base, P)


def random_invalid_tensor(rng):
    """A generic antisymmetric tensor; almost surely violates Jacobi."""
    raw = rng.normal(size=(DIM, DIM, DIM))
    return raw - np.swapaxes(raw, 0, 1)


# ---------------------------------------------------------------- algebra

def test_from_brackets_antisymmetry():
    lie = LieAlgebra7.from_brackets({(1, 2): {3: 2.0}}, check=False)
    x, y = np.eye(DIM)[0], np.eye(DIM)[1]
    assert np.allclose(lie.bracket(x, y), 2.0 * np.eye(DIM)[2])
    assert np.allclose(lie.bracket(y, x), -2.0 * np.eye(DIM)[2])


def test_bracket_bilinearity(rng):
    lie = random_valid_lie(rng)
    x, y, z = rng.normal(size=(3, DIM))
    left = lie.bracket(x + 2.0 * y, z)
    right = lie.bracket(x, z) + 2.0 * lie.bracket(y, z)
    assert np.allclose(left, right)


def test_jacobi_residual_zero_on_valid(rng):
    for _ in range(10):
        assert random_valid_lie(rng).jacobi_residual() < 1e-9


def test_constructor_rejects_jacobi_violations(rng):
    rejected = 0
    for _ in range(20):
        tensor = random_invalid_tensor(rng)
        try:
            LieAlgebra7(tensor)
        except JacobiError:
            rejected += 1
    assert rejected == 20


def test_derivation_residual_flags_non_derivations(rng):
    lie = catalog.build("htype", a=0.7).lie
    basis = derivations(lie)
    for element in basis:
        assert lie.derivation_residual(element) < 1e-9
    generic = rng.normal(size=(DIM, DIM))
    assert lie.derivation_residual(generic) > 1e-3


# ----------------------------------------------------- differential layer

def test_structure_constant_sign_convention():
    # [e1, e2] = c * e3 must give d e3 = -c e1^e2
    lie = LieAlgebra7.from_brackets({(1, 2): {3: 2.0}}, check=False)
    coframe = CoframeAlgebra.from_structure_constants(lie)
    assert coframe.d1[2].term((1, 2)) == -2.0
    assert coframe.d1[0].max_abs() == 0.0


def test_d_matches_naive_leibniz(rng):
    record = catalog.build("triple", a=1.3, b=0.8, c=0.4)
    coframe = record.structure.coframe
    for degree in (1, 2, 3, 4):
        x = KForm(degree, rng.normal(size=dim_forms(degree)))
        expected = oracle.naive_d(coframe, x)
        assert np.allclose(coframe.d(x).coeffs, expected.coeffs,
                           atol=1e-12)


def test_d_is_an_antiderivation(rng):
    coframe = catalog.build("htype", a=0.6).structure.coframe
    for p, q in [(1, 1), (1, 2), (2, 2)]:
        from g2calc.forms import wedge

        x = KForm(p, rng.normal(size=dim_forms(p)))
        y = KForm(q, rng.normal(size=dim_forms(q)))
        left = coframe.d(wedge(x, y))
        right = (wedge(coframe.d(x), y)
                 + (-1) ** p * wedge(x, coframe.d(y)))
        assert np.allclose(left.coeffs, right.coeffs, atol=1e-12)


def test_jacobi_iff_d_squared_zero(rng):
    """The central equivalence, probed from both sides on 50 + 50 cases."""
    for _ in range(50):
        lie = random_valid_lie(rng)
        coframe = CoframeAlgebra.from_structure_constants(lie)
        assert coframe.check_d_squared() < 1e-9
    violations = 0
    for _ in range(50):
        tensor = random_invalid_tensor(rng)
        lie = LieAlgebra7(tensor, check=False)
        assert lie.jacobi_residual() > 1e-6
        coframe = CoframeAlgebra.from_structure_constants(lie)
        if coframe.check_d_squared() > 1e-6:
            violations += 1
        with pytest.raises(JacobiError):
            CoframeAlgebra(coframe.d1, check=True)
    assert violations == 50


def test_bryant_homogeneous_rules_do_not_square_to_zero():
    """This catalog coframe is honest about not being a Lie coframe."""
    record = catalog.build("bryant-homogeneous")
    residual = record.structure.coframe.check_d_squared()
    assert residual == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(JacobiError):
        CoframeAlgebra(record.structure.coframe.d1, check=True)


# -------------------------------------------------------------- curvature

def test_koszul_matches_naive_oracle(rng):
    for seed in range(6):
        structure, lie = oracle.random_closed_structure(
            np.random.default_rng(seed))
        ric, scal = ricci_koszul(lie, structure.metric)
        expected = oracle.naive_koszul_ricci(lie.structure,
                                             structure.metric.matrix)
        assert np.allclose(ric, expected, atol=1e-9)
        ginv = np.linalg.inv(structure.metric.matrix)
        assert scal == pytest.approx(float(np.sum(ginv * expected)),
                                     abs=1e-9)


def test_koszul_ricci_is_symmetric(rng):
    lie = random_valid_lie(rng)
    m = rng.normal(scale=0.3, size=(DIM, DIM))
    metric = Metric7(m @ m.T + DIM * np.eye(DIM))
    ric, _ = ricci_koszul(lie, metric)
    assert np.allclose(ric, ric.T, atol=1e-10)


def test_flat_algebra_is_ricci_flat():
    record = catalog.build("flat")
    ric, scal = ricci_koszul(record.lie, record.structure.metric)
    assert np.max(np.abs(ric)) < 1e-14
    assert abs(scal) < 1e-14


def test_sectional_curvature_flat_and_weighted():
    flat = catalog.build("flat")
    assert sectional_curvature(flat.lie, flat.structure.metric, 1, 2) == \
        pytest.approx(0.0, abs=1e-14)
    for a in (0.25, 1.0, 3.0):
        record = catalog.build("htype", a=a)
        kappa = sectional_curvature(record.lie, record.structure.metric,
                                    3, 5)
        assert kappa == pytest.approx(a / 2.0, abs=1e-12)


# ------------------------------------------------------------ derivations

def test_derivation_space_dimensions():
    expected = {
        "flat": 49,
        "bryant-solvable": 10,
        "triple": 8,
        "aa-rotation": 27,
        "aa-expander": 18,
    }
    for name, dim in expected.items():
        record = catalog.build(name)
        assert derivations(record.lie).shape[0] == dim, name


def test_htype_derivation_dimension_jumps():
    for a, dim in [(0.25, 14), (0.5, 12), (0.4, 10), (1.0, 10), (2.0, 10)]:
        lie = catalog.build("htype", a=a).lie
        assert derivations(lie).shape[0] == dim, a


def test_derivations_are_orthonormal(rng):
    basis = derivations(catalog.build("htype", a=1.0).lie)
    gram = np.einsum("mij,nij->mn", basis, basis)
    assert np.allclose(gram, np.eye(basis.shape[0]), atol=1e-10)
