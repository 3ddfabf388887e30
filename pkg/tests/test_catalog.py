"""Catalog entries: every frozen expected value is recomputed from the
structure and compared, plus the registry plumbing."""

import numpy as np
import pytest

from g2calc import catalog
from g2calc.forms import DIM
from g2calc.g2core import classify, functional_F, torsion
from g2calc.liecoframe import derivations, sectional_curvature
from g2calc.serialize import ricci_eigenvalues
from g2calc.soliton import detect

HTYPE_GRID = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0]
TRIPLE_GRID = [
    (1.0, 1.0, 1.0),
    (np.sqrt(1.5), np.sqrt(1.5), 0.0),
    (np.sqrt(3.0), 0.0, 0.0),
    (1.2, 0.9, np.sqrt(3.0 - 1.44 - 0.81)),
    (2.0, 1.0, 0.5),
]


def build_grid():
    cases = [catalog.build("flat"), catalog.build("bryant-homogeneous"),
             catalog.build("bryant-solvable")]
    cases += [catalog.build("htype", a=a) for a in HTYPE_GRID]
    cases += [catalog.build("triple", a=a, b=b, c=c)
              for a, b, c in TRIPLE_GRID]
    cases += [catalog.build("aa-rotation", a=a) for a in (0.0, 0.5, 1.0, 2.0)]
    cases += [catalog.build("aa-expander", b=b) for b in (0.0, 0.5, 1.0, 2.0)]
    return cases


ALL_RECORDS = build_grid()


def _ids():
    return [f"{r.name}-{'-'.join(f'{v:g}' for v in r.parameters.values())}"
            if r.parameters else r.name for r in ALL_RECORDS]


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_structure_is_closed(record):
    assert record.structure.closed_residual < 1e-12


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_frozen_values(record):
    expected = record.expected
    package = torsion(record.structure)
    if "tau" in expected:
        assert np.allclose(package.tau.coeffs, expected["tau"].coeffs,
                           atol=1e-9)
    if "tau_norm2" in expected:
        assert package.tau_norm2 == pytest.approx(expected["tau_norm2"],
                                                  abs=1e-9)
    if "laplacian" in expected:
        assert np.allclose(package.laplacian.coeffs,
                           expected["laplacian"].coeffs, atol=1e-9)
    if "star_tau_tau" in expected:
        assert np.allclose(package.star_tau_tau.coeffs,
                           expected["star_tau_tau"].coeffs, atol=1e-9)
    if "q_laplacian" in expected:
        assert np.allclose(package.q_laplacian, expected["q_laplacian"],
                           atol=1e-9)
    if "ricci_diag" in expected:
        diag_expected = np.asarray(expected["ricci_diag"], dtype=float)
        assert np.allclose(package.ricci, np.diag(diag_expected),
                           atol=1e-9)
    if "scalar" in expected:
        assert package.scalar == pytest.approx(expected["scalar"],
                                               abs=1e-9)
    if "F" in expected:
        assert functional_F(package) == pytest.approx(expected["F"],
                                                      abs=1e-9)
    if "d_squared_residual" in expected:
        assert record.structure.coframe.check_d_squared() == pytest.approx(
            expected["d_squared_residual"], abs=1e-12)
    if expected.get("parallel"):
        assert package.tau_norm2 < 1e-12


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_frozen_classification_flags(record):
    expected = record.expected
    if not ({"erp", "quadratic"} & set(expected)):
        return
    report = classify(record.structure)
    if "erp" in expected:
        assert report.extremally_ricci_pinched == expected["erp"]
    if "quadratic" in expected:
        assert report.quadratic == expected["quadratic"]


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_frozen_soliton_data(record):
    expected = record.expected
    if record.lie is None:
        assert expected.get("soliton_available", True) is False
        return
    keys = {"soliton_kind", "soliton_c", "soliton_D"} & set(expected)
    if not keys:
        return
    cert = detect(record.structure, record.lie)
    if "soliton_kind" in expected:
        assert cert.kind == expected["soliton_kind"]
    if "soliton_c" in expected:
        assert cert.c == pytest.approx(expected["soliton_c"], abs=1e-9)
    if "soliton_D" in expected:
        assert np.allclose(cert.D, np.asarray(expected["soliton_D"]),
                           atol=1e-9)


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_frozen_derivation_dimension(record):
    if "derivation_dim" in record.expected:
        assert derivations(record.lie).shape[0] == \
            record.expected["derivation_dim"]


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_frozen_sectional_curvature(record):
    if "sectional_35" in record.expected:
        kappa = sectional_curvature(record.lie, record.structure.metric,
                                    3, 5)
        assert kappa == pytest.approx(record.expected["sectional_35"],
                                      abs=1e-9)


@pytest.mark.parametrize("record", ALL_RECORDS, ids=_ids())
def test_frozen_singularity_data(record):
    expected = record.expected
    if expected.get("singularity_time") is None:
        return
    cert = detect(record.structure, record.lie)
    assert cert.kind == "shrinking"
    assert 1.0 / (2.0 * cert.c) == pytest.approx(
        expected["singularity_time"], abs=1e-9)
    a = record.parameters["a"]
    assert expected["leading_exponent"] == pytest.approx(
        3.0 * a / (2.0 * (1.0 + 2.0 * a)), abs=1e-12)


def test_erp_entries_have_two_eigenvalue_ricci():
    for record in ALL_RECORDS:
        if not record.expected.get("erp"):
            continue
        package = torsion(record.structure)
        values = ricci_eigenvalues(package, record.structure.metric)
        pinch = -package.tau_norm2 / 6.0
        expected = np.sort(np.array([pinch] * 3 + [0.0] * 4))
        assert np.allclose(values, expected, atol=1e-9), record.name


def test_steady_generator_of_the_homogeneous_example():
    record = catalog.build("bryant-homogeneous")
    package = torsion(record.structure)
    generator = np.asarray(record.expected["steady_generator"], dtype=float)
    # the Laplacian is exactly the infinitesimal action of the generator
    from g2calc.g2core import theta

    rebuilt = theta(generator, record.structure.phi)
    assert np.allclose(rebuilt.coeffs, package.laplacian.coeffs,
                       atol=1e-9)


# ----------------------------------------------------------- family shape

def test_weighted_family_rejects_sub_branch_parameters():
    with pytest.raises(ValueError):
        catalog.build("htype", a=0.1)


def test_triple_normalization_validation():
    from g2calc.catalog import triple_family

    with pytest.raises(ValueError):
        triple_family(1.0, 1.0, 0.5, normalized=True)
    record = triple_family(1.0, 1.0, 1.0, normalized=True)
    assert record.expected["tau_norm2"] == pytest.approx(24.0)


def test_rotation_family_curvature_ratio():
    for a in (0.5, 1.0, 2.0):
        record = catalog.build("aa-rotation", a=a)
        package = torsion(record.structure)
        assert functional_F(package) == pytest.approx(
            a * a / (a * a + 1.0), abs=1e-9)


def test_expander_family_curvature_ratio_is_one():
    for b in (0.5, 1.0, 2.0):
        record = catalog.build("aa-expander", b=b)
        package = torsion(record.structure)
        assert functional_F(package) == pytest.approx(1.0, abs=1e-9)


def test_registry_plumbing():
    assert catalog.names() == sorted(catalog.names())
    assert set(catalog.names()) == {
        "flat", "htype", "triple", "bryant-homogeneous",
        "bryant-solvable", "aa-rotation", "aa-expander",
    }
    assert catalog.parameter_names("htype") == {"a": 1.0}
    with pytest.raises(KeyError):
        catalog.parameter_names("nope")
    with pytest.raises(ValueError):
        catalog.build("flat", a=1.0)


def test_almost_abelian_convention_mismatch():
    from g2calc.catalog import almost_abelian

    with pytest.raises(ValueError):
        almost_abelian(np.eye(6))
