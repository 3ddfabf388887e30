"""Ready-made closed structures with their published invariants.

Each constructor returns an ExampleRecord bundling a structure, the
underlying Lie algebra when there is one, the parameters used, and an
``expected`` map of independently known quantities (torsion 2-form, Ricci
diagonal, curvature ratio, soliton data, ...) that the test suite
recomputes from scratch.  Nothing in ``expected`` is ever fed back into
the computations themselves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .forms import DIM, KForm, form_pullback, wedge
from .g2core import G2Structure, phi_canonical
from .liecoframe import CoframeAlgebra, LieAlgebra7

__all__ = [
    "ExampleRecord",
    "flat",
    "htype_family",
    "triple_family",
    "bryant_homogeneous",
    "bryant_solvable",
    "almost_abelian",
    "aa_rotation_family",
    "aa_expander_family",
    "names",
    "parameter_names",
    "build",
]


@dataclass
class ExampleRecord:
    """A named structure plus its independently published values."""

    name: str
    structure: G2Structure
    lie: LieAlgebra7 | None = None
    parameters: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)


def _structure_from_brackets(brackets):
    lie = LieAlgebra7.from_brackets(brackets)
    coframe = CoframeAlgebra.from_structure_constants(lie)
    return G2Structure(coframe, phi_canonical()), lie


def flat():
    """The abelian algebra with the canonical form: torsion-free and flat."""
    structure, lie = _structure_from_brackets({})
    return ExampleRecord(
        name="flat",
        structure=structure,
        lie=lie,
        expected={
            "parallel": True,
            "tau_norm2": 0.0,
            "scalar": 0.0,
            "ricci_diag": np.zeros(DIM),
        },
    )


def _rho_plus_terms(sign=1.0):
    return {
        (1, 3, 5): sign,
        (1, 4, 6): -sign,
        (2, 3, 6): -sign,
        (2, 4, 5): -sign,
    }


def htype_family(a):
    """One-parameter solvable family indexed by a >= 1/4.

    The nilpotent part is a fixed 2-step bracket; the extra generator acts
    by Diag(a, a, 1/2-a, 1/2-a, 1/2, 1/2).  Values of a below 1/4 repeat
    structures from the branch a' = 1/2 - a >= 1/4, so they are rejected.
    """
    a = float(a)
    if a < 0.25 - 1e-12:
        raise ValueError(
            "family parameter below the canonical branch: use the "
            f"equivalent value {0.5 - a}"
        )
    brackets = {
        (1, 4): {5: -1.0},
        (1, 3): {6: -1.0},
        (2, 3): {5: -1.0},
        (2, 4): {6: 1.0},
    }
    weights = [a, a, 0.5 - a, 0.5 - a, 0.5, 0.5]
    for i in range(1, 7):
        brackets[(i, 7)] = {i: -weights[i - 1]}
    structure, lie = _structure_from_brackets(brackets)

    c_val = 4.0 / 3.0 + 4.0 * a / 3.0 - 8.0 * a * a / 3.0
    D_diag = np.array([
        -2.0 + 2.0 * a * a,
        -2.0 + 2.0 * a * a,
        -1.5 - 2.0 * a + 2.0 * a * a,
        -1.5 - 2.0 * a + 2.0 * a * a,
        -3.5 - 2.0 * a + 4.0 * a * a,
        -3.5 - 2.0 * a + 4.0 * a * a,
        0.0,
    ])
    ricci_diag = np.array([
        -1.0 - 2.0 * a,
        -1.0 - 2.0 * a,
        -2.0 + 2.0 * a,
        -2.0 + 2.0 * a,
        0.0,
        0.0,
        -1.0 + 2.0 * a - 4.0 * a * a,
    ])
    scalar = -7.0 + 2.0 * a - 4.0 * a * a
    if c_val > 1e-9:
        kind = "shrinking"
    elif c_val < -1e-9:
        kind = "expanding"
    else:
        kind = "steady"

    laplacian_terms = {
        (1, 2, 7): -4.0 * a * (1.0 - a),
        (3, 4, 7): -1.0 + 4.0 * a * a,
        (5, 6, 7): 3.0,
    }
    laplacian_terms.update(_rho_plus_terms(3.0))
    expected = {
        "tau": KForm.from_terms(
            2, {(1, 2): 2.0 * (1.0 - a), (3, 4): 1.0 + 2.0 * a, (5, 6): -3.0}
        ),
        "tau_norm2": 14.0 - 4.0 * a + 8.0 * a * a,
        "laplacian": KForm.from_terms(3, laplacian_terms),
        "star_tau_tau": KForm.from_terms(3, {
            (1, 2, 7): -6.0 * (1.0 + 2.0 * a),
            (3, 4, 7): -12.0 * (1.0 - a),
            (5, 6, 7): 4.0 * (1.0 - a) * (1.0 + 2.0 * a),
        }),
        "q_laplacian": c_val * np.eye(DIM) + np.diag(D_diag),
        "ricci_diag": ricci_diag,
        "scalar": scalar,
        "F": scalar**2 / float(np.sum(ricci_diag**2)),
        "soliton_kind": kind,
        "soliton_c": c_val,
        "soliton_D": np.diag(D_diag),
        "erp": abs(a - 1.0) < 1e-12,
        "quadratic": abs(a - 1.0) < 1e-12,
        # 10 generically; 12 when the weights on e3, e4 vanish (a = 1/2)
        # and 14 when all four nilpotent weights coincide (a = 1/4).
        "derivation_dim": {0.25: 14, 0.5: 12}.get(a, 10),
        "sectional_35": a / 2.0,
    }
    if kind == "shrinking":
        expected["singularity_time"] = 1.0 / (2.0 * c_val)
        expected["leading_exponent"] = 3.0 * a / (2.0 * (1.0 + 2.0 * a))
    return ExampleRecord(
        name="htype",
        structure=structure,
        lie=lie,
        parameters={"a": a},
        expected=expected,
    )


def triple_family(a, b, c, normalized=False):
    """Three-parameter unimodular solvable family.

    Three commuting generators act on an abelian 4-dimensional ideal by
    the traceless diagonals Diag(a,a,-a,-a), Diag(b,-b,b,-b) and
    Diag(c,-c,-c,c).  With normalized=True the input must satisfy
    a^2+b^2+c^2 = 3 and a >= b >= c >= 0.
    """
    a, b, c = float(a), float(b), float(c)
    if normalized:
        s2 = a * a + b * b + c * c
        if abs(s2 - 3.0) > 1e-9 or not (a >= b >= c >= 0.0):
            raise ValueError(
                "normalized mode needs a^2+b^2+c^2 = 3 and a >= b >= c >= 0"
            )
    brackets = {}
    acting = {7: [a, a, -a, -a], 1: [b, -b, b, -b], 2: [c, -c, -c, c]}
    for generator, diag in acting.items():
        for k, i in enumerate(range(3, 7)):
            pair = (i, generator) if generator == 7 else (generator, i)
            sign = -1.0 if generator == 7 else 1.0
            if diag[k] != 0.0:
                brackets.setdefault(pair, {})[i] = sign * diag[k]
    structure, lie = _structure_from_brackets(brackets)

    s = a * a + b * b + c * c
    func_g = a**4 + b**4 + c**4
    ricci_diag = np.array([-4 * b * b, -4 * c * c, 0, 0, 0, 0, -4 * a * a])
    laplacian_terms = {
        (3, 4, 7): 4.0 * a * a,
        (5, 6, 7): 4.0 * a * a,
        (1, 3, 5): 4.0 * b * b,
        (1, 4, 6): -4.0 * b * b,
        (2, 3, 6): -4.0 * c * c,
        (2, 4, 5): -4.0 * c * c,
    }
    expected = {
        "tau": KForm.from_terms(2, {
            (3, 4): -2.0 * a, (3, 5): -2.0 * b, (3, 6): 2.0 * c,
            (4, 5): -2.0 * c, (4, 6): -2.0 * b, (5, 6): 2.0 * a,
        }),
        "tau_norm2": 8.0 * s,
        "laplacian": KForm.from_terms(3, laplacian_terms),
        "star_tau_tau": KForm.from_terms(3, {(1, 2, 7): -8.0 * s}),
        "q_laplacian": np.diag([
            4.0 * s / 3.0 - 4.0 * b * b,
            4.0 * s / 3.0 - 4.0 * c * c,
            -2.0 * s / 3.0, -2.0 * s / 3.0, -2.0 * s / 3.0, -2.0 * s / 3.0,
            4.0 * s / 3.0 - 4.0 * a * a,
        ]),
        "ricci_diag": ricci_diag,
        "scalar": -4.0 * s,
        "parallel": s == 0.0,
        "erp": abs(a - b) < 1e-12 and abs(b - c) < 1e-12 and s > 0,
        "quadratic": abs(a - b) < 1e-12 and abs(b - c) < 1e-12 and s > 0,
    }
    if func_g > 0:
        expected["F"] = s * s / func_g
    return ExampleRecord(
        name="triple",
        structure=structure,
        lie=lie,
        parameters={"a": a, "b": b, "c": c},
        expected=expected,
    )


def bryant_homogeneous():
    """Bryant's homogeneous example, given by an invariant coframe.

    The coframe derivative rules do not come from a Lie algebra (d fails
    to square to zero on the full exterior algebra), so derivation-based
    soliton detection is unavailable; the known steady generator is still
    recorded for closed-form flow checks.
    """
    zero = KForm.zero(2)
    d4 = KForm.from_terms(2, {(1, 4): 1.0, (2, 7): 1.0, (3, 6): 1.0})
    d5 = KForm.from_terms(2, {(1, 5): 1.0, (2, 6): 1.0, (3, 7): -1.0})
    d6 = KForm.from_terms(2, {(1, 6): -1.0, (2, 5): 1.0, (3, 4): 1.0})
    d7 = KForm.from_terms(2, {(1, 7): -1.0, (2, 4): 1.0, (3, 5): -1.0})
    coframe = CoframeAlgebra([zero, zero, zero, d4, d5, d6, d7], check=False)
    phi = KForm.from_terms(3, {
        (1, 2, 3): 1.0, (1, 4, 5): 1.0, (1, 6, 7): 1.0, (2, 4, 6): 1.0,
        (2, 5, 7): -1.0, (3, 4, 7): -1.0, (3, 5, 6): -1.0,
    })
    structure = G2Structure(coframe, phi)
    e123 = KForm.from_terms(3, {(1, 2, 3): 1.0})
    expected = {
        "tau": KForm.from_terms(2, {(4, 5): 6.0, (6, 7): -6.0}),
        "tau_norm2": 72.0,
        "laplacian": 12.0 * phi - 12.0 * e123,
        "star_tau_tau": -72.0 * e123,
        "q_laplacian": np.diag([0.0, 0.0, 0.0, -6.0, -6.0, -6.0, -6.0]),
        "ricci_diag": np.array([-12.0, -12.0, -12.0, 0, 0, 0, 0]),
        "scalar": -36.0,
        "F": 3.0,
        "erp": True,
        "quadratic": True,
        "steady_generator": np.diag([0.0, 0.0, 0.0, -6.0, -6.0, -6.0, -6.0]),
        "d_squared_residual": 2.0,
        "soliton_available": False,
    }
    return ExampleRecord(name="bryant-homogeneous", structure=structure,
                         expected=expected)


def bryant_solvable():
    """A solvable group carrying the same steady structure as Bryant's
    homogeneous example, up to scale.

    The 3-form is the pullback of the homogeneous one under the linear
    identification Diag(1, -1/2, -1/2, 1, 1, 1, 1) of the two bases.
    """
    brackets = {
        (1, 2): {2: -2.0}, (1, 3): {3: -2.0},
        (1, 4): {4: -1.0}, (1, 5): {5: -1.0},
        (1, 6): {6: 1.0}, (1, 7): {7: 1.0},
        (2, 6): {5: 1.0}, (2, 7): {4: 1.0},
        (3, 6): {4: 1.0}, (3, 7): {5: -1.0},
    }
    lie = LieAlgebra7.from_brackets(brackets)
    coframe = CoframeAlgebra.from_structure_constants(lie)
    identification = np.diag([1.0, -0.5, -0.5, 1.0, 1.0, 1.0, 1.0])
    psi = form_pullback(identification, bryant_homogeneous().structure.phi)
    structure = G2Structure(coframe, psi)
    return ExampleRecord(
        name="bryant-solvable",
        structure=structure,
        lie=lie,
        expected={
            "erp": True,
            "quadratic": True,
            "soliton_kind": "steady",
            "soliton_c": 0.0,
            "F": 3.0,
        },
    )


# Fast-path basis orders tried before the full search: identity, and the
# interleaving that matches a (3+3)-block operator to the standard
# complex pairing (12)(34)(56).
_PREFERRED_ORDERS = ((0, 1, 2, 3, 4, 5), (0, 3, 1, 4, 2, 5))


def _closes_canonical_form(matrix):
    """Coframe of the almost-abelian algebra with ad e7 = matrix, or None
    if the canonical 3-form is not closed for this basis order."""
    brackets = {}
    for i in range(6):
        column = {j + 1: -matrix[j, i] for j in range(6) if matrix[j, i] != 0.0}
        if column:
            brackets[(i + 1, 7)] = column
    lie = LieAlgebra7.from_brackets(brackets)
    coframe = CoframeAlgebra.from_structure_constants(lie)
    if coframe.d(phi_canonical()).max_abs() > 1e-10:
        return None
    return coframe, lie


def almost_abelian(A, name="almost-abelian", parameters=None, expected=None):
    """Structure on the algebra with abelian ideal <e1..e6> and ad e7 = A.

    The canonical 3-form pairs the ideal's coordinates as (12)(34)(56);
    printed operators in the sources may order the basis differently, so
    when the form is not closed as given, the finitely many reorderings of
    the six coordinates are searched for one that closes it.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (6, 6):
        raise ValueError("the acting operator must be a 6x6 matrix")

    tried = set()
    orders = itertools.chain(_PREFERRED_ORDERS, itertools.permutations(range(6)))
    for order in orders:
        if order in tried:
            continue
        tried.add(order)
        perm = np.asarray(order)
        reordered = A[np.ix_(perm, perm)]
        hit = _closes_canonical_form(reordered)
        if hit is not None:
            coframe, lie = hit
            structure = G2Structure(coframe, phi_canonical())
            return ExampleRecord(
                name=name,
                structure=structure,
                lie=lie,
                parameters=dict(parameters or {}),
                expected=dict(expected or {}),
            )
    raise ValueError(
        "family convention mismatch: no coordinate pairing of the abelian "
        "ideal makes the canonical 3-form closed"
    )


def aa_rotation_family(a):
    """Almost-abelian preset: two copies of a rotation-like 3x3 block.

    The block [[a, -1, 0], [1, -a, 0], [0, 0, 0]] acts on each triple of
    coordinates; the curvature ratio a^2/(a^2+1) vanishes at the flat
    point a = 0, so the ratio has no positive lower bound on this family.
    """
    a = float(a)
    B = np.array([[a, -1.0, 0.0], [1.0, -a, 0.0], [0.0, 0.0, 0.0]])
    A = np.block([[B, np.zeros((3, 3))], [np.zeros((3, 3)), B]])
    expected = {"parallel": a == 0.0}
    if a != 0.0:
        expected["F"] = a * a / (a * a + 1.0)
    return almost_abelian(A, name="aa-rotation", parameters={"a": a},
                          expected=expected)


def aa_expander_family(b):
    """Almost-abelian preset: rotation plus uniform expansion.

    The block [[b, -1, 0], [1, b, 0], [0, 0, -2b]] acts on each triple;
    for b > 0 every member is an expanding soliton with curvature ratio 1.
    """
    b = float(b)
    B = np.array([[b, -1.0, 0.0], [1.0, b, 0.0], [0.0, 0.0, -2.0 * b]])
    A = np.block([[B, np.zeros((3, 3))], [np.zeros((3, 3)), B]])
    expected = {"parallel": b == 0.0}
    if b != 0.0:
        expected["F"] = 1.0
        expected["soliton_kind"] = "expanding"
    return almost_abelian(A, name="aa-expander", parameters={"b": b},
                          expected=expected)


_REGISTRY = {
    "flat": (flat, {}),
    "htype": (htype_family, {"a": 1.0}),
    "triple": (triple_family, {"a": 1.0, "b": 1.0, "c": 1.0}),
    "bryant-homogeneous": (bryant_homogeneous, {}),
    "bryant-solvable": (bryant_solvable, {}),
    "aa-rotation": (aa_rotation_family, {"a": 1.0}),
    "aa-expander": (aa_expander_family, {"b": 1.0}),
}


def names():
    """Sorted catalog names."""
    return sorted(_REGISTRY)


def parameter_names(name):
    """The parameters a catalog entry accepts, with their defaults."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown catalog entry {name!r}; choices: {names()}")
    return dict(_REGISTRY[name][1])


def build(name, **parameters):
    """Construct a catalog entry by name, overriding default parameters."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown catalog entry {name!r}; choices: {names()}")
    constructor, defaults = _REGISTRY[name]
    unknown = set(parameters) - set(defaults)
    if unknown:
        raise ValueError(
            f"catalog entry {name!r} does not take parameters "
            f"{sorted(unknown)}; it accepts {sorted(defaults) or 'none'}"
        )
    merged = {**defaults, **parameters}
    return constructor(**merged)
