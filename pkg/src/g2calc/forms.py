"""Exterior algebra over an oriented 7-dimensional inner-product space.

A k-form is stored as a coefficient vector over the C(7,k) strictly
increasing multi-indices, enumerated lexicographically.  The enumeration is
fixed at import time and shared by every operation in the package, so
coefficient vectors of equal degree are always directly comparable.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

DIM = 7

__all__ = [
    "DIM",
    "FormError",
    "KForm",
    "Metric7",
    "dim_forms",
    "form_inner",
    "form_pullback",
    "hodge_star",
    "interior",
    "merge_sign",
    "multi_indices",
    "vol_form",
    "wedge",
]


class FormError(ValueError):
    """Invalid exterior-algebra request (bad degree, shape, or overflow)."""


@lru_cache(maxsize=None)
def multi_indices(degree):
    """All strictly increasing multi-indices of the given degree, lex order."""
    if not 0 <= degree <= DIM:
        raise FormError(f"degree must lie in 0..{DIM}, got {degree}")
    return tuple(combinations(range(1, DIM + 1), degree))


@lru_cache(maxsize=None)
def _positions(degree):
    return {idx: p for p, idx in enumerate(multi_indices(degree))}


def dim_forms(degree):
    return len(multi_indices(degree))


def merge_sign(left, right):
    """Merge two disjoint increasing index tuples.

    Returns (sorted tuple, sign of the sorting permutation), or (None, 0)
    when the tuples share an index.
    """
    merged = left + right
    if len(set(merged)) != len(merged):
        return None, 0
    inversions = 0
    for p in range(len(merged)):
        for q in range(p + 1, len(merged)):
            if merged[p] > merged[q]:
                inversions += 1
    return tuple(sorted(merged)), (-1 if inversions % 2 else 1)


class KForm:
    """Immutable k-form on the fixed 7-dimensional space."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree, coeffs=None):
        n = dim_forms(degree)  # validates the degree
        if coeffs is None:
            data = np.zeros(n)
        else:
            data = np.array(coeffs, dtype=float).reshape(-1)
            if data.shape != (n,):
                raise FormError(
                    f"degree-{degree} form needs {n} coefficients, got {data.shape}"
                )
        data.flags.writeable = False
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "coeffs", data)

    def __setattr__(self, name, value):
        raise AttributeError("KForm is immutable")

    @classmethod
    def zero(cls, degree):
        return cls(degree)

    @classmethod
    def basis(cls, indices):
        indices = tuple(indices)
        pos = _positions(len(indices)).get(indices)
        if pos is None:
            raise FormError(f"{indices} is not an increasing multi-index")
        coeffs = np.zeros(dim_forms(len(indices)))
        coeffs[pos] = 1.0
        return cls(len(indices), coeffs)

    @classmethod
    def from_terms(cls, degree, terms):
        """Build a form from {multi-index: coefficient} (indices 1-based)."""
        coeffs = np.zeros(dim_forms(degree))
        pos = _positions(degree)
        items = terms.items() if hasattr(terms, "items") else terms
        for indices, value in items:
            indices = tuple(indices)
            if indices not in pos:
                raise FormError(f"{indices} is not an increasing multi-index")
            coeffs[pos[indices]] += value
        return cls(degree, coeffs)

    def term(self, indices):
        """Coefficient of one basis monomial."""
        return float(self.coeffs[_positions(self.degree)[tuple(indices)]])

    def terms(self):
        for indices, value in zip(multi_indices(self.degree), self.coeffs):
            if value != 0.0:
                yield indices, float(value)

    def max_abs(self):
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def allclose(self, other, tol=1e-10):
        if not isinstance(other, KForm) or other.degree != self.degree:
            return False
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def _binary(self, other, op):
        if not isinstance(other, KForm):
            return NotImplemented
        if other.degree != self.degree:
            raise FormError(
                f"degree mismatch: {self.degree} vs {other.degree}"
            )
        return KForm(self.degree, op(self.coeffs, other.coeffs))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return KForm(self.degree, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return KForm(self.degree, self.coeffs / float(scalar))

    def __neg__(self):
        return KForm(self.degree, -self.coeffs)

    def __repr__(self):
        parts = []
        for indices, value in self.terms():
            label = "e" + "".join(str(i) for i in indices) if indices else "1"
            parts.append(f"{value:+g}*{label}")
            if len(parts) == 10:
                parts.append("...")
                break
        body = " ".join(parts) if parts else "0"
        return f"KForm({self.degree}, {body})"


@lru_cache(maxsize=None)
def _wedge_table(deg_a, deg_b):
    """Sparse multiplication table for deg_a x deg_b -> deg_a+deg_b."""
    out_pos = _positions(deg_a + deg_b)
    rows_a, rows_b, rows_out, signs = [], [], [], []
    for pa, ia in enumerate(multi_indices(deg_a)):
        for pb, ib in enumerate(multi_indices(deg_b)):
            merged, sign = merge_sign(ia, ib)
            if sign:
                rows_a.append(pa)
                rows_b.append(pb)
                rows_out.append(out_pos[merged])
                signs.append(float(sign))
    return (
        np.array(rows_a, dtype=int),
        np.array(rows_b, dtype=int),
        np.array(rows_out, dtype=int),
        np.array(signs),
    )


def wedge(a, b):
    """Exterior product a ^ b."""
    if a.degree + b.degree > DIM:
        raise FormError(
            f"wedge overflow: degrees {a.degree}+{b.degree} exceed {DIM}"
        )
    ia, ib, iout, signs = _wedge_table(a.degree, b.degree)
    out = np.zeros(dim_forms(a.degree + b.degree))
    np.add.at(out, iout, signs * a.coeffs[ia] * b.coeffs[ib])
    return KForm(a.degree + b.degree, out)


@lru_cache(maxsize=None)
def _interior_table(degree):
    """Per basis vector v: contraction entries (src, dst, sign) for i_{e_v}."""
    table = {v: ([], [], []) for v in range(1, DIM + 1)}
    dst_pos = _positions(degree - 1)
    for p, indices in enumerate(multi_indices(degree)):
        for slot, v in enumerate(indices):
            rest = indices[:slot] + indices[slot + 1 :]
            src, dst, sgn = table[v]
            src.append(p)
            dst.append(dst_pos[rest])
            sgn.append(-1.0 if slot % 2 else 1.0)
    return {
        v: (np.array(s, dtype=int), np.array(d, dtype=int), np.array(g))
        for v, (s, d, g) in table.items()
    }


def interior(vector, a):
    """Interior product i_X a; X is a basis index (1..7) or a 7-vector."""
    if a.degree == 0:
        raise FormError("interior product of a 0-form is undefined")
    table = _interior_table(a.degree)
    out = np.zeros(dim_forms(a.degree - 1))
    if np.isscalar(vector):
        v = int(vector)
        if not 1 <= v <= DIM:
            raise FormError(f"basis index must lie in 1..{DIM}, got {v}")
        src, dst, sgn = table[v]
        np.add.at(out, dst, sgn * a.coeffs[src])
    else:
        weights = np.asarray(vector, dtype=float).reshape(-1)
        if weights.shape != (DIM,):
            raise FormError("contraction vector must have 7 components")
        for v in range(1, DIM + 1):
            if weights[v - 1] != 0.0:
                src, dst, sgn = table[v]
                np.add.at(out, dst, weights[v - 1] * sgn * a.coeffs[src])
    return KForm(a.degree - 1, out)


@lru_cache(maxsize=None)
def _complement_table(degree):
    """For each deg-k index J: (position of its complement, sign of e^J^e^Jc)."""
    comp_pos = _positions(DIM - degree)
    entries = []
    full = set(range(1, DIM + 1))
    for indices in multi_indices(degree):
        comp = tuple(sorted(full - set(indices)))
        _, sign = merge_sign(indices, comp)
        entries.append((comp_pos[comp], float(sign)))
    return tuple(entries)


class Metric7:
    """SPD metric on the 7-space plus an orientation sign.

    Carries the machinery induced on forms: Gram matrices per degree and the
    Hodge star defined by a ^ (star b) = <a, b> vol.
    """

    def __init__(self, matrix, orientation_sign=1):
        g = np.asarray(matrix, dtype=float)
        if g.shape != (DIM, DIM):
            raise FormError("metric must be a 7x7 matrix")
        if np.max(np.abs(g - g.T)) > 1e-10:
            raise FormError("metric must be symmetric")
        g = 0.5 * (g + g.T)
        eigenvalues = np.linalg.eigvalsh(g)
        if eigenvalues.min() <= 0:
            raise FormError("metric must be positive definite")
        if orientation_sign not in (1, -1):
            raise FormError("orientation sign must be +1 or -1")
        self.matrix = g
        self.inverse = np.linalg.inv(g)
        self.det = float(np.linalg.det(g))
        self.sqrt_det = float(np.sqrt(self.det))
        self.orientation_sign = int(orientation_sign)
        self._gram = {}
        self._star = {}

    def gram(self, degree):
        """Gram matrix of the basis monomials of the given degree."""
        if degree not in self._gram:
            if degree == 0:
                gram = np.array([[1.0]])
            else:
                idx = np.array(multi_indices(degree), dtype=int) - 1
                blocks = self.inverse[idx[:, None, :, None], idx[None, :, None, :]]
                gram = np.linalg.det(blocks)
            self._gram[degree] = gram
        return self._gram[degree]

    def star_matrix(self, degree):
        """Matrix of the Hodge star from degree k to degree 7-k."""
        if degree not in self._star:
            gram = self.gram(degree)
            scale = self.orientation_sign * self.sqrt_det
            out = np.zeros((dim_forms(DIM - degree), dim_forms(degree)))
            for p, (comp, sign) in enumerate(_complement_table(degree)):
                out[comp, :] += scale * sign * gram[p, :]
            self._star[degree] = out
        return self._star[degree]

    def volume_form(self):
        return KForm(DIM, [self.orientation_sign * self.sqrt_det])

    def norm(self, vector):
        v = np.asarray(vector, dtype=float)
        return float(np.sqrt(v @ self.matrix @ v))

    def __repr__(self):
        return f"Metric7(diag={np.diag(self.matrix)}, sign={self.orientation_sign})"


def hodge_star(a, metric):
    """Hodge dual of a, defined by b ^ (star a) = <b, a> vol for all b."""
    return KForm(DIM - a.degree, metric.star_matrix(a.degree) @ a.coeffs)


def form_inner(a, b, metric):
    """Inner product of two forms of equal degree."""
    if a.degree != b.degree:
        raise FormError("inner product needs forms of equal degree")
    return float(a.coeffs @ metric.gram(a.degree) @ b.coeffs)


def vol_form(metric):
    return metric.volume_form()


def form_pullback(matrix, a):
    """The form a(M., ..., M.) for a linear map M (7x7 matrix)."""
    if a.degree == 0:
        return KForm(0, a.coeffs)
    M = np.asarray(matrix, dtype=float)
    if M.shape != (DIM, DIM):
        raise FormError("pullback needs a 7x7 matrix")
    idx = np.array(multi_indices(a.degree), dtype=int) - 1
    minors = np.linalg.det(M[idx[:, None, :, None], idx[None, :, None, :]])
    return KForm(a.degree, a.coeffs @ minors)
