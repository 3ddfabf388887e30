"""Seven-dimensional Lie algebras and coframe algebras.

A Lie algebra is stored by its structure tensor c[i, j, k] with
[e_i, e_j] = sum_k c[i, j, k] e_k (0-based internally, 1-based in the
bracket-dictionary constructors).  The dual picture is a coframe algebra: a
choice of derivative d(e^k) of each coframe element, extended to all degrees
by the graded Leibniz rule.  The two are equivalent when the Jacobi identity
holds, but the coframe container also admits non-integrable data, for which
d squared need not vanish.
"""
from __future__ import annotations

import numpy as np

from .forms import (
    DIM,
    FormError,
    KForm,
    dim_forms,
    merge_sign,
    multi_indices,
)

__all__ = [
    "CoframeAlgebra",
    "JacobiError",
    "LieAlgebra7",
    "derivations",
    "ricci_koszul",
    "sectional_curvature",
]


class JacobiError(ValueError):
    """Structure constants fail the Jacobi identity (d squared nonzero)."""

    def __init__(self, residual, triple=None, message=None):
        self.residual = residual
        self.triple = triple
        if message is None:
            message = (
                f"Jacobi identity fails at "
                f"e{triple[0]},e{triple[1]},e{triple[2]} "
                f"with residual {residual:.3e}"
            )
        super().__init__(message)


class LieAlgebra7:
    """A 7-dimensional Lie algebra given by its structure tensor."""

    def __init__(self, structure, check=True, tol=1e-10):
        c = np.asarray(structure, dtype=float)
        if c.shape != (DIM, DIM, DIM):
            raise FormError("structure tensor must have shape (7, 7, 7)")
        if np.max(np.abs(c + np.swapaxes(c, 0, 1))) > tol:
            raise FormError("structure tensor must be antisymmetric in i, j")
        c = 0.5 * (c - np.swapaxes(c, 0, 1))
        self.structure = c
        if check:
            residual, triple = self._worst_jacobi()
            if residual > tol:
                raise JacobiError(residual, triple)

    @classmethod
    def from_brackets(cls, brackets, check=True):
        """Build from {(i, j): {k: coeff}} with 1-based indices, i < j."""
        c = np.zeros((DIM, DIM, DIM))
        for (i, j), out in brackets.items():
            if not (1 <= i <= DIM and 1 <= j <= DIM and i != j):
                raise FormError(f"bad bracket pair ({i}, {j})")
            for k, value in out.items():
                c[i - 1, j - 1, k - 1] += value
                c[j - 1, i - 1, k - 1] -= value
        return cls(c, check=check)

    def bracket(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.einsum("i,j,ijk->k", x, y, self.structure)

    def _jacobiator(self):
        c = self.structure
        # J[i,j,k,:] = [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]
        term = np.einsum("ijm,mkl->ijkl", c, c)
        return (
            term
            + np.transpose(term, (1, 2, 0, 3))
            + np.transpose(term, (2, 0, 1, 3))
        )

    def _worst_jacobi(self):
        jac = np.abs(self._jacobiator()).max(axis=3)
        flat = int(np.argmax(jac))
        i, j, k = np.unravel_index(flat, jac.shape)
        return float(jac[i, j, k]), (i + 1, j + 1, k + 1)

    def jacobi_residual(self):
        return float(np.max(np.abs(self._jacobiator())))

    def derivation_residual(self, D):
        """Max violation of D[x,y] = [Dx,y] + [x,Dy] over basis pairs."""
        D = np.asarray(D, dtype=float)
        c = self.structure
        lhs = np.einsum("ijm,km->ijk", c, D)
        rhs = np.einsum("mi,mjk->ijk", D, c) + np.einsum("mj,imk->ijk", D, c)
        return float(np.max(np.abs(lhs - rhs)))

    def coframe(self):
        return CoframeAlgebra.from_structure_constants(self)

    def __repr__(self):
        n = int(np.count_nonzero(np.triu(np.any(self.structure != 0, axis=2))))
        return f"LieAlgebra7({n} nonzero brackets)"


class CoframeAlgebra:
    """Derivative data on the coframe, extended by the graded Leibniz rule."""

    def __init__(self, d1, check=True, tol=1e-10):
        if len(d1) != DIM:
            raise FormError("need the derivative of all 7 coframe elements")
        forms = []
        for a in d1:
            if not isinstance(a, KForm) or a.degree != 2:
                raise FormError("each coframe derivative must be a 2-form")
            forms.append(a)
        self.d1 = tuple(forms)
        self._d_matrices = {}
        if check:
            residual = self.check_d_squared()
            if residual > tol:
                raise JacobiError(
                    residual,
                    message=(
                        "coframe derivative does not square to zero "
                        f"(residual {residual:.3e})"
                    ),
                )

    @classmethod
    def from_structure_constants(cls, lie):
        """Dual of a Lie algebra: d e^k = -sum_{i<j} c^k_{ij} e^i ^ e^j."""
        c = lie.structure
        d1 = []
        for k in range(DIM):
            terms = {}
            for i in range(DIM):
                for j in range(i + 1, DIM):
                    if c[i, j, k] != 0.0:
                        terms[(i + 1, j + 1)] = -c[i, j, k]
            d1.append(KForm.from_terms(2, terms))
        return cls(d1, check=False)

    def d_matrix(self, degree):
        """Matrix of d from degree k to k+1 (zero map from degree 7)."""
        if degree not in self._d_matrices:
            if degree == DIM:
                mat = np.zeros((1, 1))
            elif degree == 0:
                mat = np.zeros((DIM, 1))
            else:
                out_n = dim_forms(degree + 1)
                mat = np.zeros((out_n, dim_forms(degree)))
                positions = {
                    idx: p for p, idx in enumerate(multi_indices(degree))
                }
                for indices, col in positions.items():
                    # Leibniz: d(e^{i1..ik}) alternates d through the slots.
                    for slot, i in enumerate(indices):
                        rest = indices[:slot] + indices[slot + 1 :]
                        slot_sign = -1.0 if slot % 2 else 1.0
                        for pair, value in self.d1[i - 1].terms():
                            merged, sign = merge_sign(pair, rest)
                            if sign:
                                row = _position_of(merged, degree + 1)
                                mat[row, col] += slot_sign * sign * value
                self._d_matrices[degree] = mat
                return mat
            self._d_matrices[degree] = mat
        return self._d_matrices[degree]

    def d(self, a):
        """Exterior derivative of a form."""
        if a.degree == DIM:
            return KForm.zero(DIM)  # top degree: d vanishes identically
        return KForm(a.degree + 1, self.d_matrix(a.degree) @ a.coeffs)

    def check_d_squared(self):
        """Max entry of d(d(.)) over all degrees; zero iff integrable."""
        worst = 0.0
        for degree in range(DIM - 1):
            if degree == 0:
                continue
            product = self.d_matrix(degree + 1) @ self.d_matrix(degree)
            worst = max(worst, float(np.max(np.abs(product))))
        return worst

    def __repr__(self):
        nonzero = sum(1 for a in self.d1 if a.max_abs() > 0)
        return f"CoframeAlgebra({nonzero} non-closed coframe elements)"


def _position_of(indices, degree):
    return multi_indices(degree).index(indices)


def derivations(lie):
    """Basis of the derivation algebra of a Lie algebra.

    Returns a (m, 7, 7) array whose slices D satisfy
    D[x,y] = [Dx,y] + [x,Dy]; computed as the null space of the linearised
    derivation condition.
    """
    c = lie.structure
    rows = []
    for i in range(DIM):
        for j in range(i + 1, DIM):
            for k in range(DIM):
                # coefficient of D[p, q] in ( [De_i,e_j] + [e_i,De_j]
                #                             - D[e_i,e_j] )_k
                row = np.zeros((DIM, DIM))
                row[:, i] += c[:, j, k]
                row[:, j] += c[i, :, k]
                row[k, :] -= c[i, j, :]
                rows.append(row.reshape(-1))
    system = np.array(rows)
    _, s, vt = np.linalg.svd(system)
    tol = max(system.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)
    tol = max(tol, 1e-9)
    null_mask = np.concatenate([s, np.zeros(vt.shape[0] - s.size)]) <= tol
    basis = vt[null_mask]
    return basis.reshape(-1, DIM, DIM)


def _christoffel(lie, metric):
    """Gamma[i, j, :] = coordinates of the connection derivative of e_j
    along e_i, from the Koszul formula for a left-invariant metric."""
    c = lie.structure
    g = metric.matrix
    # 2 <nabla_i e_j, e_k> = <[e_i,e_j],e_k> - <[e_j,e_k],e_i>
    #                        + <[e_k,e_i],e_j>
    lower = (
        np.einsum("ijm,mk->ijk", c, g)
        - np.einsum("jkm,mi->ijk", c, g)
        + np.einsum("kim,mj->ijk", c, g)
    )
    return 0.5 * np.einsum("ijk,kl->ijl", lower, metric.inverse)


def ricci_koszul(lie, metric):
    """Ricci tensor and scalar curvature of the left-invariant metric.

    Uses the Koszul formula for the connection and contracts the curvature
    R(x,y)z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_{[x,y]} z.
    """
    gamma = _christoffel(lie, metric)
    c = lie.structure
    # riem[i, j, k, l] = component l of R(e_i, e_j) e_k
    riem = (
        np.einsum("jkm,iml->ijkl", gamma, gamma)
        - np.einsum("ikm,jml->ijkl", gamma, gamma)
        - np.einsum("ijm,mkl->ijkl", c, gamma)
    )
    ric = np.einsum("ijki->jk", riem)
    scalar = float(np.einsum("jk,jk->", metric.inverse, ric))
    return ric, scalar


def sectional_curvature(lie, metric, i, j):
    """Sectional curvature of the plane spanned by basis vectors e_i, e_j."""
    if i == j:
        raise FormError("sectional curvature needs two distinct directions")
    gamma = _christoffel(lie, metric)
    c = lie.structure
    i -= 1
    j -= 1
    # R(e_i,e_j)e_j = nabla_i(nabla_j e_j) - nabla_j(nabla_i e_j)
    #                 - nabla_{[e_i,e_j]} e_j
    v = gamma[j, j]  # nabla_j e_j
    w = gamma[i, j]  # nabla_i e_j
    rz = v @ gamma[i] - w @ gamma[j] - c[i, j] @ gamma[:, j]
    g = metric.matrix
    numer = float(rz @ g[:, i])
    gii = g[i, i]
    gjj = g[j, j]
    gij = g[i, j]
    return numer / (gii * gjj - gij * gij)
