"""Closed G2-structures on a 7-dimensional coframe algebra.

A positive 3-form phi induces a metric and orientation; the Hodge star,
torsion 2-form, Hodge Laplacian of phi, and the Ricci curvature are all
computed from exterior algebra alone.  The key tool is the infinitesimal
gl(7) action theta on forms, which splits gl(7) into the stabilizer algebra
of phi (14-dimensional) and a complementary module on which the action is
injective; torsion quantities become matrices through that splitting.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .forms import (
    DIM,
    FormError,
    KForm,
    Metric7,
    dim_forms,
    form_inner,
    form_pullback,
    hodge_star,
    interior,
    wedge,
)

__all__ = [
    "ClassificationReport",
    "G2Structure",
    "NonPositiveFormError",
    "NotClosedError",
    "StabilizerDecomposition",
    "TorsionPackage",
    "classify",
    "functional_F",
    "g2_decomposition",
    "i_map",
    "induce_metric",
    "j_map",
    "metric_transpose",
    "phi_canonical",
    "q_operator",
    "ricci_from_q_operators",
    "ricci_from_ij_maps",
    "ricci_with_trace_terms",
    "sym_g",
    "skew_g",
    "theta",
    "torsion",
]

ADMISSIBLE_QUADRATIC_RATIOS = (0.0, 1.0 / 6.0, 0.5)


class NonPositiveFormError(ValueError):
    """The 3-form does not induce a positive definite metric."""


class NotClosedError(ValueError):
    """The 3-form is not closed under the coframe differential."""


def phi_canonical():
    """The reference positive 3-form, inducing the standard metric."""
    return KForm.from_terms(
        3,
        {
            (1, 2, 7): 1.0,
            (3, 4, 7): 1.0,
            (5, 6, 7): 1.0,
            (1, 3, 5): 1.0,
            (1, 4, 6): -1.0,
            (2, 3, 6): -1.0,
            (2, 4, 5): -1.0,
        },
    )


def induce_metric(phi):
    """Metric and volume form induced by a positive 3-form.

    Contract phi twice and wedge with itself to get a bilinear form valued
    in top-degree forms, then normalise the determinant away.  Raises
    NonPositiveFormError when the 3-form fails to be definite.
    """
    if phi.degree != 3:
        raise FormError("a G2-structure is given by a 3-form")
    contractions = [interior(i, phi) for i in range(1, DIM + 1)]
    B = np.empty((DIM, DIM))
    for i in range(DIM):
        wi = contractions[i]
        for j in range(i, DIM):
            top = wedge(wedge(wi, contractions[j]), phi)
            B[i, j] = B[j, i] = top.coeffs[0] / 6.0
    det = float(np.linalg.det(B))
    if abs(det) < 1e-30:
        raise NonPositiveFormError("induced bilinear form is degenerate")
    sigma = 1 if det > 0 else -1
    g = sigma * B / abs(det) ** (1.0 / 9.0)
    eigenvalues = np.linalg.eigvalsh(g)
    if eigenvalues.min() <= 0:
        raise NonPositiveFormError(
            "3-form is not positive: induced metric has eigenvalues "
            f"{np.array2string(eigenvalues, precision=3)}"
        )
    metric = Metric7(g, orientation_sign=sigma)
    return metric, metric.volume_form()


def theta(A, psi):
    """Infinitesimal action of gl(7) on forms.

    theta(A) psi = - sum over slots of psi(..., A . , ...); equivalently
    the derivation sending the coframe element e^i to -sum_j A[i,j] e^j.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (DIM, DIM):
        raise FormError("theta needs a 7x7 matrix")
    if psi.degree == 0:
        return KForm.zero(0)
    out = np.zeros(dim_forms(psi.degree))
    basis_one = [KForm.basis((j,)) for j in range(1, DIM + 1)]
    for i in range(DIM):
        if not np.any(A[i]):
            continue
        contraction = interior(i + 1, psi)
        for j in range(DIM):
            if A[i, j] != 0.0:
                out -= A[i, j] * wedge(basis_one[j], contraction).coeffs
    return KForm(psi.degree, out)


def metric_transpose(A, metric):
    """Adjoint of A with respect to the metric: g^{-1} A^T g."""
    A = np.asarray(A, dtype=float)
    return metric.inverse @ A.T @ metric.matrix


def sym_g(A, metric):
    """Metric-symmetric part of an operator."""
    return 0.5 * (np.asarray(A, dtype=float) + metric_transpose(A, metric))


def skew_g(A, metric):
    """Metric-skew part of an operator."""
    return 0.5 * (np.asarray(A, dtype=float) - metric_transpose(A, metric))


def _sqrtm_spd(g):
    values, vectors = np.linalg.eigh(g)
    root = vectors @ np.diag(np.sqrt(values)) @ vectors.T
    inv_root = vectors @ np.diag(1.0 / np.sqrt(values)) @ vectors.T
    return root, inv_root


class G2Structure:
    """A 3-form on a coframe algebra together with its induced geometry."""

    def __init__(self, coframe, phi):
        if phi.degree != 3:
            raise FormError("a G2-structure is given by a 3-form")
        self.coframe = coframe
        self.phi = phi
        self.metric, self.volume = induce_metric(phi)
        self.star_phi = hodge_star(phi, self.metric)
        self.closed_residual = coframe.d(phi).max_abs()
        self._half = None
        self._action_matrix = None
        self._action_conj = None
        self._action_pinv = None

    def is_closed(self, tol=1e-9):
        return self.closed_residual <= tol

    def d(self, a):
        return self.coframe.d(a)

    def star(self, a):
        return hodge_star(a, self.metric)

    def _metric_half(self):
        if self._half is None:
            self._half = _sqrtm_spd(self.metric.matrix)
        return self._half

    def action_matrix(self):
        """Matrix of A -> theta(A) phi, columns indexed by row-major vec."""
        if self._action_matrix is None:
            cols = np.empty((DIM * DIM, dim_forms(3)))
            for i in range(DIM):
                contraction = interior(i + 1, self.phi)
                for j in range(DIM):
                    unit = KForm.basis((j + 1,))
                    cols[i * DIM + j] = -wedge(unit, contraction).coeffs
            self._action_matrix = cols.T
        return self._action_matrix

    def _conjugated_action(self):
        """Action matrix in variables where the trace form is Frobenius."""
        if self._action_conj is None:
            root, inv_root = self._metric_half()
            self._action_conj = self.action_matrix() @ np.kron(inv_root, root)
        return self._action_conj

    def _conjugated_pinv(self):
        if self._action_pinv is None:
            self._action_pinv = np.linalg.pinv(
                self._conjugated_action(), rcond=1e-10
            )
        return self._action_pinv

    def pullback(self, matrix):
        """The structure with 3-form phi(M., M., M.) on the same coframe."""
        return G2Structure(self.coframe, form_pullback(matrix, self.phi))

    def __repr__(self):
        closed = "closed" if self.is_closed() else "non-closed"
        return f"G2Structure({closed}, |dphi|={self.closed_residual:.2e})"


def q_operator(structure, psi, tol=1e-9):
    """The unique operator Q orthogonal to the stabilizer algebra of phi
    (for the trace pairing twisted by the metric) with theta(Q) phi = psi.

    Solved as the minimal-norm least-squares problem in conjugated
    variables, where orthogonality to the stabilizer is the ordinary
    Frobenius one.
    """
    if psi.degree != 3:
        raise FormError("q_operator expects a 3-form")
    root, inv_root = structure._metric_half()
    vec_conj = structure._conjugated_pinv() @ psi.coeffs
    Q = inv_root @ vec_conj.reshape(DIM, DIM) @ root
    reconstruction = theta(Q, structure.phi)
    residual = float(np.max(np.abs(reconstruction.coeffs - psi.coeffs)))
    scale = max(1.0, psi.max_abs())
    if residual > tol * scale:
        raise FormError(
            "3-form is not in the image of the infinitesimal action "
            f"(residual {residual:.3e})"
        )
    return Q


@dataclass(frozen=True)
class StabilizerDecomposition:
    """Splitting of gl(7) adapted to phi.

    stabilizer: the 14-dimensional annihilator of phi under theta;
    scalar / vectorial / traceless: the 1-, 7-, and 27-dimensional pieces of
    its orthogonal complement (scalar matrices, metric-skew complement,
    traceless metric-symmetric matrices).  Bases are orthonormal for the
    metric-twisted trace pairing.
    """

    stabilizer: np.ndarray
    scalar: np.ndarray
    vectorial: np.ndarray
    traceless: np.ndarray

    def complement_basis(self):
        return np.concatenate([self.scalar, self.vectorial, self.traceless])


def g2_decomposition(structure):
    """Compute the stabilizer splitting of gl(7) for a G2-structure."""
    root, inv_root = structure._metric_half()
    conj = structure._conjugated_action()
    _, s, vt = np.linalg.svd(conj)
    tol = max(s) * 1e-9
    rank = int(np.sum(s > tol))
    null_rows = vt[rank:]  # orthonormal basis of the conjugated stabilizer

    def back(rows):
        mats = rows.reshape(-1, DIM, DIM)
        return np.einsum("ij,njk,kl->nil", inv_root, mats, root)

    # vectorial part: skew matrices orthogonal to the stabilizer
    skew_basis = []
    for i in range(DIM):
        for j in range(i + 1, DIM):
            K = np.zeros((DIM, DIM))
            K[i, j] = 1.0 / np.sqrt(2.0)
            K[j, i] = -1.0 / np.sqrt(2.0)
            skew_basis.append(K.reshape(-1))
    skew_basis = np.array(skew_basis)
    projected = skew_basis - (skew_basis @ null_rows.T) @ null_rows
    _, ps, pvt = np.linalg.svd(projected)
    vectorial_rows = pvt[: int(np.sum(ps > 1e-9))]

    # traceless symmetric part
    sym_rows = []
    for i in range(DIM):
        for j in range(i + 1, DIM):
            S = np.zeros((DIM, DIM))
            S[i, j] = S[j, i] = 1.0 / np.sqrt(2.0)
            sym_rows.append(S.reshape(-1))
    for k in range(1, DIM):
        S = np.zeros((DIM, DIM))
        S[:k, :k] = np.eye(k) / k
        S[k, k] = -1.0
        S /= np.linalg.norm(S)
        sym_rows.append(S.reshape(-1))
    sym_rows = np.array(sym_rows)
    _, _, svt = np.linalg.svd(sym_rows)
    traceless_rows = svt[:27]  # orthonormalised traceless-symmetric basis

    scalar_rows = (np.eye(DIM) / np.sqrt(DIM)).reshape(1, -1)
    return StabilizerDecomposition(
        stabilizer=back(null_rows),
        scalar=back(scalar_rows),
        vectorial=back(vectorial_rows),
        traceless=back(traceless_rows),
    )


def i_map(structure, h):
    """Linearisation of the metric's dependence on phi: symmetric operators
    into 3-forms, h -> -2 theta(h) phi."""
    return -2.0 * theta(h, structure.phi)


def j_map(structure, psi):
    """Partial inverse of i_map on 3-forms, valued in symmetric operators."""
    Q = q_operator(structure, psi)
    return -2.0 * np.trace(Q) * np.eye(DIM) - 4.0 * sym_g(Q, structure.metric)


@dataclass
class TorsionPackage:
    """Torsion data of a closed G2-structure.

    tau: the torsion 2-form (d star phi = tau ^ phi);
    tau_matrix: the associated metric-raised operator;
    laplacian: the Hodge Laplacian of phi (equal to d tau);
    q_laplacian, q_star_tau_tau: operators representing d tau and
    star(tau ^ tau) through the infinitesimal action;
    ricci: the Ricci endomorphism; scalar: its trace.
    """

    tau: KForm
    tau_matrix: np.ndarray
    tau_norm2: float
    laplacian: KForm
    star_tau_tau: KForm
    q_laplacian: np.ndarray
    q_star_tau_tau: np.ndarray
    ricci: np.ndarray
    scalar: float
    residuals: dict = field(default_factory=dict)

    def ricci_tensor(self, metric):
        """Ricci as a symmetric bilinear form (lowered indices)."""
        return metric.matrix @ self.ricci


def _two_form_matrix(tau, metric):
    """Metric-raised operator of a 2-form: x -> g^{-1} tau(x, .)."""
    T = np.zeros((DIM, DIM))
    for (i, j), value in tau.terms():
        T[i - 1, j - 1] = value
        T[j - 1, i - 1] = -value
    return metric.inverse @ T


def torsion(structure, tol=1e-9):
    """Full torsion package of a closed G2-structure.

    Raises NotClosedError when d phi fails to vanish; the torsion 2-form of
    a closed structure is minus the Hodge dual of d star phi.
    """
    if not structure.is_closed(tol):
        raise NotClosedError(
            f"d phi has residual {structure.closed_residual:.3e}; "
            "torsion calculus here applies to closed structures only"
        )
    metric = structure.metric
    d_star_phi = structure.d(structure.star_phi)
    tau = -1.0 * hodge_star(d_star_phi, metric)
    tau_matrix = _two_form_matrix(tau, metric)
    tau_norm2 = form_inner(tau, tau, metric)
    laplacian = structure.d(tau)
    star_tau_tau = hodge_star(wedge(tau, tau), metric)
    q_laplacian = q_operator(structure, laplacian)
    q_star = q_operator(structure, star_tau_tau)
    ricci = ricci_from_q_operators(
        structure, tau_norm2, q_laplacian, tau_matrix
    )
    scalar = float(np.trace(ricci))
    residuals = {
        "tau_defining": (d_star_phi - wedge(tau, structure.phi)).max_abs(),
        "q_laplacian_skew": float(
            np.max(np.abs(skew_g(q_laplacian, metric)))
        ),
        "trace_q_laplacian": abs(np.trace(q_laplacian) + tau_norm2 / 3.0),
        "trace_q_star_tau_tau": abs(np.trace(q_star) - tau_norm2 / 3.0),
    }
    return TorsionPackage(
        tau=tau,
        tau_matrix=tau_matrix,
        tau_norm2=tau_norm2,
        laplacian=laplacian,
        star_tau_tau=star_tau_tau,
        q_laplacian=q_laplacian,
        q_star_tau_tau=q_star,
        ricci=ricci,
        scalar=scalar,
        residuals=residuals,
    )


def ricci_from_q_operators(structure, tau_norm2, q_laplacian, tau_matrix):
    """Ricci endomorphism from the operator of the Laplacian and the square
    of the torsion operator."""
    return (
        -(tau_norm2 / 6.0) * np.eye(DIM)
        + q_laplacian
        - 0.5 * tau_matrix @ tau_matrix
    )


def ricci_from_ij_maps(structure, package=None):
    """Ricci endomorphism through the i/j maps (independent route)."""
    package = package or torsion(structure)
    combination = package.laplacian - 0.5 * package.star_tau_tau
    j_val = j_map(structure, combination)
    return 0.25 * package.tau_norm2 * np.eye(DIM) - 0.25 * j_val


def ricci_with_trace_terms(structure, package=None):
    """Ricci endomorphism written purely in q-operators and their traces
    (independent route)."""
    package = package or torsion(structure)
    t2 = package.tau_norm2
    qd = package.q_laplacian
    qs = package.q_star_tau_tau
    coefficient = (
        0.25 * t2 + 0.5 * np.trace(qd) - 0.25 * np.trace(qs)
    )
    return coefficient * np.eye(DIM) + qd - 0.5 * qs


def functional_F(package):
    """Scale-invariant curvature ratio: scalar^2 over |Ricci|^2.

    Bounded between 0 and 7; equals 7 exactly when the metric is Einstein.
    Undefined for torsion-free structures, where Ricci vanishes.
    """
    ric = package.ricci
    denom = float(np.sum(ric * ric.T))
    if denom < 1e-30:
        raise ZeroDivisionError(
            "curvature ratio undefined: Ricci vanishes (torsion-free)"
        )
    if denom < 1e-6:
        warnings.warn(
            "Ricci is close to zero; curvature ratio may be ill-conditioned"
        )
    return package.scalar**2 / denom


@dataclass
class ClassificationReport:
    """Algebraic classification of a closed G2-structure."""

    closed: bool
    torsion_free: bool
    eigenform: bool
    eigenvalue: float | None
    quadratic: bool
    quadratic_ratio: float | None
    admissible: bool
    extremally_ricci_pinched: bool
    tau_norm2: float
    curvature_ratio: float | None
    residuals: dict


def classify(structure, package=None, tol=1e-8):
    """Classify a closed structure: eigenform of the Laplacian, quadratic
    torsion relation and its ratio, and extremal Ricci pinching."""
    if package is None:
        package = torsion(structure)
    t2 = package.tau_norm2
    torsion_free = t2 < 1e-12
    residuals = {}

    # eigenform: laplacian = c phi, least squares in the fixed coframe basis
    phi_c = structure.phi.coeffs
    lap_c = package.laplacian.coeffs
    c = float(phi_c @ lap_c / (phi_c @ phi_c))
    eig_residual = float(np.max(np.abs(lap_c - c * phi_c)))
    eigenform = eig_residual <= tol * max(1.0, np.max(np.abs(lap_c)))
    residuals["eigenform"] = eig_residual

    # quadratic relation: q_laplacian = ((6q-1)/21)|tau|^2 I + q tau_hat^2
    quadratic = False
    ratio = None
    if torsion_free:
        quadratic = True  # vacuously, with indeterminate ratio
        residuals["quadratic"] = 0.0
    else:
        lhs = package.q_laplacian + (t2 / 21.0) * np.eye(DIM)
        basis = (6.0 * t2 / 21.0) * np.eye(DIM) + (
            package.tau_matrix @ package.tau_matrix
        )
        denom = float(np.sum(basis * basis))
        ratio = float(np.sum(lhs * basis) / denom)
        quad_residual = float(np.max(np.abs(lhs - ratio * basis)))
        residuals["quadratic"] = quad_residual
        quadratic = quad_residual <= tol * max(1.0, np.max(np.abs(lhs)))
        if not quadratic:
            ratio = None

    admissible = quadratic and (
        torsion_free
        or any(abs(ratio - r) < 1e-6 for r in ADMISSIBLE_QUADRATIC_RATIOS)
    )
    erp = (
        quadratic
        and not torsion_free
        and ratio is not None
        and abs(ratio - 1.0 / 6.0) < 1e-6
    )
    if erp:
        residuals["extremally_ricci_pinched"] = float(
            np.max(
                np.abs(
                    package.q_laplacian
                    - (package.tau_matrix @ package.tau_matrix) / 6.0
                )
            )
        )

    ratio_f = None
    if not torsion_free:
        ratio_f = functional_F(package)

    return ClassificationReport(
        closed=bool(structure.is_closed()),
        torsion_free=bool(torsion_free),
        eigenform=bool(eigenform),
        eigenvalue=c if eigenform else None,
        quadratic=bool(quadratic),
        quadratic_ratio=ratio,
        admissible=bool(admissible),
        extremally_ricci_pinched=bool(erp),
        tau_norm2=t2,
        curvature_ratio=ratio_f,
        residuals=residuals,
    )
