"""Geometric-flow machinery for closed G2-structures on a fixed coframe.

Three layers live here.  A fixed-step Runge-Kutta integrator for the
Laplacian flow  d phi/dt = Laplacian(phi)  on the 35 coefficients of the
evolving 3-form, with structured singularity detection (loss of metric
positivity or runaway torsion).  Closed-form self-similar solutions built
from a soliton certificate, phi(t) = (1 - 2ct)^{3/2} exp(s(t) D) . phi.
And the three-parameter bracket-flow ODE

    a' = (-4a^2 + (4/3)(a^2 + b^2 + c^2)) a   (cyclically in a, b, c)

together with its gradient diagnostics f, funcG, H = f/3 - funcG and the
curvature-ratio functional F = f/funcG.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .forms import DIM, FormError, KForm, form_inner, form_pullback
from .g2core import (
    G2Structure,
    NonPositiveFormError,
    NotClosedError,
    functional_F,
    torsion,
)

__all__ = [
    "TORSION_CAP",
    "FlowTrajectory",
    "BracketPoint",
    "BracketTrajectory",
    "laplacian_flow",
    "soliton_solution",
    "bracket_flow_abc",
    "f_monotonicity_probe",
]

# Squared-torsion threshold past which the flow is declared singular.
TORSION_CAP = 1e12


class _SingularityError(RuntimeError):
    """Internal marker raised when a flow step leaves the healthy regime."""


class FlowTrajectory:
    """Sampled Laplacian-flow solution on a fixed coframe.

    times is an increasing grid and coeffs stores one row of 35 3-form
    coefficients per sample.  If integration stopped early, singular is
    True and t_singular records the first time the integrator could not
    reach; the stored samples end at the last healthy step.
    """

    def __init__(self, coframe, times, coeffs, singular=False, t_singular=None):
        self.coframe = coframe
        self.times = np.asarray(times, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.singular = bool(singular)
        self.t_singular = None if t_singular is None else float(t_singular)
        self._diagnostics = None

    def __len__(self):
        return self.times.size

    def phi_at(self, index):
        return KForm(3, self.coeffs[index])

    @property
    def phis(self):
        return [self.phi_at(k) for k in range(len(self))]

    def structure_at(self, index):
        return G2Structure(self.coframe, self.phi_at(index))

    def diagnostics(self):
        """Per-sample torsion norm, scalar curvature, curvature ratio, and
        closedness residual, as a dict of arrays (cached after first call).

        The curvature ratio is NaN at torsion-free samples, where it is
        undefined.
        """
        if self._diagnostics is None:
            n = len(self)
            tau_norm2 = np.empty(n)
            scalar = np.empty(n)
            ratio = np.empty(n)
            closed = np.empty(n)
            for k in range(n):
                try:
                    structure = self.structure_at(k)
                    package = torsion(structure)
                except (NonPositiveFormError, FormError,
                        np.linalg.LinAlgError):
                    tau_norm2[k] = np.nan
                    scalar[k] = np.nan
                    ratio[k] = np.nan
                    closed[k] = self.coframe.d(self.phi_at(k)).max_abs()
                    continue
                tau_norm2[k] = package.tau_norm2
                scalar[k] = package.scalar
                closed[k] = structure.closed_residual
                try:
                    ratio[k] = functional_F(package)
                except ZeroDivisionError:
                    ratio[k] = np.nan
            self._diagnostics = {
                "tau_norm2": tau_norm2,
                "scalar": scalar,
                "F": ratio,
                "closed_residual": closed,
            }
        return self._diagnostics


def _laplacian_rhs(coframe, coeffs):
    """Time derivative of the flowing 3-form: its Hodge Laplacian.

    Rebuilds the metric from the current form, so positivity loss surfaces
    here as NonPositiveFormError; runaway torsion raises the internal
    singularity marker.
    """
    structure = G2Structure(coframe, KForm(3, coeffs))
    tau = -1.0 * structure.star(coframe.d(structure.star_phi))
    tau_norm2 = form_inner(tau, tau, structure.metric)
    if tau_norm2 > TORSION_CAP:
        raise _SingularityError(
            f"squared torsion {tau_norm2:.3e} exceeds cap {TORSION_CAP:.1e}"
        )
    return coframe.d(tau).coeffs


def laplacian_flow(structure, t_end, dt, sample_every=1):
    """Integrate the Laplacian flow from a closed structure.

    Classical fourth-order Runge-Kutta with fixed step dt up to t_end (the
    last step is shortened to land exactly on t_end).  Integration halts
    early, flagging the trajectory singular, when the evolving form stops
    inducing a positive metric or the squared torsion exceeds TORSION_CAP.
    """
    if dt <= 0:
        raise ValueError("flow time step must be positive")
    if t_end <= 0:
        raise ValueError("flow end time must be positive")
    if sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    if not structure.is_closed():
        raise NotClosedError(
            f"d phi has residual {structure.closed_residual:.3e}; "
            "the Laplacian flow here starts from closed structures only"
        )

    coframe = structure.coframe
    n_full = int(np.floor(t_end / dt + 1e-12))
    steps = [dt] * n_full
    remainder = t_end - n_full * dt
    if remainder > 1e-12 * max(1.0, t_end):
        steps.append(remainder)

    times = [0.0]
    samples = [structure.phi.coeffs.copy()]
    current = structure.phi.coeffs.copy()
    t = 0.0
    singular = False
    t_singular = None

    for index, h in enumerate(steps):
        try:
            k1 = _laplacian_rhs(coframe, current)
            k2 = _laplacian_rhs(coframe, current + 0.5 * h * k1)
            k3 = _laplacian_rhs(coframe, current + 0.5 * h * k2)
            k4 = _laplacian_rhs(coframe, current + h * k3)
        except (_SingularityError, NonPositiveFormError, FormError,
                np.linalg.LinAlgError):
            singular = True
            t_singular = t + h
            break
        candidate = current + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(candidate)):
            singular = True
            t_singular = t + h
            break
        try:
            # only valid states are recorded: a coarse step can jump past
            # the singular time onto a form with no positive metric
            G2Structure(coframe, KForm(3, candidate))
        except (NonPositiveFormError, FormError, np.linalg.LinAlgError):
            singular = True
            t_singular = t + h
            break
        current = candidate
        t += h
        if (index + 1) % sample_every == 0 or index == len(steps) - 1:
            times.append(t)
            samples.append(current.copy())

    return FlowTrajectory(
        coframe,
        np.array(times),
        np.vstack(samples),
        singular=singular,
        t_singular=t_singular,
    )


def _expm(matrix):
    """Matrix exponential by eigen-decomposition.

    Symmetric input uses the orthogonal eigenbasis; otherwise a general
    (assumed diagonalizable) eigenbasis, warning if a noticeable imaginary
    residue had to be discarded.
    """
    matrix = np.asarray(matrix, dtype=float)
    scale = 1.0 + np.max(np.abs(matrix))
    if np.max(np.abs(matrix - matrix.T)) <= 1e-12 * scale:
        w, v = np.linalg.eigh(0.5 * (matrix + matrix.T))
        return (v * np.exp(w)) @ v.T
    w, v = np.linalg.eig(matrix)
    result = v @ np.diag(np.exp(w)) @ np.linalg.inv(v)
    if np.max(np.abs(result.imag)) > 1e-10 * np.max(np.abs(result.real)):
        warnings.warn(
            "matrix exponential has a non-negligible imaginary part; "
            "the generator may not be diagonalizable",
            RuntimeWarning,
        )
    return result.real


def soliton_solution(structure, cert, t):
    """Closed-form self-similar flow solution from a soliton certificate.

    phi(t) = (1 - 2ct)^{3/2} exp(s(t) D) . phi  with
    s(t) = -(1/(2c)) ln(1 - 2ct), and s(t) = t in the steady case; the
    group element acts by basis change (pullback by its inverse).  For a
    shrinking certificate the solution only exists up to T = 1/(2c).
    """
    c = float(cert.c)
    D = np.asarray(cert.D, dtype=float)
    if abs(c) < 1e-14:
        scale = 1.0
        s = float(t)
    else:
        scale = 1.0 - 2.0 * c * t
        if scale <= 0.0:
            raise ValueError(
                f"past singularity time: t = {t} but the solution ends at "
                f"T = {1.0 / (2.0 * c)}"
            )
        s = -np.log1p(-2.0 * c * t) / (2.0 * c)
    group_inverse = _expm(-s * D)
    return scale**1.5 * form_pullback(group_inverse, structure.phi)


@dataclass(frozen=True)
class BracketPoint:
    """A point (a, b, c) of the three-parameter bracket-flow family."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("bracket-flow coordinates must be nonnegative")

    def as_array(self):
        return np.array([self.a, self.b, self.c], dtype=float)


class BracketTrajectory:
    """Sampled solution of the (a, b, c) bracket-flow ODE.

    points holds one (a, b, c) row per time; the gradient diagnostics
    f = (a^2+b^2+c^2)^2, funcG = a^4+b^4+c^4, H = f/3 - funcG and the
    ratio F = f/funcG are exposed as lazily computed arrays (F is NaN at
    the origin, where it is undefined).
    """

    def __init__(self, times, points):
        self.times = np.asarray(times, dtype=float)
        self.points = np.asarray(points, dtype=float)
        self._cache = {}

    def __len__(self):
        return self.times.size

    def point_at(self, index):
        return BracketPoint(*self.points[index])

    @property
    def f(self):
        if "f" not in self._cache:
            self._cache["f"] = np.sum(self.points**2, axis=1) ** 2
        return self._cache["f"]

    @property
    def funcG(self):
        if "funcG" not in self._cache:
            self._cache["funcG"] = np.sum(self.points**4, axis=1)
        return self._cache["funcG"]

    @property
    def H(self):
        return self.f / 3.0 - self.funcG

    @property
    def F(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.funcG > 0, self.f / self.funcG, np.nan)


def _bracket_rhs(p):
    s2 = float(p @ p)
    return (-4.0 * p**2 + (4.0 / 3.0) * s2) * p


def bracket_flow_abc(p0, t_end, dt):
    """Integrate the bracket-flow ODE from the point p0.

    Fixed-step classical Runge-Kutta; the flow is immortal on this family,
    so no singularity guard is needed.  Each coordinate hyperplane is
    invariant: a coordinate starting at zero stays exactly zero.
    """
    if dt <= 0:
        raise ValueError("flow time step must be positive")
    if t_end <= 0:
        raise ValueError("flow end time must be positive")
    if not isinstance(p0, BracketPoint):
        p0 = BracketPoint(*p0)

    n_full = int(np.floor(t_end / dt + 1e-12))
    steps = [dt] * n_full
    remainder = t_end - n_full * dt
    if remainder > 1e-12 * max(1.0, t_end):
        steps.append(remainder)

    current = p0.as_array()
    times = [0.0]
    points = [current.copy()]
    t = 0.0
    for h in steps:
        k1 = _bracket_rhs(current)
        k2 = _bracket_rhs(current + 0.5 * h * k1)
        k3 = _bracket_rhs(current + 0.5 * h * k2)
        k4 = _bracket_rhs(current + h * k3)
        current = current + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        times.append(t)
        points.append(current.copy())
    return BracketTrajectory(np.array(times), np.vstack(points))


def _uniform_prefix(times):
    """Number of leading samples on a uniform grid (the last integrator
    step may be shortened, breaking uniformity at the tail)."""
    if times.size < 2:
        return times.size
    h = times[1] - times[0]
    expected = times[0] + h * np.arange(times.size)
    bad = np.nonzero(np.abs(times - expected) > 1e-9 * max(1.0, times[-1]))[0]
    return times.size if bad.size == 0 else int(bad[0])


def f_monotonicity_probe(trajectory, constant_tol=1e-9):
    """Monotonicity and gradient diagnostics of a bracket-flow trajectory.

    Reports whether the ratio F = f/funcG is non-decreasing along the
    samples, whether it is constant (a soliton ray) or strictly increases
    overall, and how well the derivative identity  d sqrt(f)/dt = 8H
    holds under fourth-order central differencing.  The raw first-order
    claim  Delta f / Delta t  vs  8H  is reported alongside for contrast.
    """
    F = trajectory.F
    times = trajectory.times
    deltas = np.diff(F)
    finite = deltas[np.isfinite(deltas)]
    scale = float(np.nanmax(np.abs(F))) if np.isfinite(F).any() else 1.0
    scale = max(1.0, scale)
    min_delta = float(finite.min()) if finite.size else 0.0
    max_abs_delta = float(np.max(np.abs(finite))) if finite.size else 0.0
    non_decreasing = min_delta >= -1e-12 * scale
    constant = max_abs_delta <= constant_tol * scale
    total = float(F[-1] - F[0]) if np.isfinite(F[0]) else 0.0
    strictly_increasing = bool(non_decreasing and not constant and total > 0)

    report = {
        "non_decreasing": bool(non_decreasing),
        "constant": bool(constant),
        "strictly_increasing": strictly_increasing,
        "start_F": float(F[0]),
        "final_F": float(F[-1]),
        "min_delta": min_delta,
        "max_abs_delta": max_abs_delta,
        "sqrt_f_identity_error": np.nan,
        "f_prime_literal_error": np.nan,
    }

    m = _uniform_prefix(times)
    if m >= 5:
        h = times[1] - times[0]
        sqrt_f = np.sqrt(trajectory.f[:m])
        eight_H = 8.0 * trajectory.H[:m]
        stencil = (
            -sqrt_f[4:] + 8.0 * sqrt_f[3:-1] - 8.0 * sqrt_f[1:-3] + sqrt_f[:-4]
        ) / (12.0 * h)
        report["sqrt_f_identity_error"] = float(
            np.max(np.abs(stencil - eight_H[2:-2]))
        )
        f_values = trajectory.f[:m]
        central = (f_values[2:] - f_values[:-2]) / (2.0 * h)
        report["f_prime_literal_error"] = float(
            np.max(np.abs(central - eight_H[1:-1]))
        )
    return report
