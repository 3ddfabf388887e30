"""Serialization of structures, reports, and trajectories.

JSON documents describe a structure by its Lie brackets and/or coframe
derivative rules plus the 3-form; reports and soliton certificates have
flat, stable schemas.  All floating-point output — JSON and CSV alike —
is written with 17 significant digits so that dump/ingest round trips
preserve every bit.  CSV uses a header row and LF line endings.
"""

from __future__ import annotations

import math

import numpy as np

from .forms import DIM, KForm, multi_indices
from .g2core import G2Structure
from .liecoframe import CoframeAlgebra, LieAlgebra7

__all__ = [
    "dumps_json",
    "form_to_terms",
    "form_from_terms",
    "lie_to_dict",
    "lie_from_dict",
    "coframe_to_dict",
    "coframe_from_dict",
    "structure_to_dict",
    "structure_from_dict",
    "classification_to_dict",
    "certificate_to_dict",
    "ricci_eigenvalues",
    "trajectory_header",
    "trajectory_rows",
    "bracket_header",
    "bracket_rows",
    "write_csv",
]


def _format_float(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "null"
    return format(float(value), ".17g")


def _escape_string(text):
    out = ['"']
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _emit(obj, indent, level):
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return _escape_string(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_emit(item, indent, level + 1) for item in obj]
        return "[\n" + ",\n".join(inner + p for p in parts) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{_escape_string(str(key))}: {_emit(val, indent, level + 1)}"
            for key, val in obj.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def dumps_json(obj, indent=2):
    """Deterministic JSON text with 17-significant-digit floats."""
    return _emit(obj, indent, 0) + "\n"


def form_to_terms(form):
    """List of {indices, coeff} entries for the nonzero terms of a form."""
    return [
        {"indices": list(indices), "coeff": float(value)}
        for indices, value in form.terms()
    ]


def form_from_terms(degree, terms):
    collected = {}
    for term in terms:
        try:
            indices = tuple(int(i) for i in term["indices"])
            coeff = float(term["coeff"])
        except (KeyError, TypeError) as exc:
            raise ValueError(
                "each form term needs an 'indices' list and a 'coeff' "
                f"number; got {term!r}"
            ) from exc
        collected[indices] = collected.get(indices, 0.0) + coeff
    return KForm.from_terms(degree, collected)


def lie_to_dict(lie):
    """Bracket list of a Lie algebra: entries [e_i, e_j] -> value * e_k."""
    brackets = []
    c = lie.structure
    for i in range(DIM):
        for j in range(i + 1, DIM):
            for k in range(DIM):
                if c[i, j, k] != 0.0:
                    brackets.append({
                        "i": i + 1, "j": j + 1, "k": k + 1,
                        "value": float(c[i, j, k]),
                    })
    return {"dim": DIM, "brackets": brackets}


def lie_from_dict(document):
    if int(document.get("dim", DIM)) != DIM:
        raise ValueError("only 7-dimensional algebras are supported")
    table = {}
    for entry in document.get("brackets", []):
        i, j, k = int(entry["i"]), int(entry["j"]), int(entry["k"])
        target = table.setdefault((i, j), {})
        target[k] = target.get(k, 0.0) + float(entry["value"])
    return LieAlgebra7.from_brackets(table)


def coframe_to_dict(coframe):
    return {"d": [form_to_terms(two_form) for two_form in coframe.d1]}


def coframe_from_dict(document):
    rules = document["d"]
    if len(rules) != DIM:
        raise ValueError("coframe data must list the derivative of all "
                         "7 coframe elements")
    d1 = [form_from_terms(2, terms) for terms in rules]
    return CoframeAlgebra(d1, check=False)


def structure_to_dict(structure, lie=None, name=None, parameters=None):
    """Full document for a structure: coframe rules, optional brackets,
    and the 3-form."""
    document = {}
    if name is not None:
        document["name"] = name
    if parameters:
        document["parameters"] = {k: float(v) for k, v in parameters.items()}
    if lie is not None:
        document["lie"] = lie_to_dict(lie)
    document["coframe"] = coframe_to_dict(structure.coframe)
    document["phi"] = form_to_terms(structure.phi)
    return document


def structure_from_dict(document):
    """Rebuild (structure, lie, name, parameters) from a document.

    The coframe comes from explicit "coframe" rules when present,
    otherwise from the "lie" brackets; at least one is required.  A
    missing "phi" defaults to the canonical 3-form.
    """
    lie = lie_from_dict(document["lie"]) if "lie" in document else None
    if "coframe" in document:
        coframe = coframe_from_dict(document["coframe"])
    elif lie is not None:
        coframe = CoframeAlgebra.from_structure_constants(lie)
    else:
        raise ValueError(
            "structure document needs a 'lie' or 'coframe' section"
        )
    if "phi" in document:
        phi = form_from_terms(3, document["phi"])
    else:
        from .g2core import phi_canonical

        phi = phi_canonical()
    name = document.get("name")
    parameters = dict(document.get("parameters", {}))
    return G2Structure(coframe, phi), lie, name, parameters


def ricci_eigenvalues(package, metric):
    """Eigenvalues of the Ricci endomorphism, ascending.

    The endomorphism is self-adjoint for the metric, so it is symmetrized
    in the orthonormal frame given by the metric square root.
    """
    values, vectors = np.linalg.eigh(metric.matrix)
    root = (vectors * np.sqrt(values)) @ vectors.T
    inv_root = (vectors / np.sqrt(values)) @ vectors.T
    symmetric = root @ package.ricci @ inv_root
    return np.linalg.eigvalsh(0.5 * (symmetric + symmetric.T))


def classification_to_dict(report, package, metric, name=None,
                           parameters=None):
    """Flat JSON-ready dict of a classification report."""
    document = {}
    if name is not None:
        document["name"] = name
    if parameters:
        document["parameters"] = {k: float(v) for k, v in parameters.items()}
    ratio = report.curvature_ratio
    document.update({
        "closed": report.closed,
        "torsion_free": report.torsion_free,
        "eigenform": report.eigenform,
        "eigenvalue": report.eigenvalue,
        "quadratic": report.quadratic,
        "quadratic_ratio": report.quadratic_ratio,
        "admissible": report.admissible,
        "extremally_ricci_pinched": report.extremally_ricci_pinched,
        "tau_norm2": report.tau_norm2,
        "scalar_curvature": package.scalar,
        "curvature_ratio": None if ratio is None or not math.isfinite(ratio)
        else ratio,
        "ricci_eigenvalues": ricci_eigenvalues(package, metric).tolist(),
        "residuals": {k: float(v) for k, v in report.residuals.items()},
    })
    return document


def certificate_to_dict(cert):
    """Flat JSON-ready dict of a soliton certificate (D in row-major
    order)."""
    return {
        "kind": cert.kind,
        "c": float(cert.c),
        "lambda": float(cert.lam),
        "D": np.asarray(cert.D).reshape(-1).tolist(),
        "residual": float(cert.residual),
        "algebraic": bool(cert.algebraic),
    }


def _monomial_labels(degree):
    return ["phi_" + "".join(str(i) for i in indices)
            for indices in multi_indices(degree)]


def trajectory_header():
    return ["t"] + _monomial_labels(3) + [
        "tau_norm2", "R", "F", "closed_residual",
    ]


def trajectory_rows(trajectory):
    """Formatted CSV rows for a Laplacian-flow trajectory."""
    diagnostics = trajectory.diagnostics()
    rows = []
    for k in range(len(trajectory)):
        cells = [trajectory.times[k]]
        cells.extend(trajectory.coeffs[k])
        cells.extend([
            diagnostics["tau_norm2"][k],
            diagnostics["scalar"][k],
            diagnostics["F"][k],
            diagnostics["closed_residual"][k],
        ])
        rows.append([_format_float(v) for v in cells])
    return rows


def bracket_header():
    return ["t", "a", "b", "c", "f", "funcG", "H", "F"]


def bracket_rows(trajectory):
    """Formatted CSV rows for a bracket-flow trajectory."""
    rows = []
    f, func_g, H, F = (trajectory.f, trajectory.funcG, trajectory.H,
                       trajectory.F)
    for k in range(len(trajectory)):
        cells = [trajectory.times[k], *trajectory.points[k],
                 f[k], func_g[k], H[k], F[k]]
        rows.append([_format_float(v) for v in cells])
    return rows


def write_csv(stream, header, rows, trailer=None):
    """Write comma-separated rows with a header and LF endings."""
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(str(cell) for cell in row) + "\n")
    if trailer:
        stream.write(trailer + "\n")
