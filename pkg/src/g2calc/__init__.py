"""Computational calculus of closed G2-structures on 7-dimensional Lie
algebras and invariant coframe algebras.

The package covers the full pipeline: exterior algebra over a fixed
7-dimensional coframe, Chevalley-Eilenberg differentials, the metric and
volume form induced by a positive 3-form, torsion and its Laplacian,
Ricci curvature by three independent routes plus a Koszul cross-check,
classification of the torsion quadratic type, Laplacian-soliton
detection, and numerical integration of the Laplacian and bracket flows.
"""

from .forms import (DIM, FormError, KForm, Metric7, dim_forms, form_inner,
                    form_pullback, hodge_star, interior, multi_indices,
                    vol_form, wedge)
from .liecoframe import (CoframeAlgebra, JacobiError, LieAlgebra7,
                         derivations, ricci_koszul, sectional_curvature)
from .g2core import (ADMISSIBLE_QUADRATIC_RATIOS, ClassificationReport,
                     G2Structure, NonPositiveFormError, NotClosedError,
                     StabilizerDecomposition, TorsionPackage, classify,
                     functional_F, g2_decomposition, i_map, induce_metric,
                     j_map, metric_transpose, phi_canonical, q_operator,
                     ricci_from_ij_maps, ricci_from_q_operators,
                     ricci_with_trace_terms, skew_g, sym_g, theta, torsion)
from .soliton import SolitonCertificate, detect, verify_selfsimilar
from .flow import (BracketPoint, BracketTrajectory, FlowTrajectory,
                   bracket_flow_abc, f_monotonicity_probe, laplacian_flow,
                   soliton_solution)
from . import catalog, serialize

__version__ = "0.1.0"

__all__ = [
    "DIM", "FormError", "KForm", "Metric7", "dim_forms", "form_inner",
    "form_pullback", "hodge_star", "interior", "multi_indices", "vol_form",
    "wedge",
    "CoframeAlgebra", "JacobiError", "LieAlgebra7", "derivations",
    "ricci_koszul", "sectional_curvature",
    "ADMISSIBLE_QUADRATIC_RATIOS", "ClassificationReport", "G2Structure",
    "NonPositiveFormError", "NotClosedError", "StabilizerDecomposition",
    "TorsionPackage", "classify", "functional_F", "g2_decomposition",
    "i_map", "induce_metric", "j_map", "metric_transpose", "phi_canonical",
    "q_operator", "ricci_from_ij_maps", "ricci_from_q_operators",
    "ricci_with_trace_terms", "skew_g", "sym_g", "theta", "torsion",
    "SolitonCertificate", "detect", "verify_selfsimilar",
    "BracketPoint", "BracketTrajectory", "FlowTrajectory",
    "bracket_flow_abc", "f_monotonicity_probe", "laplacian_flow",
    "soliton_solution",
    "catalog", "serialize",
    "__version__",
]
