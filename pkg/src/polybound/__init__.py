"""Exact moment bounds for polynomial maximization over rational polytopes."""

from .bounds import (
    BoundsReport,
    KChooserParams,
    LipschitzEstimate,
    choose_k,
    k_components,
    lipschitz,
    lower_bound,
    nth_root_directed,
    run_pipeline,
    simplex_shift_quality,
    upper_bound,
)
from .decompose import (
    CertificateError,
    HandelmanCertificate,
    HandelmanMonomial,
    LinearFormPower,
    certificate_pow,
    find_certificate,
    handelman_lp,
    monomial_to_linear_forms,
    poly_to_linear_forms,
    verify_certificate,
)
from .exactlp import LPProblem, LPSolution
from .exactlp import solve as solve_lp
from .gridsum import GridSumResult, convergence_report, grid_lower_bound
from .integrate import (
    AffineFactor,
    AffineProductIntegralTable,
    integrate_affine_product,
    integrate_linear_form_power,
    integrate_polynomial,
    integrate_power,
    volume,
)
from .polytope import (
    HRep,
    PolytopeError,
    SimplicialCone,
    Vertex,
    coordinate_width,
    enumerate_vertices,
    lattice_points,
    parse_hrep,
    tangent_cones,
)
from .ratpoly import (
    Polynomial,
    TruncatedSeries,
    parse_polynomial,
    poly_eval,
    poly_pow,
    truncated_product,
)

__version__ = "0.1.0"

__all__ = [
    "AffineFactor",
    "AffineProductIntegralTable",
    "BoundsReport",
    "CertificateError",
    "GridSumResult",
    "HRep",
    "HandelmanCertificate",
    "HandelmanMonomial",
    "KChooserParams",
    "LPProblem",
    "LPSolution",
    "LinearFormPower",
    "LipschitzEstimate",
    "Polynomial",
    "PolytopeError",
    "SimplicialCone",
    "TruncatedSeries",
    "Vertex",
    "certificate_pow",
    "choose_k",
    "convergence_report",
    "coordinate_width",
    "enumerate_vertices",
    "find_certificate",
    "grid_lower_bound",
    "handelman_lp",
    "integrate_affine_product",
    "integrate_linear_form_power",
    "integrate_polynomial",
    "integrate_power",
    "k_components",
    "lattice_points",
    "lipschitz",
    "lower_bound",
    "monomial_to_linear_forms",
    "nth_root_directed",
    "parse_hrep",
    "parse_polynomial",
    "poly_eval",
    "poly_pow",
    "poly_to_linear_forms",
    "run_pipeline",
    "simplex_shift_quality",
    "solve_lp",
    "tangent_cones",
    "truncated_product",
    "upper_bound",
    "verify_certificate",
    "volume",
]
