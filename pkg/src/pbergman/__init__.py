"""Computations in p-integrable Bergman spaces of bounded Reinhardt-type
domains: exact and sampled p-norms, min-norm kernel estimates, weighted
composition isometries, equimeasurability diagnostics, and reconstruction of
the underlying point map from an operator given as a black box.
"""

from ._version import __version__
from .errors import (
    BranchError,
    ConfigError,
    DegenerateDomainError,
    DivergentIntegralError,
    NoBasisSupportError,
    NonInvertibleMapError,
    PBergmanError,
    PoleEvaluationError,
    PoleProximityWarning,
    UnsupportedDomainError,
)
from .functions import (
    AnalyticFunction,
    HoloMapExpr,
    LaurentPolynomial,
    LinearMap,
    MobiusFactors,
    MonomialMap,
    fd_complex_derivative,
    fd_jacobian_det,
    fd_jacobian_matrix,
    weight_branch,
)
from .geometry import (
    BoundedDomain,
    ClosureProbeReport,
    RadialProfile,
    SampleBatch,
    boundary_distance,
    interior_closure_probe,
    make_catalog_domain,
    parse_domain,
    sample,
    sample_radial_weighted,
)
from .integrate import (
    PNormResult,
    agree_within,
    closed_norm,
    mc_norm,
    mc_norm_batch,
    monomial_norm_closed,
    quadrature_norm,
)
from .kernel import (
    BasisSpec,
    KernelEstimate,
    OptimizerConfig,
    ProbePoint,
    bergman2_gram,
    boundary_probe,
    degree_basis,
    pbergman_min_norm,
)
from .isometry import (
    Box,
    CompositionIsometry,
    EquimeasureReport,
    FunctionFamily,
    GaussianBump,
    RegionComparison,
    SigmoidProduct,
    equimeasure_check,
    identity_operator,
    mobius_operator,
    mobius_weight,
    pushforward_mass,
    random_boxes,
    verify_isometry,
)
from .reconstruct import (
    IsometryOracle,
    PointSolve,
    RatioMaps,
    ReconstructionResult,
    SolverConfig,
    build_ratio_maps,
    degree_family,
    grid_points,
    pullback_family,
    reconstruct_map,
    solve_point,
    verify_modulus_identity,
    verify_proportionality,
)
from .scenarios import (
    CheckResult,
    Report,
    battery_monomials,
    build_counterexample,
    counterexample_scenario,
    punctured_disc_scenario,
    roundtrip_scenario,
    run_named_scenario,
)

__all__ = [
    "__version__",
    "PBergmanError",
    "ConfigError",
    "UnsupportedDomainError",
    "DegenerateDomainError",
    "DivergentIntegralError",
    "PoleEvaluationError",
    "NonInvertibleMapError",
    "BranchError",
    "NoBasisSupportError",
    "PoleProximityWarning",
    "LaurentPolynomial",
    "MonomialMap",
    "MobiusFactors",
    "LinearMap",
    "HoloMapExpr",
    "AnalyticFunction",
    "weight_branch",
    "fd_complex_derivative",
    "fd_jacobian_matrix",
    "fd_jacobian_det",
    "BoundedDomain",
    "RadialProfile",
    "SampleBatch",
    "ClosureProbeReport",
    "make_catalog_domain",
    "parse_domain",
    "sample",
    "sample_radial_weighted",
    "boundary_distance",
    "interior_closure_probe",
    "PNormResult",
    "monomial_norm_closed",
    "closed_norm",
    "quadrature_norm",
    "mc_norm",
    "mc_norm_batch",
    "agree_within",
    "BasisSpec",
    "KernelEstimate",
    "OptimizerConfig",
    "ProbePoint",
    "degree_basis",
    "bergman2_gram",
    "pbergman_min_norm",
    "boundary_probe",
    "CompositionIsometry",
    "FunctionFamily",
    "Box",
    "GaussianBump",
    "SigmoidProduct",
    "EquimeasureReport",
    "RegionComparison",
    "identity_operator",
    "mobius_operator",
    "mobius_weight",
    "verify_isometry",
    "pushforward_mass",
    "equimeasure_check",
    "random_boxes",
    "IsometryOracle",
    "RatioMaps",
    "PointSolve",
    "ReconstructionResult",
    "SolverConfig",
    "build_ratio_maps",
    "pullback_family",
    "degree_family",
    "grid_points",
    "solve_point",
    "reconstruct_map",
    "verify_modulus_identity",
    "verify_proportionality",
    "CheckResult",
    "Report",
    "build_counterexample",
    "battery_monomials",
    "counterexample_scenario",
    "punctured_disc_scenario",
    "roundtrip_scenario",
    "run_named_scenario",
]
