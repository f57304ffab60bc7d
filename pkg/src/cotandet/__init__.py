"""Discrete spectral geometry on triangulated closed surfaces.

Builds cotan Laplacians from discrete metrics, computes their pseudo-
determinants, classifies graph symmetry by distance classes, and verifies
numerically that the log pseudo-determinant is stationary (and locally
minimal) at equilateral metrics.
"""

from .mesh import (
    Triangulation,
    ValidationReport,
    MeshFormatError,
    MeshValidationError,
    build_canonical,
    triangular_bipyramid,
    validate_closed,
    component_count,
    is_complete,
    load,
    save,
)
from .metric import (
    DiscreteMetric,
    CornerAngles,
    CurvatureVector,
    InvalidMetricError,
    MetricFormatError,
    uniform_metric,
    validate_metric,
    corner_angles,
    triangle_areas,
    local_area_elements,
    total_area,
    gaussian_curvature,
    cayley_menger_tetrahedron,
    load_metric,
    save_metric,
)
from .laplacian import (
    EdgeWeights,
    LaplaceMatrix,
    SpectrumResult,
    SpectrumError,
    cotan_weights,
    assemble,
    spectrum,
    log_pseudo_det,
)
from .symmetry import (
    SymmetryProfile,
    PatternMatrix,
    StructuredInverse,
    DistanceClassCheck,
    SingularPatternError,
    distance_matrix,
    symmetry_profile,
    path_count,
    path_count_matrix,
    complete_pattern_inverse,
    recursion_inverse,
    verify_distance_constant_inverse,
)
from .variation import (
    PerturbationDirection,
    StationarityReport,
    SweepGrid,
    RankChangeError,
    fd_gradient,
    area_gradient,
    area_preserving_basis,
    check_stationarity,
    trace_formula_derivative,
    fd_hessian,
    sweep_two_edges,
)

__version__ = "0.1.0"
