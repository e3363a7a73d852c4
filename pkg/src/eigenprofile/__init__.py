"""Finite-difference Dirichlet eigenfunctions on planar domains, compared with
closed-form profile functions, plus heat-kernel checks built on the spectrum."""
from .discretize import (
    CoefficientField,
    Grid,
    GridField,
    InvalidCoefficientsError,
    ResolutionError,
    SparseOperator,
    assemble_divergence_form,
    assemble_laplacian,
    integrate,
    rasterize,
    rasterize_interval,
)
from .geometry import (
    DegenerateDomainError,
    Domain,
    EllipseDomain,
    PolygonDomain,
    RoundedDomain,
    build_disk,
    build_perturbed_triangle,
    build_polygon,
    build_rectangle,
    build_regular_polygon,
    build_rounded_square,
    build_rounded_triangle,
    build_sawtooth_side,
    build_triangle,
    dilate,
    inner_diameter,
)
from .spectral import SolverConfig, SolverError, Spectrum, smallest_eigenpairs, solve_domain

__version__ = "0.1.0"

__all__ = [
    "CoefficientField", "DegenerateDomainError", "Domain", "EllipseDomain", "Grid", "GridField",
    "InvalidCoefficientsError", "PolygonDomain", "ResolutionError", "RoundedDomain", "SolverConfig",
    "SolverError", "SparseOperator", "Spectrum", "assemble_divergence_form", "assemble_laplacian",
    "build_disk", "build_perturbed_triangle", "build_polygon", "build_rectangle", "build_regular_polygon",
    "build_rounded_square", "build_rounded_triangle", "build_sawtooth_side", "build_triangle", "dilate",
    "inner_diameter", "integrate", "rasterize", "rasterize_interval", "smallest_eigenpairs", "solve_domain",
]
