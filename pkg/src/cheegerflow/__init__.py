"""Cheeger constants and Dirichlet eigenvalues of planar domains.

The Cheeger constant is bracketed by parametric max flow on a grid
network, certified by flow-derived vector fields and compared against the
first Dirichlet eigenvalue and inradius bounds.
"""

from .cheeger import (
    CertificateReport,
    CheegerResult,
    CutMetricStencil,
    build_grid_network,
    certify_lower_bound,
    cheeger_constant,
    feasible,
    flow_to_vector_field,
    quotient_of_candidate,
    subdomain_bound_suite,
)
from .checks import InequalityCheck
from .distance_field import ScalarField, VectorField, grid_distance, makai_field
from .errors import (
    BracketError,
    CheegerFlowError,
    ConvergenceError,
    DomainError,
    InfeasibleFlowError,
    InvalidDomainError,
    NotMaxFlowError,
    ResolutionTooCoarseError,
)
from .geometry import DomainSpec, GridDomain, Polygon, area, perimeter, quotient, rasterize
from .maxflow import Cut, Flow, Network, max_flow, min_cut
from .spectral import assemble, rayleigh_quotient, smallest_eigenvalue

__version__ = "0.1.0"
