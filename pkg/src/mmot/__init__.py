"""Multi-marginal optimal transport for uniform empirical measures.

Exact and floating-point LP solutions of the pairwise quadratic-cost problem,
Monge (deterministic) couplings and the minimal Monge cost, barycenter
extraction, and a seeded random search for instances without a Monge
solution.
"""

from .barycenter import DiscreteBarycenter, barycenter_functional, extract_barycenter, w2_squared
from .cost import Convention, CostTensor, build_tensor, negsum_cost, pairwise_cost
from .measures import EmpiricalMeasure, Instance, Moments, center, make_instance, moments, validate
from .monge import MongeAssignment, MongeReport, assignment_cost, enumerate_mmc, monotone_1d, two_point_monge
from .search import (
    ClassifyTolerances,
    GeneratorConfig,
    IsotropicGaussian,
    SearchSummary,
    TrialRecord,
    UniformCube,
    classify,
    export_histogram,
    generate_instance,
    run_search,
)
from .simplex import Coupling, DualCertificate, LPSolution, Mode, solve_lp, solve_transport, verify_certificate, verify_coupling

__version__ = "0.1.0"
