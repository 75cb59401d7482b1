"""Utility-maximizing rate and fidelity allocation for entanglement distribution networks."""

from .errors import (
    ConsistencyError,
    DomainError,
    InfeasibleStartError,
    QnumError,
    UtilityDomainError,
    ValidationError,
)
from .model import (
    Link,
    NetworkSpec,
    Route,
    SolutionVector,
    build_topology,
    e2e_werner,
    fidelity_to_werner,
    link_generation_rate,
    load_spec,
    rate_coefficient,
    spec_from_dict,
    spec_to_dict,
    symmetry_classes,
    transmissivity,
    werner_to_fidelity,
)
from .solver import SolveReport, SolverConfig, grid_search_oracle, solve
from .sweep import SweepRow, SweepSpec, run_sweep
from .utility import (
    UtilityKind,
    aggregate_objective,
    binary_entropy,
    hashing_yield,
    objective_gradient,
    route_utility,
    second_partial_w,
    skf_bb84,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "DomainError",
    "InfeasibleStartError",
    "Link",
    "NetworkSpec",
    "QnumError",
    "Route",
    "SolutionVector",
    "SolveReport",
    "SolverConfig",
    "SweepRow",
    "SweepSpec",
    "UtilityDomainError",
    "UtilityKind",
    "ValidationError",
    "aggregate_objective",
    "binary_entropy",
    "build_topology",
    "e2e_werner",
    "fidelity_to_werner",
    "grid_search_oracle",
    "hashing_yield",
    "link_generation_rate",
    "load_spec",
    "objective_gradient",
    "rate_coefficient",
    "route_utility",
    "run_sweep",
    "second_partial_w",
    "skf_bb84",
    "solve",
    "spec_from_dict",
    "spec_to_dict",
    "symmetry_classes",
    "transmissivity",
    "werner_to_fidelity",
]
