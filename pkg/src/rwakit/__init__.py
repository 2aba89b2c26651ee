"""Exact multi-objective routing and wavelength assignment for WDM networks."""

from .errors import (
    InstanceTooLargeError,
    ModelError,
    ParseError,
    RwaError,
    ValidationError,
)
from .model import (
    DesignConfig,
    IlpModel,
    VariableRef,
    VARIANTS,
    WeightPair,
    build_model,
    evaluate_objective,
    export_model,
    lexicographic_weights,
    parse_variable_name,
)
from .oracle import oracle_weighted, solve_oracle
from .solver import (
    Lightpath,
    RwaSolution,
    SolverOptions,
    solution_from_json,
    solution_to_json,
    solve_exact,
    solve_heuristic,
    solve_weighted,
)
from .topology import (
    FiberLink,
    NetworkTopology,
    bundled_topology,
    format_topology,
    load_topology,
    node_degree_stats,
    parse_topology,
    save_topology,
)
from .traffic import (
    Demand,
    TrafficMatrix,
    format_traffic,
    generate_traffic,
    load_traffic,
    parse_traffic,
    save_traffic,
)
from .validate import (
    ValidationReport,
    Violation,
    check_solution,
    compute_metrics,
    reconstruct_assignment,
)

__version__ = "0.1.0"
