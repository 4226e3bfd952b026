"""Joint MIMO radar transmit-waveform / receive-filter design.

The library maximizes receiver SINR over nonconvex waveform constraint sets
(constant modulus, annulus modulus, constant modulus with a similarity
bound) by Riemannian gradient descent: tangent-space projection of the
gradient, a constant or Armijo-backtracking step, and retraction to the
nearest feasible point.  The receive filter has a closed form given the
waveform, which reduces the joint design to a problem over the waveform
alone.

Numerical kernels run through numba by default with a pure-numpy fallback;
select with the ``RADARRGD_BACKEND`` environment variable (``auto``,
``numba``, ``numpy``) or :func:`set_backend`.
"""

from ._kernels import active_backend, set_backend, warmup
from .ambiguity import AmbiguityGrid, ambiguity_map, slices, write_csv, write_json
from .config import (
    ScenarioFormatError,
    format_stepsize,
    load_scenario,
    load_waveform,
    parse_scenario,
    parse_stepsize,
    save_scenario,
    save_waveform,
    scenario_to_doc,
)
from .manifolds import (
    FEASIBILITY_TOL,
    AnnulusModulus,
    ConstantModulus,
    ConstantModulusSimilarity,
    ConstraintSpec,
    Waveform,
    feasibility_residual,
    project_tangent,
    random_feasible,
    retract,
)
from .objective import (
    ProblemOperators,
    covariance,
    objective_terms,
    rx_optimal,
    sinr,
    sinr_db,
    tx_gradient,
    tx_objective,
)
from .scene import (
    ArrayConfig,
    Emitter,
    Scenario,
    interference_operator,
    response_matrix,
    shift_matrix,
    steering_rx,
    steering_tx,
)
from .solver import (
    ArmijoStep,
    BacktrackingError,
    ConstantStep,
    InfeasibleInitError,
    RetractionIncreaseError,
    SolveConfig,
    SolveResult,
    SolveTrace,
    StepDiagnostics,
    StepsizeRule,
    Termination,
    lfm_init,
    rgd_step,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    "set_backend",
    "warmup",
    "AmbiguityGrid",
    "ambiguity_map",
    "slices",
    "write_csv",
    "write_json",
    "AnnulusModulus",
    "ConstantModulus",
    "ConstantModulusSimilarity",
    "ConstraintSpec",
    "Waveform",
    "FEASIBILITY_TOL",
    "feasibility_residual",
    "project_tangent",
    "random_feasible",
    "retract",
    "ProblemOperators",
    "covariance",
    "objective_terms",
    "rx_optimal",
    "sinr",
    "sinr_db",
    "tx_gradient",
    "tx_objective",
    "ArrayConfig",
    "Emitter",
    "Scenario",
    "interference_operator",
    "response_matrix",
    "shift_matrix",
    "steering_rx",
    "steering_tx",
    "ArmijoStep",
    "BacktrackingError",
    "ConstantStep",
    "InfeasibleInitError",
    "RetractionIncreaseError",
    "SolveConfig",
    "SolveResult",
    "SolveTrace",
    "StepDiagnostics",
    "StepsizeRule",
    "Termination",
    "lfm_init",
    "rgd_step",
    "solve",
    "ScenarioFormatError",
    "format_stepsize",
    "load_scenario",
    "load_waveform",
    "parse_scenario",
    "parse_stepsize",
    "save_scenario",
    "save_waveform",
    "scenario_to_doc",
]
