"""Universal function computation by swarms of basis agents."""

from .basis import (
    BaType,
    BasisConfig,
    ConcentrationMap,
    Partition,
    approximate,
    b_eval,
    cell_index,
    midpoint,
    program,
    sup_error,
)
from .design import (
    DesignProblem,
    DesignSolution,
    estimate_grad_norms,
    near_minimal_types,
    verify_design,
)
from .dynamics import (
    ConstantInput,
    RampInput,
    SampledInput,
    SimulationTrace,
    StepInput,
    SwarmProgram,
    analytic_v,
    drive,
    mae,
    simulate,
    step,
    transient_error,
)
from .errors import (
    ConfigError,
    EmptyTrace,
    Infeasible,
    OutOfDomain,
    ParseError,
    ScheduleGap,
    SwarmError,
    TargetEvaluation,
    ValidationError,
)
from .scenario import (
    ScenarioConfig,
    emit_concentrations_csv,
    emit_trace_csv,
    load_config,
    run_paper_example,
)
from .targets import make_target

__version__ = "0.1.0"
