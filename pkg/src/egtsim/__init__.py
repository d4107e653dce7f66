"""egtsim: environment-coupled evolutionary game simulation and analysis."""

from .games import (
    DimensionMismatch,
    DomainError,
    EnvCoupling,
    GameKind,
    GameSpec,
    OrderingViolation,
    PayoffMatrix,
    fitness,
    payoff_matrix_at,
    validate_spec,
)
from .dynamics import (
    ClosedForm,
    ComparisonRule,
    DynamicsConfig,
    Field,
    FormMismatch,
    PopulationState,
    Protocol,
    closed_form_field,
    make_closed_form_field,
    make_field,
    make_pairwise_field,
    make_replicator_field,
    pairwise_field,
    replicator_field,
)
from .integrate import (
    ClampEvent,
    IntegratorConfig,
    Method,
    NonFiniteState,
    StepLimitExceeded,
    Trajectory,
    integrate,
    sample_phase_grid,
)
from .analysis import (
    AmplitudeTrend,
    AnalyticUnavailable,
    CatalogUnavailable,
    FixedPointReport,
    InsufficientData,
    JacobianMode,
    OscillationReport,
    Provenance,
    Stability,
    catalog_fixed_points,
    classify,
    detect_oscillation,
    eigenvalues,
    fd_jacobian,
    find_fixed_points,
    jacobian,
    pd_defection_rest_points,
)
from .scenarios import (
    Analyses,
    EmptyTrajectory,
    ParseError,
    Scenario,
    UnknownBuiltin,
    ValidationError,
    builtin_names,
    export_trajectory,
    load_scenario,
    read_trajectory_jsonl,
    run,
    scenario_field,
)

__version__ = "0.1.0"
