"""Hirota-Kimura discretization of the nonholonomic Suslov problem."""

from .closedform import (
    ClosedFormParams,
    c_of_h,
    fit_params,
    k1_of_h,
    level_point,
    omega_closed,
    planar_closed,
    u_closed,
    u_step,
)
from .errors import (
    ConfigError,
    DegenerateFit,
    DegenerateInertia,
    DegenerateStep,
    FixedPointState,
    LevelOutOfRange,
    PoleAbort,
    PoleError,
    SingularStepMatrix,
    StepBudgetExceeded,
    SuslovError,
    UnknownFigure,
)
from .model3 import (
    BodyOmega,
    Inertia3,
    PlanarState,
    TrajectorySample,
    constraint_residual,
    delta,
    energy,
    first_integral,
    first_integral_planar,
    from_planar,
    hk_step,
    planar_step,
    to_planar,
    trajectory,
)
from .modeln import NDInertia, build_step_matrix, continuous_rhs_nd, hk_step_nd

__version__ = "0.1.0"
