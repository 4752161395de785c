"""ctrlgrad: controlled gradient flow and descent on quadratic objectives.

Minimize f(x) = 1/2 <x, Ax> + <b, x> + c (A symmetric PSD) while injecting
a control through an input matrix B:

    continuous:  x'(t)  = -A x(t) + B u(t) - b
    discrete:    x_{k+1} = x_k - gamma*(A x_k + b) + gamma*B u_k
    implicit:    x_{k+1} = (I + gamma*A)^{-1} (x_k + gamma*B u_k - gamma*b)

The package answers, numerically and reproducibly: when can the control
reach every state (Kalman rank test, Gramian steering), what do feedback
controls do to convergence (gain design, rate certificates), and how does
controlled descent behave on Gaussian compressed-sensing recovery.
"""

__version__ = "0.1.0"

from .controllability import (
    ControllabilityReport,
    ControlSystem,
    gaussian_rank_check,
    is_controllable,
    kalman_matrix,
    newton_controllable,
)
from .descent import (
    ConstantPolicy,
    DescentConfig,
    GradientFeedbackPolicy,
    RunRecord,
    SchedulePolicy,
    StateFeedbackPolicy,
    ZeroPolicy,
    descent_step,
    design_feedback,
    feedback_gradient_gain,
    greedy_gain,
    rate_bound_curve,
    rate_certificate,
    run_descent,
)
from .errors import (
    ContractViolationError,
    CtrlgradError,
    DimensionError,
    IllConditionedGramianError,
    InvalidParameterError,
    NoCriticalPointError,
    ScheduleExhaustedError,
    SchemaError,
    SteeringInfeasibleError,
    UnsupportedSizeError,
)
from .flow import (
    Trajectory,
    closed_form_state,
    gramian,
    integrate,
    steering_control,
    value_derivative,
)
from .prox import ProxQuery, controlled_prox, prox_resolvent_equivalence, resolvent_step
from .quadratic import QuadraticProblem, from_least_squares, solve_critical
from .sensing import (
    RegimeSpec,
    SensingProblem,
    generate_sensing,
    gaussian_controllability_sweep,
    lipschitz_estimate,
    run_regime_experiment,
    to_quadratic,
)
from .signals import (
    ConstantControl,
    ControlSignal,
    PiecewiseConstant,
    StateFeedback,
    SteeringControl,
    ZeroControl,
)

__all__ = [
    "__version__",
    # quadratic
    "QuadraticProblem", "from_least_squares", "solve_critical",
    # controllability
    "ControlSystem", "ControllabilityReport", "kalman_matrix",
    "is_controllable", "newton_controllable", "gaussian_rank_check",
    # flow + signals
    "Trajectory", "integrate", "closed_form_state", "gramian",
    "steering_control", "value_derivative", "ControlSignal", "ZeroControl",
    "ConstantControl", "StateFeedback", "PiecewiseConstant", "SteeringControl",
    # descent
    "DescentConfig", "RunRecord", "ZeroPolicy", "ConstantPolicy",
    "StateFeedbackPolicy", "GradientFeedbackPolicy", "SchedulePolicy",
    "descent_step", "run_descent", "design_feedback", "feedback_gradient_gain",
    "greedy_gain", "rate_certificate", "rate_bound_curve",
    # prox
    "ProxQuery", "controlled_prox", "resolvent_step", "prox_resolvent_equivalence",
    # sensing
    "SensingProblem", "RegimeSpec", "generate_sensing", "to_quadratic",
    "lipschitz_estimate", "run_regime_experiment", "gaussian_controllability_sweep",
    # errors
    "CtrlgradError", "ContractViolationError", "DimensionError",
    "InvalidParameterError", "UnsupportedSizeError", "NoCriticalPointError",
    "SteeringInfeasibleError", "IllConditionedGramianError",
    "ScheduleExhaustedError", "SchemaError",
]
