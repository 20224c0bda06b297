"""Model-reference composite learning control for companion-form nonlinear plants."""

from .control import (
    ControllerConfig, DataStack, ExcitationMemory, FilterState, WindowBuffer,
    composite_rate, concurrent_rate, control_input, excitation_update, filter_step,
    mrac_rate, project, record_point, solve_feedforward_gain, window_update,
)
from .dynamics import (
    PlantModel, ReferenceModel, ReferenceSignal, RegressionBasis, eval_basis,
    plant_derivative, reference_derivative, rk4_step, signal_value,
)
from .errors import (
    DimensionMismatch, Diverged, Infeasible, MRCLCError, NonFiniteOutput, NotHurwitz,
    NotSymmetric, ParseError, UnknownKey, UnknownScenario,
)
from .linalg import is_hurwitz, min_eig_sym, solve_lyapunov
from .scenarios import build_scenario, default_params
from .simulation import RunRecord, Scenario, TheoremMonitor, metrics, run, theorem_check

__version__ = "0.1.0"
