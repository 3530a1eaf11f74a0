"""Two-layer attention controller for a bimanual pong rally.

The lower layer is a closed-form LQ tracker per paddle; the upper layer
chooses the tracking penalties ("attention") with a log-barrier solver.
"""

from .attention_model import TrackingProblem, grad_terminal_error, terminal_error
from .attention_solver import (AttentionSolution, InfeasibleTaskError, SolverConfig,
                               solve_full, solve_tracking)
from .coordination_model import CoordinationContext
from .rally import (SCENARIOS, RallyLog, ScenarioConfig, detect_steady_state, run_rally,
                    summarize)
from .trajectory_algebra import build_rollout, discretize_paddle, extract_geometry

__version__ = "0.1.0"

__all__ = [
    "AttentionSolution", "CoordinationContext", "InfeasibleTaskError", "RallyLog",
    "SCENARIOS", "ScenarioConfig", "SolverConfig", "TrackingProblem", "build_rollout",
    "detect_steady_state", "discretize_paddle", "extract_geometry", "grad_terminal_error",
    "run_rally", "solve_full", "solve_tracking", "summarize", "terminal_error",
]
