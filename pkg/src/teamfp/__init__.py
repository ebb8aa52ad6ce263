"""Team fictitious play in zero-sum potential team games.

Simulation library and CLI for smoothed team-FP learning dynamics, exact
team-Nash-gap metrics, baselines, and the finite-horizon Markov-game
extension.
"""

from .beliefs import BeliefProfile, ScheduleReport, StepSchedule, check_schedule
from .dynamics import (DynamicsConfig, DynamicsState, RunRecord,
                       smoothed_best_response, run)
from .game import (MultiTeamGame, TeamStructure, ValidationReport,
                   coarsen_game, phi_m, phi_m_vector, validate_potential,
                   validate_zero_sum)
from .gamegen import GenSpec
from .markov import MarkovConfig, MarkovTeamGame, mg_tng, run_mg
from .metrics import lyapunov, tng

__all__ = [
    "BeliefProfile", "DynamicsConfig", "DynamicsState", "GenSpec",
    "MarkovConfig", "MarkovTeamGame", "MultiTeamGame", "RunRecord",
    "ScheduleReport", "StepSchedule", "TeamStructure", "ValidationReport",
    "check_schedule", "coarsen_game", "lyapunov", "mg_tng", "phi_m",
    "phi_m_vector", "run", "run_mg", "smoothed_best_response", "tng",
    "validate_potential", "validate_zero_sum",
]

__version__ = "0.1.0"
