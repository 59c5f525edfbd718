"""Optimal contracts for risk-neutral, limited-liability principal-agent problems."""

__version__ = "0.1.0"

from .families import FAMILIES, OutcomeFamily, ParetoShift, ScaleExponential, ShiftedExponential, make_family
from .model import (
    DEFAULT_CONFIG,
    Constant,
    CostSpec,
    DomainError,
    EffortUtilityPair,
    Environment,
    Linear,
    QuotaBonus,
    SolverConfig,
    SolverError,
    Step,
    agent_expected_utility,
    expected_payment,
    principal_expected_payoff,
    social_surplus,
)
from .relaxed import first_best, likelihood_ratio_sup, min_required_utility, relaxed_set_contains, solve_relaxed
from .oracle import best_response, one_sided_derivatives, verify_implementation
from .synthesis import bonus_for, check_C1, check_C2, stationary_quotas, synthesize_optimal_quota_bonus
from .foa import foa_vs_op, solve_rp_linear, solve_rp_quota_bonus, two_step_ric_contract

__all__ = [
    "FAMILIES", "OutcomeFamily", "ParetoShift", "ScaleExponential", "ShiftedExponential", "make_family",
    "DEFAULT_CONFIG", "Constant", "CostSpec", "DomainError", "EffortUtilityPair", "Environment", "Linear",
    "QuotaBonus", "SolverConfig", "SolverError", "Step", "agent_expected_utility", "expected_payment",
    "principal_expected_payoff", "social_surplus", "first_best", "likelihood_ratio_sup",
    "min_required_utility", "relaxed_set_contains", "solve_relaxed", "best_response",
    "one_sided_derivatives", "verify_implementation", "bonus_for", "check_C1", "check_C2",
    "stationary_quotas", "synthesize_optimal_quota_bonus", "foa_vs_op", "solve_rp_linear",
    "solve_rp_quota_bonus", "two_step_ric_contract",
]
