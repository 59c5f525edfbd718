"""The relaxed implementable set and the principal's program over it.

A pair (a, u) with a > 0 can only be implemented when the largest likelihood
ratio G(a) = sup f_a/f is at least c'(a) / (c(a) + u): no payment schedule can
buy more marginal incentive per unit of expected pay than G(a) delivers.  So
for each effort the cheapest admissible utility is

    u_min(a) = max(u0, c'(a)/G(a) - c(a)),        u_min(0) = u0,

and the principal's relaxed problem is the one-dimensional maximization of
social_surplus(a) - u_min(a) over a bounded effort interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._optimize import decay_cap, maximize_on_grid
from .model import (
    DEFAULT_CONFIG,
    DomainError,
    EffortUtilityPair,
    Environment,
    SolverConfig,
    _scalar_or_array,
    social_surplus,
)


@dataclass(frozen=True)
class RelaxedSolution:
    pair: EffortUtilityPair
    value: float
    effort_cap: float
    co_optimal: list[EffortUtilityPair] = field(default_factory=list)


class FirstBest(NamedTuple):
    a: float
    surplus: float


def likelihood_ratio_sup(env: Environment, a: float) -> float:
    if not a > 0:
        raise DomainError("the likelihood-ratio supremum is defined for a > 0 only")
    return float(env.family.lr_sup(a))


def min_required_utility(env: Environment, a):
    """Smallest utility u with (a, u) in the relaxed set; ``u0`` at a = 0."""
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise DomainError("effort must be >= 0")
    pos = a > 0
    safe = np.where(pos, a, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        # c'/inf == 0 for a fixed support with an unbounded ratio
        floor = np.asarray(env.cost.deriv(safe)) / np.asarray(env.family.lr_sup(safe)) - np.asarray(env.cost.value(safe))
    return _scalar_or_array(np.where(pos, np.maximum(env.u0, floor), env.u0))


def relaxed_set_contains(env: Environment, pair: EffortUtilityPair, rtol: float = 1e-9) -> bool:
    a, u = pair.a, pair.u
    if u < env.u0:
        return False
    if a == 0:
        return True
    g = likelihood_ratio_sup(env, a)
    if math.isinf(g):
        return True
    return g * (float(env.cost.value(a)) + u) >= float(env.cost.deriv(a)) * (1 - rtol)


def effort_cap(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """An effort beyond which no maximizer of the relaxed program can lie."""
    if cfg.effort_cap_override is not None:
        return float(cfg.effort_cap_override)
    return decay_cap(lambda a: social_surplus(env, a), "social surplus")


def _relaxed_objective(env: Environment):
    def phi(a):
        return np.asarray(social_surplus(env, a)) - np.asarray(min_required_utility(env, a))
    return phi


def solve_relaxed(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG) -> RelaxedSolution:
    cap = effort_cap(env, cfg)
    # the objective is only upper semicontinuous at 0, so 0 is a separate candidate
    found = maximize_on_grid(
        _relaxed_objective(env), 0.0, cap, cfg.grid_n, include_lo=False, exact=[0.0],
        xatol=cfg.refine_tol, tie_tol=cfg.tol_utility, polish=True,
    )
    pairs = [EffortUtilityPair(c.x, float(min_required_utility(env, c.x))) for c in found.ties]
    best = EffortUtilityPair(found.best.x, float(min_required_utility(env, found.best.x)))
    return RelaxedSolution(pair=best, value=found.best.value, effort_cap=cap, co_optimal=pairs)


def first_best(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG) -> FirstBest:
    cap = effort_cap(env, cfg)
    found = maximize_on_grid(lambda a: social_surplus(env, a), 0.0, cap, cfg.grid_n, exact=[0.0],
                             xatol=cfg.refine_tol, tie_tol=cfg.tol_utility, polish=True)
    return FirstBest(found.best.x, found.best.value)
