"""The agent's best response, computed by brute force rather than first-order conditions.

Expected utility under a threshold contract is smooth except where the lower
end of the support L(a) crosses a threshold.  Those efforts are injected into
the search exactly, so an optimum sitting on a kink is never lost to grid
resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._optimize import decay_cap, maximize_on_grid, polish_root
from .model import (
    DEFAULT_CONFIG,
    Contract,
    DomainError,
    EffortUtilityPair,
    Environment,
    Linear,
    SolverConfig,
    _payment_jumps,
    agent_expected_utility,
    principal_expected_payoff,
)
from .relaxed import effort_cap

BOUNDARY = "boundary"
STATIONARY = "stationary"
KINK = "kink"


@dataclass(frozen=True)
class BestResponse:
    a_star: float
    u_star: float
    classification: str
    d_left: float  # nan at a_star = 0
    d_right: float
    ties: list[float] = field(default_factory=list)
    effort_cap: float = math.nan


@dataclass(frozen=True)
class VerificationReport:
    ll_ok: bool
    ir_ok: bool
    ic_ok: bool
    best_response: BestResponse
    utility_gap: float
    effort_gap: float

    @property
    def ok(self) -> bool:
        return self.ll_ok and self.ir_ok and self.ic_ok


def _same_point(t: float, lower: float) -> bool:
    return abs(t - lower) <= 1e-12 * max(1.0, abs(t))


def _payment_slope(env: Environment, s: Contract, a: float, side: str) -> float:
    family = env.family
    if isinstance(s, Linear):
        return s.beta * float(family.mean_deriv(a))
    _, jumps = _payment_jumps(s)
    lower = float(family.lower(a))
    slope = 0.0
    for t, delta in jumps:
        if _same_point(t, lower):
            # sf(t|.) is 1 to the right of the crossing; from the left it moves
            # only if the support was still below t
            if side == "left" and float(family.lower_deriv(a)) > 0:
                slope -= delta * float(family.cdf_a(t, a))
        elif t > lower:
            slope -= delta * float(family.cdf_a(t, a))
    return slope


def right_derivative(env: Environment, s: Contract, a: float) -> float:
    if a < 0:
        raise DomainError("effort must be >= 0")
    return _payment_slope(env, s, a, "right") - float(env.cost.deriv(a))


def left_derivative(env: Environment, s: Contract, a: float) -> float:
    if not a > 0:
        raise DomainError("the left derivative needs a > 0")
    return _payment_slope(env, s, a, "left") - float(env.cost.deriv(a))


def one_sided_derivatives(env: Environment, s: Contract, a: float) -> tuple[float, float]:
    """(left, right) derivatives of the agent's expected utility in effort."""
    return left_derivative(env, s, a), right_derivative(env, s, a)


def one_sided_fd(env: Environment, s: Contract, a: float, h: float = 1e-6) -> tuple[float, float]:
    """Finite-difference counterpart of :func:`one_sided_derivatives`."""
    u = agent_expected_utility(env, s, a)
    right = (agent_expected_utility(env, s, a + h) - u) / h
    left = (u - agent_expected_utility(env, s, a - h)) / h if a >= h else math.nan
    return left, right


def kink_efforts(env: Environment, s: Contract) -> list[float]:
    """Efforts at which the lower support reaches one of the contract's thresholds."""
    out = []
    for t in s.thresholds:
        a = env.family.lower_inverse(t)
        if a is not None:
            out.append(a)
    return sorted(set(out))


def agent_effort_cap(env: Environment, s: Contract, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    if cfg.effort_cap_override is not None:
        return float(cfg.effort_cap_override)
    return max(effort_cap(env, cfg),
               decay_cap(lambda a: agent_expected_utility(env, s, a), "agent utility"))


def best_response(env: Environment, s: Contract, cfg: SolverConfig = DEFAULT_CONFIG) -> BestResponse:
    cap = agent_effort_cap(env, s, cfg)
    kinks = [k for k in kink_efforts(env, s) if k <= cap]

    def utility(a):
        return agent_expected_utility(env, s, a)

    found = maximize_on_grid(utility, 0.0, cap, cfg.grid_n, exact=[0.0, *kinks],
                             xatol=cfg.refine_tol, tie_tol=cfg.tol_utility)

    candidates = []
    for c in found.ties:
        x, val = c.x, c.value
        if not c.exact:
            # Brent stalls at ~sqrt(eps) on a flat top; a sign change of the
            # analytic derivative pins stationary points to round-off
            lo, hi = max(0.0, x - found.spacing), min(cap, x + found.spacing)
            if not any(lo < k < hi for k in kinks):
                root = polish_root(lambda a: right_derivative(env, s, a), lo, hi)
                if root is not None and float(utility(root)) >= val - 1e-13:
                    x, val = root, float(utility(root))
        candidates.append((x, val))

    top = max(v for _, v in candidates)
    ties = [(x, v) for x, v in candidates if v >= top - cfg.tol_utility]
    # among co-optimal efforts the agent picks the one the principal likes best
    payoffs = [float(principal_expected_payoff(env, s, x)) for x, _ in ties]
    best_pay = max(payoffs)
    a_star, u_star = min((t for t, p in zip(ties, payoffs) if p >= best_pay - cfg.tol_utility),
                         key=lambda t: t[0])

    d_right = right_derivative(env, s, a_star)
    if a_star == 0.0 or a_star >= cap:
        d_left = left_derivative(env, s, a_star) if a_star > 0 else math.nan
        kind = BOUNDARY
    else:
        d_left = left_derivative(env, s, a_star)
        kind = KINK if abs(d_left - d_right) > cfg.tol_derivative else STATIONARY
    return BestResponse(a_star, u_star, kind, d_left, d_right,
                        ties=sorted(x for x, _ in ties), effort_cap=cap)


def contract_is_ll(s: Contract) -> bool:
    if isinstance(s, Linear):
        return s.alpha >= 0 and s.beta >= 0
    base, jumps = _payment_jumps(s)
    levels = np.cumsum([base, *(d for _, d in jumps)])
    return bool(np.all(levels >= -1e-15))


def verify_implementation(
    env: Environment, s: Contract, claimed: EffortUtilityPair, cfg: SolverConfig = DEFAULT_CONFIG,
) -> VerificationReport:
    """Check that ``s`` implements ``claimed``: LL, IR, and the claimed effort is optimal."""
    tol = cfg.tol_utility
    if claimed.u < env.u0 - tol:
        raise DomainError(f"claimed utility {claimed.u!r} is below the reservation utility {env.u0!r}")
    br = best_response(env, s, cfg)
    utility_gap = br.u_star - claimed.u
    effort_gap = min(abs(t - claimed.a) for t in br.ties)
    return VerificationReport(
        ll_ok=contract_is_ll(s),
        ir_ok=br.u_star >= env.u0 - tol,
        ic_ok=abs(utility_gap) <= tol and effort_gap <= cfg.tol_effort,
        best_response=br,
        utility_gap=utility_gap,
        effort_gap=effort_gap,
    )

