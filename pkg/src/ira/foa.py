"""The first-order-relaxed problem and its comparison with the implementation relaxation.

Replacing the agent's incentive constraint by stationarity of his utility
discards every contract whose induced effort sits on a kink.  Under a shifting
support that can remove the optimal contract, which is what
:func:`foa_vs_op` detects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import (
    DEFAULT_CONFIG,
    DomainError,
    EffortUtilityPair,
    Environment,
    Linear,
    QuotaBonus,
    SolverConfig,
    Step,
    principal_expected_payoff,
    social_surplus,
)
from .oracle import STATIONARY, best_response, one_sided_derivatives, verify_implementation
from .relaxed import effort_cap, relaxed_set_contains
from .synthesis import SynthesisOutcome, _quota_probes, stationary_quotas, synthesize_optimal_quota_bonus

#: payoff agreement tolerance between the grid-searched relaxed problem and the certified optimum
PAYOFF_TOL = 1e-6


@dataclass(frozen=True)
class RpQuotaBonus:
    feasible: bool
    q: float = math.nan
    b: float = math.nan
    a: float = math.nan
    u: float = math.nan
    payoff: float = -math.inf
    ic_certified: bool = False
    # infeasibility witness: largest participation slack any stationary (a, q) reaches
    best_ir_slack: float = -math.inf
    efforts_searched: int = 0
    quotas_searched: int = 0


@dataclass(frozen=True)
class RpLinear:
    alpha: float
    beta: float
    a: float
    payoff: float


@dataclass(frozen=True)
class TwoStepContract:
    contract: Step
    b1: float
    b2: float
    I1: float
    I2: float
    J1: float
    J2: float
    H: float
    note: str = "stationarity and participation hold at the target effort; global IC is not claimed"


@dataclass
class FoaReport:
    rp_quota_bonus: RpQuotaBonus
    rp_linear: RpLinear
    op_result: SynthesisOutcome
    op_derivatives: tuple[float, float] | None = None

    @property
    def op_violates_ric(self) -> bool:
        if self.op_derivatives is None:
            return False
        return any(abs(d) > 1e-6 for d in self.op_derivatives if not math.isnan(d))

    @property
    def foa_misleads(self) -> bool:
        op = self.op_result
        if not op.certified:
            return False
        rp_qb, rp_lin = self.rp_quota_bonus, self.rp_linear
        if not rp_qb.feasible:
            return True
        if abs(rp_qb.payoff - op.principal_payoff) > PAYOFF_TOL:
            return True
        rp_prefers_linear = rp_lin.payoff > rp_qb.payoff + PAYOFF_TOL
        op_prefers_qb = op.principal_payoff >= rp_lin.payoff - PAYOFF_TOL
        return rp_prefers_linear and op_prefers_qb


def _loss(value: float) -> float:
    # Brent's parabola step breaks on infinities; infeasible points get a large finite loss
    return -value if math.isfinite(value) else 1e300


def _rp_best_at(env: Environment, a: float, cfg: SolverConfig):
    """Cheapest utility compatible with stationarity and participation at effort ``a``.

    Returns (u, q, slack) where slack is the largest participation slack seen;
    u and q are nan when no quota works.
    """
    c, cp = float(env.cost.value(a)), float(env.cost.deriv(a))
    found = stationary_quotas(env, EffortUtilityPair(a, env.u0), cfg)
    if found.quotas:
        return env.u0, found.quotas[0], 0.0
    # no quota makes participation bind; stationarity then fixes u = c'/hazard - c
    q = _quota_probes(env, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        hazard = -np.asarray(env.family.cdf_a(q, a)) / np.asarray(env.family.sf(q, a))
        u = cp / hazard - c
    ok = np.isfinite(u) & (hazard > 0)
    if not ok.any():
        return math.nan, math.nan, -math.inf
    q, u = q[ok], u[ok]
    slack = float(np.max(u - env.u0))
    feasible = u >= env.u0
    if not feasible.any():
        return math.nan, math.nan, slack
    u_best = float(np.min(u[feasible]))
    tied = np.flatnonzero(feasible & (u <= u_best + 1e-12 * max(1.0, abs(u_best))))
    return u_best, float(q[tied[len(tied) // 2]]), slack


def solve_rp_quota_bonus(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG, n_effort: int = 400) -> RpQuotaBonus:
    """Best quota-bonus contract when IC is replaced by stationarity at the induced effort."""
    cap = effort_cap(env, cfg)
    grid = np.linspace(0.0, cap, n_effort + 1)[1:]
    n_quota = len(_quota_probes(env, float(grid[0])))

    def payoff(a):
        u, _, _ = _rp_best_at(env, a, cfg)
        return -math.inf if math.isnan(u) else float(social_surplus(env, a)) - u

    vals, slack = [], -math.inf
    for a in grid:
        u, _, s = _rp_best_at(env, float(a), cfg)
        slack = max(slack, s)
        vals.append(-math.inf if math.isnan(u) else float(social_surplus(env, a)) - u)
    vals = np.asarray(vals)
    if not np.isfinite(vals).any():
        return RpQuotaBonus(False, best_ir_slack=slack, efforts_searched=n_effort, quotas_searched=n_quota)

    i = int(np.argmax(vals))
    a_best, v_best = float(grid[i]), float(vals[i])
    lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n_effort - 1)])
    if hi > lo:
        res = optimize.minimize_scalar(lambda a: _loss(payoff(a)), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        if -res.fun > v_best:
            a_best, v_best = float(res.x), -float(res.fun)
    u, q, _ = _rp_best_at(env, a_best, cfg)
    b = (float(env.cost.value(a_best)) + u) / float(env.family.sf(q, a_best))
    contract = QuotaBonus(q, b)
    ic = verify_implementation(env, contract, EffortUtilityPair(a_best, u), cfg).ok
    return RpQuotaBonus(True, q, b, a_best, u, v_best, ic_certified=ic, best_ir_slack=slack,
                        efforts_searched=n_effort, quotas_searched=n_quota)


def solve_rp_linear(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG, beta_max: float = 2.0,
                    n_beta: int = 201) -> RpLinear:
    """Best limited-liability linear contract with the agent at a stationary best response.

    For each slope the agent's optimum is found by the oracle; the intercept is
    the least that satisfies participation.
    """
    def evaluate(beta):
        br = best_response(env, Linear(0.0, beta), cfg)
        stationary = br.classification == STATIONARY or (
            br.a_star == 0 and abs(br.d_right) <= cfg.tol_derivative)
        if not stationary:
            return None
        alpha = max(0.0, env.u0 - br.u_star)
        return alpha, br.a_star, float(principal_expected_payoff(env, Linear(alpha, beta), br.a_star))

    def payoff(beta):
        r = evaluate(beta)
        return -math.inf if r is None else r[2]

    betas = np.linspace(0.0, beta_max, n_beta)
    vals = np.array([payoff(float(b)) for b in betas])
    if not np.isfinite(vals).any():
        raise DomainError("no linear contract leaves the agent at a stationary optimum")
    i = int(np.argmax(vals))
    beta = float(betas[i])
    lo, hi = float(betas[max(i - 1, 0)]), float(betas[min(i + 1, n_beta - 1)])
    res = optimize.minimize_scalar(lambda b: _loss(payoff(b)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    if -res.fun > vals[i]:
        beta = float(res.x)
    alpha, a, value = evaluate(beta)
    return RpLinear(alpha, beta, a, value)


def two_step_ric_contract(env: Environment, pair: EffortUtilityPair, a2: float, epsilon: float,
                          a1: float | None = None) -> TwoStepContract:
    """Two-level step contract that is stationary at ``pair.a`` with utility ``pair.u + epsilon``.

    Pays b1 from L(a1) and b2 from L(a2), with a1 < pair.a < a2.  The lower
    threshold sits strictly below the support at ``pair.a`` so the utility is
    differentiable there.
    """
    family = env.family
    a_j = pair.a
    if not a_j > 0:
        raise DomainError("the target effort must be positive")
    if not a2 > a_j:
        raise DomainError("a2 must exceed the target effort")
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    a1 = a_j / 2 if a1 is None else a1
    if not 0 <= a1 < a_j:
        raise DomainError("a1 must lie in [0, target effort)")
    if not relaxed_set_contains(env, pair):
        raise DomainError("pair lies outside the relaxed implementable set")
    l_j = float(family.lower(a_j))
    t1, t2 = float(family.lower(a1)), float(family.lower(a2))
    slope = float(family.lower_deriv(a_j))
    if not slope > 0 or not t1 < l_j < t2:
        raise DomainError("the lower support must be strictly increasing around the target effort")
    probes = _quota_probes(env, a_j, n=200)
    if np.any(np.asarray(family.pdf_a(probes, a_j)) <= 0):
        raise DomainError("f_a(x|a) must be positive on the support")

    H = float(family.pdf(l_j, a_j)) * slope
    I2 = -float(family.cdf_a(t2, a_j))
    I1 = float(family.cdf_a(t2, a_j)) + H
    J1 = float(family.cdf(t2, a_j))
    J2 = float(family.sf(t2, a_j))
    total = float(env.cost.value(a_j)) + pair.u + epsilon
    cp = float(env.cost.deriv(a_j))
    if not I1 < H:
        raise DomainError(f"precondition I1 < H fails ({I1!r} >= {H!r})")
    if not I2 > cp / total * J2:
        raise DomainError("precondition I2 > c'/(c+u+eps) * J2 fails")
    det = J1 * I2 - J2 * (I1 - H)
    b1 = (total * I2 - cp * J2) / det
    b2 = (J1 * cp - (I1 - H) * total) / det
    if not (b1 > 0 and b2 > 0):
        raise DomainError(f"step payments are not positive (b1={b1!r}, b2={b2!r})")
    return TwoStepContract(Step((t1, t2), (0.0, b1, b2)), b1, b2, I1, I2, J1, J2, H)


def foa_vs_op(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG) -> FoaReport:
    rp_qb = solve_rp_quota_bonus(env, cfg)
    rp_lin = solve_rp_linear(env, cfg)
    op = synthesize_optimal_quota_bonus(env, cfg)
    derivs = None
    if op.certified and op.pair is not None and op.pair.a > 0:
        derivs = one_sided_derivatives(env, op.contract, op.pair.a)
    return FoaReport(rp_qb, rp_lin, op, derivs)
