"""Quota-bonus contracts that implement the relaxed optimum.

Given an optimal relaxed pair (a, u), a quota-bonus contract can implement it
only if its bonus makes participation bind and its quota either sits at the
lower support L(a) (the optimum is a kink) or is a stationary quota where the
effort hazard -F_a/(1-F) equals c'(a)/(c(a)+u).  Two pointwise inequalities
over effort (C1 for the kink quota, C2 for a stationary one) are sufficient
for the candidate to be incentive compatible.  Every contract returned as
certified has also passed the brute-force agent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._optimize import MAX_DOUBLINGS
from .model import (
    DEFAULT_CONFIG,
    Constant,
    Contract,
    DomainError,
    EffortUtilityPair,
    Environment,
    QuotaBonus,
    SolverConfig,
    principal_expected_payoff,
)
from .oracle import VerificationReport, verify_implementation
from .relaxed import FirstBest, RelaxedSolution, effort_cap, first_best, solve_relaxed

C1 = "C1"
C2 = "C2"
NONE = "none"

#: margins this close to zero count as holding; both conditions are weak inequalities
MARGIN_TOL = 1e-9


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    holds: bool
    quota: float
    worst_margin: float
    argmin_effort: float
    grid_points: int
    domain_upper: float = math.nan
    note: str = ""


@dataclass(frozen=True)
class StationaryQuotas:
    quotas: list[float]
    all_stationary: bool = False


@dataclass
class SynthesisOutcome:
    contract: Contract | None
    certified: bool
    via: str
    reports: list[ConditionReport]
    relaxed: RelaxedSolution
    principal_payoff: float
    efficiency_loss: float
    pair: EffortUtilityPair | None = None
    verification: VerificationReport | None = None
    first_best: FirstBest | None = None
    notes: list[str] = field(default_factory=list)


def bonus_for(env: Environment, q: float, pair: EffortUtilityPair) -> float:
    """Bonus that makes the agent's participation constraint bind at ``pair``."""
    family = env.family
    sf = float(family.sf(q, pair.a))
    if q >= family.upper or not sf > 0:
        raise DomainError(f"quota {q!r} is never reached at effort {pair.a!r}; bonus undefined")
    return (float(env.cost.value(pair.a)) + pair.u) / sf


def _hazard_gap(env: Environment, pair: EffortUtilityPair):
    a = pair.a
    target = float(env.cost.deriv(a)) / (float(env.cost.value(a)) + pair.u)

    def gap(q):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.asarray(env.family.cdf_a(q, a)) / np.asarray(env.family.sf(q, a)) - target
    return gap, target


def _quota_probes(env: Environment, a: float, n: int = 2000) -> np.ndarray:
    family = env.family
    lo = float(family.lower(a))
    scale = max(1.0, a)
    if math.isfinite(family.upper):
        width = family.upper - lo
    else:
        width = scale
        while float(family.sf(lo + width, a)) > 1e-14:
            width *= 2.0
    offsets = np.logspace(math.log10(1e-8 * scale), math.log10(width), n)
    q = lo + offsets
    return q[q < family.upper]


def stationary_quotas(env: Environment, pair: EffortUtilityPair, cfg: SolverConfig = DEFAULT_CONFIG) -> StationaryQuotas:
    """Quotas above L(a) at which ``pair.a`` is a stationary point of the agent's utility."""
    if not pair.a > 0:
        raise DomainError("stationary quotas need a positive effort")
    gap, target = _hazard_gap(env, pair)
    probes = _quota_probes(env, pair.a)
    vals = np.asarray(gap(probes))
    ok = np.isfinite(vals)
    probes, vals = probes[ok], vals[ok]
    if np.all(np.abs(vals) < 1e-10 * max(1.0, target)):
        # hazard constant in q: every quota is stationary; sample a few survival levels
        sf = np.asarray(env.family.sf(probes, pair.a))
        picks = sorted({int(np.argmin(np.abs(sf - level))) for level in (0.9, 0.5, 0.25, 0.1)})
        return StationaryQuotas([float(probes[i]) for i in picks], all_stationary=True)
    roots = [float(q) for q, v in zip(probes, vals) if v == 0.0]
    for i in np.flatnonzero(vals[:-1] * vals[1:] < 0):
        roots.append(optimize.brentq(lambda q: float(gap(q)), probes[i], probes[i + 1], xtol=cfg.tol_root))
    return StationaryQuotas(sorted(set(roots)))


def _refine_min(margin, lo: float, hi: float, i: int, grid: np.ndarray, vals: np.ndarray, hi_open: bool):
    a0 = grid[i - 1] if i > 0 else grid[i]
    a1 = grid[i + 1] if i < len(grid) - 1 else (hi if not hi_open else grid[i])
    best_a, best_m = float(grid[i]), float(vals[i])
    if a1 > a0:
        res = optimize.minimize_scalar(lambda a: float(margin(a)), bounds=(a0, a1), method="bounded",
                                       options={"xatol": 1e-12})
        if res.fun < best_m:
            best_a, best_m = float(res.x), float(res.fun)
    return best_a, best_m


def check_C1(env: Environment, pair: EffortUtilityPair, cfg: SolverConfig = DEFAULT_CONFIG) -> ConditionReport:
    """Kink-quota condition on [0, a): survival at L(a) never outruns the cost ratio."""
    a_j, u_j = pair.a, pair.u
    if a_j == 0:
        return ConditionReport(C1, True, float(env.family.lower(0.0)), math.inf, math.nan, 0,
                               note="vacuous: empty effort domain")
    q = float(env.family.lower(a_j))
    denom = float(env.cost.value(a_j)) + u_j

    def margin(a):
        return (np.asarray(env.cost.value(a)) + u_j) / denom - np.asarray(env.family.sf(q, a))

    grid = np.linspace(0.0, a_j, cfg.condition_grid_n, endpoint=False)
    vals = np.asarray(margin(grid))
    i = int(np.argmin(vals))
    arg, worst = _refine_min(margin, 0.0, a_j, i, grid, vals, hi_open=True)
    return ConditionReport(C1, worst >= -MARGIN_TOL, q, worst, arg, cfg.condition_grid_n, domain_upper=a_j)


def check_C2(env: Environment, pair: EffortUtilityPair, q: float, cfg: SolverConfig = DEFAULT_CONFIG) -> ConditionReport:
    """Stationary-quota condition for all efforts a >= 0.

    Beyond the checked interval the cost ratio already exceeds 1/(1-F(q|a)),
    the largest value the survival ratio can take, and the cost ratio only
    grows; the grid covers everything before that point.
    """
    a_j, u_j = pair.a, pair.u
    sf_j = float(env.family.sf(q, a_j))
    denom = float(env.cost.value(a_j)) + u_j

    def margin(a):
        return (np.asarray(env.cost.value(a)) + u_j) / denom - np.asarray(env.family.sf(q, a)) / sf_j

    upper = max(effort_cap(env, cfg), 2.0 * a_j, 1.0)
    for _ in range(MAX_DOUBLINGS):
        if (float(env.cost.value(upper)) + u_j) / denom > 1.0 / sf_j:
            break
        upper *= 2.0
    grid = np.union1d(np.linspace(0.0, upper, cfg.condition_grid_n), [a_j])
    vals = np.asarray(margin(grid))
    i = int(np.argmin(vals))
    arg, worst = _refine_min(margin, 0.0, upper, i, grid, vals, hi_open=False)
    return ConditionReport(C2, worst >= -MARGIN_TOL, q, worst, arg, len(grid), domain_upper=upper,
                           note=f"checked on [0, {upper:.6g}]; larger efforts bounded analytically")


def _certify(env, contract, pair, cfg):
    report = verify_implementation(env, contract, pair, cfg)
    return report.ok, report


def synthesize_optimal_quota_bonus(env: Environment, cfg: SolverConfig = DEFAULT_CONFIG) -> SynthesisOutcome:
    relaxed = solve_relaxed(env, cfg)
    fb = first_best(env, cfg)
    reports: list[ConditionReport] = []
    notes: list[str] = []

    def done(contract, pair, via, verification):
        payoff = float(principal_expected_payoff(env, contract, pair.a))
        return SynthesisOutcome(contract, True, via, reports, relaxed, payoff, fb.surplus - env.u0 - payoff,
                                pair=pair, verification=verification, first_best=fb, notes=notes)

    pairs = [relaxed.pair] + [p for p in relaxed.co_optimal if p != relaxed.pair]
    for pair in pairs:
        if pair.a == 0:
            contract = Constant(float(env.cost.value(0.0)) + pair.u)
            reports.append(check_C1(env, pair, cfg))
            ok, ver = _certify(env, contract, pair, cfg)
            if ok:
                return done(contract, pair, C1, ver)
            notes.append(f"constant contract failed verification at a=0 (gap {ver.utility_gap:.3g})")
            continue

        c1 = check_C1(env, pair, cfg)
        reports.append(c1)
        if c1.holds:
            q = c1.quota
            contract = QuotaBonus(q, bonus_for(env, q, pair))
            ok, ver = _certify(env, contract, pair, cfg)
            if ok:
                return done(contract, pair, C1, ver)
            notes.append(f"C1 contract {contract.spec()} failed oracle verification")

        found = stationary_quotas(env, pair, cfg)
        if found.all_stationary:
            notes.append("every quota above L(a) is stationary; C2 tried at sampled quotas")
        for q in found.quotas:
            c2 = check_C2(env, pair, q, cfg)
            reports.append(c2)
            if not c2.holds:
                continue
            contract = QuotaBonus(q, bonus_for(env, q, pair))
            ok, ver = _certify(env, contract, pair, cfg)
            if ok:
                return done(contract, pair, C2, ver)
            notes.append(f"C2 contract {contract.spec()} failed oracle verification")

    notes.append("neither condition certified a quota-bonus contract; they are sufficient, not necessary")
    return SynthesisOutcome(None, False, NONE, reports, relaxed, math.nan, math.nan,
                            first_best=fb, notes=notes)
