"""End-to-end acceptance checks; a PASS/FAIL line per criterion is printed after the run.

Run alone with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from ira import (
    Constant,
    EffortUtilityPair,
    Linear,
    QuotaBonus,
    agent_expected_utility,
    best_response,
    bonus_for,
    first_best,
    one_sided_derivatives,
    principal_expected_payoff,
    relaxed_set_contains,
    social_surplus,
    solve_relaxed,
    synthesize_optimal_quota_bonus,
    two_step_ric_contract,
    verify_implementation,
)
from ira.cli import main
from ira.families import numeric_lr_sup
from ira.oracle import KINK
from ira.synthesis import C1, C2

from conftest import FAMILY_ENVS, random_threshold_contract

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SQRT3, SQRT6 = math.sqrt(3), math.sqrt(6)


def cli_json(capsys, *argv):
    assert main([*argv, "--format", "json"]) == 0
    return json.loads(capsys.readouterr().out)


@pytest.mark.criterion(1, "example 1: solve gives q=1, b=1.5, payoff 0.5 via C1; kink with d=(0.5, -1)")
def test_example1_reproduction(capsys, ex1):
    outcome = cli_json(capsys, "solve", str(CONFIGS / "example1.json"))["outcome"]
    assert outcome["certified"] and outcome["via"] == C1
    assert outcome["contract"]["kind"] == "quota-bonus"
    assert outcome["contract"]["q"] == pytest.approx(1.0, abs=1e-6)
    assert outcome["contract"]["b"] == pytest.approx(1.5, abs=1e-6)
    assert outcome["principal_payoff"] == pytest.approx(0.5, abs=1e-6)
    br = best_response(ex1, QuotaBonus(1.0, 1.5))
    assert br.a_star == pytest.approx(1.0, abs=1e-6)
    assert br.classification == KINK
    assert br.d_left == pytest.approx(0.5, abs=1e-4)
    assert br.d_right == pytest.approx(-1.0, abs=1e-4)


@pytest.mark.criterion(2, "example 1: first-order approach fails (RP quota-bonus infeasible, linear sqrt3-1)")
def test_example1_foa_failure(capsys):
    foa = cli_json(capsys, "foa", str(CONFIGS / "example1.json"))["foa"]
    assert foa["rp_quota_bonus"]["feasible"] is False
    assert foa["rp_linear"]["beta"] == pytest.approx(SQRT3 - 1, abs=1e-6)
    assert foa["rp_linear"]["payoff"] == pytest.approx(2 * SQRT3 - 3, abs=1e-6)
    assert foa["foa_misleads"] is True
    assert foa["op_result"]["principal_payoff"] > foa["rp_linear"]["payoff"]


@pytest.mark.criterion(3, "example 2: relaxed (2/3, 4/27), contract (2/3, 4/9), payoff 8/9, first best, loss")
def test_example2_reproduction(ex2):
    sol = solve_relaxed(ex2)
    assert sol.pair.a == pytest.approx(2 / 3, abs=1e-6)
    assert sol.pair.u == pytest.approx(4 / 27, abs=1e-6)
    out = synthesize_optimal_quota_bonus(ex2)
    assert out.certified
    assert out.contract.q == pytest.approx(2 / 3, abs=1e-6)
    assert out.contract.b == pytest.approx(4 / 9, abs=1e-6)
    assert out.principal_payoff == pytest.approx(8 / 9, abs=1e-6)
    fb = first_best(ex2)
    assert fb.a == pytest.approx(SQRT6 / 3, abs=1e-6)
    assert fb.surplus == pytest.approx(4 * SQRT6 / 9, abs=1e-6)
    assert out.efficiency_loss == pytest.approx(4 * SQRT6 / 9 - 8 / 9, abs=1e-6)
    assert not relaxed_set_contains(ex2, EffortUtilityPair(SQRT6 / 3, 0.0))


@pytest.mark.criterion(4, "relaxation dominance over 200 random threshold contracts per family")
@pytest.mark.parametrize("name", list(FAMILY_ENVS))
def test_relaxation_dominance(name):
    env = FAMILY_ENVS[name]()
    value = solve_relaxed(env).value
    rng = np.random.default_rng(2024)
    certified = 0
    for _ in range(200):
        s = random_threshold_contract(rng, max_q=3.0, max_pay=6.0)
        br = best_response(env, s)
        if br.u_star < env.u0:
            continue
        pair = EffortUtilityPair(br.a_star, br.u_star)
        if not verify_implementation(env, s, pair).ok:
            continue
        certified += 1
        assert relaxed_set_contains(env, pair), (s, pair)
        assert float(principal_expected_payoff(env, s, pair.a)) <= value + 1e-8, (s, pair)
    assert certified >= 50


@pytest.mark.criterion(5, "participation binds under the lemma bonus for 500 random (q, a, u)")
def test_ir_binding():
    rng = np.random.default_rng(5)
    envs = [factory() for factory in FAMILY_ENVS.values()]
    checked = 0
    while checked < 500:
        env = envs[checked % len(envs)]
        a, q, u = rng.uniform(0.01, 3.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)
        if not float(env.family.cdf(q, a)) < 1.0:
            continue
        pair = EffortUtilityPair(float(a), float(u))
        s = QuotaBonus(float(q), bonus_for(env, float(q), pair))
        assert float(agent_expected_utility(env, s, pair.a)) == pytest.approx(pair.u, abs=1e-9)
        checked += 1


@pytest.mark.criterion(6, "G(a) > 0 on a 100-point grid and matches the numeric supremum to 1e-6")
@pytest.mark.parametrize("name", list(FAMILY_ENVS))
def test_likelihood_ratio_positive_and_matches_oracle(name):
    family = FAMILY_ENVS[name]().family
    for a in np.linspace(0.0, 3.0, 101)[1:]:
        g = float(family.lr_sup(a))
        assert g > 0
        numeric = numeric_lr_sup(family, float(a))
        if math.isfinite(g):
            assert numeric == pytest.approx(g, abs=1e-6)
        else:
            assert math.isinf(numeric)


@pytest.mark.criterion(7, "accounting identity E^P + E^A = surplus over 1000 random draws")
def test_accounting_identity():
    rng = np.random.default_rng(7)
    envs = [factory() for factory in FAMILY_ENVS.values()]
    for i in range(1000):
        env = envs[i % len(envs)]
        kind = i % 4
        if kind == 0:
            s = Linear(float(rng.uniform(0, 2)), float(rng.uniform(0, 2)))
        elif kind == 1:
            s = Constant(float(rng.uniform(0, 3)))
        else:
            s = random_threshold_contract(rng)
        a = float(rng.uniform(0.0, 4.0))
        total = float(principal_expected_payoff(env, s, a)) + float(agent_expected_utility(env, s, a))
        surplus = float(social_surplus(env, a))
        assert abs(total - surplus) <= 1e-10 * max(1.0, abs(surplus))


@pytest.mark.criterion(8, "fixed support: relaxed (1, 0), C2 contract (2, e^2/2), payoff 0.5, certified")
def test_fixed_support_first_best(fixed):
    sol = solve_relaxed(fixed)
    assert sol.pair.a == pytest.approx(1.0, abs=1e-6)
    assert sol.pair.u == pytest.approx(0.0, abs=1e-12)
    out = synthesize_optimal_quota_bonus(fixed)
    assert out.certified and out.via == C2
    assert out.contract.q == pytest.approx(2.0, abs=1e-5)
    assert out.contract.b == pytest.approx(math.exp(2) / 2, abs=1e-5)
    assert out.principal_payoff == pytest.approx(0.5, abs=1e-6)
    assert out.verification.ok


@pytest.mark.criterion(9, "two-step stationary contract on example 1: E^A(1) = 1.1, both derivatives 0")
def test_two_step_construction(ex1):
    ts = two_step_ric_contract(ex1, EffortUtilityPair(1.0, 1.0), a2=1.5, epsilon=0.1)
    assert ts.b1 > 0 and ts.b2 > 0
    assert float(agent_expected_utility(ex1, ts.contract, 1.0)) == pytest.approx(1.1, abs=1e-8)
    d_left, d_right = one_sided_derivatives(ex1, ts.contract, 1.0)
    assert abs(d_left) <= 1e-6 and abs(d_right) <= 1e-6


@pytest.mark.criterion(10, "best response agrees with a 1e5-point grid on 50 random contracts per family")
@pytest.mark.parametrize("name", list(FAMILY_ENVS))
def test_oracle_matches_dense_grid(name):
    env = FAMILY_ENVS[name]()
    rng = np.random.default_rng(10)
    for _ in range(50):
        s = random_threshold_contract(rng)
        br = best_response(env, s)
        grid = np.linspace(0.0, br.effort_cap, 100_000)
        spacing = grid[1] - grid[0]
        values = agent_expected_utility(env, s, grid)
        i = int(np.argmax(values))
        # the grid never beats the oracle ...
        assert values[i] <= br.u_star + 1e-8, s
        # ... and falls short only by what its spacing allows at a kink
        slope = max(abs(br.d_right), 0.0 if math.isnan(br.d_left) else abs(br.d_left))
        assert br.u_star - values[i] <= max(1e-8, slope * spacing), s
        assert min(abs(grid[i] - t) for t in br.ties) <= spacing * (1 + 1e-9), s


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
