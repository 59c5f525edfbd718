import math

import numpy as np
import pytest

from ira import (
    CostSpec,
    DomainError,
    EffortUtilityPair,
    Environment,
    ShiftedExponential,
    SolverConfig,
    SolverError,
    first_best,
    likelihood_ratio_sup,
    min_required_utility,
    relaxed_set_contains,
    solve_relaxed,
)
from ira.relaxed import effort_cap

from conftest import make_env


def test_example2_relaxed_optimum(ex2):
    sol = solve_relaxed(ex2)
    assert sol.pair.a == pytest.approx(2 / 3, abs=1e-9)
    assert sol.pair.u == pytest.approx(4 / 27, abs=1e-9)
    assert sol.value == pytest.approx(8 / 9, abs=1e-12)


def test_min_required_utility_closed_forms(ex1, ex2):
    a = np.array([0.25, 0.5, 1.0, 2.0])
    # Pareto k=2, c=a^3: c'/G - c = 3a^2 * a/2 - a^3 = a^3/2
    np.testing.assert_allclose(min_required_utility(ex2, a), a**3 / 2, rtol=1e-13)
    # shifted exponential, c=a^2/2: a - a^2/2 <= 1/2 < u0 = 1
    np.testing.assert_allclose(min_required_utility(ex1, a), 1.0)
    assert min_required_utility(ex1, 0.0) == 1.0


def test_relaxed_set_membership(ex2):
    a = math.sqrt(6) / 3
    assert not relaxed_set_contains(ex2, EffortUtilityPair(a, 0.0))
    assert relaxed_set_contains(ex2, EffortUtilityPair(a, a**3 / 2))
    assert relaxed_set_contains(ex2, EffortUtilityPair(0.0, 0.0))


def test_fixed_support_admits_every_effort(fixed):
    for a in [0.1, 1.0, 10.0]:
        assert relaxed_set_contains(fixed, EffortUtilityPair(a, 0.0))
    sol = solve_relaxed(fixed)
    assert sol.pair.a == pytest.approx(1.0, abs=1e-9)
    assert sol.pair.u == 0.0


def test_likelihood_ratio_sup_domain(ex2):
    assert likelihood_ratio_sup(ex2, 0.5) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        likelihood_ratio_sup(ex2, 0.0)


def test_first_best(ex2, ex1):
    fb = first_best(ex2)
    assert fb.a == pytest.approx(math.sqrt(6) / 3, abs=1e-9)
    assert fb.surplus == pytest.approx(4 * math.sqrt(6) / 9, abs=1e-12)
    assert first_best(ex1).a == pytest.approx(1.0, abs=1e-9)


def test_flat_objective_prefers_smallest_effort():
    # u0 = 0, c = a^2/2: u_min = a - a^2/2 on [0, 2], so the objective is flat at 1 there
    env = make_env(ShiftedExponential(1.0), 0.5, 2.0, 0.0, 0.0)
    sol = solve_relaxed(env)
    assert sol.pair.a == 0.0
    assert sol.value == pytest.approx(1.0, abs=1e-12)
    assert len(sol.co_optimal) >= 2


def test_effort_cap_doubling_and_override(ex2):
    assert effort_cap(ex2) >= 1.0
    assert effort_cap(ex2, SolverConfig(effort_cap_override=5.0)) == 5.0


def test_effort_cap_fails_when_surplus_never_decays():
    env = Environment(ShiftedExponential(1.0), CostSpec(0.5, 1.0), 0.0)
    with pytest.raises(SolverError, match="does not decay"):
        solve_relaxed(env)


def test_relaxed_dominates_first_best_minus_u0(ex1, ex2, fixed):
    for env in (ex1, ex2, fixed):
        assert solve_relaxed(env).value <= first_best(env).surplus - env.u0 + 1e-12
