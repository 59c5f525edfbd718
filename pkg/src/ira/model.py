"""Domain types and expected-payoff accounting for the principal-agent model.

Efforts and outcomes are plain floats; an unbounded quantity (the upper end of
a support, a likelihood-ratio supremum) is ``math.inf``.  Every payoff function
accepts either a scalar effort or a numpy array of efforts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np
from scipy import integrate

if TYPE_CHECKING:
    from .families import OutcomeFamily


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SolverError(RuntimeError):
    """A numerical procedure could not establish its result."""


def _check_nonneg(name: str, value: float) -> float:
    value = float(value)
    if math.isnan(value) or value < 0:
        raise DomainError(f"{name} must be a nonnegative real, got {value!r}")
    return value


def _check_effort(a):
    arr = np.asarray(a, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"effort must be >= 0, got {a!r}")
    return arr


def _scalar_or_array(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class CostSpec:
    """Power cost ``kappa * a**p + c0``."""

    kappa: float
    p: float
    c0: float = 0.0

    def __post_init__(self):
        if not (self.kappa > 0) or math.isinf(self.kappa):
            raise DomainError(f"cost kappa must be a positive real, got {self.kappa!r}")
        if not (self.p >= 1) or math.isinf(self.p):
            raise DomainError(f"cost exponent p must be >= 1, got {self.p!r}")
        _check_nonneg("cost offset c0", self.c0)

    def value(self, a):
        a = np.asarray(a, dtype=float)
        return _scalar_or_array(self.kappa * a**self.p + self.c0)

    def deriv(self, a):
        a = np.asarray(a, dtype=float)
        if self.p == 1:
            return _scalar_or_array(np.full_like(a, self.kappa))
        return _scalar_or_array(self.kappa * self.p * a ** (self.p - 1))

    def second_deriv(self, a):
        a = np.asarray(a, dtype=float)
        if self.p == 1:
            return _scalar_or_array(np.zeros_like(a))
        if self.p == 2:
            return _scalar_or_array(np.full_like(a, 2 * self.kappa))
        return _scalar_or_array(self.kappa * self.p * (self.p - 1) * a ** (self.p - 2))

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "p": self.p, "c0": self.c0}


@dataclass(frozen=True)
class Environment:
    family: OutcomeFamily
    cost: CostSpec
    u0: float = 0.0

    def __post_init__(self):
        _check_nonneg("reservation utility u0", self.u0)


@dataclass(frozen=True)
class EffortUtilityPair:
    a: float
    u: float

    def __post_init__(self):
        _check_nonneg("effort a", self.a)
        if math.isnan(self.u):
            raise DomainError("utility u must be a real number")


# -- contracts ---------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    """Pay ``w`` whatever the outcome."""

    w: float

    def __post_init__(self):
        _check_nonneg("payment w", self.w)

    @property
    def thresholds(self) -> tuple[float, ...]:
        return ()

    def payment(self, x):
        return _scalar_or_array(np.full_like(np.asarray(x, dtype=float), self.w))

    def spec(self) -> str:
        return f"constant:{self.w!r}"


@dataclass(frozen=True)
class Linear:
    """Pay ``alpha + beta * x``."""

    alpha: float
    beta: float

    def __post_init__(self):
        _check_nonneg("intercept alpha", self.alpha)
        _check_nonneg("slope beta", self.beta)

    @property
    def thresholds(self) -> tuple[float, ...]:
        return ()

    def payment(self, x):
        return _scalar_or_array(self.alpha + self.beta * np.asarray(x, dtype=float))

    def spec(self) -> str:
        return f"linear:{self.alpha!r},{self.beta!r}"


@dataclass(frozen=True)
class QuotaBonus:
    """Pay bonus ``b`` when the outcome reaches quota ``q``, else nothing."""

    q: float
    b: float

    def __post_init__(self):
        _check_nonneg("quota q", self.q)
        _check_nonneg("bonus b", self.b)

    @property
    def thresholds(self) -> tuple[float, ...]:
        return (self.q,)

    def payment(self, x):
        return _scalar_or_array(np.where(np.asarray(x, dtype=float) >= self.q, self.b, 0.0))

    def spec(self) -> str:
        return f"quota-bonus:{self.q!r},{self.b!r}"


@dataclass(frozen=True)
class Step:
    """Pay ``payments[i]`` on ``[thresholds[i-1], thresholds[i])``.

    ``payments[0]`` applies below the first threshold and ``payments[-1]`` at
    or above the last one.
    """

    thresholds: tuple[float, ...]
    payments: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "payments", tuple(float(w) for w in self.payments))
        if len(self.payments) != len(self.thresholds) + 1:
            raise DomainError("a step contract needs exactly one more payment than thresholds")
        for t in self.thresholds:
            _check_nonneg("threshold", t)
        for w in self.payments:
            _check_nonneg("payment", w)
        if any(t1 >= t2 for t1, t2 in zip(self.thresholds, self.thresholds[1:])):
            raise DomainError("step thresholds must be strictly increasing")

    def payment(self, x):
        idx = np.searchsorted(self.thresholds, np.asarray(x, dtype=float), side="right")
        return _scalar_or_array(np.asarray(self.payments)[idx])

    def jumps(self) -> list[tuple[float, float]]:
        """(threshold, payment increment) pairs."""
        return [(t, self.payments[i + 1] - self.payments[i]) for i, t in enumerate(self.thresholds)]

    def spec(self) -> str:
        values = list(self.thresholds) + list(self.payments)
        return "step:" + ",".join(repr(v) for v in values)


Contract = Union[Constant, Linear, QuotaBonus, Step]


def _payment_jumps(s: Contract) -> tuple[float, list[tuple[float, float]]]:
    """Base payment and (threshold, increment) list for a piecewise-constant contract."""
    if isinstance(s, Constant):
        return s.w, []
    if isinstance(s, QuotaBonus):
        return 0.0, [(s.q, s.b)]
    if isinstance(s, Step):
        return s.payments[0], s.jumps()
    raise TypeError(f"{type(s).__name__} is not piecewise constant")


# -- payoffs -----------------------------------------------------------------


def expected_payment(env: Environment, s: Contract, a):
    """E[s(X) | a] from survival-function differences (or the mean, for linear pay)."""
    a = _check_effort(a)
    family = env.family
    if isinstance(s, Linear):
        return _scalar_or_array(s.alpha + s.beta * np.asarray(family.mean(a)))
    base, jumps = _payment_jumps(s)
    total = np.full_like(a, base)
    for t, delta in jumps:
        total = total + delta * np.asarray(family.sf(t, a))
    return _scalar_or_array(total)


def agent_expected_utility(env: Environment, s: Contract, a):
    """Agent's expected payment net of effort cost."""
    return _scalar_or_array(np.asarray(expected_payment(env, s, a)) - env.cost.value(a))


def social_surplus(env: Environment, a):
    a = _check_effort(a)
    return _scalar_or_array(np.asarray(env.family.mean(a)) - env.cost.value(a))


def principal_expected_payoff(env: Environment, s: Contract, a):
    # m(a) - c(a) - E^A(a, s), i.e. expected outcome less expected payment
    return _scalar_or_array(
        np.asarray(social_surplus(env, a)) - np.asarray(agent_expected_utility(env, s, a))
    )


def is_shifting_support(env: Environment, a_probe_grid) -> bool:
    grid = np.sort(np.asarray(a_probe_grid, dtype=float))
    if grid.size < 2 or np.any(grid <= 0):
        raise DomainError("need at least two positive probe efforts")
    lower = np.asarray(env.family.lower(grid), dtype=float)
    return bool(np.any(np.diff(lower) > 0))


# -- quadrature oracle (tests and diagnostics only) ---------------------------


def expected_payment_quadrature(env: Environment, s: Contract, a: float) -> float:
    """E[s(X) | a] by adaptive quadrature of s(x) f(x|a), piecewise between thresholds.

    Independent of :func:`expected_payment`; used to check it.
    """
    a = float(_check_effort(a))
    family = env.family
    if a == 0 and family.mean(0.0) == float(family.lower(0.0)):
        # degenerate point mass at L(0)
        return float(s.payment(family.lower(0.0)))
    lo = float(family.lower(a))
    hi = family.upper
    breaks = sorted({lo, hi, *(t for t in getattr(s, "thresholds", ()) if lo < t < hi)})
    total = 0.0
    for x0, x1 in zip(breaks, breaks[1:]):
        val, _ = integrate.quad(
            lambda x: float(s.payment(x)) * float(family.pdf(x, a)), x0, x1,
            epsabs=1e-13, epsrel=1e-12, limit=200,
        )
        total += val
    return total


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared by the oracle, the relaxed solver and the condition checks."""

    grid_n: int = 4001
    tol_utility: float = 1e-8
    tol_root: float = 1e-10
    refine_tol: float = 1e-9
    tol_effort: float = 1e-6
    tol_derivative: float = 1e-6
    condition_grid_n: int = 10_000
    effort_cap_override: float | None = None

    def __post_init__(self):
        if self.grid_n < 3 or self.condition_grid_n < 3:
            raise DomainError("grid sizes must be at least 3")
        for name in ("tol_utility", "tol_root", "refine_tol", "tol_effort", "tol_derivative"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.effort_cap_override is not None and not self.effort_cap_override > 0:
            raise DomainError("effort_cap_override must be positive")


DEFAULT_CONFIG = SolverConfig()
