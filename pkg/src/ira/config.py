"""JSON problem configs and the compact ``kind:p1,p2`` contract grammar."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .families import make_family
from .model import (
    Constant,
    Contract,
    CostSpec,
    DomainError,
    Environment,
    Linear,
    QuotaBonus,
    SolverConfig,
    Step,
)


class ConfigError(ValueError):
    """A config or command-line value cannot be turned into a problem instance."""


SOLVER_KEYS = {"grid_n", "tol_utility", "tol_root", "effort_cap_override"}


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if math.isnan(value):
        raise ConfigError(f"{path}: NaN is not allowed")
    return float(value)


def _mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
    return value


@dataclass(frozen=True)
class ProblemConfig:
    family: str
    family_params: dict[str, float]
    kappa: float
    p: float
    c0: float
    u0: float
    solver: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: Any) -> ProblemConfig:
        raw = _mapping(raw, "config")
        unknown = set(raw) - {"family", "cost", "u0", "solver"}
        if unknown:
            raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")
        for key in ("family", "cost", "u0"):
            if key not in raw:
                raise ConfigError(f"{key}: required")
        fam = _mapping(raw["family"], "family")
        if not isinstance(fam.get("name"), str):
            raise ConfigError("family.name: expected a string")
        params = {k: _number(v, f"family.params.{k}")
                  for k, v in _mapping(fam.get("params", {}), "family.params").items()}
        cost = _mapping(raw["cost"], "cost")
        for key in ("kappa", "p"):
            if key not in cost:
                raise ConfigError(f"cost.{key}: required")
        solver = _mapping(raw.get("solver", {}), "solver")
        bad = set(solver) - SOLVER_KEYS
        if bad:
            raise ConfigError(f"solver: unknown key(s) {sorted(bad)}")
        solver_vals = {k: (None if v is None and k == "effort_cap_override" else _number(v, f"solver.{k}"))
                       for k, v in solver.items()}
        config = cls(
            family=fam["name"],
            family_params=params,
            kappa=_number(cost["kappa"], "cost.kappa"),
            p=_number(cost["p"], "cost.p"),
            c0=_number(cost.get("c0", 0.0), "cost.c0"),
            u0=_number(raw["u0"], "u0"),
            solver=solver_vals,
        )
        config.to_environment()  # surface domain errors with their field path
        config.solver_config()
        return config

    @classmethod
    def load(cls, path: str | Path) -> ProblemConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        return cls.from_dict(raw)

    @classmethod
    def from_environment(cls, env: Environment, solver: dict | None = None) -> ProblemConfig:
        fam = env.family.to_dict()
        return cls(fam["name"], fam["params"], env.cost.kappa, env.cost.p, env.cost.c0, env.u0,
                   dict(solver or {}))

    def to_environment(self) -> Environment:
        try:
            family = make_family(self.family, self.family_params)
        except DomainError as exc:
            raise ConfigError(f"family: {exc}") from None
        try:
            cost = CostSpec(self.kappa, self.p, self.c0)
        except DomainError as exc:
            raise ConfigError(f"cost: {exc}") from None
        try:
            return Environment(family, cost, self.u0)
        except DomainError as exc:
            raise ConfigError(f"u0: {exc}") from None

    def solver_config(self) -> SolverConfig:
        kwargs = dict(self.solver)
        if "grid_n" in kwargs:
            if kwargs["grid_n"] != int(kwargs["grid_n"]):
                raise ConfigError("solver.grid_n: expected an integer")
            kwargs["grid_n"] = int(kwargs["grid_n"])
        try:
            return SolverConfig(**kwargs)
        except DomainError as exc:
            raise ConfigError(f"solver: {exc}") from None

    def to_dict(self) -> dict:
        out = {
            "family": {"name": self.family, "params": dict(self.family_params)},
            "cost": {"kappa": self.kappa, "p": self.p, "c0": self.c0},
            "u0": self.u0,
        }
        if self.solver:
            out["solver"] = dict(self.solver)
        return out


_CONTRACT_ARITY = {"constant": 1, "linear": 2, "quota-bonus": 2}


def parse_contract(spec: str) -> Contract:
    """Parse ``constant:w``, ``linear:alpha,beta``, ``quota-bonus:q,b`` or
    ``step:t1,...,tk,w0,...,wk``."""
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise ConfigError(f"contract {spec!r}: expected kind:param,param")
    try:
        values = [float(v) for v in rest.split(",")]
    except ValueError:
        raise ConfigError(f"contract {spec!r}: parameters must be numbers") from None
    kind = kind.strip().lower()
    try:
        if kind == "step":
            if len(values) % 2 != 1:
                raise ConfigError(f"contract {spec!r}: step takes k thresholds and k+1 payments")
            k = len(values) // 2
            return Step(tuple(values[:k]), tuple(values[k:]))
        if kind not in _CONTRACT_ARITY:
            raise ConfigError(f"contract {spec!r}: unknown kind {kind!r}")
        if len(values) != _CONTRACT_ARITY[kind]:
            raise ConfigError(f"contract {spec!r}: {kind} takes {_CONTRACT_ARITY[kind]} parameter(s)")
        cls = {"constant": Constant, "linear": Linear, "quota-bonus": QuotaBonus}[kind]
        return cls(*values)
    except DomainError as exc:
        raise ConfigError(f"contract {spec!r}: {exc}") from None


def parse_floats(text: str, count: int, what: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{what} {text!r}: expected {count} comma-separated numbers") from None
    if len(values) != count or any(math.isnan(v) for v in values):
        raise ConfigError(f"{what} {text!r}: expected {count} comma-separated numbers")
    return values
