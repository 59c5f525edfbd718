"""Built-in outcome families with closed-form distributions.

Every method is vectorised over ``x`` and ``a`` by numpy broadcasting.  The
conventions at the edge of the support are fixed here once:

* ``sf(x, a) = 1`` for ``x <= L(a)`` (no mass below the lower support);
* ``cdf_a`` and ``pdf_a`` use the interior formula at ``x = L(a)`` itself, which
  is the one-sided limit from inside the support, and vanish below it;
* at ``a = 0`` the scale-type families (Pareto, scale exponential) degenerate
  to a point mass at zero.
"""

from __future__ import annotations

import functools
import math
from abc import ABC, abstractmethod

import numpy as np
from scipy import optimize

from .model import DomainError, _scalar_or_array


def _arrays(x, a):
    return np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(a, dtype=float))


def _quiet_overflow(method):
    # tiny positive efforts overflow x/a to inf, and exp(-inf) = 0 is the right answer
    @functools.wraps(method)
    def wrapper(self, x, a):
        with np.errstate(over="ignore"):
            return method(self, x, a)
    return wrapper


class OutcomeFamily(ABC):
    """Distribution of the outcome X(a) given effort a."""

    name: str = ""
    upper: float = math.inf

    @property
    @abstractmethod
    def params(self) -> dict[str, float]: ...

    @abstractmethod
    def lower(self, a): ...

    @abstractmethod
    def lower_deriv(self, a): ...

    @abstractmethod
    def sf(self, x, a):
        """P(X >= x | a)."""

    def cdf(self, x, a):
        return _scalar_or_array(1.0 - np.asarray(self.sf(x, a)))

    @abstractmethod
    def pdf(self, x, a): ...

    @abstractmethod
    def logpdf(self, x, a): ...

    @abstractmethod
    def cdf_a(self, x, a):
        """Partial derivative of F(x|a) in effort."""

    @abstractmethod
    def pdf_a(self, x, a):
        """Partial derivative of f(x|a) in effort."""

    @abstractmethod
    def mean(self, a): ...

    @abstractmethod
    def mean_deriv(self, a): ...

    @abstractmethod
    def lr_sup(self, a):
        """sup over (L(a), upper] of pdf_a / pdf; may be ``inf``."""

    def lower_inverse(self, t: float) -> float | None:
        """Smallest effort with L(a) = t, or None if L never crosses t strictly.

        The default bisects on L; families with closed-form L override it.
        """
        lo = float(self.lower(0.0))
        if t < lo:
            return None
        if t == lo:
            return 0.0 if float(self.lower_deriv(0.0)) > 0 else None
        hi = 1.0
        while float(self.lower(hi)) < t:
            hi *= 2.0
            if hi > 1e300:
                return None
        return optimize.brentq(lambda a: float(self.lower(a)) - t, 0.0, hi, xtol=1e-14, rtol=1e-15)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.params.items()))))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


class ShiftedExponential(OutcomeFamily):
    """X = a + xi with xi ~ Exp(rate)."""

    name = "shifted-exponential"

    def __init__(self, rate: float = 1.0):
        rate = float(rate)
        if not (rate > 0) or math.isinf(rate):
            raise DomainError(f"exponential rate must be a positive real, got {rate!r}")
        self.rate = rate

    @property
    def params(self):
        return {"lambda": self.rate}

    def lower(self, a):
        return _scalar_or_array(a)

    def lower_deriv(self, a):
        return _scalar_or_array(np.ones_like(np.asarray(a, dtype=float)))

    def lower_inverse(self, t):
        return float(t) if t >= 0 else None

    def sf(self, x, a):
        x, a = _arrays(x, a)
        return _scalar_or_array(np.exp(-self.rate * np.maximum(x - a, 0.0)))

    def cdf(self, x, a):
        x, a = _arrays(x, a)
        return _scalar_or_array(-np.expm1(-self.rate * np.maximum(x - a, 0.0)))

    def pdf(self, x, a):
        x, a = _arrays(x, a)
        inside = x >= a
        return _scalar_or_array(np.where(inside, self.rate * np.exp(-self.rate * np.where(inside, x - a, 0.0)), 0.0))

    def logpdf(self, x, a):
        x, a = _arrays(x, a)
        return _scalar_or_array(np.where(x >= a, math.log(self.rate) - self.rate * (x - a), -np.inf))

    def cdf_a(self, x, a):
        return _scalar_or_array(-np.asarray(self.pdf(x, a)))

    def pdf_a(self, x, a):
        return _scalar_or_array(self.rate * np.asarray(self.pdf(x, a)))

    def mean(self, a):
        return _scalar_or_array(np.asarray(a, dtype=float) + 1.0 / self.rate)

    def mean_deriv(self, a):
        return _scalar_or_array(np.ones_like(np.asarray(a, dtype=float)))

    def lr_sup(self, a):
        return _scalar_or_array(np.full_like(np.asarray(a, dtype=float), self.rate))


class ParetoShift(OutcomeFamily):
    """Pareto with scale a: f(x|a) = k a^k / x^(k+1) on x >= a."""

    name = "pareto"

    def __init__(self, k: float = 2.0):
        k = float(k)
        if math.isnan(k) or math.isinf(k):
            raise DomainError(f"Pareto shape must be a finite real, got {k!r}")
        if k <= 1:
            raise DomainError(f"Pareto shape k={k!r} <= 1: mean undefined")
        self.k = k

    @property
    def params(self):
        return {"k": self.k}

    def lower(self, a):
        return _scalar_or_array(a)

    def lower_deriv(self, a):
        return _scalar_or_array(np.ones_like(np.asarray(a, dtype=float)))

    def lower_inverse(self, t):
        return float(t) if t >= 0 else None

    def sf(self, x, a):
        x, a = _arrays(x, a)
        above = x > a
        ratio = np.where(above, a / np.where(above, x, 1.0), 1.0)
        return _scalar_or_array(ratio**self.k)

    def _inside(self, x, a):
        # written through r = (a/x)^k, which stays in [0, 1] for tiny a and x
        x, a = _arrays(x, a)
        inside = (x >= a) & (a > 0)
        xs, as_ = np.where(inside, x, 1.0), np.where(inside, a, 1.0)
        return inside, xs, as_, (as_ / xs) ** self.k

    def pdf(self, x, a):
        inside, xs, _, r = self._inside(x, a)
        return _scalar_or_array(np.where(inside, self.k / xs * r, 0.0))

    def logpdf(self, x, a):
        x, a = _arrays(x, a)
        inside = (x >= a) & (a > 0)
        xs, as_ = np.where(inside, x, 1.0), np.where(inside, a, 1.0)
        val = math.log(self.k) + self.k * np.log(as_) - (self.k + 1) * np.log(xs)
        return _scalar_or_array(np.where(inside, val, -np.inf))

    def cdf_a(self, x, a):
        inside, _, as_, r = self._inside(x, a)
        return _scalar_or_array(np.where(inside, -self.k / as_ * r, 0.0))

    def pdf_a(self, x, a):
        inside, xs, as_, r = self._inside(x, a)
        return _scalar_or_array(np.where(inside, (self.k / as_) * (self.k / xs) * r, 0.0))

    def mean(self, a):
        return _scalar_or_array(self.k * np.asarray(a, dtype=float) / (self.k - 1))

    def mean_deriv(self, a):
        return _scalar_or_array(np.full_like(np.asarray(a, dtype=float), self.k / (self.k - 1)))

    def lr_sup(self, a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return _scalar_or_array(self.k / a)


class ScaleExponential(OutcomeFamily):
    """Exponential with mean a on the fixed support [0, inf)."""

    name = "scale-exponential"

    @property
    def params(self):
        return {}

    def lower(self, a):
        return _scalar_or_array(np.zeros_like(np.asarray(a, dtype=float)))

    def lower_deriv(self, a):
        return _scalar_or_array(np.zeros_like(np.asarray(a, dtype=float)))

    def lower_inverse(self, t):
        return None

    @_quiet_overflow
    def sf(self, x, a):
        x, a = _arrays(x, a)
        pos = a > 0
        z = np.maximum(x, 0.0) / np.where(pos, a, 1.0)
        return _scalar_or_array(np.where(pos, np.exp(-z), np.where(x <= 0, 1.0, 0.0)))

    @_quiet_overflow
    def pdf(self, x, a):
        x, a = _arrays(x, a)
        inside = (x >= 0) & (a > 0)
        as_ = np.where(inside, a, 1.0)
        return _scalar_or_array(np.where(inside, np.exp(-np.where(inside, x, 0.0) / as_) / as_, 0.0))

    @_quiet_overflow
    def logpdf(self, x, a):
        x, a = _arrays(x, a)
        inside = (x >= 0) & (a > 0)
        as_ = np.where(inside, a, 1.0)
        return _scalar_or_array(np.where(inside, -np.log(as_) - x / as_, -np.inf))

    @_quiet_overflow
    def cdf_a(self, x, a):
        x, a = _arrays(x, a)
        inside = (x >= 0) & (a > 0)
        as_ = np.where(inside, a, 1.0)
        xs = np.where(inside, x, 0.0)
        return _scalar_or_array(np.where(inside, -(xs / as_**2) * np.exp(-xs / as_), 0.0))

    @_quiet_overflow
    def pdf_a(self, x, a):
        x, a = _arrays(x, a)
        inside = (x >= 0) & (a > 0)
        as_ = np.where(inside, a, 1.0)
        xs = np.where(inside, x, 0.0)
        return _scalar_or_array(np.where(inside, (xs - as_) / as_**3 * np.exp(-xs / as_), 0.0))

    def mean(self, a):
        return _scalar_or_array(a)

    def mean_deriv(self, a):
        return _scalar_or_array(np.ones_like(np.asarray(a, dtype=float)))

    def lr_sup(self, a):
        return _scalar_or_array(np.full_like(np.asarray(a, dtype=float), np.inf))


FAMILIES = {
    ShiftedExponential.name: (ShiftedExponential, {"lambda": "rate"}),
    ParetoShift.name: (ParetoShift, {"k": "k"}),
    ScaleExponential.name: (ScaleExponential, {}),
}


def make_family(name: str, params: dict | None = None, **kwargs) -> OutcomeFamily:
    """Build a family from its config name and parameter map.

    >>> make_family("pareto", {"k": 2})
    ParetoShift(k=2.0)
    """
    params = {**(params or {}), **kwargs}
    try:
        cls, names = FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    unknown = set(params) - set(names)
    if unknown:
        raise DomainError(f"family {name!r} does not take parameter(s) {sorted(unknown)}")
    return cls(**{names[k]: float(v) for k, v in params.items()})


def numeric_lr_sup(family: OutcomeFamily, a: float, n: int = 2000) -> float:
    """Numeric sup of the effort score d/da log f(x|a) over the support.

    Cross-check for :meth:`OutcomeFamily.lr_sup`: the score comes from a central
    difference of ``logpdf`` in ``a``, never from ``pdf_a``.  The sup is taken on
    a log-spaced grid of offsets above L(a), refined at the best grid point, and
    reported as ``inf`` when the score at the widest probe exceeds 1e12 while
    still increasing.
    """
    if a <= 0:
        raise DomainError("likelihood-ratio supremum needs a > 0")
    lo = float(family.lower(a))
    h = 1e-7 * max(a, 1.0)
    # the support must not move past x inside the difference stencil
    shift = float(family.lower(a + h)) - lo
    top = family.upper - lo if math.isfinite(family.upper) else 1e16 * max(a, 1.0)
    offsets = np.logspace(math.log10(max(1e3 * shift, 1e-5 * max(a, 1.0))), math.log10(top), n)

    def score(off):
        x = lo + np.asarray(off)
        return (np.asarray(family.logpdf(x, a + h)) - np.asarray(family.logpdf(x, a - h))) / (2 * h)

    # far out |log f| is large and the difference is mostly round-off; drop those probes
    x = lo + offsets
    noise = 4 * np.finfo(float).eps * np.maximum(np.abs(family.logpdf(x, a + h)), np.abs(family.logpdf(x, a - h))) / (2 * h)
    vals = score(offsets)
    trusted = np.isfinite(vals) & (noise <= 1e-8 * np.maximum(1.0, np.abs(vals)))
    offsets, vals = offsets[trusted], vals[trusted]
    n = len(vals)
    if n >= 2 and vals[-1] > 1e12 and vals[-1] > vals[-2]:
        return math.inf
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < n - 1:
        res = optimize.minimize_scalar(
            lambda o: -float(score(o)), bounds=(offsets[i - 1], offsets[i + 1]), method="bounded",
            options={"xatol": 1e-12 * offsets[i + 1]},
        )
        best = max(best, -float(res.fun))
    return best
