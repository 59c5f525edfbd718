"""Grid-plus-refinement maximization of piecewise-smooth scalar functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import optimize

from .model import SolverError

#: cap on doublings when searching for an interval that holds every maximizer
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class Candidate:
    x: float
    value: float
    exact: bool = False  # injected analytically rather than found by search


@dataclass
class GridMaximum:
    best: Candidate
    ties: list[Candidate] = field(default_factory=list)
    spacing: float = 0.0


def decay_cap(fn: Callable[[np.ndarray], np.ndarray], what: str, probes: int = 257) -> float:
    """Smallest ``A`` in 1, 2, 4, ... with ``fn < fn(0) - 1`` on a grid of [A, 2A]."""
    ref = float(np.asarray(fn(np.array([0.0])))[0]) - 1.0
    cap = 1.0
    for _ in range(MAX_DOUBLINGS):
        vals = np.asarray(fn(np.linspace(cap, 2 * cap, probes)))
        if np.all(vals < ref):
            return cap
        cap *= 2.0
    raise SolverError(f"{what} does not decay: no effort cap after {MAX_DOUBLINGS} doublings "
                      "(the objective must fall to -inf as effort grows)")


def maximize_on_grid(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n: int,
    *,
    include_lo: bool = True,
    exact: Iterable[float] = (),
    xatol: float = 1e-10,
    tie_tol: float = 1e-8,
    max_refine: int = 64,
    polish: bool = False,
) -> GridMaximum:
    """Global maximum of ``fn`` on [lo, hi].

    A dense grid locates every local maximum; each is refined by bounded Brent
    search between its grid neighbours.  Points in ``exact`` (kinks, endpoints)
    are evaluated as given and win a near-duplicate cluster unless beaten by
    more than round-off.  ``ties`` holds one representative per cluster of
    near-optimal points, plus the ends of any flat plateau.  With ``polish``
    each refined point is moved to the sign change of a central-difference
    derivative, which beats Brent's ~sqrt(eps) limit on smooth tops.
    """
    if include_lo:
        grid = np.linspace(lo, hi, n)
    else:
        grid = np.linspace(lo, hi, n + 1)[1:]
    spacing = (hi - lo) / max(n - 1, 1)
    vals = np.asarray(fn(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise SolverError("objective is not finite on the search grid")

    padded = np.concatenate(([-np.inf], vals, [-np.inf]))
    is_peak = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    peaks = np.flatnonzero(is_peak)
    peaks = peaks[np.argsort(-vals[peaks], kind="stable")][:max_refine]

    def scalar(x: float) -> float:
        return float(np.asarray(fn(np.array([x])))[0])

    cands: list[Candidate] = []
    for i in peaks:
        a0 = grid[i - 1] if i > 0 else grid[i]
        a1 = grid[i + 1] if i < len(grid) - 1 else grid[i]
        cands.append(Candidate(float(grid[i]), float(vals[i])))
        if a1 > a0:
            res = optimize.minimize_scalar(lambda x: -scalar(x), bounds=(a0, a1), method="bounded",
                                           options={"xatol": xatol})
            x, v = float(res.x), -float(res.fun)
            if polish:
                root = polish_root(lambda t: _central_diff(scalar, t, lo), a0, a1, xtol=1e-15)
                if root is not None and scalar(root) >= v - 1e-15 * max(1.0, abs(v)):
                    x, v = root, scalar(root)
            cands.append(Candidate(x, v))
    for x in exact:
        if lo <= x <= hi:
            cands.append(Candidate(float(x), scalar(float(x)), exact=True))

    top = max(c.value for c in cands)
    # a plateau is flat to round-off; merely tie_tol-flat tops are ordinary peaks
    near = vals >= top - 1e-12 * max(1.0, abs(top))
    edges = np.flatnonzero(np.diff(np.concatenate(([0], near.astype(int), [0]))))
    plateaus = [(grid[i], grid[j - 1]) for i, j in zip(edges[::2], edges[1::2]) if j - i > 2]
    for x0, x1 in plateaus:
        # a flat stretch is represented by its ends, not by round-off wiggles inside
        cands = [c for c in cands if c.exact or not (x0 < c.x < x1)]
        cands += [Candidate(float(x0), scalar(float(x0))), Candidate(float(x1), scalar(float(x1)))]

    close = [c for c in cands if c.value >= top - tie_tol]
    reps = sorted(_cluster(close, width=2 * spacing), key=lambda c: c.x)
    # distinct co-optimal points: the smallest argument wins, deterministically
    best = reps[0]
    return GridMaximum(best=best, ties=reps, spacing=spacing)


def _central_diff(fn: Callable[[float], float], x: float, lo: float) -> float:
    h = 1e-6 * max(1.0, abs(x))
    left = max(lo, x - h)
    return (fn(x + h) - fn(left)) / (x + h - left)


def _cluster(cands: list[Candidate], width: float) -> list[Candidate]:
    out: list[Candidate] = []
    group: list[Candidate] = []
    for c in sorted(cands, key=lambda c: c.x):
        if group and c.x - group[-1].x > width:
            out.append(_representative(group))
            group = []
        group.append(c)
    if group:
        out.append(_representative(group))
    return out


def _representative(group: list[Candidate]) -> Candidate:
    top = max(c.value for c in group)
    exact = [c for c in group if c.exact and c.value >= top - 1e-12 * max(1.0, abs(top))]
    if exact:
        return max(exact, key=lambda c: c.value)
    return max(group, key=lambda c: (c.value, -c.x))


def polish_root(deriv: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-14) -> float | None:
    """Root of ``deriv`` in [lo, hi] when it changes sign from + to -, else None."""
    d_lo, d_hi = deriv(lo), deriv(hi)
    if not (math.isfinite(d_lo) and math.isfinite(d_hi)) or d_lo < 0 or d_hi > 0 or d_lo == d_hi:
        return None
    if d_lo == 0:
        return lo
    if d_hi == 0:
        return hi
    return optimize.brentq(deriv, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
