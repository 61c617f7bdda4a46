"""Brute-force reference density.

Pi_t(z) averages every composition P_{r_1} o ... o P_{r_t}(1 - z/E^t) over
all environment sequences, and the density is recovered by trapezoidal
Fourier inversion of Pi_t(iy) over [0, y_max].
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import DensityCurve
from .model import Environment, pgf_eval

DEFAULT_BUDGET = 2 ** 20
MODULUS_TOL = 1e-9


class BudgetExceeded(RuntimeError):
    pass


class NumericalFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class ReferenceConfig:
    t: int = 12
    y_max: float = 200.0
    dy: float = 0.02
    xs: np.ndarray = field(default_factory=lambda: np.round(np.arange(0.1, 2.0 + 1e-9, 0.01), 10))
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if not (self.dy > 0 and self.dy <= self.y_max):
            raise ValueError(f"need 0 < dy <= y_max, got dy={self.dy}, y_max={self.y_max}")
        object.__setattr__(self, "xs", np.asarray(self.xs, dtype=float))

    @property
    def ys(self) -> np.ndarray:
        steps = int(round(self.y_max / self.dy))
        return np.arange(steps + 1) * self.dy


def _check_budget(env: Environment, t: int, budget: int):
    count = len(env) ** t
    if count > budget:
        raise BudgetExceeded(
            f"{len(env)}^{t} = {count} environment sequences exceed the budget of {budget}"
        )


def pi_t(env: Environment, t: int, z, budget: int = DEFAULT_BUDGET):
    """Average of all depth-t compositions evaluated at 1 - z/E^t.

    The members applied first (innermost, r_t) sit at the top of a depth-first
    traversal, so shared inner suffixes are evaluated once.
    """
    env.require_valid()
    _check_budget(env, t, budget)
    z = np.asarray(z, dtype=complex)
    w0 = 1.0 - z / env.common_mean ** t
    members = [(w, pgf) for w, pgf in env.members if w > 0]

    def descend(u, depth):
        if depth == t:
            return u
        total = 0.0
        for w, pgf in members:
            total = total + w * descend(pgf_eval(pgf, u), depth + 1)
        return total

    out = descend(w0, 0)
    return out if out.ndim else complex(out)


def _chunks(arr, n):
    n = max(1, min(n, len(arr)))
    return [c for c in np.array_split(arr, n) if len(c)]


def pi_t_grid(env: Environment, t: int, ys, budget: int = DEFAULT_BUDGET, threads: int = 1):
    """Pi_t(i y) on a grid, optionally split across threads; chunk order is fixed."""
    ys = np.asarray(ys, dtype=float)
    parts = _chunks(ys, threads if threads > 1 else 1)
    if len(parts) == 1:
        return pi_t(env, t, 1j * ys, budget)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda c: pi_t(env, t, 1j * c, budget), parts))
    return np.concatenate(results)


def _valid(vals, tol=MODULUS_TOL):
    return np.isfinite(vals) & (np.abs(vals) <= 1.0 + tol)


def pi_t_deepened(env: Environment, t: int, ys, budget: int = DEFAULT_BUDGET, threads: int = 1):
    """Pi(iy) on a grid using depth t, deepened pointwise where depth t escapes.

    For large y/E^t the start point 1 - iy/E^t falls outside the region where
    the finite composition tracks the limit and the iterates blow up.  Such
    points (non-finite or |value| > 1) are recomputed at depth t+1, t+2, ...
    Returns the values and the per-point depth actually used.
    """
    ys = np.asarray(ys, dtype=float)
    vals = pi_t_grid(env, t, ys, budget, threads)
    depth = np.full(len(ys), t)
    bad = ~_valid(vals)
    k = t
    while bad.any():
        k += 1
        try:
            _check_budget(env, k, budget)
        except BudgetExceeded as exc:
            raise BudgetExceeded(
                f"{int(bad.sum())} grid points (from y={ys[bad][0]:g}) still diverge at depth {k - 1}; {exc}"
            ) from None
        vals[bad] = pi_t_grid(env, k, ys[bad], budget, threads)
        depth[bad] = k
        bad = ~_valid(vals)
    return vals, depth


def reference_density(env: Environment, cfg: ReferenceConfig, threads: int = 1,
                      deepen: bool = True) -> DensityCurve:
    """p(x) ~ Re((1/pi) int_0^y_max Pi_t(iy) e^{iyx} dy) by the trapezoidal rule.

    With ``deepen=False`` the composition depth is exactly ``cfg.t`` and a
    divergent grid point raises :class:`NumericalFailure`.
    """
    ys = cfg.ys
    with np.errstate(over="ignore", invalid="ignore"):
        if deepen:
            vals, depth = pi_t_deepened(env, cfg.t, ys, cfg.budget, threads)
        else:
            vals = pi_t_grid(env, cfg.t, ys, cfg.budget, threads)
            depth = np.full(len(ys), cfg.t)
            bad = ~_valid(vals)
            if bad.any():
                raise NumericalFailure(
                    f"Pi_{cfg.t}(iy) diverges from y={ys[bad][0]:g}; increase t or lower y_max"
                )
    weights = np.full(len(ys), cfg.dy)
    weights[0] = weights[-1] = cfg.dy / 2
    wv = weights * vals
    xs = cfg.xs
    ps = np.empty(len(xs))
    # bounded memory: at most ~2^22 complex phases in flight
    step = max(1, (1 << 22) // max(1, len(ys)))
    for lo in range(0, len(xs), step):
        xc = xs[lo : lo + step]
        phases = np.exp(1j * np.outer(xc, ys))
        ps[lo : lo + step] = (phases @ wv).real / math.pi
    meta = {"method": "reference", "t": cfg.t, "t_max_used": int(depth.max()),
            "y_max": cfg.y_max, "dy": cfg.dy}
    if depth.max() > cfg.t:
        meta["deepened_from_y"] = float(ys[depth > cfg.t][0])
    return DensityCurve(xs=xs, ps=ps, meta=meta)


def reference_moments(curve: DensityCurve) -> tuple[float, float]:
    """Trapezoidal mass and mean of a sampled density."""
    if len(curve.xs) == 0:
        raise ValueError("empty curve")
    mass = float(np.trapezoid(curve.ps, curve.xs))
    mean = float(np.trapezoid(curve.xs * curve.ps, curve.xs))
    return mass, mean
