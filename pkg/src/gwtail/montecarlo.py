"""Direct simulation of the branching process in a random environment.

At every generation one environment member is drawn from the weights and
all individuals reproduce with its offspring law.  The simulation never uses
the q-matrix or phi machinery, so it is an independent check of both.

Random streams
--------------
``SimConfig.seed`` seeds a :class:`numpy.random.SeedSequence`; trials are cut
into consecutive batches of ``batch_size`` and batch ``k`` draws from
``PCG64(SeedSequence(seed).spawn(n_batches)[k])``.  Results depend only on
``(seed, trials, batch_size)``, never on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import DensityCurve
from .model import Environment, OffspringPgf

DEFAULT_BATCH = 1_000_000
INVERSE_CDF_LIMIT = 10_000


@dataclass(frozen=True)
class SimConfig:
    initial: int = 1
    horizon: int = 8
    trials: int = 1_000_000
    seed: int = 0
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if self.initial < 1:
            raise ValueError("initial population must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def batches(self):
        """(size, generator) per batch, following the documented seed mapping."""
        n = -(-self.trials // self.batch_size)
        children = np.random.SeedSequence(self.seed).spawn(n)
        for k, ss in enumerate(children):
            size = min(self.batch_size, self.trials - k * self.batch_size)
            yield size, np.random.Generator(np.random.PCG64(ss))


def simulate_step(pop: int, pgf: OffspringPgf, rng: np.random.Generator) -> int:
    """Total offspring of ``pop`` individuals drawing independently from ``pgf``."""
    if pop < 0:
        raise ValueError("population must be non-negative")
    if pop == 0:
        return 0
    probs = np.asarray(pgf.probs)
    if pop <= INVERSE_CDF_LIMIT:
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        k = np.searchsorted(cdf, rng.random(pop), side="right") + 1
        return int(np.minimum(k, pgf.degree).sum())
    counts = rng.multinomial(pop, probs)
    return int(counts @ np.arange(1, pgf.degree + 1))


def _advance(pops, env: Environment, rng, alive=None):
    """One generation for a vector of independent histories, in place."""
    idx = np.arange(len(pops)) if alive is None else np.flatnonzero(alive)
    if len(idx) == 0:
        return
    choice = rng.choice(len(env), size=len(idx), p=env.weights)
    for r, pgf in enumerate(env.pgfs):
        sel = idx[choice == r]
        if len(sel) == 0:
            continue
        counts = rng.multinomial(pops[sel], pgf.probs)
        pops[sel] = counts @ np.arange(1, pgf.degree + 1)


def simulate_populations(env: Environment, initial: int, horizon: int, size: int, rng,
                         cap: int | None = None) -> np.ndarray:
    """X_horizon for ``size`` independent histories started from ``initial``.

    With ``cap`` set, a history is frozen once it exceeds ``cap`` (offspring
    counts are >= 1, so it can never come back); its returned value is only
    known to be > cap.
    """
    pops = np.full(size, initial, dtype=np.int64)
    for _ in range(horizon):
        alive = None if cap is None else pops <= cap
        _advance(pops, env, rng, alive)
    return pops


def _run_batches(cfg: SimConfig, work, threads: int):
    jobs = list(cfg.batches())
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: work(*job), jobs))
    return [work(size, rng) for size, rng in jobs]


class InsufficientSamples(ArithmeticError):
    pass


def estimate_ratio(env: Environment, n: int, j: int, cfg: SimConfig, threads: int = 1):
    """Monte Carlo estimate of P(X_t = n) / P(X_t = j) from X_0 = j, with a delta-method stderr."""
    env.require_valid()
    if n < 1 or j < 1:
        raise ValueError(f"need n, j >= 1, got n={n}, j={j}")
    if cfg.initial != j:
        raise ValueError(f"SimConfig.initial={cfg.initial} must equal j={j}")

    def work(size, rng):
        pops = simulate_populations(env, j, cfg.horizon, size, rng, cap=max(n, j))
        return int(np.count_nonzero(pops == n)), int(np.count_nonzero(pops == j))

    counts = _run_batches(cfg, work, threads)
    a = sum(c[0] for c in counts)
    b = sum(c[1] for c in counts)
    if b == 0:
        raise InsufficientSamples(
            f"no history ended at X_t = {j} after t={cfg.horizon}; raise trials or lower the horizon"
        )
    if n == j:
        return 1.0, 0.0
    if n < j:
        # populations never shrink
        return 0.0, 0.0
    T = cfg.trials
    ratio = a / b
    if a == 0:
        return 0.0, 0.0
    var = ratio ** 2 * ((1 - a / T) / a + (1 - b / T) / b + 2.0 / T)
    return ratio, math.sqrt(var)


def martingale_samples(env: Environment, cfg: SimConfig, threads: int = 1) -> np.ndarray:
    env.require_valid()
    scale = env.common_mean ** cfg.horizon

    def work(size, rng):
        return simulate_populations(env, cfg.initial, cfg.horizon, size, rng) / scale

    return np.concatenate(_run_batches(cfg, work, threads))


def martingale_histogram(env: Environment, cfg: SimConfig, bins: int = 150,
                         x_range: tuple[float, float] = (0.0, 3.0), threads: int = 1) -> DensityCurve:
    """Histogram of X_t / E^t on bin midpoints, scaled by trials * width.

    Values estimate the density of the martingale limit; ``aux`` holds the
    per-bin binomial standard error.
    """
    if bins < 10:
        raise ValueError("bins must be >= 10")
    if cfg.initial != 1:
        raise ValueError("martingale histogram starts from a single individual")
    lo, hi = x_range
    w = martingale_samples(env, cfg, threads)
    counts, edges = np.histogram(w, bins=bins, range=(lo, hi))
    width = edges[1] - edges[0]
    mids = (edges[:-1] + edges[1:]) / 2
    keep = mids > 0
    dens = counts / (cfg.trials * width)
    err = np.sqrt(counts * (1 - counts / cfg.trials)) / (cfg.trials * width)
    meta = {"method": "montecarlo", "t": cfg.horizon, "trials": cfg.trials, "seed": cfg.seed,
            "bins": bins, "x_min": lo, "x_max": hi, "sample_mean": float(w.mean()),
            "sample_stderr": float(w.std(ddof=1) / math.sqrt(len(w))) if len(w) > 1 else 0.0}
    return DensityCurve(xs=mids[keep], ps=dens[keep], meta=meta, aux=err[keep])
