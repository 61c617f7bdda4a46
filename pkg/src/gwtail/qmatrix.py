"""Environment-averaged transition coefficients q_{nm}.

q_{nm} is the probability that m individuals produce exactly n offspring in
one generation, averaged over the environment: the z^n coefficient of
sum_r w_r P_r(z)^m.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import precision as prec
from .model import Environment, OffspringPgf


@dataclass(frozen=True)
class QMatrix:
    """Lower-triangular array ``entries[n, m] = q_{nm}`` for 1 <= m <= n <= n_max.

    Row and column 0 are padding so that indices match the maths.
    """

    n_max: int
    entries: np.ndarray
    max_degree: int
    mean: float
    precision: str = prec.STANDARD

    @property
    def diag(self) -> np.ndarray:
        """q_n = q_{nn} for n = 0..n_max (entry 0 is padding)."""
        return np.diagonal(self.entries).copy()

    def __getitem__(self, nm):
        return self.entries[nm]


def _convolve_step(cur: np.ndarray, probs: np.ndarray, n_max: int) -> np.ndarray:
    # multiply a power-indexed coefficient vector by P(z), dropping powers above n_max
    out = np.zeros_like(cur)
    for k, pk in enumerate(probs, start=1):
        if pk == 0:
            continue
        out[k:] = out[k:] + pk * cur[: n_max + 1 - k]
    return out


def power_coeffs(pgf: OffspringPgf, m: int, n_max: int, precision: str = prec.STANDARD) -> np.ndarray:
    """Coefficients of z^m .. z^min(m*d, n_max) in P(z)^m."""
    if m < 1 or n_max < m:
        raise ValueError(f"need 1 <= m <= n_max, got m={m}, n_max={n_max}")
    with prec.context(precision):
        probs = prec.asarray(pgf.probs, precision)
        cur = prec.zeros(n_max + 1, precision)
        cur[1 : min(pgf.degree, n_max) + 1] = probs[: n_max]
        for _ in range(m - 1):
            cur = _convolve_step(cur, probs, n_max)
    return cur[m : min(m * pgf.degree, n_max) + 1]


def q_matrix(env: Environment, n_max: int, precision: str = prec.STANDARD) -> QMatrix:
    """Dense q_{nm} table up to ``n_max`` with one running power per environment member."""
    env.require_valid()
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    with prec.context(precision):
        entries = prec.zeros((n_max + 1, n_max + 1), precision)
        for w, pgf in env.members:
            if w == 0:
                continue
            weight = prec.scalar(w, precision)
            probs = prec.asarray(pgf.probs, precision)
            cur = prec.zeros(n_max + 1, precision)
            top = min(pgf.degree, n_max)
            cur[1 : top + 1] = probs[:top]
            for m in range(1, n_max + 1):
                hi = min(m * pgf.degree, n_max)
                entries[m : hi + 1, m] += weight * cur[m : hi + 1]
                if m < n_max:
                    cur = _convolve_step(cur, probs, n_max)
    return QMatrix(n_max=n_max, entries=entries, max_degree=env.max_degree,
                   mean=env.common_mean, precision=precision)


def q_subdiag_check(env: Environment, n: int, precision: str = prec.STANDARD):
    """Return (convolution q_{n,n-1}, closed form (n-1) sum_r w_r p_{r1}^{n-2} p_{r2})."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    computed = q_matrix(env, n, precision)[n, n - 1]
    with prec.context(precision):
        closed = prec.scalar(0, precision)
        for w, pgf in env.members:
            p1 = prec.scalar(pgf.probs[0], precision)
            p2 = prec.scalar(pgf.probs[1] if pgf.degree >= 2 else 0.0, precision)
            closed += prec.scalar(w, precision) * p1 ** (n - 2) * p2
        closed *= n - 1
    return computed, closed
