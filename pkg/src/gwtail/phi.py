"""Limiting rare-event ratios phi_{nj} and their generating functions.

phi_{nj} = lim_t P(X_t = n) / P(X_t = j) for a process started from j
individuals.  The table is filled by the triangular recurrence

    phi_{jj} = 1,   phi_{nj} = sum_{m<n} q_{nm} phi_{mj} / (q_j - q_n),  n > j,

all of whose terms are non-negative, so standard precision is stable here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import precision as prec
from .model import build_two_poly_family
from .qmatrix import QMatrix


class CorruptedInput(ArithmeticError):
    """Raised when q_j - q_n is not positive for some n > j."""


@dataclass(frozen=True)
class PhiTable:
    """``values[n, j] = phi_{nj}`` for 1 <= j <= j_max, 0 <= n <= n_max.

    Rows/columns 0 are padding.  ``q_diag[n] = q_n``.
    """

    j_max: int
    n_max: int
    values: np.ndarray
    q_diag: np.ndarray
    mean: float
    precision: str = prec.STANDARD

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def __getitem__(self, nj):
        return self.values[nj]


def _check_sizes(j_max, n_max, limit=None):
    if j_max < 1 or n_max < j_max:
        raise ValueError(f"need 1 <= j_max <= n_max, got j_max={j_max}, n_max={n_max}")
    if limit is not None and n_max > limit:
        raise ValueError(f"n_max={n_max} exceeds the q-matrix size {limit}")


def _check_denominators(den, n):
    bad = [k for k, d in enumerate(den, start=1) if not d > 0]
    if bad:
        raise CorruptedInput(
            f"q_j - q_n is not positive for n={n}, j={bad[0]}: the q diagonal must strictly decrease"
        )


def phi_table(qmat: QMatrix, j_max: int, n_max: int | None = None) -> PhiTable:
    """Fill phi_{nj} from a q-matrix by the generic recurrence."""
    if n_max is None:
        n_max = qmat.n_max
    _check_sizes(j_max, n_max, qmat.n_max)
    mode = qmat.precision
    q = qmat.entries
    qd = qmat.diag[: n_max + 1]
    d = qmat.max_degree
    with prec.context(mode):
        vals = prec.zeros((n_max + 1, j_max + 1), mode)
        for j in range(1, j_max + 1):
            vals[j, j] = prec.scalar(1, mode)
        for n in range(2, n_max + 1):
            jn = min(n - 1, j_max)
            # q_{nm} = 0 unless m*d >= n
            lo = max(1, -(-n // d))
            den = qd[1 : jn + 1] - qd[n]
            _check_denominators(den, n)
            num = q[n, lo:n].dot(vals[lo:n, 1 : jn + 1])
            vals[n, 1 : jn + 1] = num / den
    return PhiTable(j_max=j_max, n_max=n_max, values=vals, q_diag=qd.copy(),
                    mean=qmat.mean, precision=mode)


def phi_table_two_poly(p: float, j_max: int, n_max: int, precision: str = prec.STANDARD) -> PhiTable:
    """Specialised recurrence for P_0 = p z + (1-p) z^2, P_1 = q z + (1-q) z^3.

    Binomial weights C(n-i, i) p^(n-2i) (1-p)^i and C(n-2i, i) q^(n-3i) (1-q)^i
    are evaluated as exponentials of log-factorial sums.  Weights 1/2 cancel
    between numerator and denominator.
    """
    env = build_two_poly_family(p)
    _check_sizes(j_max, n_max)
    mode = precision
    p0, q0 = env.pgfs[0].probs[0], env.pgfs[1].probs[0]
    with prec.context(mode):
        P = prec.scalar(p0, mode)
        Qp = prec.scalar(q0, mode)
        ln_p, ln_p2 = prec.log(P, mode), prec.log(1 - P, mode)
        ln_q, ln_q3 = prec.log(Qp, mode), prec.log(1 - Qp, mode)
        lf = prec.log_factorials(n_max, mode)
        powsum = np.array([P ** n + Qp ** n for n in range(n_max + 1)],
                          dtype=object if mode == prec.EXTENDED else np.float64)
        vals = prec.zeros((n_max + 1, j_max + 1), mode)
        for j in range(1, j_max + 1):
            vals[j, j] = prec.scalar(1, mode)
        for n in range(2, n_max + 1):
            jn = min(n - 1, j_max)
            den = powsum[1 : jn + 1] - powsum[n]
            _check_denominators(den, n)
            i2 = np.arange(1, n // 2 + 1)
            b2 = prec.exp(lf[n - i2] - lf[n - 2 * i2] - lf[i2] + (n - 2 * i2) * ln_p + i2 * ln_p2, mode)
            num = b2.dot(vals[n - i2, 1 : jn + 1])
            i3 = np.arange(1, n // 3 + 1)
            if len(i3):
                b3 = prec.exp(lf[n - 2 * i3] - lf[n - 3 * i3] - lf[i3] + (n - 3 * i3) * ln_q + i3 * ln_q3, mode)
                num = num + b3.dot(vals[n - 2 * i3, 1 : jn + 1])
            vals[n, 1 : jn + 1] = num / den
        q_diag = powsum / 2
    return PhiTable(j_max=j_max, n_max=n_max, values=vals, q_diag=q_diag,
                    mean=env.common_mean, precision=mode)


def phi_gf_eval(table: PhiTable, j: int, z):
    """Truncated generating function sum_{n=j}^{n_max} phi_{nj} z^n."""
    if not 1 <= j <= table.j_max:
        raise ValueError(f"column j={j} outside 1..{table.j_max}")
    coeffs = table.values[j:, j]
    with prec.context(table.precision):
        acc = 0
        for c in coeffs[::-1]:
            acc = acc * z + c
        return acc * z ** j
