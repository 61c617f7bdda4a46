"""Coefficients b_j of the expansion z = sum_j b_j Phi_j(z).

The b_j solve the unit-lower-triangular system L b = e_1 with
L[n, m] = phi_{nm}.  :func:`b_recurrence` is forward substitution;
:func:`b_determinant` is Cramer's rule, kept as an independent check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import precision as prec
from .phi import PhiTable

MAX_DETERMINANT_ORDER = 12


@dataclass(frozen=True)
class BVector:
    """``values[j] = b_j`` for j = 1..J (index 0 is padding)."""

    values: np.ndarray
    precision: str = prec.STANDARD

    @property
    def J(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, j):
        return self.values[j]

    def __len__(self):
        return self.J


def b_recurrence(table: PhiTable, J: int | None = None) -> BVector:
    J = table.j_max if J is None else J
    if not 1 <= J <= min(table.j_max, table.n_max):
        raise ValueError(f"J={J} must lie in 1..{min(table.j_max, table.n_max)}")
    mode = table.precision
    phi = table.values
    with prec.context(mode):
        b = prec.zeros(J + 1, mode)
        b[1] = prec.scalar(1, mode)
        for n in range(2, J + 1):
            b[n] = -phi[n, 1:n].dot(b[1:n])
    return BVector(values=b, precision=mode)


def hessenberg_matrix(table: PhiTable, n: int) -> np.ndarray:
    """(n-1)x(n-1) lower-Hessenberg matrix with rows (phi_{k1}, ..., phi_{k,k-1}, 1, 0, ...), k = 2..n."""
    size = n - 1
    mode = table.precision
    H = prec.zeros((size, size), mode)
    for i in range(size):
        H[i, : i + 1] = table.values[i + 2, 1 : i + 2]
        if i + 1 < size:
            H[i, i + 1] = prec.scalar(1, mode)
    return H


def determinant(A: np.ndarray) -> object:
    """Determinant by Gaussian elimination with partial pivoting.

    Works for float and mpmath object arrays alike.
    """
    A = A.copy()
    size = A.shape[0]
    det = A.dtype.type(1) if A.dtype != object else 1
    for k in range(size):
        piv = k + int(np.argmax([abs(v) for v in A[k:, k]]))
        if A[piv, k] == 0:
            return 0 * det
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            det = -det
        det = det * A[k, k]
        if k + 1 < size:
            factors = A[k + 1 :, k] / A[k, k]
            A[k + 1 :, k:] = A[k + 1 :, k:] - np.outer(factors, A[k, k:])
    return det


def b_determinant(table: PhiTable, n: int):
    """b_n = (-1)^(n-1) det(H_n) for 2 <= n <= min(j_max, 12)."""
    top = min(table.j_max, MAX_DETERMINANT_ORDER)
    if not 2 <= n <= top:
        raise ValueError(f"n={n} outside 2..{top}")
    with prec.context(table.precision):
        det = determinant(hessenberg_matrix(table, n))
        return det if (n - 1) % 2 == 0 else -det


def triangular_residual(table: PhiTable, bs: BVector) -> float:
    """Max-norm of L b - e_1 with L[n, m] = phi_{nm}, n, m <= J."""
    J = bs.J
    with prec.context(table.precision):
        L = table.values[1 : J + 1, 1 : J + 1]
        r = L.dot(bs.values[1:])
        r[0] = r[0] - 1
    return float(np.max(np.abs(prec.to_float(r))))
