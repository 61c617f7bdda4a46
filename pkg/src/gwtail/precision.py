"""Arithmetic precision modes.

Two modes are supported:

``"standard"``
    IEEE binary64, arrays of dtype ``float64``.
``"extended"``
    34 significant decimal digits (roughly binary128), arrays of dtype
    ``object`` holding :class:`mpmath.mpf` scalars.

Numerical kernels take a ``precision`` argument and run their arithmetic
inside :func:`context` so that mpmath operations pick up the right working
precision.
"""
from __future__ import annotations

import contextlib
import math

import mpmath
import numpy as np

STANDARD = "standard"
EXTENDED = "extended"
MODES = (STANDARD, EXTENDED)

EXTENDED_DPS = 34


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown precision mode {mode!r}; expected one of {MODES}")
    return mode


def context(mode: str):
    """Context manager setting the working precision for ``mode``."""
    check_mode(mode)
    if mode == EXTENDED:
        return mpmath.workdps(EXTENDED_DPS)
    return contextlib.nullcontext()


def scalar(value, mode: str):
    """Convert a Python number (or string) to a scalar of the given mode."""
    if mode == EXTENDED:
        with context(mode):
            return mpmath.mpf(value)
    return float(value)


def asarray(values, mode: str) -> np.ndarray:
    if mode == EXTENDED:
        with context(mode):
            flat = [mpmath.mpf(v) for v in np.ravel(np.asarray(values, dtype=object))]
        return np.array(flat, dtype=object).reshape(np.shape(values))
    return np.asarray(values, dtype=np.float64)


def zeros(shape, mode: str) -> np.ndarray:
    if mode == EXTENDED:
        out = np.empty(shape, dtype=object)
        out.fill(mpmath.mpf(0))
        return out
    return np.zeros(shape, dtype=np.float64)


def mode_of(arr: np.ndarray) -> str:
    return EXTENDED if np.asarray(arr).dtype == object else STANDARD


def exp(x, mode: str):
    if mode == EXTENDED:
        with context(mode):
            if isinstance(x, np.ndarray):
                return np.array([mpmath.exp(v) for v in x.ravel()], dtype=object).reshape(x.shape)
            return mpmath.exp(x)
    return np.exp(x)


def log(x, mode: str):
    if mode == EXTENDED:
        with context(mode):
            if isinstance(x, np.ndarray):
                return np.array([mpmath.log(v) for v in x.ravel()], dtype=object).reshape(x.shape)
            return mpmath.log(x)
    return np.log(x)


def log_factorials(n: int, mode: str) -> np.ndarray:
    """Table of ln(i!) for i = 0..n."""
    if mode == EXTENDED:
        with context(mode):
            out = [mpmath.mpf(0)]
            for i in range(1, n + 1):
                out.append(out[-1] + mpmath.log(i))
        return np.array(out, dtype=object)
    return np.array([math.lgamma(i + 1) for i in range(n + 1)], dtype=np.float64)


def to_float(arr) -> np.ndarray:
    return np.asarray(arr, dtype=object).astype(np.float64) if np.asarray(arr).dtype == object \
        else np.asarray(arr, dtype=np.float64)
