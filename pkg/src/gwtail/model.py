"""Offspring generating functions and finite random environments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PROB_TOL = 1e-14
MEAN_TOL = 1e-12
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class OffspringPgf:
    """Offspring distribution P(z) = p_1 z + p_2 z^2 + ... + p_d z^d.

    ``probs[k - 1]`` is the probability of exactly ``k`` offspring.  There is
    no zero-offspring term, and ``p_1 > 0`` is required.
    """

    probs: tuple[float, ...]
    mean: float = field(init=False)

    def __init__(self, probs: Sequence[float], *, tol: float = PROB_TOL):
        probs = tuple(float(p) for p in probs)
        if not probs:
            raise ValueError("offspring distribution needs at least one probability")
        while len(probs) > 1 and probs[-1] == 0.0:
            probs = probs[:-1]
        if any(not math.isfinite(p) or p < 0.0 for p in probs):
            raise ValueError(f"probabilities must be finite and non-negative, got {probs}")
        total = math.fsum(probs)
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total!r}, not 1 (off by {total - 1.0:.3e})")
        if probs[0] <= 0.0:
            raise ValueError("p_1 must be positive (survival probability of a single lineage)")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "mean", math.fsum(k * p for k, p in enumerate(probs, start=1)))

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[float]) -> "OffspringPgf":
        """Build from full polynomial coefficients ``[c_0, c_1, ..., c_d]``.

        A non-zero constant term means extinction is possible, which this
        library does not model.
        """
        if len(coeffs) == 0:
            raise ValueError("empty coefficient list")
        if coeffs[0] != 0:
            raise ValueError(
                f"constant term {coeffs[0]!r} is not allowed: offspring counts start at 1 (p_0 = 0)"
            )
        return cls(coeffs[1:])

    @property
    def degree(self) -> int:
        return len(self.probs)

    def __call__(self, z):
        return pgf_eval(self, z)

    def derivative_at_one(self) -> float:
        return math.fsum(k * p for k, p in enumerate(self.probs, start=1))

    def coefficients(self) -> np.ndarray:
        """Dense coefficient vector indexed by power, entry 0 is the zero constant term."""
        return np.concatenate(([0.0], np.asarray(self.probs)))


def pgf_eval(pgf: OffspringPgf, z):
    """Evaluate P(z) by Horner's scheme.  ``z`` may be a scalar or an array."""
    acc = 0.0
    for p in reversed(pgf.probs):
        acc = (acc + p) * z
    return acc


@dataclass(frozen=True)
class Environment:
    """Finite random environment: a list of ``(weight, pgf)`` members.

    Construction only checks types.  :func:`environment_validate` reports
    violations of the modelling assumptions and :meth:`require_valid` turns
    them into an error.
    """

    members: tuple[tuple[float, OffspringPgf], ...]

    def __init__(self, members):
        members = tuple((float(w), pgf) for w, pgf in members)
        for _, pgf in members:
            if not isinstance(pgf, OffspringPgf):
                raise TypeError(
                    "environment members must be OffspringPgf instances; "
                    "only finite environments are supported"
                )
        object.__setattr__(self, "members", members)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    @property
    def pgfs(self) -> list[OffspringPgf]:
        return [pgf for _, pgf in self.members]

    @property
    def common_mean(self) -> float:
        return self.members[0][1].mean

    @property
    def max_degree(self) -> int:
        return max(pgf.degree for pgf in self.pgfs)

    def require_valid(self) -> "Environment":
        problems = environment_validate(self)
        if problems:
            raise ValueError("invalid environment: " + "; ".join(problems))
        return self

    def __len__(self):
        return len(self.members)


def environment_validate(env: Environment) -> list[str]:
    """List every broken environment invariant; empty means valid."""
    if not env.members:
        return ["environment has no members"]
    problems = []
    for i, (w, _) in enumerate(env.members):
        if not math.isfinite(w) or w < 0.0:
            problems.append(f"member {i}: weight {w!r} is negative or not finite")
    total = math.fsum(w for w, _ in env.members)
    if abs(total - 1.0) > WEIGHT_TOL:
        deficit = 1.0 - total
        problems.append(f"weights sum to {total:.15g}, deficit {deficit:.15g}")
    ref = env.common_mean
    for i, (_, pgf) in enumerate(env.members[1:], start=1):
        diff = pgf.mean - ref
        if abs(diff) > MEAN_TOL:
            problems.append(
                f"member {i}: mean {pgf.mean:.15g} differs from member 0 mean {ref:.15g} "
                f"by {diff:.15g} (mean mismatch)"
            )
    if not ref > 1.0:
        problems.append(f"common mean {ref!r} is not > 1 (process must be supercritical)")
    return problems


def build_two_poly_family(p: float) -> Environment:
    """Equal mixture of P_0 = p z + (1-p) z^2 and P_1 = q z + (1-q) z^3 with q = (1+p)/2.

    Both members have mean 2 - p.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    q = (1.0 + p) / 2.0
    return Environment([
        (0.5, OffspringPgf([p, 1.0 - p])),
        (0.5, OffspringPgf([q, 0.0, 1.0 - q])),
    ])
