"""Power-law amplitudes of the phi columns and the left-tail density series.

Each column behaves like

    phi_{mj} ~ m^(-1 - log_E q_j) (A_j(-log_E m) + B_1j(-log_E m)/m + ...)

with one-periodic A_j, B_kj.  Treating A_j as the constant
A_jM = M^(1 + log_E q_j) phi_{Mj} gives the density approximation

    p_JM(x) = sum_{j<=J} b_j A_jM x^(-1 - log_E q_j).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import precision as prec
from .phi import PhiTable
from .pseudo_inverse import BVector

PHASE_TOL = 0.02


@dataclass(frozen=True)
class DensityCurve:
    """Sampled density values with a method tag and the parameters that produced them.

    ``aux`` is an optional per-point companion column (truncation bound,
    histogram standard error, ...).
    """

    xs: np.ndarray
    ps: np.ndarray
    meta: dict = field(default_factory=dict)
    aux: np.ndarray | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ps = np.asarray(self.ps, dtype=float)
        if xs.shape != ps.shape or xs.ndim != 1:
            raise ValueError("xs and ps must be 1-d arrays of equal length")
        if len(xs) and (xs[0] <= 0 or np.any(np.diff(xs) <= 0)):
            raise ValueError("xs must be strictly increasing and positive")
        if not np.all(np.isfinite(ps)):
            raise ValueError("density values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)
        if self.aux is not None:
            object.__setattr__(self, "aux", np.asarray(self.aux, dtype=float))


@dataclass(frozen=True)
class Amplitude:
    j: int
    alpha: float
    value: float
    method: str = "plain"
    M1: int = 0
    M2: int = 0


@dataclass(frozen=True)
class AmplitudeSet:
    records: tuple[Amplitude, ...]
    mean: float

    def __len__(self):
        return len(self.records)

    def __getitem__(self, j: int) -> Amplitude:
        """1-based access by column index."""
        return self.records[j - 1]

    @property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.records])

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])


def exponent(table: PhiTable, j: int) -> float:
    """alpha_j = -1 - log_E q_j, the power of x carried by the j-th term."""
    return -1.0 - math.log(float(table.q_diag[j])) / math.log(table.mean)


def _log_phi(table: PhiTable, m: int, j: int) -> float:
    v = table.values[m, j]
    if not v > 0:
        raise ValueError(f"phi_{{{m},{j}}} = {v} is not positive; M must be >= j")
    with prec.context(table.precision):
        return float(prec.log(v, table.precision))


def scaled_column(table: PhiTable, j: int, ms) -> np.ndarray:
    """g_j(m) = m^(1 + log_E q_j) phi_{mj} for each m in ``ms``."""
    a = exponent(table, j)
    return np.array([math.exp(-a * math.log(m) + _log_phi(table, m, j)) for m in ms])


def amplitude(table: PhiTable, j: int, M: int) -> float:
    if not 1 <= j <= table.j_max:
        raise ValueError(f"j={j} outside 1..{table.j_max}")
    if not j <= M <= table.n_max:
        raise ValueError(f"M={M} must lie in {j}..{table.n_max}")
    return float(scaled_column(table, j, [M])[0])


def phase(m: float, mean: float) -> float:
    """-log_E m reduced to [0, 1)."""
    return (-math.log(m) / math.log(mean)) % 1.0


def phase_gap(m1: float, m2: float, mean: float) -> float:
    d = abs(phase(m1, mean) - phase(m2, mean))
    return min(d, 1.0 - d)


def matched_scale(M: int, mean: float, k: int = 1) -> int:
    """round(M E^k): the integer closest to M at the same phase, k periods up."""
    return int(round(M * mean ** k))


def amplitude_richardson(table: PhiTable, j: int, M1: int, M2: int) -> float:
    """Cancel the B_1j/m correction using two scales at (nearly) the same phase."""
    if not M1 < M2 <= table.n_max:
        raise ValueError(f"need M1 < M2 <= {table.n_max}, got M1={M1}, M2={M2}")
    gap = phase_gap(M1, M2, table.mean)
    if gap > PHASE_TOL:
        raise ValueError(
            f"M1={M1} and M2={M2} sample phases {gap:.4f} apart (limit {PHASE_TOL}); "
            "choose M2 = round(M1 * E^k)"
        )
    g1, g2 = scaled_column(table, j, [M1, M2])
    return (M2 * g2 - M1 * g1) / (M2 - M1)


def oscillation_scan(table: PhiTable, j: int, M: int, samples: int):
    """Pairs (phase, g_j(m)) for ``samples`` integers m spread over one period [M, M E]."""
    top = matched_scale(M, table.mean)
    if top > table.n_max:
        raise ValueError(f"round(M*E)={top} exceeds n_max={table.n_max}")
    ms = np.unique(np.round(np.geomspace(M, top, samples)).astype(int))
    gs = scaled_column(table, j, ms)
    return [(phase(m, table.mean), g) for m, g in zip(ms, gs)]


def oscillation_spread(scan) -> float:
    """(max g - min g) / mean g over a scan."""
    gs = np.array([g for _, g in scan])
    return float((gs.max() - gs.min()) / gs.mean())


def amplitude_set(table: PhiTable, J: int, M: int, richardson: bool = False,
                  k: int = 1) -> AmplitudeSet:
    """Amplitudes for columns 1..J at scale M.

    With ``richardson`` the estimate combines M1 = round(M / E^k) and M2 = M,
    both of which must be inside the table.
    """
    records = []
    for j in range(1, J + 1):
        alpha = exponent(table, j)
        if richardson:
            M1 = int(round(M / table.mean ** k))
            M1 = _best_phase_partner(M, M1, table.mean)
            value = amplitude_richardson(table, j, M1, M)
            records.append(Amplitude(j, alpha, value, "richardson", M1, M))
        else:
            records.append(Amplitude(j, alpha, amplitude(table, j, M), "plain", M, M))
    amps = AmplitudeSet(tuple(records), table.mean)
    _check_amplitudes(amps)
    return amps


def _best_phase_partner(M: int, guess: int, mean: float) -> int:
    cands = [c for c in (guess - 1, guess, guess + 1) if 1 <= c < M]
    return min(cands, key=lambda c: phase_gap(c, M, mean))


def _check_amplitudes(amps: AmplitudeSet):
    a = amps.alphas
    if np.any(np.diff(a) <= 0):
        raise ArithmeticError("exponents alpha_j are not strictly increasing")
    if not np.all(np.isfinite(amps.values)) or amps.values[0] <= 0:
        raise ArithmeticError("amplitudes must be finite with A_1 > 0")


def series_terms(bs: BVector, amps: AmplitudeSet, J: int, xs) -> np.ndarray:
    """Matrix of terms b_j A_j x^alpha_j, shape (len(xs), J), evaluated in log form."""
    xs = np.asarray(xs, dtype=float)
    if J > min(bs.J, len(amps)):
        raise ValueError(f"J={J} exceeds the available {min(bs.J, len(amps))} coefficients")
    if np.any(xs <= 0):
        raise ValueError("density series needs x > 0")
    b = prec.to_float(bs.values[1 : J + 1])
    coef = b * amps.values[:J]
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(coef))[None, :] + np.outer(np.log(xs), amps.alphas[:J])
    return np.sign(coef)[None, :] * np.exp(logmag)


def density_series(bs: BVector, amps: AmplitudeSet, J: int, xs) -> DensityCurve:
    """p_JM(x) with the magnitude of the last included term as ``aux``."""
    terms = series_terms(bs, amps, J, xs)
    # increasing j: decreasing magnitude for x < 1
    ps = np.zeros(terms.shape[0])
    for col in terms.T:
        ps = ps + col
    r = amps.records[0]
    meta = {"method": "series", "J": J, "M": r.M2 if r.method == "richardson" else r.M1,
            "amplitudes": r.method}
    if r.method == "richardson":
        meta["M1"] = r.M1
    return DensityCurve(xs=np.asarray(xs, dtype=float), ps=ps, meta=meta,
                        aux=np.abs(terms[:, -1]))
