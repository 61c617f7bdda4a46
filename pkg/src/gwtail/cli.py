"""Command-line interface: config parsing, subcommand dispatch, CSV output, comparison.

Usage::

    gwtail phi       --config run.json -o phi.csv
    gwtail density   --config run.json -o density.csv
    gwtail reference --config run.json -o reference.csv
    gwtail compare   density.csv reference.csv -o cmp.csv [--interpolate]

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any

import mpmath
import numpy as np

from . import __version__
from . import precision as prec
from .asymptotics import amplitude_set, density_series
from .model import Environment, OffspringPgf, build_two_poly_family, environment_validate
from .montecarlo import SimConfig, martingale_histogram
from .phi import phi_table, phi_table_two_poly
from .pseudo_inverse import b_recurrence
from .qmatrix import q_matrix
from .reference import DEFAULT_BUDGET, ReferenceConfig, reference_density

log = logging.getLogger("gwtail")

SUBCOMMANDS = ("phi", "b", "amplitudes", "density", "reference", "simulate", "compare")
EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

SECTION_DEFAULTS = {
    "phi": {"J": 19, "N": 2000},
    "amplitudes": {"M": 1000, "richardson": False},
    "density": {"J": 19, "M": 1000, "x": {"min": 0.1, "max": 2.0, "step": 0.01}},
    "reference": {"t": 12, "y_max": 200.0, "dy": 0.02, "budget": DEFAULT_BUDGET,
                  "x": {"min": 0.1, "max": 2.0, "step": 0.01}},
    "simulate": {"t": 20, "trials": 1_000_000, "seed": 0, "bins": 150, "x_min": 0.0, "x_max": 3.0},
}
TOP_KEYS = {"environment", "precision", "threads", "output", *SECTION_DEFAULTS}


class ConfigError(ValueError):
    """Bad configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    environment: Environment
    env_spec: dict
    sections: dict = field(default_factory=dict)
    precision: str = prec.STANDARD
    threads: int = 1
    output: str | None = None

    @property
    def two_poly(self) -> float | None:
        return self.env_spec.get("two_poly")

    def section(self, name: str) -> dict:
        return self.sections[name]


def _require(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _number(value, path, kind=float, positive=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        ok = ok and float(value).is_integer()
    _require(ok, path, f"expected {'an integer' if kind is int else 'a number'}, got {value!r}")
    value = kind(value)
    if positive:
        _require(value > 0, path, f"must be positive, got {value!r}")
    return value


def _parse_environment(spec, path="environment") -> tuple[Environment, dict]:
    _require(isinstance(spec, dict), path, "expected an object")
    forms = [k for k in ("two_poly", "members") if k in spec]
    _require(len(forms) == 1, path, "exactly one of 'two_poly' or 'members' is required")
    extra = set(spec) - {"two_poly", "members"}
    _require(not extra, path, f"unknown keys {sorted(extra)}")
    if forms[0] == "two_poly":
        p = _number(spec["two_poly"], f"{path}.two_poly")
        try:
            env = build_two_poly_family(p)
        except ValueError as exc:
            raise ConfigError(f"{path}.two_poly: {exc}") from None
        return env, {"two_poly": p}
    members = spec["members"]
    _require(isinstance(members, list) and members, f"{path}.members", "expected a non-empty list")
    built = []
    for i, m in enumerate(members):
        mp = f"{path}.members[{i}]"
        _require(isinstance(m, dict) and {"weight", "probs"} <= set(m), mp,
                 "expected an object with 'weight' and 'probs'")
        w = _number(m["weight"], f"{mp}.weight")
        probs = m["probs"]
        _require(isinstance(probs, list) and probs, f"{mp}.probs", "expected a non-empty list")
        probs = [_number(v, f"{mp}.probs[{k}]") for k, v in enumerate(probs)]
        try:
            built.append((w, OffspringPgf(probs)))
        except ValueError as exc:
            raise ConfigError(f"{mp}.probs: {exc}") from None
    env = Environment(built)
    return env, {"members": [{"weight": w, "probs": list(p.probs)} for w, p in env.members]}


def _merge(defaults: dict, given: Any, path: str) -> dict:
    if given is None:
        given = {}
    _require(isinstance(given, dict), path, "expected an object")
    extra = set(given) - set(defaults)
    _require(not extra, path, f"unknown keys {sorted(extra)}")
    out = {}
    for key, default in defaults.items():
        value = given.get(key, default)
        kp = f"{path}.{key}"
        if isinstance(default, dict):
            out[key] = _merge(default, value, kp)
        elif isinstance(default, bool):
            _require(isinstance(value, bool), kp, f"expected true/false, got {value!r}")
            out[key] = value
        elif isinstance(default, int):
            out[key] = _number(value, kp, int)
        else:
            out[key] = _number(value, kp, float)
    return out


def _check_sections(sections: dict):
    phi = sections["phi"]
    _require(1 <= phi["J"] <= phi["N"], "phi", f"need 1 <= J <= N, got J={phi['J']}, N={phi['N']}")
    for name in ("density", "reference"):
        x = sections[name]["x"]
        _require(x["step"] > 0 and 0 < x["min"] <= x["max"], f"{name}.x",
                 "need 0 < min <= max and step > 0")
    ref = sections["reference"]
    _require(ref["t"] >= 1, "reference.t", "must be >= 1")
    _require(0 < ref["dy"] <= ref["y_max"], "reference", "need 0 < dy <= y_max")
    sim = sections["simulate"]
    _require(sim["trials"] >= 1, "simulate.trials", "must be >= 1")
    _require(sim["t"] >= 0, "simulate.t", "must be >= 0")
    _require(sim["bins"] >= 10, "simulate.bins", "must be >= 10")
    _require(sim["x_min"] < sim["x_max"], "simulate", "need x_min < x_max")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _require(isinstance(raw, dict), "config", "top level must be an object")
    extra = set(raw) - TOP_KEYS
    _require(not extra, "config", f"unknown keys {sorted(extra)}")
    _require("environment" in raw, "config", "missing 'environment'")
    env, env_spec = _parse_environment(raw["environment"])
    problems = environment_validate(env)
    if problems:
        raise ConfigError("environment: " + "; ".join(problems))
    sections = {name: _merge(d, raw.get(name), name) for name, d in SECTION_DEFAULTS.items()}
    _check_sections(sections)
    mode = raw.get("precision", prec.STANDARD)
    _require(mode in prec.MODES, "precision", f"expected one of {prec.MODES}, got {mode!r}")
    threads = raw.get("threads", os.cpu_count() or 1)
    threads = _number(threads, "threads", int, positive=True)
    output = raw.get("output")
    _require(output is None or isinstance(output, str), "output", "expected a path string")
    return RunConfig(env, env_spec, sections, mode, threads, output)


def x_grid(spec: dict) -> np.ndarray:
    steps = int(math.floor((spec["max"] - spec["min"]) / spec["step"] + 1e-9))
    return np.round(spec["min"] + spec["step"] * np.arange(steps + 1), 12)


# ---------------------------------------------------------------- CSV I/O


def fmt(value, mode=prec.STANDARD) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, mpmath.mpf) or mode == prec.EXTENDED:
        return mpmath.nstr(mpmath.mpf(value), prec.EXTENDED_DPS, min_fixed=-3, max_fixed=3)
    return repr(float(value))


def write_csv(path, header, rows, meta: dict, mode=prec.STANDARD):
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v, mode) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_csv(path):
    """Return (meta dict, header list, list of row string lists)."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise ConfigError(f"{path}: no header row")
    return meta, header, rows


def read_curve(path):
    meta, header, rows = read_csv(path)
    if header[:2] != ["x", "p"]:
        raise ConfigError(f"{path}: expected columns starting with x,p; got {header}")
    xs = np.array([float(r[0]) for r in rows])
    ps = np.array([float(r[1]) for r in rows])
    return xs, ps, meta


# ---------------------------------------------------------------- subcommands


def _meta(cfg: RunConfig, which: str, **extra) -> dict:
    meta = {"tool": "gwtail", "version": __version__, "subcommand": which,
            "precision": cfg.precision, "environment": json.dumps(cfg.env_spec, separators=(",", ":"))}
    meta.update(extra)
    return meta


def _table(cfg: RunConfig, J: int, N: int):
    if cfg.two_poly is not None:
        return phi_table_two_poly(cfg.two_poly, J, N, cfg.precision)
    return phi_table(q_matrix(cfg.environment, N, cfg.precision), J, N)


def run_phi(cfg: RunConfig):
    s = cfg.section("phi")
    table = _table(cfg, s["J"], s["N"])
    rows = [(n, j, table.values[n, j]) for j in range(1, s["J"] + 1) for n in range(j, s["N"] + 1)]
    return ["n", "j", "phi"], rows, _meta(cfg, "phi", J=s["J"], N=s["N"])


def run_b(cfg: RunConfig):
    s = cfg.section("phi")
    J = s["J"]
    bs = b_recurrence(_table(cfg, J, max(J, 1)))
    rows = [(j, bs[j]) for j in range(1, J + 1)]
    return ["j", "b"], rows, _meta(cfg, "b", J=J)


def _amplitudes(cfg: RunConfig, J: int, M: int, richardson: bool):
    table = _table(cfg, J, max(M, J))
    return table, amplitude_set(table, J, M, richardson=richardson)


def run_amplitudes(cfg: RunConfig):
    J = cfg.section("phi")["J"]
    s = cfg.section("amplitudes")
    _, amps = _amplitudes(cfg, J, s["M"], s["richardson"])
    rows = [(r.j, r.alpha, r.value, r.method, r.M1, r.M2) for r in amps.records]
    return (["j", "alpha_j", "A_jM", "method", "M1", "M2"], rows,
            _meta(cfg, "amplitudes", J=J, M=s["M"], richardson=s["richardson"]))


def run_density(cfg: RunConfig):
    s = cfg.section("density")
    richardson = cfg.section("amplitudes")["richardson"]
    table, amps = _amplitudes(cfg, s["J"], s["M"], richardson)
    bs = b_recurrence(table, s["J"])
    curve = density_series(bs, amps, s["J"], x_grid(s["x"]))
    b_abs = ";".join(f"{abs(float(v)):.3e}" for v in bs.values[1:])
    rows = list(zip(curve.xs, curve.ps, curve.aux))
    return ["x", "p", "aux"], rows, _meta(cfg, "density", J=s["J"], M=s["M"], richardson=richardson,
                                          aux="last_term_bound", abs_b=b_abs)


def run_reference(cfg: RunConfig):
    s = cfg.section("reference")
    rc = ReferenceConfig(t=s["t"], y_max=s["y_max"], dy=s["dy"], xs=x_grid(s["x"]), budget=s["budget"])
    curve = reference_density(cfg.environment, rc, threads=cfg.threads)
    rows = [(x, p, 0.0) for x, p in zip(curve.xs, curve.ps)]
    meta = _meta(cfg, "reference", aux="unused")
    meta.update({k: v for k, v in curve.meta.items() if k != "method"})
    return ["x", "p", "aux"], rows, meta


def run_simulate(cfg: RunConfig):
    s = cfg.section("simulate")
    sim = SimConfig(initial=1, horizon=s["t"], trials=s["trials"], seed=s["seed"])
    curve = martingale_histogram(cfg.environment, sim, bins=s["bins"],
                                 x_range=(s["x_min"], s["x_max"]), threads=cfg.threads)
    rows = list(zip(curve.xs, curve.ps, curve.aux))
    meta = _meta(cfg, "simulate", aux="stderr")
    meta.update({k: v for k, v in curve.meta.items() if k != "method"})
    return ["x", "p", "aux"], rows, meta


RUNNERS = {"phi": run_phi, "b": run_b, "amplitudes": run_amplitudes, "density": run_density,
           "reference": run_reference, "simulate": run_simulate}


def run_subcommand(cfg: RunConfig, which: str, output=None) -> int:
    if which not in RUNNERS:
        raise ConfigError(f"unknown subcommand {which!r}")
    try:
        header, rows, meta = RUNNERS[which](cfg)
    except (ArithmeticError, RuntimeError) as exc:
        log.error("%s failed: %s", which, exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("%s: invalid parameters: %s", which, exc)
        return EXIT_CONFIG
    mode = cfg.precision if which in ("phi", "b") else prec.STANDARD
    write_csv(output if output is not None else cfg.output, header, rows, meta, mode)
    return EXIT_OK


def compare_curves(path_a, path_b, interpolate=False):
    """Pointwise comparison of two (x, p, ...) CSV files over their x-overlap.

    Returns (rows, summary) where rows are (x, p_a, p_b, abs_diff, rel_diff)
    and rel_diff is relative to p_b.
    """
    xa, pa, _ = read_curve(path_a)
    xb, pb, _ = read_curve(path_b)
    lo, hi = max(xa.min(), xb.min()), min(xa.max(), xb.max())
    if lo > hi:
        raise ConfigError("x ranges do not overlap")
    ma, mb = (xa >= lo) & (xa <= hi), (xb >= lo) & (xb <= hi)
    xa, pa, xb, pb = xa[ma], pa[ma], xb[mb], pb[mb]
    if len(xa) == len(xb) and np.array_equal(xa, xb):
        xs, va, vb = xa, pa, pb
    elif not interpolate:
        raise ConfigError("x grids differ on the overlap; pass --interpolate to align them")
    elif len(xa) <= len(xb):
        xs, va, vb = xa, pa, np.interp(xa, xb, pb)
    else:
        xs, va, vb = xb, np.interp(xb, xa, pa), pb
    absd = np.abs(va - vb)
    with np.errstate(divide="ignore", invalid="ignore"):
        reld = np.where(vb != 0, absd / np.abs(vb), np.where(absd == 0, 0.0, np.inf))
    rows = list(zip(xs, va, vb, absd, reld))
    summary = {"max_abs_diff": float(absd.max()), "max_rel_diff": float(reld.max()),
               "points": len(xs), "x_min": float(xs.min()), "x_max": float(xs.max())}
    return rows, summary


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gwtail", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="which", required=True)
    for name in SUBCOMMANDS[:-1]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", "-c", required=True, help="JSON run configuration")
        sp.add_argument("--output", "-o", default=None, help="CSV path ('-' for stdout)")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--precision", choices=prec.MODES, default=None)
    sp = sub.add_parser("compare")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--output", "-o", default=None)
    sp.add_argument("--interpolate", action="store_true",
                    help="linearly interpolate onto the coarser grid when x grids differ")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.which == "compare":
            rows, summary = compare_curves(args.a, args.b, args.interpolate)
            meta = {"tool": "gwtail", "version": __version__, "subcommand": "compare",
                    "a": args.a, "b": args.b, **summary}
            write_csv(args.output, ["x", "p_a", "p_b", "abs_diff", "rel_diff"], rows, meta)
            log.info("max_abs_diff=%.6g max_rel_diff=%.6g over %d points",
                     summary["max_abs_diff"], summary["max_rel_diff"], summary["points"])
            return EXIT_OK
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
        if args.threads is not None:
            cfg.threads = args.threads
        if args.precision is not None:
            cfg.precision = args.precision
        return run_subcommand(cfg, args.which, args.output)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
