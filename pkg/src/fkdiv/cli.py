"""Command-line runner: ``fkdiv <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 check failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import checks, confinement, laws
from .errors import ConfigError, DomainError, NumericError
from .fk_mc import fk_fullspace, fk_halfspace, fk_radial_bessel, fk_stable, threshold_sweep
from .model import InitialDatum, PathGrid, PotentialSpec
from .pde_oracle import RadialGrid, radial_heat_solve
from .rng import RngStream
from .specfun import bessel_j_zeros
from .thresholds import constant_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 1}]}

POTENTIAL_SCHEMA = {
    "type": "object",
    "properties": {
        "c": {"type": "number", "minimum": 0},
        "beta": {"type": "number", "minimum": 0},
        "cap": {"oneOf": [{"type": "number", "minimum": 0}, {"type": "null"}]},
        "flavor": {"enum": ["bulk", "boundary"]},
        "shift": {"type": "number", "minimum": 0},
    },
    "required": ["c"],
    "additionalProperties": False,
}
DATUM_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["gaussian_bump", "box_indicator", "constant_one"]},
        "center": {"type": "array", "items": _NUM},
        "radius": _POS,
        "interval": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "amplitude": _POS,
    },
    "required": ["kind"],
    "additionalProperties": False,
}
GRID_SCHEMA = {
    "type": "object",
    "properties": {
        "n_steps": {"type": "integer", "minimum": 1},
        "dt": _POS,
        "n_paths": {"type": "integer", "minimum": 1},
        "bridge_correction": {"type": "boolean"},
    },
    "additionalProperties": False,
}
FK_SCHEMA = {
    "type": "object",
    "properties": {
        "setting": {"enum": ["fullspace", "stable", "halfspace", "radial_bessel"]},
        "N": {"type": "integer", "minimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
        "t": _POS,
        "x": _POINT,
        "potential": POTENTIAL_SCHEMA,
        "initial": DATUM_SCHEMA,
        "grid": GRID_SCHEMA,
        "caps": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["setting", "N", "t", "x", "potential", "initial", "grid"],
    "additionalProperties": False,
}
PDE_SCHEMA = {
    "type": "object",
    "properties": {
        "N": {"type": "integer", "minimum": 2},
        "t": _POS,
        "potential": POTENTIAL_SCHEMA,
        "initial": DATUM_SCHEMA,
        "grid": {
            "type": "object",
            "properties": {"r_max": _POS, "n_r": {"type": "integer", "minimum": 3},
                           "n_t": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
    },
    "required": ["N", "t", "potential", "initial"],
    "additionalProperties": False,
}
SWEEP_SCHEMA = {
    "type": "object",
    "properties": {
        "setting": {"enum": ["fullspace", "stable", "halfspace"]},
        "N": {"type": "integer", "minimum": 1},
        "c_list": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "m_list": {"type": "array", "items": _POS, "minItems": 2},
        "t": _POS,
        "x": _POINT,
        "grid": GRID_SCHEMA,
        "beta": {"type": "number", "minimum": 0},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
        "plateau": {"type": "number", "exclusiveMinimum": 1},
        "initial": DATUM_SCHEMA,
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["setting", "N", "c_list", "m_list", "t", "x", "grid"],
    "additionalProperties": False,
}


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _load_config(path, schema):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config {path} rejected: {exc.message}") from exc
    return cfg


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


class Emitter:
    """Writes results to --out (or stdout) with the config hash and seed embedded."""

    def __init__(self, out, cfg_hash, seed):
        self.out, self.cfg_hash, self.seed = out, cfg_hash, seed

    def _write(self, text, path=None):
        path = path or self.out
        if path:
            Path(path).write_text(text)
        else:
            sys.stdout.write(text)

    def json(self, payload, path=None):
        body = {**_to_jsonable(payload), "config_hash": self.cfg_hash, "seed": self.seed}
        self._write(json.dumps(body, indent=2, sort_keys=True) + "\n", path)

    def csv(self, header, rows, path=None):
        buf = io.StringIO()
        buf.write(f"# config_hash={self.cfg_hash} seed={self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for v in row])
        self._write(buf.getvalue(), path)


def _est(e):
    """Estimate as a dict; its stream provenance goes under "stream" so the top-level seed stays an int."""
    d = e.to_dict()
    d["stream"] = d.pop("seed")
    return d


def _parse_range(text):
    out = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _parse_floats(text):
    return [float(v) for v in text.split(",") if v]


def _parse_params(text):
    params = {}
    for item in (text or "").split(","):
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"bad parameter {item!r}; expected key=value")
        k, v = item.split("=", 1)
        params[k.strip()] = float(v)
    return params


def _potential(d):
    return PotentialSpec(d["c"], d.get("beta", 2.0), d.get("cap"), d.get("flavor", "bulk"), d.get("shift", 0.0))


def _datum(d):
    return InitialDatum(d["kind"], tuple(d.get("center", ())), d.get("radius", 1.0),
                        tuple(d["interval"]) if "interval" in d else None, d.get("amplitude", 1.0))


def _grid(d, t):
    return PathGrid(t, dt=d.get("dt"), n_paths=d.get("n_paths", 10_000),
                    bridge_correction=d.get("bridge_correction", True), n_steps=d.get("n_steps", 0))


# --------------------------------------------------------------------------
# command handlers

def cmd_zeros(args, emit):
    j = bessel_j_zeros(args.mu, args.count)
    emit.csv(["k", "j"], [[k + 1, float(v)] for k, v in enumerate(j)])
    return EXIT_OK


def cmd_confine(args, emit):
    if args.mc:
        est = confinement.confine_prob_mc(args.N, args.rho, args.T, args.paths, RngStream(args.seed),
                                          n_steps=args.steps, workers=args.workers)
        emit.json({"method": "mc", "N": args.N, "rho": args.rho, "T": args.T, **_est(est)})
    else:
        res = confinement.confine_prob(args.N, args.rho, args.T)
        emit.json({"method": "series", "N": args.N, "rho": args.rho, "T": args.T, **res.to_dict()})
    return EXIT_OK


_SAMPLERS = {
    "subordinator": lambda p, rng, n: laws.subordinator_sample(p.get("alpha", 1.0), p.get("t", 1.0), rng, size=n),
    "hitting_time": lambda p, rng, n: laws.hitting_time_sample(p.get("a", 1.0), rng, size=n),
    "last_zero": lambda p, rng, n: laws.last_zero_sample(p.get("t", 1.0), rng, size=n),
    "meander": lambda p, rng, n: laws.meander_endpoint_sample(p.get("dur", 1.0), rng, size=n),
    "relativistic_clock": lambda p, rng, n: laws.inverse_gaussian_sample(
        p.get("t", 1.0) / p.get("m", 1.0), p.get("t", 1.0) ** 2, rng.generator(), n),
}


def cmd_law(args, emit):
    if args.action == "sample":
        params = _parse_params(args.params)
        rng = RngStream(args.seed)
        if args.name == "local_time":
            y, z = laws.local_time_joint_sample(params.get("x", 0.0), params.get("s", 1.0), rng, size=args.n)
            emit.csv(["local_time", "endpoint"], zip(y.tolist(), z.tolist()))
        elif args.name in _SAMPLERS:
            draws = _SAMPLERS[args.name](params, rng, args.n)
            emit.csv([args.name], [[float(v)] for v in np.atleast_1d(draws)])
        else:
            raise ConfigError(f"unknown law {args.name!r}")
        return EXIT_OK
    if args.name not in checks.LAW_NAMES:
        raise ConfigError(f"unknown law {args.name!r}; choose from {checks.LAW_NAMES}")
    report = checks.law_check(args.name, seed=args.seed)
    emit.json(report)
    return EXIT_OK if report["passed"] else EXIT_CHECK


def cmd_fk(args, emit):
    cfg = _load_config(args.config, FK_SCHEMA)
    seed = cfg.get("seed", args.seed)
    emit.cfg_hash, emit.seed = config_hash(cfg), seed
    rng = RngStream(seed)
    N, t, setting = cfg["N"], cfg["t"], cfg["setting"]
    pot, u0, grid = _potential(cfg["potential"]), _datum(cfg["initial"]), _grid(cfg["grid"], t)
    caps = cfg.get("caps")
    x = cfg["x"]
    if setting == "fullspace":
        res = fk_fullspace(N, pot, u0, t, x, grid, rng, workers=args.workers, caps=caps)
    elif setting == "stable":
        res = fk_stable(N, cfg.get("alpha", 1.0), pot, u0, t, x, grid, rng, workers=args.workers, caps=caps)
    elif setting == "halfspace":
        res = fk_halfspace(N, pot, u0, t, x, grid, rng, workers=args.workers, caps=caps)
    else:
        r0 = float(np.linalg.norm(np.atleast_1d(x)))
        lhs, rhs = fk_radial_bessel(N, pot.c, pot.cap, u0, t, r0, grid, rng, workers=args.workers)
        emit.json({"setting": setting, "lhs": _est(lhs), "rhs": _est(rhs)})
        return EXIT_OK
    if caps is None:
        emit.json({"setting": setting, **_est(res)})
    else:
        emit.json({"setting": setting, "caps": caps, "estimates": [_est(e) for e in res]})
        if args.table:
            emit.csv(["cap", "mean", "std_err", "n"], [[c, e.mean, e.std_err, e.n] for c, e in zip(caps, res)],
                     path=args.table)
    return EXIT_OK


def cmd_appendix(args, emit):
    report = checks.appendix_check(args.name, seed=args.seed, workers=args.workers)
    emit.json(report)
    return EXIT_OK if report["passed"] else EXIT_CHECK


def cmd_constants(args, emit):
    dims = _parse_range(args.dims)
    alphas = _parse_floats(args.alpha) if args.alpha else [None]
    rows = []
    for N in dims:
        for a in alphas:
            rows.append(constant_report(N, a).row())
    emit.csv(["N", "hardy", "frac_hardy", "kato", "cond_bm", "cond_stable", "cond_boundary", "alpha"], rows)
    return EXIT_OK


def cmd_pde(args, emit):
    cfg = _load_config(args.config, PDE_SCHEMA)
    emit.cfg_hash = config_hash(cfg)
    g = cfg.get("grid", {})
    grid = RadialGrid(g.get("r_max"), g.get("n_r", 1601), g.get("n_t", 400))
    field = radial_heat_solve(cfg["N"], _potential(cfg["potential"]), _datum(cfg["initial"]), cfg["t"], grid)
    emit.csv(["r", "u"], zip(field.r.tolist(), field.values.tolist()))
    return EXIT_OK


def cmd_sweep(args, emit):
    cfg = _load_config(args.config, SWEEP_SCHEMA)
    seed = cfg.get("seed", args.seed)
    emit.cfg_hash, emit.seed = config_hash(cfg), seed
    rows = threshold_sweep(cfg["setting"], cfg["N"], cfg["c_list"], cfg["m_list"], cfg["t"], cfg["x"],
                           _grid(cfg["grid"], cfg["t"]), RngStream(seed), beta=cfg.get("beta"),
                           alpha=cfg.get("alpha", 1.0),
                           u0=_datum(cfg["initial"]) if "initial" in cfg else None,
                           plateau=cfg.get("plateau", 1.05), workers=args.workers)
    table = []
    for r in rows:
        for i, m in enumerate(r.caps):
            table.append([r.c, m, r.means[i], r.std_errs[i], r.ratios[i - 1] if i else None, r.verdict])
    emit.csv(["c", "cap", "mean", "std_err", "ratio_to_previous", "verdict"], table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fkdiv", description="Feynman-Kac divergence experiments and oracles.")
    p.add_argument("--seed", type=int, default=20240601, help="global seed (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1, help="threads for path batches")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("zeros", help="positive zeros of J_mu")
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--count", type=int, default=10)
    s.set_defaults(func=cmd_zeros)

    s = sub.add_parser("confine", help="probability of staying in the unit ball")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--mc", action="store_true", help="Monte Carlo instead of the eigen-series")
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--steps", type=int, default=500)
    s.set_defaults(func=cmd_confine)

    s = sub.add_parser("law", help="sample a law or run its distribution check")
    s.add_argument("action", choices=["sample", "check"])
    s.add_argument("--name", required=True)
    s.add_argument("--params", default="", help="comma-separated key=value list")
    s.add_argument("--n", type=int, default=1000)
    s.set_defaults(func=cmd_law)

    s = sub.add_parser("fk", help="Feynman-Kac Monte Carlo")
    s.add_argument("action", choices=["run"])
    s.add_argument("--config", required=True)
    s.add_argument("--table", default=None, help="CSV path for the per-cap table")
    s.set_defaults(func=cmd_fk)

    s = sub.add_parser("appendix", help="1-stable and boundary identity checks")
    s.add_argument("action", choices=["check"])
    s.add_argument("--name", required=True, choices=checks.APPENDIX_NAMES)
    s.set_defaults(func=cmd_appendix)

    s = sub.add_parser("constants", help="table of Hardy-type constants and thresholds")
    s.add_argument("--dims", default="3..20")
    s.add_argument("--alpha", default="")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("pde", help="radial Crank-Nicolson solve")
    s.add_argument("action", choices=["solve"])
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_pde)

    s = sub.add_parser("sweep", help="cap sweep with common random numbers")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "workers")}
    emit = Emitter(args.out, config_hash(cfg), args.seed)
    try:
        return args.func(args, emit)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
