"""Command-line front end: ``weaktomo <subcommand> [options]``.

Every subcommand prints JSON (or CSV where noted) to stdout. Failures print a
JSON object ``{"error": kind, "message": ...}`` to stdout and exit with

    2  parse failure (bad JSON, missing field, bad flag)
    3  constraint violation (normalization, sum rule, dimension mismatch, ...)
    4  singular configuration (vanishing overlap or weak value)

Option precedence is flags > WEAKTOMO_SEED (seed only) > ``--config`` file > defaults.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import jsonio
from .errors import (
    DegenerateInputError,
    GeometryDomainError,
    SingularPostSelectionError,
    WeakTomoError,
)
from .geometry import (
    GeometryPoint,
    error_volume,
    kahler_potential,
    metric_from_kahler,
    volume_element,
)
from .optimizer import maximize_avg_information, minimize_avg_error, sweep_simplex
from .stateavg import avg_error_volume_closed, mc_state_average, mc_total_volume, total_volume_closed
from .states import PostSelection, RngSeed, fourier_mub, sample_haar_state, state_distance
from .weakvalues import PointerModel, reconstruct_state, simulate_weak_measurement, weak_values

EXIT_PARSE = 2
EXIT_CONSTRAINT = 3
EXIT_SINGULAR = 4

DEFAULTS = {"dim": 2, "seed": 0, "delta": 100.0, "ensemble": 10_000, "samples": 100_000,
            "workers": 1, "output_format": "json"}
SEED_ENV = "WEAKTOMO_SEED"


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind, self.code = kind, code


@dataclass(frozen=True)
class RunConfig:
    dim: int = DEFAULTS["dim"]
    seed: RngSeed = field(default_factory=lambda: RngSeed(DEFAULTS["seed"]))
    delta: float = DEFAULTS["delta"]
    ensemble: int = DEFAULTS["ensemble"]
    samples: int = DEFAULTS["samples"]
    workers: int = DEFAULTS["workers"]
    tolerances: dict = field(default_factory=dict)
    output_format: str = DEFAULTS["output_format"]

    def validate(self) -> RunConfig:
        for name in ("dim", "ensemble", "samples", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise CliError("parse", f"{name} must be an integer", EXIT_PARSE)
        if self.dim < 2:
            raise CliError("constraint", f"dim must be >= 2, got {self.dim}", EXIT_CONSTRAINT)
        for name in ("ensemble", "samples", "workers"):
            if getattr(self, name) < 1:
                raise CliError("constraint", f"{name} must be positive", EXIT_CONSTRAINT)
        if not self.delta > 0:
            raise CliError("constraint", f"delta must be positive, got {self.delta}", EXIT_CONSTRAINT)
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or not v > 0:
                raise CliError("constraint", f"tolerance {k} must be positive", EXIT_CONSTRAINT)
        if self.output_format not in ("json", "csv"):
            raise CliError("constraint", f"unknown output format {self.output_format!r}", EXIT_CONSTRAINT)
        return self

    @property
    def delta_s(self) -> float:
        return self.delta / np.sqrt(self.ensemble)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("parse", message, EXIT_PARSE)


def _read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("parse", f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from exc
    return jsonio.loads(text)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise CliError("parse", f"expected comma-separated numbers, got {text!r}", EXIT_PARSE) from exc


def load_config(args) -> RunConfig:
    values = dict(DEFAULTS)
    tolerances = {}
    if args.config:
        data = _read_json(args.config)
        if not isinstance(data, dict):
            raise CliError("parse", "config file must hold a JSON object", EXIT_PARSE)
        unknown = set(data) - set(DEFAULTS) - {"tolerances"}
        if unknown:
            raise CliError("parse", f"unknown config keys: {', '.join(sorted(unknown))}", EXIT_PARSE)
        tolerances = data.pop("tolerances", {}) or {}
        if not isinstance(tolerances, dict):
            raise CliError("parse", "tolerances must be an object", EXIT_PARSE)
        values.update(data)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError as exc:
            raise CliError("parse", f"{SEED_ENV} must be an integer", EXIT_PARSE) from exc
    for name in DEFAULTS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    seed = values.pop("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise CliError("constraint", "seed must be a nonnegative integer", EXIT_CONSTRAINT)
    if isinstance(values["delta"], int) and not isinstance(values["delta"], bool):
        values["delta"] = float(values["delta"])
    if not isinstance(values["delta"], float):
        raise CliError("parse", "delta must be a number", EXIT_PARSE)
    return RunConfig(seed=RngSeed(seed), tolerances=tolerances, **values).validate()


def _postselection(args, cfg: RunConfig) -> PostSelection:
    if getattr(args, "b", None):
        b = jsonio.postselection_from_json(_read_json(args.b))
        if b.dim != cfg.dim and args.dim is not None:
            raise CliError("constraint", f"--dim {cfg.dim} but b has N={b.dim}", EXIT_CONSTRAINT)
        return b
    return fourier_mub(cfg.dim)


def _delta_s(args, cfg: RunConfig) -> float:
    ds = getattr(args, "delta_s", None)
    if ds is None:
        return cfg.delta_s
    if not ds > 0:
        raise CliError("constraint", f"delta-s must be positive, got {ds}", EXIT_CONSTRAINT)
    return ds


def _require_json(cfg: RunConfig, command: str):
    if cfg.output_format != "json":
        raise CliError("constraint", f"{command} only writes JSON", EXIT_CONSTRAINT)


# Subcommands ---------------------------------------------------------------------

def cmd_reconstruct(args, cfg: RunConfig):
    _require_json(cfg, "reconstruct")
    w = jsonio.weak_values_from_json(_read_json(args.w_file))
    b = jsonio.postselection_from_json(_read_json(args.b_file))
    return jsonio.state_to_json(reconstruct_state(w, b))


def cmd_weak_values(args, cfg: RunConfig):
    _require_json(cfg, "weak-values")
    psi = jsonio.state_from_json(_read_json(args.psi_file))
    b = jsonio.postselection_from_json(_read_json(args.b_file))
    return jsonio.weak_values_to_json(weak_values(psi, b))


def _loglog_slope(ms, dists) -> float:
    slope, _ = np.polyfit(np.log(ms), np.log(dists), 1)
    return float(slope)


def cmd_experiment(args, cfg: RunConfig):
    dim = cfg.dim
    psi = jsonio.state_from_json(_read_json(args.psi)) if args.psi else None
    if psi is not None:
        if args.dim is not None and psi.dim != cfg.dim:
            raise CliError("constraint", f"--dim {cfg.dim} but psi has N={psi.dim}", EXIT_CONSTRAINT)
        dim = psi.dim
    b = jsonio.postselection_from_json(_read_json(args.b)) if args.b else fourier_mub(dim)
    if b.dim != dim:
        raise CliError("constraint", f"psi has N={dim} but b has N={b.dim}", EXIT_CONSTRAINT)
    ms = sorted({int(m) for m in _float_list(args.m_values)}) if args.m_values else [10**k for k in range(2, 6)]
    if not ms or ms[0] < 1:
        raise CliError("constraint", "ensemble sizes must be positive", EXIT_CONSTRAINT)
    trials = args.trials
    if trials < 1:
        raise CliError("constraint", "trials must be positive", EXIT_CONSTRAINT)

    rows = []
    for k, m in enumerate(ms):
        pointer = PointerModel(cfg.delta, m)
        gen = cfg.seed.substream(k).generator()
        dists, vols, skipped = [], [], 0
        for _ in range(trials):
            state = psi if psi is not None else sample_haar_state(dim, gen)
            try:
                meas = simulate_weak_measurement(state, b, pointer, gen)
                est = reconstruct_state(meas.values, b)
            except (SingularPostSelectionError, DegenerateInputError):
                skipped += 1
                continue
            dists.append(state_distance(state, est))
            vols.append(float(error_volume(GeometryPoint.from_state(state, b), pointer.delta_s)))
        if not dists:
            raise CliError("singular", f"every trial at M={m} hit a singular overlap", EXIT_SINGULAR)
        rows.append({"M": m, "delta_s": pointer.delta_s, "mean_distance": float(np.mean(dists)),
                     "stderr_distance": float(np.std(dists, ddof=1) / np.sqrt(len(dists)))
                     if len(dists) > 1 else 0.0,
                     "mean_error_volume": float(np.mean(vols)),
                     "avg_error_volume_closed": avg_error_volume_closed(dim, b, pointer.delta_s),
                     "trials": len(dists), "skipped": skipped})
    slope = _loglog_slope([r["M"] for r in rows], [r["mean_distance"] for r in rows]) if len(rows) > 1 else None
    if cfg.output_format == "csv":
        header = ["M", "delta_s", "mean_distance", "stderr_distance", "mean_error_volume",
                  "avg_error_volume_closed", "trials", "skipped"]
        return jsonio.csv_lines(header, [[r[h] for h in header] for r in rows])
    return {"dim": dim, "b": jsonio.state_to_json(b), "delta": cfg.delta,
            "psi": jsonio.state_to_json(psi) if psi is not None else "haar",
            "seed": cfg.seed.seed, "rows": rows, "slope": slope,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}


def cmd_geometry(args, cfg: RunConfig):
    _require_json(cfg, "geometry")
    b = jsonio.postselection_from_json(_read_json(args.b_file))
    if args.w:
        w = jsonio.weak_values_from_json(_read_json(args.w))
        point = GeometryPoint.from_weak_values(w, b)
    elif args.psi:
        point = GeometryPoint.from_state(jsonio.state_from_json(_read_json(args.psi)), b)
    else:
        raise CliError("parse", "geometry needs --w or --psi", EXIT_PARSE)
    ds = _delta_s(args, cfg)
    metric = metric_from_kahler(point)
    return {"point": jsonio.complex_pairs(point.w), "K": float(kahler_potential(point)),
            "G": jsonio.complex_pairs(metric.G), "g_det": float(metric.g_real_det),
            "volume_element": float(volume_element(point)), "delta_s": ds,
            "error_volume": float(error_volume(point, ds))}


def cmd_volume(args, cfg: RunConfig):
    _require_json(cfg, "volume")
    b = _postselection(args, cfg)
    est = mc_total_volume(b, cfg.samples, cfg.seed, workers=cfg.workers)
    return {"N": b.dim, "V_closed": total_volume_closed(b.dim), "V_mc": est.value,
            "stderr": est.stderr, "samples": est.samples, "b": jsonio.state_to_json(b)}


def cmd_avg_error(args, cfg: RunConfig):
    _require_json(cfg, "avg-error")
    b = _postselection(args, cfg)
    ds = _delta_s(args, cfg)
    est = mc_state_average(lambda pt: error_volume(pt, ds), b, cfg.samples, cfg.seed, workers=cfg.workers)
    return {"N": b.dim, "delta_s": ds, "closed": avg_error_volume_closed(b.dim, b, ds),
            "mc": est.value, "stderr": est.stderr, "samples": est.samples,
            "b": jsonio.state_to_json(b), "weights": b.weights.p}


def _init_weights(args, n: int):
    if args.init is None:
        return None
    if os.path.exists(args.init):
        data = _read_json(args.init)
        vals = data.get("p") if isinstance(data, dict) else data
        try:
            return np.asarray(vals, dtype=float)
        except (TypeError, ValueError) as exc:
            raise CliError("parse", "init file must hold a list of weights", EXIT_PARSE) from exc
    return np.asarray(_float_list(args.init))


def cmd_optimize(args, cfg: RunConfig):
    _require_json(cfg, "optimize")
    ds = _delta_s(args, cfg)
    tol = cfg.tolerances.get("optimizer", 1e-10)
    run = minimize_avg_error if args.objective == "error" else maximize_avg_information
    res = run(cfg.dim, ds, init=_init_weights(args, cfg.dim), tol=tol)
    out = {"objective_name": "avg_error_volume" if args.objective == "error" else "avg_information",
           "weights": res.weights.p, "objective": res.objective, "iterations": res.iterations,
           "converged": res.converged, "gradient_norm": res.gradient_norm, "delta_s": ds}
    if args.trace:
        out["trace"] = [float(t) for t in res.trace]
    return out


def cmd_sweep(args, cfg: RunConfig):
    ds = _delta_s(args, cfg)
    fmt = args.format or "csv"
    rows = sweep_simplex(cfg.dim, ds, args.grid)
    if fmt == "json":
        return [{"p": r.weights, "avg_err_vol": r.avg_error_volume, "avg_info": r.avg_information}
                for r in rows]
    header = [f"p_{i + 1}" for i in range(cfg.dim)] + ["avg_err_vol", "avg_info"]
    return jsonio.csv_lines(header, [[*map(float, r.weights), r.avg_error_volume, r.avg_information]
                                     for r in rows])


# Parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="JSON file with dim, seed, delta, ensemble, samples, workers, tolerances")
    g.add_argument("--dim", type=int, help="Hilbert-space dimension N (default 2)")
    g.add_argument("--seed", type=int, help="RNG seed (default 0; WEAKTOMO_SEED overrides the config file)")
    g.add_argument("--delta", type=float, help="pointer width (default 100)")
    g.add_argument("--ensemble", type=int, help="shots per quadrature M (default 10000)")
    g.add_argument("--samples", type=int, help="Monte Carlo samples (default 100000)")
    g.add_argument("--workers", type=int, help="worker threads for Monte Carlo (default 1)")
    g.add_argument("--format", dest="format", choices=["json", "csv"], help="output format")

    parser = _Parser(prog="weaktomo", description="Pure-state tomography from weak values.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reconstruct", parents=[common], help="state from a weak-value vector")
    p.add_argument("w_file", help='weak values {"dim": N, "w": [[re, im], ...]}')
    p.add_argument("b_file", help='post-selection {"dim": N, "amps": [[re, im], ...]}')
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("weak-values", parents=[common], help="weak values of a state")
    p.add_argument("psi_file")
    p.add_argument("b_file")
    p.set_defaults(func=cmd_weak_values)

    p = sub.add_parser("experiment", parents=[common],
                       help="simulate noisy weak measurements and report error vs ensemble size")
    p.add_argument("--psi", help="state file; Haar-random states when omitted")
    p.add_argument("--b", help="post-selection file; Fourier (unbiased) vector when omitted")
    p.add_argument("--m-values", help="comma-separated ensemble sizes (default 1e2,1e3,1e4,1e5)")
    p.add_argument("--trials", type=int, default=200, help="simulations per ensemble size")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("geometry", parents=[common], help="metric quantities at a point")
    p.add_argument("b_file")
    p.add_argument("--w", help="weak-value file")
    p.add_argument("--psi", help="state file (alternative to --w)")
    p.add_argument("--delta-s", type=float, help="noise scale (default delta / sqrt(ensemble))")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("volume", parents=[common], help="total state-space volume, closed form and MC")
    p.add_argument("--b", help="post-selection file (default Fourier vector)")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("avg-error", parents=[common], help="state-averaged error volume, closed form and MC")
    p.add_argument("--b", help="post-selection file (default Fourier vector)")
    p.add_argument("--delta-s", type=float)
    p.set_defaults(func=cmd_avg_error)

    p = sub.add_parser("optimize", parents=[common], help="optimal post-selection magnitudes")
    p.add_argument("--delta-s", type=float)
    p.add_argument("--init", help="comma-separated starting weights or a JSON file")
    p.add_argument("--objective", choices=["error", "information"], default="error")
    p.add_argument("--trace", action="store_true", help="include the objective trace")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common], help="objectives on a simplex lattice (CSV)")
    p.add_argument("--grid", type=int, required=True, help="lattice points per edge")
    p.add_argument("--delta-s", type=float)
    p.set_defaults(func=cmd_sweep)
    return parser


def _classify(exc: Exception) -> CliError:
    if isinstance(exc, CliError):
        return exc
    if isinstance(exc, jsonio.ParseError):
        return CliError("parse", str(exc), EXIT_PARSE)
    if isinstance(exc, (SingularPostSelectionError, DegenerateInputError, GeometryDomainError,
                        ZeroDivisionError)):
        return CliError("singular", str(exc), EXIT_SINGULAR)
    if isinstance(exc, (WeakTomoError, ValueError)):
        return CliError("constraint", str(exc), EXIT_CONSTRAINT)
    raise exc


def _emit(out, stream):
    text = out if isinstance(out, str) else jsonio.dumps(out) + "\n"
    stream.write(text)


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        args.output_format = args.format if args.command != "sweep" else None
        cfg = load_config(args)
        if args.command == "sweep":
            cfg = replace(cfg, output_format=args.format or "csv")
        out = args.func(args, cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        err = _classify(exc)
        _emit({"error": err.kind, "message": str(err)}, stdout)
        return err.code
    _emit(out, stdout)
    return 0


def entry() -> None:
    sys.stdout.reconfigure(encoding="utf-8", newline="\n")
    sys.exit(main())


if __name__ == "__main__":
    entry()
