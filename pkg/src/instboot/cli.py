"""Command-line front end.

Every subcommand is turned into a :class:`RunConfig` first and then
executed by :func:`execute`, so a run is fully described by its config
(``--dump-config`` prints it).
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence


from . import analysis, export, moran, replicator
from .config import RunConfig
from .game import GameParams, ParameterError, preset
from .moran import MoranConfig, StationaryConvergenceError
from .parallel import ENV_VAR
from .perception import format_perception, is_stochastic, make_rng, parse_perception, spec_from_dict, spec_to_dict
from .simplex import IntegrationError
from .svg import simplex_svg

COMMANDS = ("field", "attractors", "basins", "threshold", "simulate", "stationary", "sweep", "render")

DEFAULT_FORMAT = {
    "field": "csv",
    "attractors": "json",
    "basins": "csv",
    "threshold": "json",
    "simulate": "csv",
    "stationary": "csv",
    "sweep": "json",
}


def _counts(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k_d,k_c,k_cm, got {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three counts, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--preset", default="favourable", choices=["favourable", "unfavourable"])
    g.add_argument("--params", metavar="FILE", help="JSON object overriding preset fields")
    g.add_argument("--perception", default="identity",
                   help="identity | coarse:F | prelec:ZETA:LAMBDA[:total] | propnoise:LO:HI | absnoise:W")
    g.add_argument("--gamma", type=float, help="override selection intensity")
    g.add_argument("--mu", type=float, help="override mutation probability")
    g.add_argument("--z-pop", type=int, help="override Moran population size")
    o = common.add_argument_group("run")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--mc-samples", type=int, default=1000)
    o.add_argument("--out", default="-", help="output path (default stdout)")
    o.add_argument("--threads", type=int, default=None,
                   help=f"worker threads, 0 = all cores (default from ${ENV_VAR} or 1)")
    o.add_argument("--dump-config", action="store_true", help="print the run config as JSON and exit")

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=["json", "csv"])
    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--dynamics", choices=["replicator", "moran"], default="replicator")

    parser = argparse.ArgumentParser(prog="instboot", description="Institution bootstrapping dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", parents=[common, fmt, dyn], help="drift vectors on a lattice")
    p.add_argument("--resolution", type=int, help="lattice subdivisions (Moran default: every count state)")

    p = sub.add_parser("attractors", parents=[common, fmt], help="replicator rest points and stability")
    p.add_argument("--seed-resolution", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("basins", parents=[common, fmt, dyn], help="basin-of-attraction map")
    p.add_argument("--resolution", type=int, default=100)

    p = sub.add_parser("threshold", parents=[common, fmt], help="critical mass on the D-CM edge")
    p.add_argument("--method", choices=["auto", "analytic", "simulated"], default="auto")

    p = sub.add_parser("simulate", parents=[common, fmt], help="one Moran trajectory")
    p.add_argument("--start", type=_counts, required=True, metavar="K_D,K_C,K_CM")
    p.add_argument("--steps", type=int, default=1000)

    p = sub.add_parser("stationary", parents=[common, fmt], help="stationary distribution of the Moran chain")
    p.add_argument("--matrix-out", metavar="FILE", help="also write the transition matrix")

    p = sub.add_parser("sweep", parents=[common, fmt], help="thresholds for several perceptions")
    p.add_argument("--perceptions", required=True, help="comma-separated perception shorthands")
    p.add_argument("--method", choices=["auto", "analytic", "simulated"], default="auto")

    p = sub.add_parser("render", parents=[common, dyn], help="SVG simplex plot")
    p.add_argument("--resolution", type=int, default=20)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = preset(args.preset)
    if args.params:
        try:
            with open(args.params, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParameterError(f"cannot read {args.params}: {exc.strerror}", "params") from exc
        params = GameParams.from_json(text, base=params)
    overrides = {k: v for k, v in (("gamma", args.gamma), ("mu", args.mu), ("z_pop", args.z_pop)) if v is not None}
    if overrides:
        params = params.replace(**overrides)
    spec = parse_perception(args.perception)

    skip = {"command", "preset", "params", "perception", "gamma", "mu", "z_pop", "out", "threads", "dump_config"}
    options = {k: v for k, v in vars(args).items() if k not in skip}
    if options.get("format") is None and args.command in DEFAULT_FORMAT:
        options["format"] = DEFAULT_FORMAT[args.command]
    if args.command == "sweep":
        options["perceptions"] = [spec_to_dict(parse_perception(t)) for t in args.perceptions.split(",")]
    return RunConfig(args.command, params, spec, options)


def _moran_config(cfg: RunConfig) -> MoranConfig:
    o = cfg.options
    return MoranConfig.from_params(cfg.params, mc_samples=o.get("mc_samples", 1000), seed=o.get("seed", 0))


def execute(cfg: RunConfig, threads: int | None = None) -> dict[str, str]:
    """Run a config; returns ``{"main": text, ...}`` with any side outputs keyed by path."""
    o, params, spec = cfg.options, cfg.params, cfg.spec
    fmt = o.get("format")
    cmd = cfg.command

    if cmd == "field":
        if o.get("dynamics") == "moran":
            field = moran.drift_field(params, spec, _moran_config(cfg), o.get("resolution"), threads)
        else:
            field = replicator.gradient_field(params, spec, o.get("resolution") or 20)
        return {"main": export.field_csv(field) if fmt == "csv" else export.field_json(field)}

    if cmd == "attractors":
        search = replicator.search_fixed_points(params, spec, o["seed_resolution"], o["tol"])
        if search.nonconvergent:
            print(f"note: {len(search.nonconvergent)} Newton seeds did not converge", file=sys.stderr)
        pts = search.points
        return {"main": export.fixed_points_csv(pts) if fmt == "csv" else export.fixed_points_json(pts)}

    if cmd == "basins":
        rep = analysis.basin_map(params, spec, o["resolution"], o["dynamics"], _moran_config(cfg))
        return {"main": export.basin_csv(rep) if fmt == "csv" else export.basin_json(rep)}

    if cmd == "threshold":
        rep = analysis.edge_threshold(params, spec, o["method"], _moran_config(cfg))
        return {"main": export.thresholds_csv([rep]) if fmt == "csv" else export.thresholds_jsonl([rep])}

    if cmd == "sweep":
        specs = [spec_from_dict(d) for d in o["perceptions"]]
        reps = analysis.threshold_sweep(params, specs, _moran_config(cfg), o["method"], threads)
        return {"main": export.thresholds_csv(reps) if fmt == "csv" else export.thresholds_jsonl(reps)}

    if cmd == "simulate":
        mc = _moran_config(cfg)
        path = moran.simulate(o["start"], params, spec, mc, o["steps"], make_rng(mc.seed))
        return {"main": export.trajectory_csv(path) if fmt == "csv" else export.trajectory_json(path)}

    if cmd == "stationary":
        mc = _moran_config(cfg)
        P = moran.transition_matrix(params, spec, mc)
        states = moran.count_states(mc.z_pop)
        pi = moran.stationary_distribution(P)
        out = {"main": export.stationary_csv(states, pi) if fmt == "csv" else export.stationary_json(states, pi)}
        if o.get("matrix_out"):
            out[o["matrix_out"]] = export.matrix_csv(states, P) if fmt == "csv" else export.matrix_json(states, P)
        return out

    if cmd == "render":
        if o.get("dynamics") == "moran":
            field = moran.drift_field(params, spec, _moran_config(cfg), o["resolution"], threads)
            points = []  # no rest-point analysis for the stochastic process
        else:
            field = replicator.gradient_field(params, spec, o["resolution"])
            points = replicator.find_fixed_points(params, spec)
        return {"main": simplex_svg(field, points, title=format_perception(cfg.spec))}

    raise ParameterError(f"unknown command {cmd!r}", "command")


def _write(dest: str, text: str):
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            _write(args.out, cfg.to_json() + "\n")
            return 0
        if cfg.command == "render" and args.out == "-":
            raise ParameterError("render needs --out FILE.svg", "out")
        if cfg.command in ("stationary",) and cfg.params.mu == 0:
            raise ParameterError("the stationary distribution needs mu > 0", "mu")
        if cfg.command in ("attractors",) and is_stochastic(cfg.spec):
            raise ParameterError("attractors needs a deterministic perception", "perception")
        outputs = execute(cfg, args.threads)
        _write(args.out, outputs.pop("main"))
        for dest, text in outputs.items():
            _write(dest, text)
    except (ParameterError, ValueError, OSError, StationaryConvergenceError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def run_cli(argv: Sequence[str]) -> int:
    return main(list(argv))


if __name__ == "__main__":
    sys.exit(main())
