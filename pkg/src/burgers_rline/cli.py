"""Command-line front end.

    burgers-rline solve --nu 1 --vertices 401 --t-final 0.05 --snapshots 0.05 --out run1
    burgers-rline analytic --nu 0.1 --times 1,50 --points 0,5
    burgers-rline compare --nu 0.01 --vertices 801 --times 0.5 --points -1,0,0.5
    burgers-rline asymptote --nu 1 --t-final 1000 --p 1,2,inf
    burgers-rline errors --nu 0.1 --vertices 801 --t-final 1 --window 0,1

Exit codes: 0 ok, 2 configuration error, 3 solver non-convergence,
4 oracle tolerance failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import commands, io
from .config import SimulationConfig
from .errors import BurgersError, ConfigError

log = logging.getLogger("burgers_rline")

# flag -> (config field, parser)
_CONFIG_FLAGS = {
    "nu": ("nu", float),
    "vertices": ("n_vertices", int),
    "dt": ("dt", float),
    "theta": ("theta", float),
    "t_final": ("t_final", float),
    "l0": ("l0", float),
    "snapshots": ("snapshot_times", None),
    "cadence": ("norm_cadence_steps", int),
    "probes": ("probe_points", None),
    "out": ("output_dir", str),
}


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--nu", type=float)
    p.add_argument("--vertices", type=int, help="odd number of mesh vertices")
    p.add_argument("--dt", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--l0", type=float, help="initial semidiameter (default: automatic)")
    p.add_argument("--snapshots", type=float_list, help="comma-separated snapshot times")
    p.add_argument("--cadence", type=int, help="norm sampling cadence in steps")
    p.add_argument("--probes", type=float_list, help="comma-separated physical x")
    p.add_argument("--out", help="output directory")


def config_from_args(args) -> SimulationConfig:
    data = SimulationConfig.load(args.config).to_dict() if args.config else {}
    for flag, (name, _) in _CONFIG_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[name] = val
    return SimulationConfig.from_dict(data)


_LIST_FLAGS = ("--snapshots", "--probes", "--times", "--points", "--window", "--p")


def _join_list_values(argv):
    """Turn ``--points -1,0`` into ``--points=-1,0`` so argparse does not read -1 as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="burgers-rline", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the FEM solver and write snapshots and norms")
    _add_config_flags(p)

    p = sub.add_parser("analytic", help="tabulate the exact solution")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--times", type=float_list, required=True)
    p.add_argument("--points", type=float_list, required=True)
    p.add_argument("--digits", type=int, default=5, help="significant digits targeted by the quadrature")
    p.add_argument("--output", help="also write the CSV to this file")

    p = sub.add_parser("compare", help="FEM vs exact values at given times and points")
    _add_config_flags(p)
    p.add_argument("--times", type=float_list)
    p.add_argument("--points", type=float_list)
    p.add_argument("--digits", type=int, default=5)

    p = sub.add_parser("asymptote", help="large-time constants gamma_p, numerical vs exact")
    _add_config_flags(p)
    p.add_argument("--p", type=lambda s: [v for v in s.split(",") if v], default=["1", "2", "inf"])
    p.add_argument("--delta", type=float, default=0.128)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("errors", help="maximum error norms over a time window")
    _add_config_flags(p)
    p.add_argument("--window", type=float_list, help="t0,t1 (default 0,t_final)")
    p.add_argument("--digits", type=int, default=7)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_join_list_values(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "analytic":
            sys.stdout.write(commands.cmd_analytic(args.nu, args.times, args.points, args.digits, args.output))
            return 0
        config = config_from_args(args)
        if args.command == "solve":
            arts = commands.cmd_solve(config)
            print(f"{len(arts.newton_stats)} steps, {len(arts.doubling_log)} doublings, "
                  f"final L={arts.final_state.semidiameter:g}; wrote {config.output_dir}", file=sys.stderr)
        elif args.command == "compare":
            _, text = commands.cmd_compare(config, args.times, args.points, args.digits)
            sys.stdout.write(text)
        elif args.command == "asymptote":
            _, payload = commands.cmd_asymptote(config, args.p, args.delta, args.tol)
            sys.stdout.write(io.json_text(payload))
        elif args.command == "errors":
            window = args.window
            if window is not None and len(window) != 2:
                raise ConfigError("--window takes exactly two numbers")
            if window is not None:
                config = replace(config, t_final=max(config.t_final, window[1]))
            sys.stdout.write(io.json_text(commands.cmd_errors(config, window, args.digits)))
    except BurgersError as exc:
        where = f" (t={exc.time:g})" if getattr(exc, "time", None) is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
