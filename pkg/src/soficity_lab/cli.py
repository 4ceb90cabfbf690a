"""Command-line entry point. Every command prints JSON on stdout."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, scenario
from .errors import SoficityLabError


def _run_op(op: str, params: dict) -> dict:
    ctx = scenario.Context(int(params.get("seed", 0)), scenario.random.Random(int(params.get("seed", 0))))
    payload, _ = scenario.OPS[op](params, ctx)
    return payload


def _read_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _cmd_modmat(args):
    return _run_op("modmat.order", {"d": args.d, "p": args.p, "n": args.n})


def _cmd_quotient(args):
    return _run_op("quotient.frattini", {"d": args.d, "p": args.p, "n": args.n, "trials": args.trials, "seed": args.seed})


def _cmd_actions(args):
    params = {"d": args.d, "p": args.p}
    if args.what == "density":
        return _run_op("actions.density", {**params, "a": args.a, "b": args.b})
    if args.csv:
        from . import actions
        part = actions.orbit_partition(actions.projective_action(args.d, args.p), args.family)
        Path(args.csv).write_text(scenario.orbit_csv(part))
    return _run_op("actions.orbits", {**params, "family": args.family})


def _cmd_schreier(args):
    if args.what == "cover":
        return _run_op("schreier.cover", {"d": args.d, "p": args.p, "trials": args.trials, "seed": args.seed})
    params: dict = {"family": args.family, "d": args.d, "p": args.p}
    if args.cycle:
        params = {"kind": "cycle", "n": args.cycle}
    elif args.edges:
        lines = [ln.split() for ln in Path(args.edges).read_text().splitlines() if ln.strip()]
        n = int(lines[0][0])
        params = {"n": n, "edges": [(int(e[0]), int(e[1]), e[2] if len(e) > 2 else "") for e in lines[1:]]}
    if args.mode:
        params["mode"] = args.mode
    if args.dot:
        g = scenario._graph_of(params)
        Path(args.dot).write_text(g.to_dot())
    return _run_op("schreier.expansion", params)


def _cmd_sofic(args):
    return _run_op("sofic.score", {"path": args.input})


def _cmd_obstruct(args):
    return _run_op("obstruction.instance", {"instance": _read_json(args.instance)})


def _cmd_pingpong(args):
    system = _read_json(args.system)
    if args.what == "check":
        params = {k: v for k, v in system.items() if k in ("matrices", "balls", "radius", "power")}
        return _run_op("pingpong.check", {**params, "grid": args.grid, "margin": args.margin})
    params = {k: v for k, v in system.items() if k in ("matrices", "power", "names")}
    return _run_op("pingpong.free", {**params, "maxLen": args.max_len})


def _cmd_present(args):
    return _run_op("present.hnn2", _read_json(args.input))


def _cmd_scenario(args):
    if args.what == "list":
        return {"bundled": scenario.bundled_scenarios()}
    report = scenario.run_scenario(args.config, seed=args.seed)
    out = args.out or report.config.get("output")
    if out:
        scenario.emit_formats(report, out, dot=args.dot, csv_tables=args.csv)
    return report.to_json()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="soficity-lab", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modmat", help="matrix group orders")
    p.add_argument("what", choices=["order"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(func=_cmd_modmat)

    p = sub.add_parser("quotient", help="lifting probe for generating sets")
    p.add_argument("what", choices=["frattini"])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_quotient)

    p = sub.add_parser("actions", help="projective actions: density and orbits")
    p.add_argument("what", choices=["density", "orbits"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--a", default="full")
    p.add_argument("--b", default="psl2block")
    p.add_argument("--family", default="psl2block")
    p.add_argument("--csv", help="also write the orbit-size table to this path")
    p.set_defaults(func=_cmd_actions)

    p = sub.add_parser("schreier", help="edge expansion and covering checks")
    p.add_argument("what", choices=["expansion", "cover"])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--family", default="full")
    p.add_argument("--cycle", type=int, help="use the cycle graph on this many vertices")
    p.add_argument("--edges", help="edge list file: first line n, then 'u v label'")
    p.add_argument("--mode", choices=["exact", "spectral"])
    p.add_argument("--dot", help="also write the graph in DOT format to this path")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_schreier)

    p = sub.add_parser("sofic", help="defects of a finite model")
    p.add_argument("what", choices=["score"])
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_sofic)

    p = sub.add_parser("obstruct", help="bad-edge count on one instance")
    p.add_argument("what", choices=["run"])
    p.add_argument("--instance", required=True)
    p.set_defaults(func=_cmd_obstruct)

    p = sub.add_parser("pingpong", help="ping-pong certificates and relation search")
    p.add_argument("what", choices=["check", "free"])
    p.add_argument("--system", required=True)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--max-len", type=int, default=8)
    p.set_defaults(func=_cmd_pingpong)

    p = sub.add_parser("present", help="HNN-mod-2 relators")
    p.add_argument("what", choices=["hnn2"])
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_present)

    p = sub.add_parser("scenario", help="run or list scenarios")
    p.add_argument("what", choices=["run", "list"])
    p.add_argument("config", nargs="?", help="scenario file or bundled scenario name")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for report.json and extra formats")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=_cmd_scenario)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "scenario" and args.what == "run" and not args.config:
        ap.error("scenario run needs a config")
    try:
        out = args.func(args)
    except (SoficityLabError, OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
