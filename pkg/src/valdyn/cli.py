"""valdyn command line: local/infinity growth reports, resolutions, graphs,
potentials and raw growth sequences.

JSON reports go to stdout (and to --json PATH), a short summary to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .blowup import (
    INFINITY,
    LOCAL,
    BlowupError,
    BlowupSeq,
    GroundFieldError,
    dual_graph,
    export_graph,
    graph_to_json,
    log_resolution,
)
from .dynamics import (
    DEFAULT_DEGREE_CAP,
    DEFAULT_STEPS_INFINITY,
    DEFAULT_STEPS_LOCAL,
    DynamicsError,
    analyze_infinity,
    analyze_local,
    sequences,
)
from .numbers import approx
from .poly import Ideal, PolyMap, parse_poly
from .potential import PotentialError, laplacian_log_ideal, log_ideal_fn, measure_summary

EXIT_OK, EXIT_USAGE, EXIT_LIMITATION = 0, 1, 2
SUBCOMMANDS = ("local", "infinity", "resolve", "graph", "potential", "sequence")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="valdyn", description="Valuative-tree invariants of plane polynomial maps.")
    sub = p.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--json", metavar="PATH", help="also write the JSON report to PATH")
        sp.add_argument("--dot", metavar="PATH", help="write the dual graph in DOT format to PATH")

    for name, steps in (("local", DEFAULT_STEPS_LOCAL), ("infinity", DEFAULT_STEPS_INFINITY)):
        sp = sub.add_parser(name, help=f"growth report for a map ({name})")
        sp.add_argument("--map", required=True, help='map text "f1; f2"')
        sp.add_argument("--steps", type=int, default=steps, metavar="N")
        sp.add_argument("--degree-cap", type=int, metavar="M")
        sp.add_argument("--parallel", action="store_true", help="compute iterates in parallel")
        common(sp)

    sp = sub.add_parser("resolve", help="log resolution of an ideal")
    sp.add_argument("--ideal", required=True, help='generators "g1, g2, ..."')
    sp.add_argument("--at-infinity", action="store_true", help="resolve at infinity instead of the origin")
    common(sp)

    sp = sub.add_parser("graph", help="dual graph of a resolution or of a replayed blowup sequence")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--ideal")
    src.add_argument("--replay", metavar="PATH", help="blowup sequence JSON to replay")
    sp.add_argument("--at-infinity", action="store_true")
    sp.add_argument("--marked-curves", metavar="LIST", help='curves "h1, h2, ..." to mark')
    common(sp)

    sp = sub.add_parser("potential", help="Laplacian of log|a| on the log resolution graph")
    sp.add_argument("--ideal", required=True)
    sp.add_argument("--at-infinity", action="store_true")
    common(sp)

    sp = sub.add_parser("sequence", help="c(f^n) locally or deg f^n at infinity")
    sp.add_argument("--map", required=True)
    sp.add_argument("--steps", type=int, default=DEFAULT_STEPS_LOCAL, metavar="N")
    sp.add_argument("--at-infinity", action="store_true")
    sp.add_argument("--degree-cap", type=int, metavar="M")
    sp.add_argument("--parallel", action="store_true")
    sp.add_argument("--json", metavar="PATH")
    return p


def degree_cap(flag, environ=os.environ) -> int:
    """--degree-cap wins, then VALDYN_DEGREE_CAP, then the default."""
    if flag is not None:
        cap = flag
    elif environ.get("VALDYN_DEGREE_CAP"):
        try:
            cap = int(environ["VALDYN_DEGREE_CAP"])
        except ValueError:
            raise UsageError("VALDYN_DEGREE_CAP must be an integer") from None
    else:
        cap = DEFAULT_DEGREE_CAP
    if cap < 1:
        raise UsageError("degree cap must be positive")
    return cap


def _mode(args) -> str:
    return INFINITY if getattr(args, "at_infinity", False) else LOCAL


def _curves(text) -> list:
    if not text:
        return []
    return [parse_poly(t) for t in text.split(",") if t.strip()]


def _run_report(args, analyze):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    f = PolyMap.parse(args.map)
    rep = analyze(f, args.steps, degree_cap(args.degree_cap), args.parallel)
    g = rep.growth
    summary = [f"case {rep.case}", f"growth {g.value} (a={g.a}, b={g.b}) ~ {approx(g.value)}",
               f"sequence {list(rep.sequence.values)}", f"fixed point {rep.point.label(rep.graph.seq)}",
               f"bounds verified: {rep.bounds_ok}"]
    return rep.to_json(), rep.graph, summary


def _run_resolve(args):
    res = log_resolution(Ideal.parse(args.ideal), _mode(args))
    graph = dual_graph(res.seq)
    out = {"ideal": args.ideal, **res.to_json(), "graph": graph_to_json(graph)}
    summary = [f"{len(res.seq.steps)} blowups", f"Z = {list(res.Z)}"]
    return out, graph, summary


def _run_graph(args):
    if args.replay:
        with open(args.replay, encoding="utf-8") as fh:
            obj = json.load(fh)
        seq = BlowupSeq.from_json(obj.get("sequence", obj) if "steps" not in obj else obj)
    else:
        seq = log_resolution(Ideal.parse(args.ideal), _mode(args)).seq
    graph = dual_graph(seq, _curves(args.marked_curves))
    summary = [f"{len(graph.vertices)} vertices, {len(graph.edges)} edges, {len(graph.curves)} curve ends"]
    return graph_to_json(graph), graph, summary


def _run_potential(args):
    ideal = Ideal.parse(args.ideal)
    rho = laplacian_log_ideal(ideal, _mode(args))
    out = {"ideal": args.ideal, "laplacian": measure_summary(rho),
           "log_abs": log_ideal_fn(ideal, rho.graph).to_json(), "graph": graph_to_json(rho.graph)}
    return out, rho.graph, [f"total mass {rho.total_mass()}"]


def _run_sequence(args):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    f = PolyMap.parse(args.map)
    s = sequences(f, args.steps, _mode(args), degree_cap(args.degree_cap), args.parallel)
    return s.to_json(), None, [f"{s.mode} sequence {list(s.values)}" + ("" if s.complete else " (degree cap hit)")]


RUNNERS = {
    "local": lambda a: _run_report(a, analyze_local),
    "infinity": lambda a: _run_report(a, analyze_infinity),
    "resolve": _run_resolve,
    "graph": _run_graph,
    "potential": _run_potential,
    "sequence": _run_sequence,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        out, graph, summary = RUNNERS[args.command](args)
    except UsageError as exc:
        print(f"valdyn: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except GroundFieldError as exc:
        print(f"valdyn: {exc}", file=stderr)
        return EXIT_LIMITATION
    except (DynamicsError, BlowupError, PotentialError) as exc:
        print(f"valdyn: cannot complete the analysis: {exc}", file=stderr)
        return EXIT_LIMITATION
    except (ValueError, OSError) as exc:
        print(f"valdyn: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    text = json.dumps(out, indent=2) + "\n"
    stdout.write(text)
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    if getattr(args, "dot", None) and graph is not None:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export_graph(graph, "dot"))
    for line in summary:
        print(line, file=stderr)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
