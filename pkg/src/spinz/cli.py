"""Command-line front door.

Subcommands: compute, bound, listhom, ising, blowup, search.  Every
report is a single JSON document on standard output (or at --out).
Exit status contract: 0 success / bound HOLDS, 2 input or precondition
error, 3 bound VIOLATED, 4 bound INCONCLUSIVE.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bounds as bounds_mod
from .blowup import concentration_experiment
from .counting import (
    DEFAULT_BUDGET,
    BudgetError,
    ListAssignment,
    count_list_homs,
    parse_cover_family,
    parse_lists,
    partition_function,
)
from .graphs import Graph, GraphError, parse_graph
from .harness import parse_campaign_config, run_campaign
from .util import dump_json
from .values import Backend
from .weights import WeightError, WeightSystem, parse_weights

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATED = 3
EXIT_INCONCLUSIVE = 4

_VERDICT_EXITS = {
    "HOLDS": EXIT_OK,
    "VIOLATED": EXIT_VIOLATED,
    "INCONCLUSIVE": EXIT_INCONCLUSIVE,
}


class CliError(Exception):
    pass


def _read_file(path: str, kind: str) -> str:
    p = Path(path)
    if not p.exists():
        raise CliError(f"{kind} file not found: {path}")
    return p.read_text()


def _load_graph(path: str) -> Graph:
    return parse_graph(_read_file(path, "graph"))


def _load_weights(path: str, g: Graph) -> WeightSystem:
    return parse_weights(_read_file(path, "weights"), g)


def _emit(doc: dict, out: str | None) -> None:
    text = dump_json(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _default_threads() -> int:
    return os.cpu_count() or 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["auto", "exact", "log"], default="auto",
                        help="numeric backend; auto prefers exact and falls back to log")
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="enumeration budget (default 10^8)")
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker threads for independent subtasks")
    parser.add_argument("--seed", type=int, default=0, help="random seed where applicable")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinz",
        description="Exact partition functions of weighted spin systems and their "
        "complete-bipartite upper bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="partition function of a graph + weight system")
    p.add_argument("graph")
    p.add_argument("weights")
    _add_common(p)

    p = sub.add_parser("bound", help="evaluate one named bound")
    p.add_argument("name", choices=list(bounds_mod.BOUND_NAMES))
    p.add_argument("graph")
    p.add_argument("--weights", help="weight file (thm3, conj1)")
    p.add_argument("--target", help="target graph file (thm4, thm5, conj2)")
    p.add_argument("--lists", help="list file; defaults to full lists")
    p.add_argument("--families", help="cover family file (thm5)")
    _add_common(p)

    p = sub.add_parser("listhom", help="count list homomorphisms")
    p.add_argument("graph")
    p.add_argument("target")
    p.add_argument("--lists")
    _add_common(p)

    p = sub.add_parser("ising", help="free-energy sandwich check at zero field")
    p.add_argument("graph")
    p.add_argument("--beta", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("blowup", help="block blow-up concentration experiment")
    p.add_argument("graph")
    p.add_argument("weights")
    p.add_argument("--scale", type=int, required=True, help="block scale C")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--spins", help="comma-separated configuration; default all spin 1")
    p.add_argument("--samples-out", help="write raw counts here, one per line")
    _add_common(p)

    p = sub.add_parser("search", help="run a campaign from a config file")
    p.add_argument("config")
    _add_common(p)

    return parser


def _cmd_compute(args) -> int:
    g = _load_graph(args.graph)
    w = _load_weights(args.weights, g)
    backend = args.backend
    if backend == "log":
        w = w.to_log()
    try:
        z = partition_function(g, w, args.budget)
    except BudgetError:
        if backend != "auto":
            raise
        backend = "log"
        z = partition_function(g, w.to_log(), args.budget)
    doc = {
        "command": "compute",
        "backend": z.backend.value,
        "n": g.n,
        "spins": w.m,
        "log_z": z.log(),
    }
    if z.backend is Backend.EXACT:
        frac = z.fraction
        doc["z"] = {"num": str(frac.numerator), "den": str(frac.denominator)}
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_bound(args) -> int:
    g = _load_graph(args.graph)
    name = args.name
    budget, threads = args.budget, args.threads
    if name in ("thm3", "conj1"):
        if not args.weights:
            raise CliError(f"bound {name} needs --weights")
        w = _load_weights(args.weights, g)
        if args.backend == "log":
            w = w.to_log()
        fn = (
            bounds_mod.vertex_restriction_bound
            if name == "thm3"
            else bounds_mod.edge_restriction_bound
        )
        report = fn(g, w, budget, threads)
    elif name in ("thm4", "conj2", "thm5"):
        if not args.target:
            raise CliError(f"bound {name} needs --target")
        h = _load_graph(args.target)
        lists = (
            parse_lists(_read_file(args.lists, "lists"), g, h)
            if args.lists
            else ListAssignment.full(g, h)
        )
        if name == "thm4":
            report = bounds_mod.list_vertex_restriction_bound(g, h, lists, budget, threads)
        elif name == "conj2":
            report = bounds_mod.list_edge_restriction_bound(g, h, lists, budget, threads)
        else:
            if not args.families:
                raise CliError("bound thm5 needs --families")
            fam = parse_cover_family(_read_file(args.families, "families"))
            report = bounds_mod.cover_family_report(g, h, lists, fam, budget)
    elif name == "ind":
        report = bounds_mod.independent_set_regular_bound(g, budget)
    else:
        report = bounds_mod.independent_set_edge_bound(g, budget)
    _emit(report.to_json_dict(), args.out)
    return _VERDICT_EXITS[report.verdict.value]


def _cmd_listhom(args) -> int:
    g = _load_graph(args.graph)
    h = _load_graph(args.target)
    lists = (
        parse_lists(_read_file(args.lists, "lists"), g, h)
        if args.lists
        else ListAssignment.full(g, h)
    )
    count = count_list_homs(g, h, lists, args.budget)
    _emit({"command": "listhom", "count": count}, args.out)
    return EXIT_OK


def _cmd_ising(args) -> int:
    g = _load_graph(args.graph)
    report = bounds_mod.ising_free_energy_check(g, args.beta, args.budget)
    _emit(report.to_json_dict(), args.out)
    return EXIT_OK


def _cmd_blowup(args) -> int:
    g = _load_graph(args.graph)
    w = _load_weights(args.weights, g)
    if args.spins:
        cfg = tuple(int(x) for x in args.spins.split(","))
    else:
        cfg = (1,) * g.n
    stats = concentration_experiment(
        g, w, cfg, args.scale, args.trials, args.seed, args.threads, args.budget
    )
    if args.samples_out:
        Path(args.samples_out).write_text(
            "".join(f"{x}\n" for x in stats.samples)
        )
    _emit(stats.to_json_dict(samples_path=args.samples_out), args.out)
    return EXIT_OK


def _cmd_search(args) -> int:
    cfg = parse_campaign_config(_read_file(args.config, "config"))
    report = run_campaign(cfg, threads=args.threads)
    _emit(report.to_json_dict(), args.out)
    return EXIT_OK


_HANDLERS = {
    "compute": _cmd_compute,
    "bound": _cmd_bound,
    "listhom": _cmd_listhom,
    "ising": _cmd_ising,
    "blowup": _cmd_blowup,
    "search": _cmd_search,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (CliError, GraphError, WeightError, BudgetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
