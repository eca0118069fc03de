"""Bulk search machinery: small-graph enumeration, weight and list
sampling, and campaigns that evaluate bounds over many instances and
persist the results.

Campaigns are regression oracles for the proved bounds (any violation is
an implementation bug) and falsification searches for the conjectured
ones (any exact violation is a first-class result, serialized with its
full instance so it can be re-checked independently).
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bounds import (
    BOUND_NAMES,
    BoundReport,
    Verdict,
    edge_restriction_bound,
    independent_set_edge_bound,
    independent_set_regular_bound,
    list_edge_restriction_bound,
    list_vertex_restriction_bound,
    cover_family_report,
    vertex_restriction_bound,
)
from .counting import (
    DEFAULT_BUDGET,
    BudgetError,
    CoverFamilyPair,
    ListAssignment,
    parse_lists,
)
from .graphs import (
    Graph,
    GraphError,
    bipartition,
    certify_biregular,
    is_connected,
    parse_graph,
)
from .util import derive_seed, dump_json, parallel_map
from .values import Backend
from .weights import WeightSystem, make_hardcore, parse_weights

ENUMERATION_CEILINGS = {"all": 10, "bipartite": 10, "biregular": 12}
_BATCH_CANONICAL_MAX = 6  # vectorized min-over-permutations cutoff


class EnumerationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Canonical forms and isomorphism-deduplicated enumeration


def canonical_form(g: Graph) -> tuple:
    """A complete isomorphism invariant: the minimum edge tuple over all
    labelings reachable by individualization-refinement.

    Refinement splits cells by neighbor counts per cell; when it stalls,
    every vertex of the first non-singleton cell is individualized in
    turn and all branches are explored, so the minimum is taken over a
    label set that every isomorphic copy reproduces.
    """
    n = g.n
    best: list[tuple] = []

    def refine(cells: list[tuple]) -> list[tuple]:
        while True:
            index = {}
            for ci, cell in enumerate(cells):
                for v in cell:
                    index[v] = ci
            new_cells = []
            changed = False
            for cell in cells:
                if len(cell) == 1:
                    new_cells.append(cell)
                    continue
                sig = {}
                for v in cell:
                    counts = [0] * len(cells)
                    for u in g.neighbors(v):
                        counts[index[u]] += 1
                    sig.setdefault(tuple(counts), []).append(v)
                if len(sig) == 1:
                    new_cells.append(cell)
                else:
                    changed = True
                    for key in sorted(sig):
                        new_cells.append(tuple(sorted(sig[key])))
            cells = new_cells
            if not changed:
                return cells

    def descend(cells: list[tuple]) -> None:
        cells = refine(cells)
        target = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            order = [v for cell in cells for v in cell]
            rank = {v: i for i, v in enumerate(order)}
            edges = tuple(
                sorted(
                    (min(rank[u], rank[v]), max(rank[u], rank[v])) for u, v in g.edges
                )
            )
            if not best or edges < best[0]:
                best[:] = [edges]
            return
        cell = cells[target]
        for v in cell:
            rest = tuple(u for u in cell if u != v)
            branched = cells[:target] + [(v,), rest] + cells[target + 1 :]
            descend(branched)

    descend([tuple(range(n))])
    return (n, best[0])


def are_isomorphic(g1: Graph, g2: Graph) -> bool:
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return False
    return canonical_form(g1) == canonical_form(g2)


def _edge_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _canonical_masks_batch(n: int, masks: np.ndarray) -> np.ndarray:
    """Vectorized canonical bitmask: elementwise minimum of the edge
    bitmask over all n! vertex permutations.  Practical for n <= 6."""
    pairs = _edge_pairs(n)
    index = {p: k for k, p in enumerate(pairs)}
    best = None
    masks = masks.astype(np.int64)
    for perm in itertools.permutations(range(n)):
        out = np.zeros_like(masks)
        for e, (i, j) in enumerate(pairs):
            pi, pj = perm[i], perm[j]
            target = index[(pi, pj) if pi < pj else (pj, pi)]
            out |= ((masks >> e) & 1) << target
        best = out if best is None else np.minimum(best, out)
    return best


def _graph_from_mask(n: int, mask: int) -> Graph:
    pairs = _edge_pairs(n)
    return Graph(n, (pairs[e] for e in range(len(pairs)) if (mask >> e) & 1))


def _enumerate_general(n: int, bipartite_only: bool, connected_only: bool):
    if n < 2:
        return
    num_pairs = n * (n - 1) // 2
    if n <= _BATCH_CANONICAL_MAX:
        masks = np.arange(1, 1 << num_pairs, dtype=np.int64)
        canon = _canonical_masks_batch(n, masks)
        unique = np.unique(canon)
        for mask in unique.tolist():
            g = _graph_from_mask(n, mask)
            if connected_only and not is_connected(g):
                continue
            if bipartite_only:
                try:
                    bipartition(g)
                except GraphError:
                    continue
            yield g
    else:
        seen = set()
        for mask in range(1, 1 << num_pairs):
            g = _graph_from_mask(n, mask)
            if connected_only and not is_connected(g):
                continue
            if bipartite_only:
                try:
                    bipartition(g)
                except GraphError:
                    continue
            key = canonical_form(g)
            if key in seen:
                continue
            seen.add(key)
            yield g


def _biregular_labeled(n_e: int, n_o: int, a: int, b: int):
    """Labeled (a,b)-biregular bipartite graphs: degree-a side 0..n_e-1,
    degree-b side n_e..n_e+n_o-1.  Neighborhood sequences are forced
    non-decreasing to cut degree-b-side permutation symmetry."""
    combos = list(itertools.combinations(range(n_e), b))

    def extend(chosen: list[int], degrees: list[int], start: int):
        if len(chosen) == n_o:
            edges = []
            for o_idx, combo_idx in enumerate(chosen):
                for e_vtx in combos[combo_idx]:
                    edges.append((e_vtx, n_e + o_idx))
            yield Graph(n_e + n_o, edges)
            return
        slots_left = n_o - len(chosen) - 1  # after placing the next combo
        for ci in range(start, len(combos)):
            combo = combos[ci]
            if any(degrees[v] >= a for v in combo):
                continue
            for v in combo:
                degrees[v] += 1
            # every remaining deficit must be fillable one unit per slot
            if all(a - d <= slots_left for d in degrees):
                chosen.append(ci)
                yield from extend(chosen, degrees, ci)
                chosen.pop()
            for v in combo:
                degrees[v] -= 1

    yield from extend([], [0] * n_e, 0)


def _enumerate_biregular(n_max, connected_only, a_pin, b_pin, max_degree):
    if a_pin is not None and b_pin is not None and a_pin < b_pin:
        a_pin, b_pin = b_pin, a_pin  # orientation-free pin
    for n in range(2, n_max + 1):
        degree_cap = max_degree if max_degree is not None else n - 1
        for a in range(1, degree_cap + 1):
            for b in range(1, a + 1):
                if a_pin is not None and (a, b) != (a_pin, b_pin):
                    continue
                if (b * n) % (a + b) or (a * n) % (a + b):
                    continue
                n_e = b * n // (a + b)
                n_o = a * n // (a + b)
                if n_e < 1 or n_o < 1 or b > n_e or a > n_o:
                    continue
                seen = set()
                for g in _biregular_labeled(n_e, n_o, a, b):
                    if connected_only and not is_connected(g):
                        continue
                    key = canonical_form(g)
                    if key in seen:
                        continue
                    seen.add(key)
                    yield g


def enumerate_graphs(
    n_max: int,
    mode: str = "all",
    connected_only: bool = False,
    a: int | None = None,
    b: int | None = None,
    max_degree: int | None = None,
):
    """Stream graphs with at least one edge, up to n_max vertices, each
    isomorphism class in the mode at least once, in deterministic order.

    Modes: ``all`` (every graph), ``bipartite``, ``biregular`` (optionally
    pinned to one (a,b) pair or capped by max_degree).  Deduplication is
    exact here, but callers must tolerate duplicates by contract.  Cost
    for ``all``/``bipartite`` grows as 2^(n choose 2); n <= 6 is fast,
    n = 7 takes minutes, and the ceiling rejects n beyond {all: 10,
    biregular: 12}.
    """
    if n_max < 0:
        raise EnumerationError(f"n_max must be >= 0, got {n_max}")
    ceiling = ENUMERATION_CEILINGS.get(mode)
    if ceiling is None:
        raise EnumerationError(f"unknown enumeration mode {mode!r}")
    if n_max > ceiling:
        raise EnumerationError(f"n_max {n_max} exceeds the {mode} ceiling {ceiling}")
    if mode in ("all", "bipartite"):
        for n in range(2, n_max + 1):
            yield from _enumerate_general(n, mode == "bipartite", connected_only)
    else:
        yield from _enumerate_biregular(n_max, connected_only, a, b, max_degree)


# ---------------------------------------------------------------------------
# Instance sampling


def draw_rational(rng: random.Random, cap: int) -> tuple[int, int]:
    """One weight draw: numerator and denominator independently uniform
    on 1..cap."""
    return rng.randint(1, cap), rng.randint(1, cap)


def _draw_value(rng: random.Random, cap: int, allow_zero: bool) -> Fraction:
    p, q = draw_rational(rng, cap)
    value = Fraction(p, q)
    if allow_zero and rng.random() < 0.125:
        value = Fraction(0)
    return value


WEIGHT_STYLES = ("general", "uniform_edge", "hardcore")


def sample_weights(
    g: Graph,
    m: int,
    seed: int,
    cap: int = 16,
    allow_zero: bool = False,
    style: str = "general",
) -> WeightSystem:
    """Random rational weight system, deterministic given the seed.

    Styles: ``general`` draws every vertex and edge entry independently;
    ``uniform_edge`` draws one edge table shared by all edges (the shape
    the per-edge restriction bounds require); ``hardcore`` draws only
    per-vertex activities into the two-spin hard-constraint system.
    """
    if style not in WEIGHT_STYLES:
        raise ValueError(f"unknown weight style {style!r}")
    rng = random.Random(seed)
    if style == "hardcore":
        lam = {v: _draw_value(rng, cap, allow_zero) for v in g.vertices()}
        return make_hardcore(g, lam)
    vertex = {}
    for v in g.vertices():
        for i in range(1, m + 1):
            vertex[(v, i)] = _draw_value(rng, cap, allow_zero)
    edge = {}
    if style == "uniform_edge":
        table = {
            (i, j): _draw_value(rng, cap, allow_zero)
            for i in range(1, m + 1)
            for j in range(i, m + 1)
        }
        for u, v in g.edges:
            for (i, j), val in table.items():
                edge[(u, v, i, j)] = val
    else:
        for u, v in g.edges:
            for i in range(1, m + 1):
                for j in range(i, m + 1):
                    edge[(u, v, i, j)] = _draw_value(rng, cap, allow_zero)
    return WeightSystem.build(g, m, vertex, edge)


def sample_target_graph(h_max: int, seed: int) -> Graph:
    """Random target graph on 2..h_max vertices with at least one edge."""
    rng = random.Random(seed)
    n = rng.randint(2, max(h_max, 2))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
    if not edges:
        edges = [(0, 1)]
    return Graph(n, edges)


def sample_list_assignment(g: Graph, h: Graph, seed: int) -> ListAssignment:
    """Random lists; each target is allowed with probability 3/4, so empty
    lists occur but most instances stay nontrivial."""
    rng = random.Random(seed)
    rows = []
    for _ in range(g.n):
        rows.append([y for y in range(h.n) if rng.random() < 0.75])
    return ListAssignment(g.n, rows)


# ---------------------------------------------------------------------------
# Campaigns


@dataclass
class CampaignConfig:
    """Configuration of one bulk evaluation run.

    Read from a key-value file (``key = value`` per line, # comments):
    source (biregular|general|files), files (semicolon-separated paths),
    n_max, a, b, max_degree, connected (true/false), m, cap, allow_zero,
    weights (general|uniform_edge|hardcore), bounds (comma-separated
    names), trials (samples per graph), seed, h_max, budget, out.
    """

    source: str = "biregular"
    files: tuple = ()
    n_max: int = 6
    a: int | None = None
    b: int | None = None
    max_degree: int | None = None
    connected: bool = True
    m: int = 2
    cap: int = 16
    allow_zero: bool = False
    weights: str = "general"
    bounds: tuple = ("thm3",)
    trials: int = 10
    seed: int = 0
    h_max: int = 3
    budget: int = DEFAULT_BUDGET
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in self.bounds:
            if name not in BOUND_NAMES:
                raise ValueError(f"unknown bound name {name!r}")
        if self.weights not in WEIGHT_STYLES:
            raise ValueError(f"unknown weight style {self.weights!r}")
        if self.source not in ("biregular", "general", "bipartite", "files"):
            raise ValueError(f"unknown graph source {self.source!r}")

    def to_json_dict(self) -> dict:
        doc = {}
        for f in fields(self):
            value = getattr(self, f.name)
            doc[f.name] = list(value) if isinstance(value, tuple) else value
        return doc


def parse_campaign_config(text: str) -> CampaignConfig:
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    kwargs: dict = {}
    ints = {"n_max", "a", "b", "max_degree", "m", "cap", "trials", "seed", "h_max", "budget"}
    bools = {"connected", "allow_zero"}
    for key, value in raw.items():
        if key in ints:
            kwargs[key] = int(value)
        elif key in bools:
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key == "bounds":
            kwargs[key] = tuple(x.strip() for x in value.split(",") if x.strip())
        elif key == "files":
            kwargs[key] = tuple(x.strip() for x in value.split(";") if x.strip())
        elif key in ("source", "weights", "out"):
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    return CampaignConfig(**kwargs)


@dataclass
class BoundAggregate:
    instances: int = 0
    holds: int = 0
    inconclusive: int = 0
    equalities: int = 0
    errors: int = 0
    error_samples: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    min_log_slack: float | None = None
    min_witness: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "instances": self.instances,
            "holds": self.holds,
            "inconclusive": self.inconclusive,
            "equalities": self.equalities,
            "errors": self.errors,
            "error_samples": self.error_samples,
            "violations": self.violations,
            "min_log_slack": self.min_log_slack,
            "min_witness": self.min_witness,
        }


@dataclass
class CampaignReport:
    config: CampaignConfig
    graphs: int
    per_bound: dict
    runtime_seconds: float

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "graphs": self.graphs,
            "bounds": {name: agg.to_json_dict() for name, agg in self.per_bound.items()},
            "runtime_seconds": self.runtime_seconds,
        }

    def summary_text(self) -> str:
        lines = [
            f"campaign over {self.graphs} graphs, {self.config.trials} samples each",
            f"{'bound':>8} {'instances':>10} {'holds':>7} {'incon':>6} {'viol':>5} "
            f"{'errors':>7} {'equal':>6} {'min log-slack':>14}",
        ]
        for name, agg in self.per_bound.items():
            slack = "-" if agg.min_log_slack is None else f"{agg.min_log_slack:.6g}"
            lines.append(
                f"{name:>8} {agg.instances:>10} {agg.holds:>7} {agg.inconclusive:>6} "
                f"{len(agg.violations):>5} {agg.errors:>7} {agg.equalities:>6} {slack:>14}"
            )
        return "\n".join(lines) + "\n"


def _witness_payload(report: BoundReport, g: Graph, extras: dict) -> dict:
    doc = {
        "bound": report.bound,
        "verdict": report.verdict.value,
        "backend": report.backend.value,
        "log_slack": report.log_slack,
        "lhs_log": report.lhs_log,
        "rhs_log": report.rhs_log,
        "graph": g.to_text(),
    }
    doc.update(extras)
    return doc


def recheck_witness(payload: dict, budget: int = DEFAULT_BUDGET) -> BoundReport:
    """Re-evaluate a serialized witness instance standalone, exactly."""
    g = parse_graph(payload["graph"])
    name = payload["bound"]
    if name in ("thm3", "conj1"):
        w = parse_weights(payload["weights"], g)
        fn = vertex_restriction_bound if name == "thm3" else edge_restriction_bound
        return fn(g, w, budget)
    if name in ("thm4", "conj2", "thm5"):
        h = parse_graph(payload["target"])
        lists = parse_lists(payload["lists"], g, h)
        if name == "thm4":
            return list_vertex_restriction_bound(g, h, lists, budget)
        if name == "conj2":
            return list_edge_restriction_bound(g, h, lists, budget)
        cert = certify_biregular(g, bipartition(g))
        fam = CoverFamilyPair(
            pairs=tuple(
                (frozenset(cert.neighbor_order(v)), frozenset({v}))
                for v in sorted(cert.odd)
            ),
            t1=cert.a,
            t2=1,
        )
        return cover_family_report(g, h, lists, fam, budget)
    if name == "ind":
        return independent_set_regular_bound(g, budget)
    if name == "indconj":
        return independent_set_edge_bound(g, budget)
    raise ValueError(f"unknown bound name {name!r}")


def _canonical_cover_family(g: Graph) -> CoverFamilyPair:
    """The neighborhoods-and-singletons family: A's are the closed-in
    neighborhoods of degree-b vertices, B's the singletons, t1 = a, t2 = 1."""
    cert = certify_biregular(g, bipartition(g))
    return CoverFamilyPair(
        pairs=tuple(
            (frozenset(cert.neighbor_order(v)), frozenset({v})) for v in sorted(cert.odd)
        ),
        t1=cert.a,
        t2=1,
    )


def _eval_weight_bound(fn, g: Graph, w: WeightSystem, budget: int):
    """EXACT when the budget allows; otherwise the log backend, with one
    exact re-check attempt whenever the log verdict is INCONCLUSIVE
    (rational weights always permit the re-check in principle)."""
    try:
        return fn(g, w, budget)
    except BudgetError:
        pass
    report = fn(g, w.to_log(), budget)
    if report.verdict is Verdict.INCONCLUSIVE:
        try:
            return fn(g, w, 10 * budget)
        except BudgetError:
            pass
    return report


def _evaluate_instance(cfg: CampaignConfig, g: Graph, gi: int, si: int):
    """Evaluate every configured bound on one (graph, sample) work item.

    Returns a list of (bound, outcome) where outcome is either a
    (report, extras) pair or an error string; bounds with no sampled
    component run only at sample index 0.
    """
    results = []

    def attempt(name, thunk, extras):
        try:
            results.append((name, (thunk(), extras)))
        except (GraphError, ValueError) as exc:
            results.append((name, str(exc)))

    weight_bounds = [n for n in cfg.bounds if n in ("thm3", "conj1")]
    hom_bounds = [n for n in cfg.bounds if n in ("thm4", "conj2", "thm5")]
    static_bounds = [n for n in cfg.bounds if n in ("ind", "indconj")]

    if weight_bounds:
        w = sample_weights(
            g,
            cfg.m,
            derive_seed(cfg.seed, "weights", gi, si),
            cap=cfg.cap,
            allow_zero=cfg.allow_zero,
            style=cfg.weights,
        )
        extras = {"weights": w.to_text()}
        for name in weight_bounds:
            fn = vertex_restriction_bound if name == "thm3" else edge_restriction_bound
            attempt(name, lambda fn=fn: _eval_weight_bound(fn, g, w, cfg.budget), extras)

    if hom_bounds:
        h = sample_target_graph(cfg.h_max, derive_seed(cfg.seed, "target", gi, si))
        lists = sample_list_assignment(g, h, derive_seed(cfg.seed, "lists", gi, si))
        extras = {"target": h.to_text(), "lists": lists.to_text()}
        for name in hom_bounds:
            if name == "thm4":
                thunk = lambda: list_vertex_restriction_bound(g, h, lists, cfg.budget)
            elif name == "conj2":
                thunk = lambda: list_edge_restriction_bound(g, h, lists, cfg.budget)
            else:
                thunk = lambda: cover_family_report(
                    g, h, lists, _canonical_cover_family(g), cfg.budget
                )
            attempt(name, thunk, extras)

    if si == 0:
        for name in static_bounds:
            fn = (
                independent_set_regular_bound
                if name == "ind"
                else independent_set_edge_bound
            )
            attempt(name, lambda fn=fn: fn(g, cfg.budget), {})
    return results


def run_campaign(cfg: CampaignConfig, threads: int = 1) -> CampaignReport:
    """Evaluate the configured bounds over every (graph, sample) pair.

    Per-instance errors are recorded, never fatal.  Conjecture violations
    do not abort anything: each one is persisted with its full instance
    files so it can be independently re-verified.
    """
    start = time.monotonic()
    if cfg.source == "files":
        graphs = [parse_graph(Path(p).read_text()) for p in cfg.files]
    elif cfg.source == "biregular":
        graphs = list(
            enumerate_graphs(
                cfg.n_max,
                "biregular",
                connected_only=cfg.connected,
                a=cfg.a,
                b=cfg.b,
                max_degree=cfg.max_degree,
            )
        )
    else:
        mode = "bipartite" if cfg.source == "bipartite" else "all"
        graphs = list(enumerate_graphs(cfg.n_max, mode, connected_only=cfg.connected))

    work = [(gi, si) for gi in range(len(graphs)) for si in range(cfg.trials)]
    outcomes = parallel_map(
        lambda item: _evaluate_instance(cfg, graphs[item[0]], item[0], item[1]),
        work,
        threads,
    )

    per_bound: dict[str, BoundAggregate] = {name: BoundAggregate() for name in cfg.bounds}
    for (gi, si), results in zip(work, outcomes):
        for name, outcome in results:
            agg = per_bound[name]
            agg.instances += 1
            if isinstance(outcome, str):
                agg.errors += 1
                if len(agg.error_samples) < 5:
                    agg.error_samples.append(
                        {"graph_index": gi, "sample_index": si, "error": outcome}
                    )
                continue
            report, extras = outcome
            payload = _witness_payload(report, graphs[gi], extras)
            payload["graph_index"] = gi
            payload["sample_index"] = si
            if report.verdict is Verdict.HOLDS:
                agg.holds += 1
            elif report.verdict is Verdict.INCONCLUSIVE:
                agg.inconclusive += 1
            else:
                agg.violations.append(payload)
            if report.backend is Backend.EXACT and report.log_slack == 0.0:
                agg.equalities += 1
            slack = report.log_slack
            if slack != float("inf") and (
                agg.min_log_slack is None or slack < agg.min_log_slack
            ):
                agg.min_log_slack = slack
                agg.min_witness = payload

    report = CampaignReport(
        config=cfg,
        graphs=len(graphs),
        per_bound=per_bound,
        runtime_seconds=time.monotonic() - start,
    )
    if cfg.out:
        _write_campaign_outputs(report)
    return report


def _write_campaign_outputs(report: CampaignReport) -> None:
    out_dir = Path(report.config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dump_json(report.to_json_dict()))
    (out_dir / "summary.txt").write_text(report.summary_text())
    violations = [
        (name, i, payload)
        for name, agg in report.per_bound.items()
        for i, payload in enumerate(agg.violations)
    ]
    if violations:
        vdir = out_dir / "violations"
        vdir.mkdir(exist_ok=True)
        for name, i, payload in violations:
            stem = f"{name}_{i:03d}"
            (vdir / f"{stem}.json").write_text(dump_json(payload))
            (vdir / f"{stem}.graph").write_text(payload["graph"])
            if "weights" in payload:
                (vdir / f"{stem}.weights").write_text(payload["weights"])
            if "target" in payload:
                (vdir / f"{stem}.target").write_text(payload["target"])
            if "lists" in payload:
                (vdir / f"{stem}.lists").write_text(payload["lists"])
