"""Exact evaluation of configuration weights, partition functions,
list-homomorphism counts, and partial-map extension counts.

Exact-backend kernels clear denominators once per weight system and run
on machine-assisted big-integer arithmetic, then divide the single scale
factor back out; results are exact rationals.  Log-backend kernels
accumulate with streaming log-sum-exp.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .graphs import Bipartition, Graph, NotBipartiteError, bipartition
from .util import sha256_text
from .values import NEG_INF, Backend, NonNegValue, ValueSum
from .weights import KabInstance, WeightSystem

DEFAULT_BUDGET = 10 ** 8

SpinConfig = tuple  # tuple[int, ...] with 1-based spins


class BudgetError(ValueError):
    def __init__(self, cost, budget):
        super().__init__(
            f"enumeration cost {cost} exceeds budget {budget}; "
            "raise --budget, use the log backend, or shrink the instance"
        )


def all_spin_configs(n: int, m: int) -> Iterator[SpinConfig]:
    """All m^n spin assignments, lexicographic over the vertex-id vector."""
    return itertools.product(range(1, m + 1), repeat=n)


def weight_of(g: Graph, w: WeightSystem, cfg: SpinConfig) -> NonNegValue:
    """Product of vertex weights and edge weights for one configuration."""
    if len(cfg) != g.n:
        raise ValueError(f"configuration has {len(cfg)} entries for {g.n} vertices")
    for s in cfg:
        if not (1 <= s <= w.m):
            raise ValueError(f"spin {s} out of range 1..{w.m}")
    acc = NonNegValue.one(w.backend)
    for v in g.vertices():
        acc = acc * w.vertex_weight(v, cfg[v])
    for u, v in g.edges:
        acc = acc * w.edge_weight(u, v, cfg[u], cfg[v])
    return acc


# Integer kernel: scale every vertex row and edge table to integers once,
# run the enumeration on plain ints, divide the scale back out at the end.


@lru_cache(maxsize=256)
def _int_tables(w: WeightSystem):
    scale = 1
    vw = []
    for v in range(w.n):
        row = [x.fraction for x in w.vertex_row(v)]
        c = math.lcm(*(f.denominator for f in row))
        vw.append([int(f * c) for f in row])
        scale *= c
    ew = {}
    for e in w.edges():
        table = [[x.fraction for x in row] for row in w.edge_table(*e)]
        c = math.lcm(*(f.denominator for row in table for f in row))
        ew[e] = [[int(f * c) for f in row] for row in table]
        scale *= c
    return vw, ew, scale


def _log_tables(w: WeightSystem):
    vw = [[x.log() for x in w.vertex_row(v)] for v in range(w.n)]
    ew = {e: [[x.log() for x in row] for row in w.edge_table(*e)] for e in w.edges()}
    return vw, ew


def _brute_exact(g: Graph, w: WeightSystem) -> Fraction:
    vw, ew, scale = _int_tables(w)
    m = w.m
    edges = [(u, v, ew[(u, v)]) for u, v in g.edges]
    total = 0
    for cfg in itertools.product(range(m), repeat=g.n):
        acc = 1
        for v in range(g.n):
            acc *= vw[v][cfg[v]]
        if acc:
            for u, v, t in edges:
                acc *= t[cfg[u]][cfg[v]]
                if not acc:
                    break
        total += acc
    return Fraction(total, scale)


def _brute_log(g: Graph, w: WeightSystem) -> float:
    vw, ew = _log_tables(w)
    m = w.m
    edges = [(u, v, ew[(u, v)]) for u, v in g.edges]
    acc = ValueSum(Backend.LOG)
    for cfg in itertools.product(range(m), repeat=g.n):
        logw = 0.0
        for v in range(g.n):
            logw += vw[v][cfg[v]]
        for u, v, t in edges:
            logw += t[cfg[u]][cfg[v]]
        acc.add_log(logw)
    return acc.total().log()


def _class_split(g: Graph, bp: Bipartition) -> tuple[list[int], list[int]]:
    even, odd = sorted(bp.even), sorted(bp.odd)
    return (even, odd) if len(even) <= len(odd) else (odd, even)


def _class_sum_exact(g: Graph, w: WeightSystem, side_s: Sequence[int], side_t: Sequence[int]) -> Fraction:
    vw, ew, scale = _int_tables(w)
    m = w.m
    pos = {v: k for k, v in enumerate(side_s)}
    t_constraints = []
    for t in side_t:
        t_constraints.append(
            (vw[t], [(pos[u], ew[(min(t, u), max(t, u))]) for u in g.neighbors(t)])
        )
    total = 0
    for cfg in itertools.product(range(m), repeat=len(side_s)):
        base = 1
        for k, v in enumerate(side_s):
            base *= vw[v][cfg[k]]
        if not base:
            continue
        acc = base
        for row, nbrs in t_constraints:
            tot = 0
            for i in range(m):
                term = row[i]
                for k, table in nbrs:
                    term *= table[i][cfg[k]]
                    if not term:
                        break
                tot += term
            acc *= tot
            if not acc:
                break
        total += acc
    return Fraction(total, scale)


def _class_sum_log(g: Graph, w: WeightSystem, side_s: Sequence[int], side_t: Sequence[int]) -> float:
    vw, ew = _log_tables(w)
    m = w.m
    pos = {v: k for k, v in enumerate(side_s)}
    t_constraints = []
    for t in side_t:
        t_constraints.append(
            (vw[t], [(pos[u], ew[(min(t, u), max(t, u))]) for u in g.neighbors(t)])
        )
    outer = ValueSum(Backend.LOG)
    for cfg in itertools.product(range(m), repeat=len(side_s)):
        logw = 0.0
        for k, v in enumerate(side_s):
            logw += vw[v][cfg[k]]
        for row, nbrs in t_constraints:
            # log-sum-exp over the m spins of this vertex
            best = NEG_INF
            terms = []
            for i in range(m):
                term = row[i]
                for k, table in nbrs:
                    term += table[i][cfg[k]]
                terms.append(term)
                if term > best:
                    best = term
            if best == NEG_INF:
                logw = NEG_INF
                break
            logw += best + math.log(sum(math.exp(t - best) for t in terms))
        outer.add_log(logw)
    return outer.total().log()


def partition_brute(g: Graph, w: WeightSystem, budget: int = DEFAULT_BUDGET) -> NonNegValue:
    """Sum of configuration weights over all m^n assignments, by direct
    enumeration in lexicographic order."""
    cost = w.m ** g.n
    if cost > budget:
        raise BudgetError(cost, budget)
    if w.backend is Backend.EXACT:
        return NonNegValue.exact(_brute_exact(g, w))
    return NonNegValue.from_log(_brute_log(g, w))


def partition_function(g: Graph, w: WeightSystem, budget: int = DEFAULT_BUDGET) -> NonNegValue:
    """Exact partition function, via the cheapest available exact route.

    Bipartite graphs enumerate only the smaller color class and sum the
    other class out vertex by vertex; everything else falls back to
    direct enumeration.  Always equal to ``partition_brute``.
    """
    try:
        bp = bipartition(g)
    except NotBipartiteError:
        return partition_brute(g, w, budget)
    side_s, side_t = _class_split(g, bp)
    cost = w.m ** len(side_s)
    if cost > budget:
        raise BudgetError(cost, budget)
    if w.backend is Backend.EXACT:
        return NonNegValue.exact(_class_sum_exact(g, w, side_s, side_t))
    return NonNegValue.from_log(_class_sum_log(g, w, side_s, side_t))


def _count_vectors(total: int, m: int) -> Iterator[tuple[int, ...]]:
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _count_vectors(total - first, m - 1):
            yield (first,) + rest


def _kab_uniform_exact(inst: KabInstance, side_s: Sequence[int], side_t: Sequence[int]) -> Fraction:
    """Exact K_{a,b} partition function exploiting one shared edge table.

    The product factor of each side_t vertex depends on a side_s
    assignment only through its spin-count vector, so assignments are
    grouped by that vector: a DP accumulates the total vertex weight of
    each group, and per-group factors use precomputed powers.
    """
    w = inst.weights
    vw, ew, scale = _int_tables(w)
    m = w.m
    table = ew[inst.graph.edges[0]]
    ns = len(side_s)
    pow_tab = [[[table[i][s] ** k for k in range(ns + 1)] for s in range(m)] for i in range(m)]

    groups: dict[tuple[int, ...], int] = {(0,) * m: 1}
    for v in side_s:
        row = vw[v]
        new: dict[tuple[int, ...], int] = {}
        for counts, acc in groups.items():
            for i in range(m):
                if not row[i]:
                    continue
                bumped = list(counts)
                bumped[i] += 1
                key = tuple(bumped)
                new[key] = new.get(key, 0) + acc * row[i]
        groups = new

    total = 0
    for counts, acc in groups.items():
        for t in side_t:
            row = vw[t]
            tot = 0
            for i in range(m):
                term = row[i]
                if not term:
                    continue
                for s in range(m):
                    if counts[s]:
                        term *= pow_tab[i][s][counts[s]]
                tot += term
            acc *= tot
            if not acc:
                break
        total += acc
    return Fraction(total, scale)


def partition_kab(inst: KabInstance, budget: int = DEFAULT_BUDGET) -> NonNegValue:
    """Partition function of a labeled K_{a,b} instance.

    Enumerates spins on the smaller side and multiplies, per vertex of
    the larger side, the sum over its spins of the vertex weight times
    its incident edge-weight products.  Equal to ``partition_brute`` on
    the same instance, at cost m^min(a,b) instead of m^(a+b).
    """
    w = inst.weights
    small = min(inst.a, inst.b)
    cost = w.m ** small
    if cost > budget:
        raise BudgetError(cost, budget)
    if inst.a <= inst.b:
        side_s, side_t = list(inst.z_ids), list(inst.w_ids)
    else:
        side_s, side_t = list(inst.w_ids), list(inst.z_ids)
    if w.backend is Backend.EXACT:
        if len(side_s) >= 2 and w.uniform_edge_table() is not None:
            return NonNegValue.exact(_kab_uniform_exact(inst, side_s, side_t))
        return NonNegValue.exact(_class_sum_exact(inst.graph, w, side_s, side_t))
    return NonNegValue.from_log(_class_sum_log(inst.graph, w, side_s, side_t))


def independent_set_count(g: Graph, budget: int = DEFAULT_BUDGET) -> int:
    """Number of independent sets, via the hard-constraint two-spin system."""
    from .weights import make_hardcore

    z = partition_function(g, make_hardcore(g, 1), budget)
    frac = z.fraction
    assert frac.denominator == 1
    return frac.numerator


class ListAssignment:
    """Per-vertex allowed-target sets for list homomorphism counting."""

    __slots__ = ("n", "lists")

    def __init__(self, n: int, lists: Mapping[int, Iterable[int]] | Sequence[Iterable[int]]):
        rows: list[tuple[int, ...]] = []
        if isinstance(lists, Mapping):
            for v in range(n):
                if v not in lists:
                    raise ValueError(f"list missing for vertex {v}")
                rows.append(tuple(sorted(set(lists[v]))))
        else:
            if len(lists) != n:
                raise ValueError(f"expected {n} lists, got {len(lists)}")
            rows = [tuple(sorted(set(row))) for row in lists]
        self.n = n
        self.lists = tuple(rows)

    @classmethod
    def full(cls, g: Graph, h: Graph) -> "ListAssignment":
        return cls(g.n, [range(h.n)] * g.n)

    def __getitem__(self, v: int) -> tuple[int, ...]:
        return self.lists[v]

    def replace(self, v: int, targets: Iterable[int]) -> "ListAssignment":
        rows = list(self.lists)
        rows[v] = tuple(sorted(set(targets)))
        return ListAssignment(self.n, rows)

    def validate_against(self, h: Graph) -> None:
        for v, row in enumerate(self.lists):
            for y in row:
                if not (0 <= y < h.n):
                    raise ValueError(f"list of vertex {v} mentions unknown target {y}")

    def to_text(self) -> str:
        lines = []
        for v, row in enumerate(self.lists):
            lines.append("l " + " ".join([str(v)] + [str(y) for y in row]))
        return "\n".join(lines) + "\n"

    def sha(self) -> str:
        return sha256_text(self.to_text())

    def __eq__(self, other):
        if not isinstance(other, ListAssignment):
            return NotImplemented
        return self.lists == other.lists

    def __hash__(self):
        return hash(self.lists)

    def __repr__(self):
        return f"ListAssignment(n={self.n})"


def parse_lists(text: str, g: Graph, h: Graph) -> ListAssignment:
    """Parse `l <v> <targets...>` lines; unmentioned vertices get full lists.

    A bare `l <v>` line assigns the empty list explicitly.
    """
    rows: dict[int, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "l" or len(parts) < 2:
            raise ValueError(f"line {lineno}: expected 'l <v> <targets...>'")
        try:
            ids = [int(x) for x in parts[1:]]
        except ValueError:
            raise ValueError(f"line {lineno}: ids must be integers") from None
        v, targets = ids[0], ids[1:]
        if not (0 <= v < g.n):
            raise ValueError(f"line {lineno}: vertex {v} out of range")
        if v in rows:
            raise ValueError(f"line {lineno}: duplicate list for vertex {v}")
        for y in targets:
            if not (0 <= y < h.n):
                raise ValueError(f"line {lineno}: target {y} out of range")
        rows[v] = tuple(targets)
    full = range(h.n)
    return ListAssignment(g.n, {v: rows.get(v, full) for v in range(g.n)})


def count_list_homs(g: Graph, h: Graph, lists: ListAssignment, budget: int = DEFAULT_BUDGET) -> int:
    """Number of maps f with f(v) in L(v) mapping every edge of g onto an
    edge of h.

    Backtracking chooses the vertex with the smallest current candidate
    set and filters neighbor domains on every assignment; worst case is
    still |V(h)|^n, which is what the budget guards.
    """
    if lists.n != g.n:
        raise ValueError("list assignment length does not match the graph")
    lists.validate_against(h)
    cost = max(h.n, 1) ** g.n
    if cost > budget:
        raise BudgetError(cost, budget)
    hadj = [frozenset(h.neighbors(x)) for x in range(h.n)]
    domains = {v: list(lists[v]) for v in range(g.n)}

    def recurse(domains: dict, remaining: frozenset) -> int:
        if not remaining:
            return 1
        v = min(remaining, key=lambda u: (len(domains[u]), u))
        rest = remaining - {v}
        nbrs = [u for u in g.neighbors(v) if u in rest]
        total = 0
        for y in domains[v]:
            pruned = dict(domains)
            ok = True
            for u in nbrs:
                newdom = [z for z in pruned[u] if z in hadj[y]]
                if not newdom:
                    ok = False
                    break
                pruned[u] = newdom
            if ok:
                total += recurse(pruned, rest)
        return total

    return recurse(domains, frozenset(range(g.n)))


def count_extensions(
    g: Graph,
    h: Graph,
    lists: ListAssignment,
    A: Iterable[int],
    B: Iterable[int],
    x: Mapping[int, int],
) -> int:
    """Number of list-respecting maps on B compatible with the partial map
    x on A across A-B edges.

    Only edges between A and B constrain anything, so the count is a
    product of per-vertex candidate counts; B vertices with no neighbor
    in A contribute a free factor |L(v)|.
    """
    a_set = sorted(set(A))
    b_set = sorted(set(B))
    for u in a_set:
        if u not in x:
            raise ValueError(f"partial map is undefined on vertex {u}")
        if x[u] not in lists[u]:
            raise ValueError(f"partial map value {x[u]} violates the list of vertex {u}")
    hadj = [frozenset(h.neighbors(y)) for y in range(h.n)]
    total = 1
    a_lookup = set(a_set)
    for v in b_set:
        anchored = [u for u in g.neighbors(v) if u in a_lookup]
        if not anchored:
            total *= len(lists[v])
        else:
            count = 0
            for y in lists[v]:
                if all(y in hadj[x[u]] for u in anchored):
                    count += 1
            total *= count
        if total == 0:
            return 0
    return total


@dataclass(frozen=True)
class CoverFamilyPair:
    """Indexed pairs (A_i, B_i) of subsets of the two bipartition classes
    with cover multiplicities t1 (over A's) and t2 (over B's)."""

    pairs: tuple[tuple[frozenset, frozenset], ...]
    t1: int
    t2: int

    def __post_init__(self):
        if self.t1 < 1 or self.t2 < 1:
            raise ValueError("cover multiplicities must be >= 1")

    def validate(self, bp: Bipartition) -> None:
        for idx, (a_i, b_i) in enumerate(self.pairs):
            if not a_i <= bp.even:
                bad = sorted(a_i - bp.even)[0]
                raise ValueError(f"pair {idx}: vertex {bad} is not in the even class")
            if not b_i <= bp.odd:
                bad = sorted(b_i - bp.odd)[0]
                raise ValueError(f"pair {idx}: vertex {bad} is not in the odd class")
        for v in sorted(bp.even):
            hits = sum(1 for a_i, _ in self.pairs if v in a_i)
            if hits < self.t1:
                raise ValueError(
                    f"vertex {v} is covered by {hits} A-sets, fewer than t1={self.t1}"
                )
        for v in sorted(bp.odd):
            hits = sum(1 for _, b_i in self.pairs if v in b_i)
            if hits < self.t2:
                raise ValueError(
                    f"vertex {v} is covered by {hits} B-sets, fewer than t2={self.t2}"
                )


def parse_cover_family(text: str) -> CoverFamilyPair:
    """Parse a families file: a `t <t1> <t2>` header, then alternating
    `A <ids...>` / `B <ids...>` lines, one pair per A/B couple."""
    t1 = t2 = None
    pairs: list[tuple[frozenset, frozenset]] = []
    pending_a: frozenset | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "t":
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 't <t1> <t2>'")
            t1, t2 = int(parts[1]), int(parts[2])
        elif parts[0] == "A":
            if pending_a is not None:
                raise ValueError(f"line {lineno}: A line without a matching B line")
            pending_a = frozenset(int(p) for p in parts[1:])
        elif parts[0] == "B":
            if pending_a is None:
                raise ValueError(f"line {lineno}: B line without a preceding A line")
            pairs.append((pending_a, frozenset(int(p) for p in parts[1:])))
            pending_a = None
        else:
            raise ValueError(f"line {lineno}: unknown directive {parts[0]!r}")
    if t1 is None or t2 is None:
        raise ValueError("missing 't <t1> <t2>' header")
    if pending_a is not None:
        raise ValueError("trailing A line without a matching B line")
    return CoverFamilyPair(pairs=tuple(pairs), t1=t1, t2=t2)
