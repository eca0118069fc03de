"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (raw Fractions, full enumeration,
no shared kernels with the package) so the tests check two independent
routes to the same number.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def brute_partition(n, edges, vertex_tables, edge_tables):
    """Sum over all spin maps of the product of vertex and edge weights.

    vertex_tables[v][i] and edge_tables[(u,v)][i][j] are Fractions with
    0-based spins; edge keys are canonical (u < v).
    """
    m = len(vertex_tables[0])
    total = Fraction(0)
    for cfg in itertools.product(range(m), repeat=n):
        acc = Fraction(1)
        for v in range(n):
            acc *= vertex_tables[v][cfg[v]]
        for (u, v) in edges:
            acc *= edge_tables[(u, v)][cfg[u]][cfg[v]]
        total += acc
    return total


def independent_sets(n, edges):
    """All independent sets, by subset enumeration."""
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        if any(bits[u] and bits[v] for (u, v) in edges):
            continue
        out.append(frozenset(v for v in range(n) if bits[v]))
    return out


def weighted_independent_set_sum(n, edges, activities):
    total = Fraction(0)
    for ind in independent_sets(n, edges):
        acc = Fraction(1)
        for v in ind:
            acc *= activities[v]
        total += acc
    return total


def ising_cycle_z(k, beta):
    """Transfer-matrix partition function of the zero-field two-spin model
    on the k-cycle: tr(T^k) with T = [[e^-b, e^b], [e^b, e^-b]]."""
    lam1 = math.exp(-beta) + math.exp(beta)
    lam2 = math.exp(-beta) - math.exp(beta)
    return lam1 ** k + lam2 ** k


def ising_brute_log_z(n, edges, beta, h):
    """Direct enumeration of the two-spin model in plain floats."""
    total = 0.0
    for sigma in itertools.product((1, -1), repeat=n):
        energy = -beta * sum(sigma[u] * sigma[v] for (u, v) in edges)
        energy += h * sum(sigma)
        total += math.exp(energy)
    return math.log(total)


def brute_list_homs(g_n, g_edges, h_n, h_edges, lists):
    """Count list homomorphisms by enumerating all maps."""
    h_set = {(u, v) for (u, v) in h_edges} | {(v, u) for (u, v) in h_edges}
    count = 0
    for f in itertools.product(*(lists[v] for v in range(g_n))):
        if all((f[u], f[v]) in h_set for (u, v) in g_edges):
            count += 1
    return count


def weighted_two_sided_hom_sum(g_n, g_edges, even, odd, h_n, h_edges, lam, mu):
    """Sum over homomorphisms into h of prod_{v even} lam[f(v)] *
    prod_{v odd} mu[f(v)]."""
    h_set = {(u, v) for (u, v) in h_edges} | {(v, u) for (u, v) in h_edges}
    total = Fraction(0)
    for f in itertools.product(range(h_n), repeat=g_n):
        if not all((f[u], f[v]) in h_set for (u, v) in g_edges):
            continue
        acc = Fraction(1)
        for v in range(g_n):
            acc *= lam[f[v]] if v in even else mu[f[v]]
        total += acc
    return total


def isomorphic_brute(n1, edges1, n2, edges2):
    """Isomorphism test by trying all vertex bijections; fine for n <= 7."""
    if n1 != n2 or len(edges1) != len(edges2):
        return False
    e2 = {tuple(sorted(e)) for e in edges2}
    for perm in itertools.permutations(range(n1)):
        if all(tuple(sorted((perm[u], perm[v]))) in e2 for (u, v) in edges1):
            return True
    return False


def block_homs_brute(g_n, g_edges, blocks, keep):
    """Count maps choosing one host vertex per base vertex from its block,
    with every base edge surviving; `keep[(u,v)][x][y]` indexes host
    vertices inside the full vertex segments.

    blocks[v] is the range of in-segment indices allowed at v.
    """
    count = 0
    for choice in itertools.product(*(blocks[v] for v in range(g_n))):
        ok = True
        for (u, v) in g_edges:
            if not keep[(u, v)][choice[u]][choice[v]]:
                ok = False
                break
        if ok:
            count += 1
    return count
