"""Independent brute-force oracles used to cross-check the package.

Nothing here imports package internals beyond reading a multiplication
table, so agreement is evidence rather than a tautology.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd


def table(g) -> list[list[int]]:
    return [list(map(int, row)) for row in g.mul_table]


def closure(t: list[list[int]], gens) -> frozenset[int]:
    elems = {0}
    frontier = [0]
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = t[x][s]
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(elems)


def element_order(t: list[list[int]], x: int) -> int:
    k, y = 1, x
    while y != 0:
        y = t[y][x]
        k += 1
    return k


def all_subgroups(t: list[list[int]]) -> set[frozenset[int]]:
    """Every subgroup, by closing all subsets of size at most three (enough for |G| <= 24 here)."""
    n = len(t)
    subs = {frozenset([0])}
    for r in (1, 2, 3):
        for gens in combinations(range(1, n), r):
            subs.add(closure(t, gens))
    return subs


def left_cosets(t: list[list[int]], h: frozenset[int]) -> set[frozenset[int]]:
    return {frozenset(t[x][y] for y in h) for x in range(len(t))}


def proper_cosets(t: list[list[int]]) -> list[frozenset[int]]:
    n = len(t)
    out = set()
    for h in all_subgroups(t):
        if len(h) < n:
            out |= left_cosets(t, h)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def chains_by_length(elements: list[frozenset[int]]) -> list[int]:
    """f-vector of the order complex of a family of sets under strict inclusion."""
    idx = sorted(range(len(elements)), key=lambda i: len(elements[i]))
    counts: list[int] = []
    ending = {}
    for i in idx:
        ending[i] = [1]
        for j in idx:
            if len(elements[j]) >= len(elements[i]):
                break
            if elements[j] < elements[i]:
                for d, c in enumerate(ending[j]):
                    while len(ending[i]) <= d + 1:
                        ending[i].append(0)
                    ending[i][d + 1] += c
    for i in idx:
        for d, c in enumerate(ending[i]):
            while len(counts) <= d:
                counts.append(0)
            counts[d] += c
    return counts


def reduced_euler(f: list[int]) -> int:
    return -1 + sum((-1) ** d * c for d, c in enumerate(f))


def mobius_brute(subgroups: list[frozenset[int]], top: frozenset[int]) -> dict[frozenset[int], int]:
    """μ(H, G) from the defining recursion Σ_{H ≤ K ≤ G} μ(K) = 0."""
    mu = {top: 1}
    for h in sorted(subgroups, key=len, reverse=True):
        if h == top:
            continue
        mu[h] = -sum(mu[k] for k in mu if h < k)
    return mu


def prob_zeta_brute(t: list[list[int]], s: int) -> Fraction:
    subs = list(all_subgroups(t))
    top = frozenset(range(len(t)))
    mu = mobius_brute(subs, top)
    n = len(t)
    return sum((Fraction(mu[h]) / Fraction(n // len(h)) ** s for h in subs), Fraction(0))


def rank_q(rows: list[list[int]]) -> int:
    """Rank over the rationals by fraction Gaussian elimination."""
    m = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def betti_q(simplices: list[list[tuple[int, ...]]]) -> list[int]:
    """Reduced rational Betti numbers of a complex given layer by layer."""
    dims = [len(layer) for layer in simplices]
    index = [{s: i for i, s in enumerate(layer)} for layer in simplices]
    ranks = []
    for d in range(len(simplices)):
        if d == 0:
            ranks.append(1 if dims[0] else 0)
            continue
        rows = [[0] * dims[d] for _ in range(dims[d - 1])]
        for j, s in enumerate(simplices[d]):
            for i in range(len(s)):
                rows[index[d - 1][s[:i] + s[i + 1:]]][j] = (-1) ** i
        ranks.append(rank_q(rows) if rows and dims[d] else 0)
    ranks.append(0)
    return [dims[d] - ranks[d] - ranks[d + 1] for d in range(len(simplices))]


def integer_matrix_product(a, b):
    return [[sum(x * y for x, y in zip(r, c)) for c in zip(*b)] for r in a]


def invariant_factors_by_minors(m: list[list[int]]) -> list[int]:
    """d_k = g_k / g_{k-1} where g_k is the gcd of all k×k minors (tiny matrices only)."""
    from itertools import permutations

    def det(sub):
        n = len(sub)
        total = 0
        for perm in permutations(range(n)):
            sign = 1
            for i in range(n):
                for j in range(i + 1, n):
                    if perm[i] > perm[j]:
                        sign = -sign
            prod = 1
            for i in range(n):
                prod *= sub[i][perm[i]]
            total += sign * prod
        return total

    rows, cols = len(m), len(m[0])
    gs = [1]
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in combinations(range(rows), k):
            for cs in combinations(range(cols), k):
                g = gcd(g, det([[m[r][c] for c in cs] for r in rs]))
        if g == 0:
            break
        gs.append(g)
    return [gs[k] // gs[k - 1] for k in range(1, len(gs))]
