"""Subgroup lattice enumeration, Möbius function, zeta and counting invariants."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvariantViolation
from .grp import ElementSet, FiniteGroup, automorphism_count, closure_bits


def iter_bits(bits: int):
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def generating_set(g: FiniteGroup) -> list[int]:
    """A small (not necessarily minimal) generating set, highest orders first."""
    orders = g.element_orders
    cand = sorted(range(1, g.order), key=lambda x: (-int(orders[x]), x))
    gens: list[int] = []
    bits = 1
    full = (1 << g.order) - 1
    for x in cand:
        if bits == full:
            break
        if not bits >> x & 1:
            gens.append(x)
            bits, _ = closure_bits(g, gens)
    return gens


@dataclass
class SubgroupLattice:
    """All subgroups of a group, sorted by (order, bitmask).

    Index 0 is the trivial subgroup and the last index is the whole group.
    ``above[i]`` is a bitmask over subgroup indices of all j with
    ``subgroups[i] ⊆ subgroups[j]`` (including i itself).
    """

    group: FiniteGroup
    subgroups: list[ElementSet]
    gens: list[tuple[int, ...]]
    above: list[int]
    normal: list[bool]
    maximal: list[bool]
    conj_class: list[int]
    index_of: dict[int, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.subgroups)

    @property
    def top(self) -> int:
        return len(self.subgroups) - 1

    def leq(self, i: int, j: int) -> bool:
        return bool(self.above[i] >> j & 1)

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    @cached_property
    def below(self) -> list[int]:
        out = [0] * len(self)
        for i, up in enumerate(self.above):
            for j in iter_bits(up):
                out[j] |= 1 << i
        return out

    def order(self, i: int) -> int:
        return self.subgroups[i].size

    def find(self, bits: int) -> int:
        return self.index_of[bits]

    @cached_property
    def maximal_indices(self) -> list[int]:
        return [i for i, m in enumerate(self.maximal) if m]

    @cached_property
    def element_lists(self) -> list[list[int]]:
        return [s.elements() for s in self.subgroups]

    def signature(self, i: int) -> tuple[tuple[int, int], ...]:
        """Sorted (element order, count) pairs: an isomorphism-type fingerprint."""
        orders = self.group.element_orders
        return tuple(sorted(Counter(int(orders[x]) for x in self.element_lists[i]).items()))

    def tag(self, i: int) -> str:
        return isomorphism_tag(self.group, self.element_lists[i])

    def census(self) -> Counter:
        return Counter(self.tag(i) for i in range(len(self)))


# element-order fingerprints of a few small groups that are unique at their order
_NAMED_SIGNATURES = {
    ((1, 1), (2, 1), (4, 6)): "Q8",
    ((1, 1), (2, 3), (3, 8)): "A4",
    ((1, 1), (3, 14), (7, 6)): "C7:C3",
    ((1, 1), (2, 9), (3, 8), (4, 6)): "S4",
    ((1, 1), (2, 15), (3, 20), (5, 24)): "A5",
    ((1, 1), (2, 21), (3, 56), (4, 42), (7, 48)): "PSL2(7)",
}


def isomorphism_tag(g: FiniteGroup, elems: Sequence[int]) -> str:
    """Heuristic type label: C<n>, D<n>, V4, a few named groups, else <n>-(non)abelian."""
    n = len(elems)
    orders = [int(g.element_orders[x]) for x in elems]
    if n in orders:
        return f"C{n}"
    named = _NAMED_SIGNATURES.get(tuple(sorted(Counter(orders).items())))
    if named:
        return named
    rows = g.rows
    abelian = all(rows[a][b] == rows[b][a] for a in elems for b in elems)
    if abelian:
        if n == 4:
            return "V4"
        return f"{n}-abelian"
    half = n // 2
    if n % 2 == 0 and half in orders:
        # dihedral: a cyclic subgroup of index 2 and every element outside it an involution
        x = elems[orders.index(half)]
        bits, _ = closure_bits(g, [x])
        if all(o == 2 for y, o in zip(elems, orders) if not bits >> y & 1):
            return f"D{n}"
    return f"{n}-nonabelian"


def _conjugation_perms(g: FiniteGroup, gens: Sequence[int]) -> list[np.ndarray]:
    t = g.mul_table
    out = []
    for s in gens:
        out.append(t[t[s], g.inv[s]])  # x -> s x s^-1
    return out


def _map_bits(bits: int, perm: list[int]) -> int:
    out = 0
    for x in iter_bits(bits):
        out |= 1 << perm[x]
    return out


def enumerate_subgroups(g: FiniteGroup) -> SubgroupLattice:
    """Complete subgroup lattice by cyclic seeds and repeated joins.

    Every subgroup is generated by its cyclic subgroups, so joining each found
    subgroup with each cyclic subgroup until no new subgroup appears reaches
    every subgroup.
    """
    n = g.order
    found: dict[int, tuple[int, ...]] = {}
    cyclic: list[tuple[int, int]] = []  # (bits, generator)
    for x in range(n):
        bits, _ = closure_bits(g, [x])
        if bits not in found:
            found[bits] = (x,) if x else ()
            cyclic.append((bits, x))
    queue = list(found)
    while queue:
        nxt = []
        for hb in queue:
            hg = found[hb]
            for cb, c in cyclic:
                if cb & ~hb == 0:
                    continue
                bits, _ = closure_bits(g, hg + (c,))
                if bits not in found:
                    found[bits] = hg + (c,)
                    nxt.append(bits)
        queue = nxt
    order = sorted(found, key=lambda b: (b.bit_count(), b))
    subgroups = [ElementSet(b) for b in order]
    gens = [found[b] for b in order]
    index_of = {b: i for i, b in enumerate(order)}
    m = len(order)
    above = [0] * m
    for i, bi in enumerate(order):
        mask = 1 << i
        si = bi.bit_count()
        for j in range(i + 1, m):
            bj = order[j]
            if bi & ~bj == 0 and bj.bit_count() > si:
                mask |= 1 << j
        above[i] = mask
    maximal = [False] * m
    for i in range(m - 1):
        maximal[i] = above[i] == (1 << i) | (1 << (m - 1))
    # conjugacy classes via union-find over conjugation by group generators
    perms = [p.tolist() for p in _conjugation_perms(g, generating_set(g))]
    parent = list(range(m))

    def root(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    normal = [True] * m
    for i, b in enumerate(order):
        for perm in perms:
            j = index_of[_map_bits(b, perm)]
            if j != i:
                normal[i] = False
                ra, rb = root(i), root(j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    roots = {}
    conj_class = []
    for i in range(m):
        r = root(i)
        conj_class.append(roots.setdefault(r, len(roots)))
    return SubgroupLattice(g, subgroups, gens, above, normal, maximal, conj_class, index_of)


def verify_lattice(lat: SubgroupLattice) -> None:
    """Exhaustive consistency checks; raises InvariantViolation on failure."""
    g = lat.group
    for i, s in enumerate(lat.subgroups):
        if closure_bits(g, s.elements())[0] != s.bits:
            raise InvariantViolation(f"subgroup {i} is not closed")
    for x in range(g.order):
        if closure_bits(g, [x])[0] not in lat.index_of:
            raise InvariantViolation(f"cyclic subgroup of element {x} missing")
    subs = lat.subgroups
    for i in range(len(lat)):
        for j in range(i + 1, len(lat)):
            a, b = subs[i].bits, subs[j].bits
            if a & ~b == 0 or b & ~a == 0:
                continue
            if closure_bits(g, lat.gens[i] + lat.gens[j])[0] not in lat.index_of:
                raise InvariantViolation(f"join of subgroups {i} and {j} missing")
    if lat.order(0) != 1 or lat.order(lat.top) != g.order:
        raise InvariantViolation("lattice must run from trivial subgroup to the whole group")


def normalizer(g: FiniteGroup, h: ElementSet) -> ElementSet:
    t = g.rows
    inv = g.inv_list
    hb = h.bits
    gens = [x for x in closure_gens(g, h)]
    bits = 0
    for x in range(g.order):
        row = t[x]
        xi = inv[x]
        if all(hb >> t[row[y]][xi] & 1 for y in gens):
            bits |= 1 << x
    return ElementSet(bits)


def closure_gens(g: FiniteGroup, h: ElementSet) -> list[int]:
    """A generating subset of the subgroup ``h``."""
    gens: list[int] = []
    bits = 1
    for x in h:
        if not bits >> x & 1:
            gens.append(x)
            bits, _ = closure_bits(g, gens)
    return gens


# -- Möbius function ----------------------------------------------------------

def mobius(lat: SubgroupLattice, top: int | None = None) -> list[int]:
    """μ(H, T) for every subgroup H, with T the whole group unless given.

    Computed top-down by μ(T)=1 and μ(H) = -Σ_{H<K≤T} μ(K). Entries for
    subgroups not contained in T are 0.
    """
    if top is None:
        top = lat.top
    mu = [0] * len(lat)
    mu[top] = 1
    for i in range(top - 1, -1, -1):
        if not lat.leq(i, top):
            continue
        total = 0
        for j in iter_bits(lat.above[i] >> (i + 1)):
            k = j + i + 1
            if k <= top and lat.leq(k, top):
                total += mu[k]
        mu[i] = -total
    return mu


def open_interval_chain_counts(lat: SubgroupLattice, low: int, high: int) -> list[int]:
    """Number of chains of each size (1, 2, ...) in the open interval (low, high)."""
    members = [k for k in iter_bits(lat.above[low] & lat.below[high]) if k not in (low, high)]
    # DP: chains ending at k with given length
    ends: dict[int, list[int]] = {}
    for k in members:  # indices increase along any chain
        counts = [1]
        for j in members:
            if j >= k:
                break
            if lat.lt(j, k):
                prev = ends[j]
                for length, c in enumerate(prev):
                    if length + 1 >= len(counts):
                        counts.append(0)
                    counts[length + 1] += c
        ends[k] = counts
    total: list[int] = []
    for counts in ends.values():
        for length, c in enumerate(counts):
            if length >= len(total):
                total.append(0)
            total[length] += c
    return total


def mobius_by_euler(lat: SubgroupLattice, h: int, top: int | None = None) -> int:
    """μ(H, T) as the reduced Euler characteristic of the open interval (H, T)."""
    if top is None:
        top = lat.top
    if h == top:
        return 1
    counts = open_interval_chain_counts(lat, h, top)
    return -1 + sum((-1) ** k * c for k, c in enumerate(counts))


def prob_zeta(lat: SubgroupLattice, mu: Sequence[int], s: int) -> Fraction:
    """P(G, s) = Σ_H μ(H) / (G:H)^s as an exact rational."""
    n = lat.group.order
    total = Fraction(0)
    for i, m in enumerate(mu):
        if m:
            idx = n // lat.order(i)
            total += m * (Fraction(idx) ** (-s))
    return total


def _order_counts(lat: SubgroupLattice, i: int) -> Counter:
    orders = lat.group.element_orders
    return Counter(int(orders[x]) for x in lat.element_lists[i])


def sigma_ab(lat: SubgroupLattice, i: int, a: int, b: int) -> int:
    c = _order_counts(lat, i)
    return c[a] * c[b]


def phi_ab(lat: SubgroupLattice, a: int, b: int, top: int | None = None,
           mu: Sequence[int] | None = None) -> int:
    """Ordered pairs (α, β) with o(α)=a, o(β)=b generating the subgroup ``top``."""
    if top is None:
        top = lat.top
    if mu is None:
        mu = mobius(lat, top)
    return sum(m * sigma_ab(lat, i, a, b) for i, m in enumerate(mu) if m)


def Phi_ab(lat: SubgroupLattice, a: int, b: int, aut_order: int | None = None,
           mu: Sequence[int] | None = None) -> int:
    """φ_{a,b}(G) / |Aut(G)|; raises if the quotient is not a nonnegative integer."""
    if aut_order is None:
        aut_order = automorphism_count(lat.group)
    phi = phi_ab(lat, a, b, mu=mu)
    q = Fraction(phi, aut_order)
    if q.denominator != 1 or q < 0:
        raise InvariantViolation(f"Phi_{a},{b} = {phi}/{aut_order} is not a nonnegative integer")
    return int(q)


def phi_ab_bruteforce(g: FiniteGroup, a: int, b: int) -> int:
    orders = g.element_orders
    full = (1 << g.order) - 1
    xs = [x for x in range(g.order) if orders[x] == a]
    ys = [y for y in range(g.order) if orders[y] == b]
    return sum(1 for x in xs for y in ys if closure_bits(g, [x, y])[0] == full)


# -- chief series and solvability ----------------------------------------------

@dataclass
class ChiefSeriesReport:
    series: list[int]
    complemented: list[bool]
    complements: list[int | None]
    applicable: bool

    @property
    def d(self) -> int:
        return sum(self.complemented)

    def to_json(self, lat: SubgroupLattice) -> dict:
        return {
            "series": self.series,
            "orders": [lat.order(i) for i in self.series],
            "complemented": self.complemented,
            "complements": self.complements,
            "d": self.d,
            "applicable": self.applicable,
        }


def find_complement(lat: SubgroupLattice, lower: int, upper: int) -> int | None:
    """Subgroup K ⊇ lower with K ∩ upper = lower and |K|·|upper|/|lower| = |G|."""
    lo_bits = lat.subgroups[lower].bits
    up_bits = lat.subgroups[upper].bits
    n = lat.group.order
    need = n * lat.order(lower) // lat.order(upper)
    for k in iter_bits(lat.above[lower]):
        if lat.order(k) != need:
            continue
        if lat.subgroups[k].bits & up_bits == lo_bits:
            return k
    return None


def chief_series(lat: SubgroupLattice) -> ChiefSeriesReport:
    series = [0]
    cur = 0
    while cur != lat.top:
        nxt = next(j for j in iter_bits(lat.above[cur]) if j != cur and lat.normal[j])
        series.append(nxt)
        cur = nxt
    complements = [find_complement(lat, a, b) for a, b in zip(series, series[1:])]
    return ChiefSeriesReport(series, [c is not None for c in complements], complements,
                             is_solvable(lat.group))


def commutator_subgroup(g: FiniteGroup, elems: Sequence[int]) -> list[int]:
    t = g.mul_table
    e = np.asarray(elems, dtype=np.int64)
    inv = g.inv[e]
    comm = t[t[inv[:, None], inv[None, :]], t[e[:, None], e[None, :]]]
    gens = np.unique(comm).tolist()
    return closure_bits(g, gens)[1]


def derived_series(g: FiniteGroup) -> list[int]:
    sizes = [g.order]
    cur = list(range(g.order))
    while True:
        nxt = commutator_subgroup(g, cur)
        if len(nxt) == len(cur):
            return sizes
        sizes.append(len(nxt))
        cur = nxt


def is_solvable(g: FiniteGroup) -> bool:
    return derived_series(g)[-1] == 1


def subgroup_poset_components(lat: SubgroupLattice) -> int:
    """Connected components of the comparability graph of proper nontrivial subgroups."""
    inner = list(range(1, lat.top))
    parent = {i: i for i in inner}

    def root(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in inner:
        for j in iter_bits(lat.above[i]):
            if j != i and j != lat.top:
                ra, rb = root(i), root(j)
                if ra != rb:
                    parent[ra] = rb
    return len({root(i) for i in inner})


def lattice_report(lat: SubgroupLattice, mu: Sequence[int] | None = None) -> dict:
    if mu is None:
        mu = mobius(lat)
    return {
        "group": lat.group.label,
        "order": lat.group.order,
        "count": len(lat),
        "census": dict(sorted(lat.census().items())),
        "subgroups": [
            {
                "index": i,
                "order": lat.order(i),
                "tag": lat.tag(i),
                "normal": lat.normal[i],
                "maximal": lat.maximal[i],
                "conj_class": lat.conj_class[i],
                "mu": mu[i],
            }
            for i in range(len(lat))
        ],
    }
