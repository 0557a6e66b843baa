"""Fundamental-group presentations of 2-complexes and simple-connectivity certificates."""

from __future__ import annotations

import heapq
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CosetTopoError
from .grp import FiniteGroup, automorphisms
from .homology import BoundaryMatrix, betti_one_certified, integer_invariants
from .lattice import SubgroupLattice, enumerate_subgroups, iter_bits
from .topo import SimplicialComplex, minimal_cover_skeleton

DEFAULT_TIETZE_BUDGET = 1_000_000

Word = tuple[int, ...]  # generator i appears as i+1, its inverse as -(i+1)


@dataclass
class Presentation:
    generators: list[tuple[int, int]]  # oriented edges (u, v) with u < v
    relators: list[Word]
    tree: list[tuple[int, int]] = field(default_factory=list)
    tree_kind: str = ""
    basepoint: int = 0

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def is_trivial(self) -> bool:
        return not self.generators

    def summary(self) -> dict:
        return {
            "generators": len(self.generators),
            "relators": len(self.relators),
            "tree": self.tree_kind,
            "basepoint": self.basepoint,
        }


def _components(vertices: Sequence[int], edges: Sequence[tuple[int, ...]]) -> int:
    parent = {v: v for v in vertices}

    def root(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = root(u), root(v)
        if ru != rv:
            parent[ru] = rv
    return len({root(v) for v in vertices})


def edge_path_presentation(k: SimplicialComplex, basepoint: int | None = None) -> Presentation:
    """Edge-path presentation of π1 from a spanning tree of the 1-skeleton.

    One generator per edge {u, v} outside the tree, oriented u -> v with u < v
    (the reverse orientation is its inverse). Each triangle {a, b, c} gives
    the relator (a,b)(b,c)(a,c)^-1 with tree edges deleted.
    """
    verts = k.vertices
    if not verts:
        raise CosetTopoError("empty complex has no fundamental group")
    if basepoint is None:
        basepoint = verts[0]
    edges = k.faces(1)
    if _components(verts, edges) != 1:
        raise CosetTopoError("complex is disconnected")
    n = len(verts)
    if len(edges) == n * (n - 1) // 2:
        tree = [tuple(sorted((basepoint, v))) for v in verts if v != basepoint]
        kind = "star"
    else:
        adj: dict[int, list[int]] = {v: [] for v in verts}
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {basepoint}
        tree = []
        queue = deque([basepoint])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if v not in seen:
                    seen.add(v)
                    tree.append(tuple(sorted((u, v))))
                    queue.append(v)
        kind = "bfs"
    tree_set = set(tree)
    gens = [e for e in edges if e not in tree_set]
    gen_index = {e: i for i, e in enumerate(gens)}
    relators = []
    for a, b, c in k.faces(2):
        word = []
        for e, sign in (((a, b), 1), ((b, c), 1), ((a, c), -1)):
            i = gen_index.get(e)
            if i is not None:
                word.append(sign * (i + 1))
        relators.append(tuple(word))
    relators = [r for r in relators if r]
    return Presentation(gens, relators, sorted(tree), kind, basepoint)


def relation_matrix(p: Presentation) -> BoundaryMatrix:
    """Exponent-sum matrix (generators x relators) as a sparse integer matrix."""
    cols = []
    for r in p.relators:
        c = Counter()
        for x in r:
            c[abs(x) - 1] += 1 if x > 0 else -1
        cols.append(tuple((g, v) for g, v in sorted(c.items()) if v))
    return BoundaryMatrix(2, len(p.generators), len(p.relators), cols)


def abelianization(p: Presentation) -> tuple[int, list[int]]:
    """(free rank, torsion invariant factors) of the abelianized group."""
    rank, factors = integer_invariants(relation_matrix(p))
    return len(p.generators) - rank, factors


# -- Tietze simplification ----------------------------------------------------

def _free_reduce(word: Sequence[int]) -> list[int]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def _cyclic_reduce(word: Sequence[int]) -> Word:
    w = _free_reduce(word)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[i:j + 1])


def _canonical(word: Word) -> Word:
    """Least rotation of the word or its inverse, used to deduplicate relators."""
    if not word:
        return word
    inv = tuple(-x for x in reversed(word))
    best = None
    for w in (word, inv):
        for i in range(len(w)):
            rot = w[i:] + w[:i]
            if best is None or rot < best:
                best = rot
    return best


def _invert(word: Sequence[int]) -> list[int]:
    return [-x for x in reversed(word)]


@dataclass
class TietzeResult:
    presentation: Presentation
    steps: int
    exhausted: bool
    eliminated: dict[int, str]  # generator -> rule that removed it

    @property
    def trivial(self) -> bool:
        return self.presentation.is_trivial()


def tietze_simplify(p: Presentation, budget: int = DEFAULT_TIETZE_BUDGET,
                    max_substitution: int = 2,
                    trace: Callable[[Presentation], None] | None = None) -> TietzeResult:
    """Simplify a presentation without changing the group it presents.

    Relators are processed shortest first (ties broken lexicographically).
    A relator of length 1 kills its generator; a relator x^a y^b of length 2
    with distinct generators expresses one generator in terms of the other;
    a longer relator in which some generator occurs exactly once expresses
    that generator by a word of length at most ``max_substitution``. Each
    rule substitutes the eliminated generator everywhere. Free and cyclic
    reduction run after every substitution. One step is one letter processed.
    """
    rels: dict[int, Word] = {}
    occ: dict[int, set[int]] = {}
    seen_canon: dict[Word, int] = {}
    alive_gens = set(range(1, len(p.generators) + 1))
    heap: list = []
    next_id = 0
    steps = 0
    eliminated: dict[int, str] = {}

    def add(word: Word):
        nonlocal next_id
        w = _cyclic_reduce(word)
        if not w:
            return
        c = _canonical(w)
        if c in seen_canon:
            return
        rid = next_id
        next_id += 1
        rels[rid] = c
        seen_canon[c] = rid
        for x in set(abs(t) for t in c):
            occ.setdefault(x, set()).add(rid)
        heapq.heappush(heap, (len(c), tuple(abs(t) for t in c), rid))

    def remove(rid: int):
        w = rels.pop(rid)
        seen_canon.pop(w, None)
        for x in set(abs(t) for t in w):
            s = occ.get(x)
            if s is not None:
                s.discard(rid)

    def snapshot() -> Presentation:
        live = sorted(alive_gens)
        pos = {g: i + 1 for i, g in enumerate(live)}
        relators = [tuple((1 if t > 0 else -1) * pos[abs(t)] for t in w)
                    for _, w in sorted(rels.items())]
        return Presentation([p.generators[g - 1] for g in live], relators, p.tree,
                            p.tree_kind, p.basepoint)

    def substitute(gen: int, image: list[int], rule: str):
        nonlocal steps
        inv_image = _invert(image)
        for rid in sorted(occ.pop(gen, set())):
            w = rels.get(rid)
            if w is None:
                continue
            remove(rid)
            out = []
            for t in w:
                if t == gen:
                    out.extend(image)
                elif t == -gen:
                    out.extend(inv_image)
                else:
                    out.append(t)
            steps += len(out)
            add(tuple(out))
        alive_gens.discard(gen)
        eliminated[gen - 1] = rule
        if trace is not None:
            trace(snapshot())

    for r in p.relators:
        add(r)
    exhausted = False
    while heap:
        if steps > budget:
            exhausted = True
            break
        length, _, rid = heapq.heappop(heap)
        w = rels.get(rid)
        if w is None:
            continue
        steps += length
        if length == 1:
            remove(rid)
            substitute(abs(w[0]), [], "kill")
            continue
        counts = Counter(abs(t) for t in w)
        if length == 2 and len(counts) == 2:
            a, b = w
            # a b = 1 -> eliminate the larger generator
            if abs(a) > abs(b):
                a, b = b, a  # rotation of a relator is still a relator
            # now eliminate |b|: b = a^-1
            image = [-a] if b > 0 else [a]
            remove(rid)
            substitute(abs(b), image, "identify")
            continue
        once = [g for g, c in counts.items() if c == 1]
        if once and length - 1 <= max_substitution:
            g = max(once)
            i = next(i for i, t in enumerate(w) if abs(t) == g)
            rot = w[i:] + w[:i]  # x^e u = 1
            rest = list(rot[1:])
            image = _invert(rest) if rot[0] > 0 else rest
            remove(rid)
            substitute(g, image, "substitute")
            continue
        # no rule applies now; the relator stays until a substitution rewrites it
    return TietzeResult(snapshot(), steps, exhausted, eliminated)


# -- witness searches ------------------------------------------------------------

def maximal_masks(g: FiniteGroup, lat: SubgroupLattice) -> list[int]:
    """For each element, the bitmask of maximal subgroups containing it."""
    masks = [0] * g.order
    for bit, m in enumerate(lat.maximal_indices):
        for x in lat.element_lists[m]:
            masks[x] |= 1 << bit
    return masks


@dataclass
class TwoGenReport:
    passed: bool
    vacuous: bool
    pairs_checked: int
    failures: list[tuple[int, int]]
    witnesses: dict[tuple[int, int], int]
    by_orders: dict[tuple[int, int], dict]
    aut_classes: int | None = None

    def to_json(self, g: FiniteGroup) -> dict:
        return {
            "passed": self.passed,
            "vacuous": self.vacuous,
            "pairs_checked": self.pairs_checked,
            "failures": [[g.names[x], g.names[y]] for x, y in self.failures[:50]],
            "failure_count": len(self.failures),
            "by_orders": {f"{a},{b}": v for (a, b), v in sorted(self.by_orders.items())},
            "aut_classes": self.aut_classes,
        }


def two_gen_condition_check(g: FiniteGroup, lat: SubgroupLattice | None = None,
                            aut_classes: bool = False) -> TwoGenReport:
    """For each generating pair {x, y}, look for z with ⟨z,x⟩, ⟨z,y⟩, ⟨zx,zy⟩ proper.

    Every unordered pair is checked. A subgroup ⟨a, b⟩ is proper exactly when
    a and b lie in a common maximal subgroup.
    """
    if lat is None:
        lat = enumerate_subgroups(g)
    mm = maximal_masks(g, lat)
    rows = g.rows
    n = g.order
    failures = []
    witnesses = {}
    by_orders: dict[tuple[int, int], dict] = {}
    orders = g.element_orders
    checked = 0
    for x in range(n):
        mx = mm[x]
        for y in range(x + 1, n):
            if mx & mm[y]:
                continue
            checked += 1
            key = tuple(sorted((int(orders[x]), int(orders[y]))))
            rec = by_orders.setdefault(key, {"pairs": 0, "with_witness": 0})
            rec["pairs"] += 1
            found = None
            for z in range(n):
                if mm[z] & mx and mm[z] & mm[y] and mm[rows[z][x]] & mm[rows[z][y]]:
                    found = z
                    break
            if found is None:
                failures.append((x, y))
            else:
                witnesses[(x, y)] = found
                rec["with_witness"] += 1
    classes = None
    if aut_classes and checked:
        classes = generating_pair_classes(g, mm)
    return TwoGenReport(not failures, checked == 0, checked, failures, witnesses, by_orders, classes)


def generating_pair_classes(g: FiniteGroup, mm: list[int] | None = None) -> int:
    """Number of Aut(G)-orbits on ordered generating pairs."""
    if mm is None:
        mm = maximal_masks(g, enumerate_subgroups(g))
    n = g.order
    pairs = np.array([x * n + y for x in range(n) for y in range(n)
                      if x != y and not (mm[x] & mm[y])], dtype=np.int64)
    if len(pairs) == 0:
        return 0
    xs, ys = pairs // n, pairs % n
    best = pairs.copy()
    for f in automorphisms(g):
        best = np.minimum(best, f[xs] * n + f[ys])
    return int(len(np.unique(best)))


@dataclass
class Order2Precertificate:
    trivial_edges: set[tuple[int, int]]
    involution_edges: int
    involution_edges_covered: int
    basepoint: int = 0

    @property
    def complete(self) -> bool:
        return self.involution_edges == self.involution_edges_covered


def order2_precertificate(g: FiniteGroup, k2: SimplicialComplex, basepoint: int = 0) -> Order2Precertificate:
    """Edges proven trivial by propagation through triangles containing an involution.

    Seeds: tree edges at the basepoint and edges {g, h} whose triangle with
    the basepoint exists. A triangle with two trivial edges makes its third
    edge trivial.
    """
    orders = g.element_orders
    invol = {x for x in range(g.order) if orders[x] == 2}
    trivial: set[tuple[int, int]] = set()
    tris = [t for t in k2.faces(2) if invol.intersection(t)]
    by_edge: dict[tuple[int, int], list[int]] = {}
    for i, (a, b, c) in enumerate(tris):
        for e in ((a, b), (a, c), (b, c)):
            by_edge.setdefault(e, []).append(i)
    queue: deque = deque()

    def mark(e):
        if e not in trivial:
            trivial.add(e)
            queue.append(e)

    for e in sorted(seed_edges(k2, basepoint)):
        mark(e)
    while queue:
        e = queue.popleft()
        for i in by_edge.get(e, ()):
            a, b, c = tris[i]
            es = ((a, b), (a, c), (b, c))
            missing = [f for f in es if f not in trivial]
            if len(missing) == 1:
                mark(missing[0])
    inv_edges = [e for e in k2.faces(1) if e[0] in invol or e[1] in invol]
    covered = sum(1 for e in inv_edges if e in trivial)
    return Order2Precertificate(trivial, len(inv_edges), covered, basepoint)


def seed_edges(k2: SimplicialComplex, basepoint: int = 0) -> set[tuple[int, int]]:
    """Edges trivial without any search: tree edges at the basepoint and the
    edges opposite the basepoint in its triangles."""
    seeds = {e for e in k2.faces(1) if basepoint in e}
    for t in k2.faces(2):
        if basepoint in t:
            seeds.add(tuple(v for v in t if v != basepoint))
    return seeds


@dataclass
class Order2WitnessReport:
    covered: bool
    edges_checked: int
    precertified: int  # seed edges plus involution edges from the pre-certificate
    witnesses: dict[tuple[int, int], tuple[int, int]]  # edge -> (maximal subgroup, z)
    uncovered: list[tuple[int, int]]

    def to_json(self, g: FiniteGroup, lat: SubgroupLattice) -> dict:
        tags = Counter(lat.tag(k) for k, _ in self.witnesses.values())
        return {
            "covered": self.covered,
            "edges_checked": self.edges_checked,
            "precertified": self.precertified,
            "witnessed": len(self.witnesses),
            "witness_subgroups": dict(sorted(tags.items())),
            "uncovered": [[g.names[a], g.names[b]] for a, b in self.uncovered[:50]],
            "uncovered_count": len(self.uncovered),
        }


def order2_edge_witness(g: FiniteGroup, lat: SubgroupLattice, a: int, b: int) -> tuple[int, int] | None:
    """A maximal K with a^-1 b ∈ K and an involution z ∈ aK other than a, b."""
    if a == b:
        raise ValueError("an edge needs two distinct vertices")
    rows = g.rows
    d = rows[g.inv_list[a]][b]
    orders = g.element_orders
    # larger maximal subgroups first: their cosets are the likeliest to hold involutions
    for k in sorted(lat.maximal_indices, key=lambda i: (-lat.order(i), i)):
        if not lat.subgroups[k].bits >> d & 1:
            continue
        for e in lat.element_lists[k]:
            z = rows[a][e]
            if orders[z] == 2 and z != a and z != b:
                return k, z
    return None


def order2_witness_check(g: FiniteGroup, lat: SubgroupLattice, k2: SimplicialComplex,
                         precert: Order2Precertificate | None = None) -> Order2WitnessReport:
    """Cover every edge by the involution pre-certificate or by an order-2 witness.

    Edges with an involution endpoint must be trivial in the pre-certificate.
    Every other edge {a, b} needs a witness (K, z): a, b and the involution z
    lie in one proper coset aK, so (a,b) = (a,z)(z,b) with both factors
    involution edges.
    """
    if precert is None:
        precert = order2_precertificate(g, k2)
    orders = g.element_orders
    witnesses = {}
    uncovered = []
    pre = 0
    seeds = seed_edges(k2, precert.basepoint)
    for e in k2.faces(1):
        if e in seeds:
            pre += 1
            continue
        if orders[e[0]] == 2 or orders[e[1]] == 2:
            if e in precert.trivial_edges:
                pre += 1
            else:
                uncovered.append(e)
            continue
        w = order2_edge_witness(g, lat, *e)
        if w is None:
            uncovered.append(e)
        else:
            witnesses[e] = w
    covered = not uncovered and precert.complete
    return Order2WitnessReport(covered, len(k2.faces(1)), pre, witnesses, uncovered)


# -- orchestration ---------------------------------------------------------------

@dataclass
class CertificationReport:
    status: str  # "Proven-trivial" | "Nontrivial" | "Unknown"
    method: str
    stages: list[dict]
    betti1: int | None
    log: dict = field(default_factory=dict)
    runtime_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "method": self.method,
            "betti1": self.betti1,
            "stages": self.stages,
            "log": self.log,
            "runtime_ms": round(self.runtime_ms, 3),
        }


def _is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = next(d for d in range(2, n + 1) if n % d == 0)
    while n % p == 0:
        n //= p
    return n == 1


def certify_simple_connectivity(g: FiniteGroup, lat: SubgroupLattice | None = None,
                                tietze_budget: int = DEFAULT_TIETZE_BUDGET,
                                stop_at_first: bool = True) -> CertificationReport:
    """Decide simple connectivity of the coset poset when a certificate is found.

    Stages, first success wins: (a) β1 of the minimal-cover 2-skeleton, a
    positive value proves non-simple-connectivity; (b) the two-generator
    witness condition; (c) Tietze simplification of the edge-path
    presentation; (d) the order-2 witness pipeline. Otherwise Unknown.
    """
    start = time.perf_counter()
    stages: list[dict] = []
    if lat is None:
        lat = enumerate_subgroups(g)
    if g.order == 1:
        return CertificationReport("Unknown", "degenerate", [{"stage": "input", "outcome": "trivial group"}],
                                   None, runtime_ms=(time.perf_counter() - start) * 1000)
    cyclic = int(g.element_orders.max()) == g.order
    if cyclic and _is_prime_power(g.order):
        stages.append({"stage": "connectivity", "outcome": "disconnected",
                       "detail": "cyclic of prime-power order"})
        return CertificationReport("Nontrivial", "connectivity", stages, None,
                                   runtime_ms=(time.perf_counter() - start) * 1000)
    m2 = minimal_cover_skeleton(g, lat, 2)
    b1, how = betti_one_certified(m2)
    stages.append({"stage": "a", "name": "homology", "outcome": "betti1", "value": b1, "method": how})
    if b1 > 0:
        return CertificationReport("Nontrivial", "homology", stages, b1,
                                   runtime_ms=(time.perf_counter() - start) * 1000)
    status, method = "Unknown", "none"
    log: dict = {}
    if cyclic:
        stages.append({"stage": "b", "name": "two-gen", "outcome": "skipped", "detail": "cyclic group"})
    else:
        rep = two_gen_condition_check(g, lat)
        stages.append({"stage": "b", "name": "two-gen", "outcome": "pass" if rep.passed else "fail",
                       **rep.to_json(g)})
        log["two_gen_witnesses"] = {f"{g.names[x]} | {g.names[y]}": g.names[z]
                                    for (x, y), z in list(rep.witnesses.items())[:200]}
        if rep.passed:
            status, method = "Proven-trivial", "two-gen"
    if status == "Unknown" or not stop_at_first:
        pres = edge_path_presentation(m2, basepoint=0)
        res = tietze_simplify(pres, tietze_budget)
        stages.append({"stage": "c", "name": "tietze", "outcome": "trivial" if res.trivial else "incomplete",
                       "steps": res.steps, "exhausted": res.exhausted,
                       "initial": pres.summary(), "final": res.presentation.summary()})
        if res.trivial and status == "Unknown":
            status, method = "Proven-trivial", "tietze"
    if status == "Unknown" or not stop_at_first:
        pc = order2_precertificate(g, m2)
        wr = order2_witness_check(g, lat, m2, pc)
        stages.append({"stage": "d", "name": "witness-pipeline",
                       "outcome": "covered" if wr.covered else "incomplete",
                       "involution_edges": pc.involution_edges,
                       "involution_edges_certified": pc.involution_edges_covered,
                       **wr.to_json(g, lat)})
        log["order2_witnesses"] = {f"{g.names[a]} | {g.names[b]}": [lat.tag(k), g.names[z]]
                                   for (a, b), (k, z) in list(wr.witnesses.items())[:200]}
        if wr.covered and status == "Unknown":
            status, method = "Proven-trivial", "witness-pipeline"
    if status == "Proven-trivial" and b1 != 0:
        raise CosetTopoError("certificate contradicts homology")
    return CertificationReport(status, method, stages, b1, log,
                               (time.perf_counter() - start) * 1000)
