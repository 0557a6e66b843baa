"""Posets and simplicial complexes built from a finite group.

Posets store, for each element, a bitmask of the strictly larger elements.
Element indices always form a linear extension (every element is smaller
than the elements above it), so a chain read in index order is already a
sorted vertex tuple.
"""

from __future__ import annotations

import itertools
import json
from bisect import bisect_left
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, TextIO

from .errors import BudgetExceeded, CosetTopoError, InvariantViolation, PruningRefused
from .grp import FiniteGroup, closure_bits
from .lattice import SubgroupLattice, iter_bits

DEFAULT_SIMPLEX_BUDGET = 50_000_000


@dataclass(frozen=True, order=True)
class CosetLabel:
    subgroup_index: int
    rep: int

    def __str__(self) -> str:
        return f"{self.rep}H{self.subgroup_index}"


@dataclass
class Poset:
    """Finite strict partial order; ``up[i]`` is the bitmask of elements above i."""

    labels: list
    up: list[int]
    kind: str = "derived"
    supports: list[int] | None = None  # element bitmasks for coset posets

    def __len__(self) -> int:
        return len(self.labels)

    def lt(self, a: int, b: int) -> bool:
        return bool(self.up[a] >> b & 1)

    def comparable(self, a: int, b: int) -> bool:
        return a == b or self.lt(a, b) or self.lt(b, a)

    @cached_property
    def down(self) -> list[int]:
        out = [0] * len(self)
        for i, u in enumerate(self.up):
            for j in iter_bits(u):
                out[j] |= 1 << i
        return out

    def verify(self) -> None:
        """Check irreflexivity, transitivity and the linear-extension convention."""
        for i, u in enumerate(self.up):
            if u >> i & 1:
                raise InvariantViolation(f"poset element {i} is below itself")
            if u & ((1 << (i + 1)) - 1):
                raise InvariantViolation(f"element {i} has an upper bound with a smaller index")
            for j in iter_bits(u):
                if self.up[j] & ~u:
                    raise InvariantViolation(f"order not transitive at {i} < {j}")

    def restrict(self, keep: Iterable[int], kind: str | None = None) -> "Poset":
        keep = sorted(set(keep))
        pos = {old: new for new, old in enumerate(keep)}
        keep_mask = 0
        for k in keep:
            keep_mask |= 1 << k
        up = []
        for k in keep:
            bits = 0
            for j in iter_bits(self.up[k] & keep_mask):
                bits |= 1 << pos[j]
            up.append(bits)
        supports = [self.supports[k] for k in keep] if self.supports is not None else None
        return Poset([self.labels[k] for k in keep], up, kind or self.kind, supports)

    def minimal_elements(self) -> list[int]:
        return [i for i, d in enumerate(self.down) if d == 0]

    def maximal_elements(self) -> list[int]:
        return [i for i, u in enumerate(self.up) if u == 0]


def antichain(n: int) -> Poset:
    return Poset(list(range(n)), [0] * n, "derived")


def chain(n: int) -> Poset:
    full = (1 << n) - 1
    return Poset(list(range(n)), [full & ~((1 << (i + 1)) - 1) for i in range(n)], "derived")


def poset_from_relations(n: int, pairs: Iterable[tuple[int, int]]) -> Poset:
    """Transitive closure of the relations a < b (requires a < b as integers)."""
    up = [0] * n
    for a, b in pairs:
        if not a < b:
            raise ValueError("relations must respect index order")
        up[a] |= 1 << b
    for i in range(n - 1, -1, -1):
        bits = up[i]
        for j in iter_bits(bits):
            bits |= up[j]
        up[i] = bits
    return Poset(list(range(n)), up, "derived")


# -- coset posets -------------------------------------------------------------

def coset_poset(g: FiniteGroup, lat: SubgroupLattice,
                subgroups: Sequence[int] | None = None, kind: str = "coset") -> Poset:
    """Left cosets of the given subgroups (default: all proper ones), ordered by inclusion."""
    if subgroups is None:
        subgroups = range(lat.top)
    subgroups = sorted(subgroups, key=lambda i: (lat.order(i), i))
    rows = g.rows
    labels: list[CosetLabel] = []
    supports: list[int] = []
    coset_of: dict[int, list[int]] = {}
    for h in subgroups:
        elems = lat.element_lists[h]
        assign = [-1] * g.order
        for x in range(g.order):
            if assign[x] != -1:
                continue
            pos = len(labels)
            row = rows[x]
            bits = 0
            for e in elems:
                y = row[e]
                assign[y] = pos
                bits |= 1 << y
            labels.append(CosetLabel(h, x))
            supports.append(bits)
        coset_of[h] = assign
    chosen = set(subgroups)
    up = [0] * len(labels)
    for pos, lab in enumerate(labels):
        h = lab.subgroup_index
        bits = 0
        for k in iter_bits(lat.above[h]):
            if k != h and k in chosen:
                bits |= 1 << coset_of[k][lab.rep]
        up[pos] = bits
    return Poset(labels, up, kind, supports)


def subgroup_poset(lat: SubgroupLattice) -> Poset:
    """Proper nontrivial subgroups ordered by inclusion."""
    inner = list(range(1, lat.top))
    pos = {k: i for i, k in enumerate(inner)}
    up = []
    for k in inner:
        bits = 0
        for j in iter_bits(lat.above[k]):
            if j != k and j in pos:
                bits |= 1 << pos[j]
        up.append(bits)
    return Poset(inner, up, "subgroup")


# -- simplicial complexes -----------------------------------------------------

@dataclass
class SimplicialComplex:
    """Simplices per dimension as sorted lists of strictly increasing vertex tuples.

    ``truncated_at`` is set when higher-dimensional simplices were not generated.
    """

    simplices: list[list[tuple[int, ...]]]
    truncated_at: int | None = None

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.simplices)

    @property
    def vertices(self) -> list[int]:
        return [v[0] for v in self.simplices[0]] if self.simplices else []

    def __len__(self) -> int:
        return sum(self.f_vector)

    def faces(self, d: int) -> list[tuple[int, ...]]:
        return self.simplices[d] if 0 <= d < len(self.simplices) else []

    def index_of(self, d: int, simplex: tuple[int, ...]) -> int:
        lst = self.simplices[d]
        i = bisect_left(lst, simplex)
        if i == len(lst) or lst[i] != simplex:
            raise KeyError(simplex)
        return i

    def __contains__(self, simplex) -> bool:
        simplex = tuple(simplex)
        d = len(simplex) - 1
        if d < 0 or d >= len(self.simplices):
            return False
        lst = self.simplices[d]
        i = bisect_left(lst, simplex)
        return i < len(lst) and lst[i] == simplex

    def complete_through(self, d: int) -> bool:
        """True if every simplex of dimension <= d is present."""
        return self.truncated_at is None or d <= self.truncated_at

    def skeleton(self, d: int) -> "SimplicialComplex":
        trunc = d if d < self.dim else self.truncated_at
        return SimplicialComplex([list(s) for s in self.simplices[: d + 1]], trunc)

    def verify(self) -> None:
        """Downward closure and vertex coverage, up to the truncation level."""
        for d in range(1, len(self.simplices)):
            lower = self.simplices[d - 1]
            lower_set = set(lower)
            for s in self.simplices[d]:
                if any(a >= b for a, b in zip(s, s[1:])):
                    raise InvariantViolation(f"simplex {s} not strictly sorted")
                for i in range(len(s)):
                    if s[:i] + s[i + 1:] not in lower_set:
                        raise InvariantViolation(f"face of {s} missing")

    def as_set(self) -> set[tuple[int, ...]]:
        return {s for layer in self.simplices for s in layer}

    @classmethod
    def from_simplex_sets(cls, layers: Sequence[Iterable[tuple[int, ...]]],
                          truncated_at: int | None = None) -> "SimplicialComplex":
        out = [sorted(set(layer)) for layer in layers]
        while out and not out[-1]:
            out.pop()
        return cls(out, truncated_at)

    @classmethod
    def from_facets(cls, facets: Iterable[Sequence[int]], max_dim: int | None = None,
                    budget: int = DEFAULT_SIMPLEX_BUDGET) -> "SimplicialComplex":
        layers: list[set] = []
        count = 0
        truncated = False
        for facet in facets:
            facet = tuple(sorted(set(facet)))
            top = len(facet) - 1
            if max_dim is not None and top > max_dim:
                truncated = True
                top = max_dim
            while len(layers) <= top:
                layers.append(set())
            for d in range(top + 1):
                for face in itertools.combinations(facet, d + 1):
                    if face not in layers[d]:
                        layers[d].add(face)
                        count += 1
                        if count > budget:
                            raise BudgetExceeded("simplex budget exceeded", count)
        return cls.from_simplex_sets(layers, max_dim if truncated else None)


def order_complex(p: Poset, max_dim: int | None = None,
                  budget: int = DEFAULT_SIMPLEX_BUDGET) -> SimplicialComplex:
    """All chains of ``p`` (of dimension at most ``max_dim``) as simplices."""
    layers: list[list[tuple[int, ...]]] = []
    count = 0
    truncated = False
    up = p.up

    def emit(ch: tuple[int, ...]):
        nonlocal count
        d = len(ch) - 1
        while len(layers) <= d:
            layers.append([])
        layers[d].append(ch)
        count += 1
        if count > budget:
            raise BudgetExceeded("simplex budget exceeded in order complex", count)

    for x in range(len(p)):
        stack = [((x,), up[x])]
        while stack:
            ch, cand = stack.pop()
            emit(ch)
            if not cand:
                continue
            if max_dim is not None and len(ch) > max_dim:
                truncated = True
                continue
            # push in reverse so smaller extensions are handled first
            for y in reversed(list(iter_bits(cand))):
                stack.append((ch + (y,), cand & up[y]))
    for layer in layers:
        layer.sort()
    return SimplicialComplex(layers, max_dim if truncated else None)


def _maximal_coset_supports(g: FiniteGroup, lat: SubgroupLattice) -> list[list[int]]:
    """Element lists of all left cosets of maximal subgroups."""
    rows = g.rows
    out = []
    for m in lat.maximal_indices:
        elems = lat.element_lists[m]
        seen = 0
        for x in range(g.order):
            if seen >> x & 1:
                continue
            coset = sorted(rows[x][e] for e in elems)
            for y in coset:
                seen |= 1 << y
            out.append(coset)
    return out


def minimal_cover_skeleton(g: FiniteGroup, lat: SubgroupLattice, k: int | None = 2,
                           budget: int = DEFAULT_SIMPLEX_BUDGET) -> SimplicialComplex:
    """Vertices are group elements; a set is a simplex iff it lies in a proper coset.

    A set lies in a proper coset exactly when it lies in a coset of a maximal
    subgroup, so the simplices are the subsets of maximal cosets.
    """
    if k is not None and k < 0:
        raise ValueError("dimension bound must be nonnegative")
    facets = _maximal_coset_supports(g, lat)
    if not facets:
        # the trivial group has no proper cosets at all
        return SimplicialComplex([], None)
    cx = SimplicialComplex.from_facets(facets, max_dim=k, budget=budget)
    return cx


def minimal_cover_by_predicate(g: FiniteGroup, k: int) -> SimplicialComplex:
    """Same complex built directly from the coset predicate (slow reference path)."""
    from .grp import coset_generates_proper
    layers = []
    for d in range(k + 1):
        layer = [s for s in itertools.combinations(range(g.order), d + 1)
                 if coset_generates_proper(g, s)]
        if not layer:
            break
        layers.append(layer)
    return SimplicialComplex(layers, k if len(layers) == k + 1 else None)


def prime_order_subgroups(lat: SubgroupLattice) -> list[int]:
    def is_prime(n):
        return n >= 2 and all(n % d for d in range(2, int(n ** 0.5) + 1))
    return [i for i in range(len(lat)) if is_prime(lat.order(i))]


def crosscut_prime_complex(g: FiniteGroup, lat: SubgroupLattice, max_dim: int | None = None,
                           budget: int = DEFAULT_SIMPLEX_BUDGET) -> tuple[SimplicialComplex, list[CosetLabel]]:
    """Cosets of prime-order subgroups; a set is a simplex iff it is bounded in C(G).

    Bounded above means contained in one proper coset. Bounded below means the
    cosets share an element x, since the singleton {x} is then a common lower
    bound. Returns the complex together with the vertex labels.

    When |G| is prime no proper subgroup has prime order, and the singletons
    {x} (maximal in C(G), below no prime coset) are taken as the vertices so
    the vertex set stays a cross-cut.
    """
    primes = [h for h in prime_order_subgroups(lat) if h != lat.top]
    if not primes and g.order > 1:
        primes = [i for i in range(len(lat)) if lat.order(i) == 1]
    p = coset_poset(g, lat, primes, kind="crosscut")
    max_cosets = _maximal_coset_supports(g, lat)
    facets = []
    for mc in max_cosets:
        mb = 0
        for y in mc:
            mb |= 1 << y
        inside = [i for i, s in enumerate(p.supports) if s & ~mb == 0]
        if inside:
            facets.append(inside)
    for x in range(g.order):
        through = [i for i, s in enumerate(p.supports) if s >> x & 1]
        if through:
            facets.append(through)
    facets.extend([i] for i in range(len(p)))
    cx = SimplicialComplex.from_facets(facets, max_dim=max_dim, budget=budget)
    return cx, list(p.labels)


def nerve(cover: Sequence[int | Iterable[int]], max_dim: int | None = None,
          budget: int = DEFAULT_SIMPLEX_BUDGET) -> SimplicialComplex:
    """Nerve of a family of sets: one simplex per subfamily with nonempty intersection."""
    masks = []
    for c in cover:
        if isinstance(c, int):
            masks.append(c)
        else:
            b = 0
            for v in c:
                b |= 1 << v
            masks.append(b)
    layers: list[list[tuple[int, ...]]] = []
    count = 0
    truncated = False
    n = len(masks)
    for i in range(n):
        if not masks[i]:
            continue
        stack = [((i,), masks[i])]
        while stack:
            s, inter = stack.pop()
            d = len(s) - 1
            while len(layers) <= d:
                layers.append([])
            layers[d].append(s)
            count += 1
            if count > budget:
                raise BudgetExceeded("simplex budget exceeded in nerve", count)
            if max_dim is not None and d >= max_dim:
                if any(inter & masks[j] for j in range(s[-1] + 1, n)):
                    truncated = True
                continue
            for j in range(n - 1, s[-1], -1):
                x = inter & masks[j]
                if x:
                    stack.append((s + (j,), x))
    for layer in layers:
        layer.sort()
    return SimplicialComplex(layers, max_dim if truncated else None)


def atom_cover(g: FiniteGroup, p: Poset) -> list[int]:
    """For each group element, the set of cosets containing it (cone above the atom)."""
    if p.supports is None:
        raise CosetTopoError("atom cover needs a coset poset")
    cover = [0] * g.order
    for i, s in enumerate(p.supports):
        for x in iter_bits(s):
            cover[x] |= 1 << i
    return cover


def face_poset(k: SimplicialComplex) -> Poset:
    """Simplices ordered by inclusion, listed by dimension then lexicographically."""
    if k.truncated_at is not None:
        raise CosetTopoError("face poset needs an untruncated complex")
    offsets = [0]
    for layer in k.simplices:
        offsets.append(offsets[-1] + len(layer))
    labels = [s for layer in k.simplices for s in layer]
    up = [0] * len(labels)
    for d in range(len(k.simplices) - 1, 0, -1):
        for j, s in enumerate(k.simplices[d]):
            me = offsets[d] + j
            bits = up[me] | (1 << me)
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                up[offsets[d - 1] + k.index_of(d - 1, face)] |= bits
    return Poset(labels, up, "face")


def barycentric_subdivision(k: SimplicialComplex,
                            budget: int = DEFAULT_SIMPLEX_BUDGET) -> SimplicialComplex:
    return order_complex(face_poset(k), budget=budget)


def poset_product(p: Poset, q: Poset, budget: int = 200_000) -> Poset:
    """Product order: (a,b) <= (c,d) iff a <= c and b <= d. Index is a*|q| + b."""
    nq = len(q)
    n = len(p) * nq
    if n > budget:
        raise BudgetExceeded("product poset too large", n)
    labels = [(a, b) for a in p.labels for b in q.labels]
    up = []
    for a in range(len(p)):
        p_up = p.up[a] | (1 << a)
        for b in range(nq):
            q_up = q.up[b] | (1 << b)
            bits = 0
            for c in iter_bits(p_up):
                bits |= q_up << (c * nq)
            bits &= ~(1 << (a * nq + b))
            up.append(bits)
    return Poset(labels, up, "product")


# -- saturating cosets of products --------------------------------------------

def invariant_closure(structure, elems: Iterable[int]) -> int:
    """Bitmask of the smallest subgroup of the normal factor containing every image of elems."""
    n_grp = structure.first
    if structure.kind == "direct":
        return closure_bits(n_grp, elems)[0]
    seeds = {act[e] for act in structure.action for e in elems}
    return closure_bits(n_grp, seeds)[0]


def is_saturating(g: FiniteGroup, lat: SubgroupLattice, label: CosetLabel) -> bool:
    st = g.structure
    if st is None:
        raise CosetTopoError("group carries no product metadata")
    elems = lat.element_lists[label.subgroup_index]
    firsts = {st.split(e)[0] for e in elems}
    seconds = {st.split(e)[1] for e in elems}
    if len(seconds) != st.second.order:
        return False
    full_first = (1 << st.first.order) - 1
    if st.kind == "direct":
        return len(firsts) == st.first.order
    return invariant_closure(st, firsts) == full_first


def nonsaturating_subposet(g: FiniteGroup, lat: SubgroupLattice,
                           p: Poset | None = None) -> Poset:
    """Subposet of C(G) consisting of the non-saturating cosets.

    For a direct product a coset is saturating when it surjects onto both
    factors; for a semidirect product N x| H when it surjects onto H and the
    smallest H-invariant subgroup of N containing its N-coordinates is N.
    """
    st = g.structure
    if st is None:
        raise CosetTopoError("nonsaturating_subposet needs a product built with factor metadata")
    if st.first.order == 1 or st.second.order == 1:
        raise CosetTopoError("both factors must be nontrivial")
    if p is None:
        p = coset_poset(g, lat)
    sat_by_subgroup: dict[int, bool] = {}
    keep = []
    for i, lab in enumerate(p.labels):
        h = lab.subgroup_index
        if h not in sat_by_subgroup:
            sat_by_subgroup[h] = is_saturating(g, lat, CosetLabel(h, 0))
        if not sat_by_subgroup[h]:
            keep.append(i)
    return p.restrict(keep, kind="nonsaturating")


def invariant_subgroups(structure, n_lat: SubgroupLattice) -> list[int]:
    """Indices of subgroups of the normal factor fixed by the whole action."""
    out = []
    for i, s in enumerate(n_lat.subgroups):
        if structure.action is None or all(
                all(s.bits >> act[x] & 1 for x in n_lat.element_lists[i]) for act in structure.action):
            out.append(i)
    return out


def invariant_coset_poset(structure, n_lat: SubgroupLattice) -> Poset:
    """Cosets of proper invariant subgroups of the normal factor."""
    inv = [i for i in invariant_subgroups(structure, n_lat) if i != n_lat.top]
    return coset_poset(structure.first, n_lat, inv, kind="invariant-coset")


# -- certified pruning ---------------------------------------------------------

def _beat_dismantlable(members: list[int], p: Poset) -> bool:
    """True if the subposet on ``members`` dismantles to a single point by beat points."""
    alive = 0
    for m in members:
        alive |= 1 << m
    if not alive:
        return False
    changed = True
    while alive.bit_count() > 1 and changed:
        changed = False
        for x in list(iter_bits(alive)):
            above = p.up[x] & alive
            below = p.down[x] & alive
            beat = False
            if above:
                # unique minimal element of the strict upper set
                mins = [y for y in iter_bits(above) if not (p.down[y] & above)]
                beat = len(mins) == 1
            if not beat and below:
                maxs = [y for y in iter_bits(below) if not (p.up[y] & below)]
                beat = len(maxs) == 1
            if beat:
                alive &= ~(1 << x)
                changed = True
    return alive.bit_count() == 1


def _is_cone(members: list[int], p: Poset) -> bool:
    mask = 0
    for m in members:
        mask |= 1 << m
    for c in members:
        rest = mask & ~(1 << c)
        if rest & ~(p.up[c] | p.down[c]) == 0:
            return True
    return False


def contractibility_certificate(members: list[int], p: Poset) -> str | None:
    """'cone' or 'dismantlable' if the subposet is certified contractible, else None."""
    if not members:
        return None
    if _is_cone(members, p):
        return "cone"
    if _beat_dismantlable(members, p):
        return "dismantlable"
    return None


@dataclass
class PruningResult:
    poset: Poset
    side: str  # "upper" | "lower"
    certificates: dict[int, str]
    kept: list[int]


def prune_with_cone_fibers(p: Poset, remove: Iterable[int]) -> PruningResult:
    """Remove elements after certifying that the inclusion is a homotopy equivalence.

    Uses the fiber criterion: for every removed x, the part of the remaining
    poset strictly above x (or, failing that for some x, strictly below x for
    every x) must be certified contractible. An empty fiber is never accepted.
    Raises PruningRefused with the first offending element otherwise.
    """
    rem = 0
    for x in remove:
        rem |= 1 << x
    keep_mask = ((1 << len(p)) - 1) & ~rem
    first_bad = None
    for side, rel in (("upper", p.up), ("lower", p.down)):
        certs = {}
        ok = True
        for x in iter_bits(rem):
            fiber = list(iter_bits(rel[x] & keep_mask))
            cert = contractibility_certificate(fiber, p)
            if cert is None:
                ok = False
                if first_bad is None:
                    first_bad = x
                break
            certs[x] = cert
        if ok:
            kept = list(iter_bits(keep_mask))
            return PruningResult(p.restrict(kept), side, certs, kept)
    raise PruningRefused(f"fiber over element {first_bad} ({p.labels[first_bad]}) "
                         f"is not certified contractible", first_bad)


# -- text export --------------------------------------------------------------

def write_complex(k: SimplicialComplex, out: TextIO, header: dict | None = None) -> None:
    """Flat format: a '#'-prefixed JSON header, then 'dim v0 v1 ...' per simplex."""
    meta = dict(header or {})
    meta.setdefault("truncated_at", k.truncated_at)
    meta["f_vector"] = list(k.f_vector)
    out.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    for d, layer in enumerate(k.simplices):
        for s in layer:
            out.write(f"{d} " + " ".join(map(str, s)) + "\n")


def read_complex(src: TextIO) -> tuple[SimplicialComplex, dict]:
    header: dict = {}
    layers: list[list[tuple[int, ...]]] = []
    for line in src:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = json.loads(line[1:])
            continue
        parts = [int(t) for t in line.split()]
        d, verts = parts[0], tuple(parts[1:])
        if len(verts) != d + 1:
            raise ValueError(f"bad simplex line {line!r}")
        while len(layers) <= d:
            layers.append([])
        layers[d].append(verts)
    for layer in layers:
        layer.sort()
    return SimplicialComplex(layers, header.get("truncated_at")), header
