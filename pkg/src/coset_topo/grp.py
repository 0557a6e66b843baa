"""Finite groups as Cayley tables, plus the closure and automorphism primitives.

Every group is normalized to a multiplication table at construction time with
element 0 as the identity. Downstream modules only ever see the table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GroupAxiomError, GroupConstructionError

FULL_ASSOCIATIVITY_LIMIT = 512
HARD_ORDER_CAP = 1100
ASSOCIATIVITY_SAMPLES = 200_000


@dataclass(frozen=True)
class ElementSet:
    """Bit-set over element indices."""

    bits: int
    size: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", self.bits.bit_count())

    @classmethod
    def of(cls, elems: Iterable[int]) -> "ElementSet":
        bits = 0
        for e in elems:
            bits |= 1 << int(e)
        return cls(bits)

    def __iter__(self):
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __len__(self) -> int:
        return self.size

    def __contains__(self, g: int) -> bool:
        return bool(self.bits >> g & 1)

    def elements(self) -> list[int]:
        return list(self)

    def issubset(self, other: "ElementSet") -> bool:
        return self.bits & ~other.bits == 0

    def __or__(self, other: "ElementSet") -> "ElementSet":
        return ElementSet(self.bits | other.bits)

    def __and__(self, other: "ElementSet") -> "ElementSet":
        return ElementSet(self.bits & other.bits)

    def __repr__(self) -> str:
        return f"ElementSet({self.elements()})"


@dataclass(frozen=True)
class ProductStructure:
    """Factor metadata kept for direct and semidirect products.

    Element ``i`` of the product corresponds to the pair
    ``(i // len(second), i % len(second))``. For a semidirect product the
    first factor is the normal subgroup and ``action[h]`` is the permutation
    of its elements induced by ``h``.
    """

    kind: str  # "direct" | "semidirect"
    first: "FiniteGroup"
    second: "FiniteGroup"
    action: tuple[tuple[int, ...], ...] | None = None

    def split(self, i: int) -> tuple[int, int]:
        return divmod(int(i), self.second.order)

    def join(self, a: int, b: int) -> int:
        return int(a) * self.second.order + int(b)


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its Cayley table. Identity is always index 0."""

    mul_table: np.ndarray
    inv: np.ndarray
    label: str
    names: tuple[str, ...]
    structure: ProductStructure | None = None

    @property
    def order(self) -> int:
        return int(self.mul_table.shape[0])

    identity = 0

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        idx = np.arange(n)
        orders = np.zeros(n, dtype=np.int64)
        cur = idx.copy()
        k = 1
        while (orders == 0).any():
            done = (cur == 0) & (orders == 0)
            orders[done] = k
            cur = self.mul_table[cur, idx]
            k += 1
        return orders

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.mul_table == self.mul_table.T).all())

    @cached_property
    def rows(self) -> list[list[int]]:
        # plain-list copy of the table; indexing lists is much faster than numpy scalars
        return self.mul_table.tolist()

    @cached_property
    def inv_list(self) -> list[int]:
        return self.inv.tolist()

    @cached_property
    def all_elements(self) -> ElementSet:
        return ElementSet((1 << self.order) - 1)

    @cached_property
    def name_index(self) -> dict[str, int]:
        return {nm: i for i, nm in enumerate(self.names)}

    def index(self, name: str) -> int:
        return self.name_index[name]

    def __repr__(self) -> str:
        return f"FiniteGroup({self.label}, order={self.order})"


def _check_order(n: int, what: str) -> None:
    if n > HARD_ORDER_CAP:
        raise GroupConstructionError(f"{what}: order {n} exceeds hard cap {HARD_ORDER_CAP}")


def verify_table(table: np.ndarray, *, seed: int = 0) -> np.ndarray:
    """Check the group axioms on a 0-indexed table and return the inverse array.

    Associativity is checked exhaustively up to ``FULL_ASSOCIATIVITY_LIMIT``
    elements and on a seeded random sample of triples above that.
    """
    table = np.asarray(table)
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise GroupAxiomError("Cayley table must be a non-empty square array")
    n = table.shape[0]
    _check_order(n, "cayley table")
    if table.min() < 0 or table.max() >= n:
        raise GroupAxiomError("Cayley table entries out of range")
    idx = np.arange(n)
    if not (table[0] == idx).all() or not (table[:, 0] == idx).all():
        raise GroupAxiomError("row/column 0 of the table must act as the identity")
    srt = np.sort(table, axis=1)
    if not (srt == idx).all() or not (np.sort(table, axis=0) == idx[:, None]).all():
        raise GroupAxiomError("every row and column must be a permutation (Latin square)")
    inv = np.argmax(table == 0, axis=1)
    if not (table[idx, inv] == 0).all():
        raise GroupAxiomError("missing inverse")
    if n <= FULL_ASSOCIATIVITY_LIMIT:
        for a in range(n):
            left = table[table[a]]  # (a*b)*c as [b, c]
            right = table[a][table]  # a*(b*c)
            if not np.array_equal(left, right):
                bad = np.argwhere(left != right)[0]
                raise GroupAxiomError(
                    f"associativity fails for ({a}, {bad[0]}, {bad[1]})"
                )
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, ASSOCIATIVITY_SAMPLES))
        bad = table[table[a, b], c] != table[a, table[b, c]]
        if bad.any():
            i = int(np.argmax(bad))
            raise GroupAxiomError(
                f"associativity fails for ({a[i]}, {b[i]}, {c[i]}) (sampled check)"
            )
    return inv.astype(np.int64)


def from_table(table, label: str = "cayley", names: Sequence[str] | None = None,
               structure: ProductStructure | None = None) -> FiniteGroup:
    table = np.asarray(table, dtype=np.int64)
    inv = verify_table(table)
    n = table.shape[0]
    if names is None:
        names = tuple(str(i) for i in range(n))
    return FiniteGroup(table, inv, label, tuple(names), structure)


def make_cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupConstructionError("cyclic group needs n >= 1")
    _check_order(n, "cyclic")
    idx = np.arange(n)
    table = (idx[:, None] + idx[None, :]) % n
    return from_table(table, f"Z{n}", [str(i) for i in range(n)])


def make_dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; element ``k + n*e`` is ``r^k s^e``."""
    if n < 2:
        raise GroupConstructionError("dihedral group needs n >= 2")
    _check_order(2 * n, "dihedral")
    table = np.empty((2 * n, 2 * n), dtype=np.int64)
    for e in range(2):
        for a in range(n):
            for f in range(2):
                for b in range(n):
                    k = (a + (b if e == 0 else -b)) % n
                    table[a + n * e, b + n * f] = k + n * ((e + f) % 2)
    names = [f"r^{k}" for k in range(n)] + [f"r^{k}s" for k in range(n)]
    return from_table(table, f"D{2 * n}", names)


_QUAT_UNITS = "1ijk"
# unit products: (sign, unit) for e_a * e_b with 1=0, i=1, j=2, k=3
_QUAT_MUL = [
    [(1, 0), (1, 1), (1, 2), (1, 3)],
    [(1, 1), (-1, 0), (1, 3), (-1, 2)],
    [(1, 2), (-1, 3), (-1, 0), (1, 1)],
    [(1, 3), (1, 2), (-1, 1), (-1, 0)],
]


def make_quaternion() -> FiniteGroup:
    """Q8 with elements ordered 1, -1, i, -i, j, -j, k, -k."""
    elems = [(s, u) for u in range(4) for s in (1, -1)]
    pos = {e: i for i, e in enumerate(elems)}
    table = np.empty((8, 8), dtype=np.int64)
    for x, (s1, u1) in enumerate(elems):
        for y, (s2, u2) in enumerate(elems):
            s, u = _QUAT_MUL[u1][u2]
            table[x, y] = pos[(s * s1 * s2, u)]
    names = [("" if s > 0 else "-") + _QUAT_UNITS[u] for s, u in elems]
    return from_table(table, "Q8", names)


def _cycle_name(perm: tuple[int, ...]) -> str:
    seen = set()
    parts = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        j = perm[start]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        parts.append("(" + " ".join(str(c + 1) for c in cyc) + ")")
    return "".join(parts) or "()"


def _perm_parity(perm: Sequence[int]) -> int:
    parity = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def permutation_group(perms: Sequence[tuple[int, ...]], label: str) -> FiniteGroup:
    """Cayley table of a list of permutations closed under composition.

    The product ``g*h`` is the map ``x -> g(h(x))``. The identity permutation
    must come first.
    """
    _check_order(len(perms), label)
    pos = {p: i for i, p in enumerate(perms)}
    if len(pos) != len(perms):
        raise GroupConstructionError("duplicate permutations")
    arr = np.array(perms, dtype=np.int64)
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        comp = arr[i][arr]  # row j: x -> perms[i][perms[j][x]]
        try:
            table[i] = [pos[tuple(r)] for r in comp.tolist()]
        except KeyError as exc:
            raise GroupConstructionError("permutations are not closed under composition") from exc
    return from_table(table, label, [_cycle_name(p) for p in perms])


def _check_degree(n: int, what: str) -> None:
    if not 2 <= n <= 8:
        raise GroupConstructionError(f"{what}: degree must satisfy 2 <= n <= 8")


def make_symmetric(n: int) -> FiniteGroup:
    _check_degree(n, "symmetric")
    import math
    _check_order(math.factorial(n), f"S{n}")
    perms = list(itertools.permutations(range(n)))
    return permutation_group(perms, f"S{n}")


def make_alternating(n: int) -> FiniteGroup:
    _check_degree(n, "alternating")
    import math
    _check_order(max(1, math.factorial(n) // 2), f"A{n}")
    perms = [p for p in itertools.permutations(range(n)) if _perm_parity(p) == 0]
    return permutation_group(perms, f"A{n}")


def direct_product(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup:
    n = a.order * b.order
    _check_order(n, "direct product")
    ta, tb = a.mul_table, b.mul_table
    # (x1,y1)(x2,y2) = (x1 x2, y1 y2), index x*|B| + y
    table = (ta[:, None, :, None] * b.order + tb[None, :, None, :]).reshape(n, n)
    names = [f"({na},{nb})" for na in a.names for nb in b.names]
    return from_table(table, f"{a.label}x{b.label}", names,
                      ProductStructure("direct", a, b))


def is_automorphism(g: FiniteGroup, perm: Sequence[int]) -> bool:
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (g.order,) or sorted(perm.tolist()) != list(range(g.order)):
        return False
    return bool((perm[g.mul_table] == g.mul_table[perm][:, perm]).all())


def make_semidirect(n_grp: FiniteGroup, h_grp: FiniteGroup,
                    action: Sequence[Sequence[int]]) -> FiniteGroup:
    """Semidirect product N x| H with (n,h)(n',h') = (n * action[h](n'), h h').

    ``action[h]`` is the automorphism of N (as an element permutation) induced
    by the element ``h`` of H. Both the automorphism property and the
    homomorphism property of the action are checked against the tables.
    """
    if len(action) != h_grp.order:
        raise GroupConstructionError("action must give one automorphism per element of H")
    acts = np.array([list(a) for a in action], dtype=np.int64)
    for h in range(h_grp.order):
        if not is_automorphism(n_grp, acts[h]):
            raise GroupConstructionError(f"action of element {h} is not an automorphism of N")
    for h1 in range(h_grp.order):
        for h2 in range(h_grp.order):
            if not np.array_equal(acts[h_grp.mul_table[h1, h2]], acts[h1][acts[h2]]):
                raise GroupConstructionError("action is not a homomorphism H -> Aut(N)")
    nn, nh = n_grp.order, h_grp.order
    total = nn * nh
    _check_order(total, "semidirect product")
    tn, th = n_grp.mul_table, h_grp.mul_table
    table = np.empty((total, total), dtype=np.int64)
    for x in range(nn):
        for h in range(nh):
            # second factor n' is twisted by h
            first = tn[x][acts[h]]  # indexed by n'
            table[x * nh + h] = (first[:, None] * nh + th[h][None, :]).reshape(-1)
    names = [f"({a},{b})" for a in n_grp.names for b in h_grp.names]
    structure = ProductStructure("semidirect", n_grp, h_grp,
                                 tuple(tuple(r) for r in acts.tolist()))
    return from_table(table, f"{n_grp.label}:{h_grp.label}", names, structure)


def cyclic_action(n: int, m: int, multiplier: int) -> list[list[int]]:
    """Action of Z/m on Z/n where the generator acts by x -> multiplier * x."""
    return [[(pow(multiplier, k, n) * x) % n for x in range(n)] for k in range(m)]


def inversion_action(n_grp: FiniteGroup) -> list[list[int]]:
    """Action of Z/2 on an abelian group by inversion."""
    return [list(range(n_grp.order)), n_grp.inv.tolist()]


# -- PSL_2(F_p) ---------------------------------------------------------------

def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def psl2_canonical(p: int, a: int, b: int, c: int, d: int) -> tuple[int, int, int, int]:
    m = (a % p, b % p, c % p, d % p)
    neg = tuple((-x) % p for x in m)
    return min(m, neg)


def psl2_name(m: tuple[int, int, int, int]) -> str:
    a, b, c, d = m
    return f"[{a} {b}; {c} {d}]"


def psl2_matrix(g: FiniteGroup, i: int) -> tuple[int, int, int, int]:
    """Canonical SL2 representative of element ``i`` of a ``make_psl2`` group."""
    body = g.names[i].strip("[]").replace(";", "")
    return tuple(int(x) for x in body.split())  # type: ignore[return-value]


def psl2_index(g: FiniteGroup, p: int, a: int, b: int, c: int, d: int) -> int:
    """Index of the class of the matrix [[a, b], [c, d]] (determinant must be 1)."""
    if (a * d - b * c) % p != 1:
        raise ValueError("matrix must have determinant 1")
    return g.index(psl2_name(psl2_canonical(p, a, b, c, d)))


def mobius_index(g: FiniteGroup, p: int, a: int, b: int, c: int, d: int) -> int:
    """Index of the transformation x -> (ax+b)/(cx+d), rescaled to determinant 1."""
    det = (a * d - b * c) % p
    if det == 0:
        raise ValueError("singular transformation")
    # need lam with lam^2 = 1/det
    target = pow(det, -1, p)
    for lam in range(1, p):
        if lam * lam % p == target:
            return psl2_index(g, p, lam * a, lam * b, lam * c, lam * d)
    raise ValueError("determinant is not a square: transformation is not in PSL2")


def trace_squared(g: FiniteGroup, i: int, p: int) -> int:
    a, _, _, d = psl2_matrix(g, i)
    return (a + d) ** 2 % p


def make_psl2(p: int) -> FiniteGroup:
    """PSL_2(F_p) for primes 5 <= p <= 13.

    Elements are SL_2 matrices modulo +-I, each represented by the
    lexicographically smaller of the pair. Index 0 is the identity and the
    rest follow in lexicographic order of their representatives.
    """
    if not _is_prime(p):
        raise GroupConstructionError(f"psl2: {p} is not prime")
    if not 5 <= p <= 13:
        raise GroupConstructionError("psl2: need 5 <= p <= 13")
    reps = set()
    for a, b, c, d in itertools.product(range(p), repeat=4):
        if (a * d - b * c) % p == 1:
            reps.add(psl2_canonical(p, a, b, c, d))
    ident = psl2_canonical(p, 1, 0, 0, 1)
    reps.discard(ident)
    elems = [ident] + sorted(reps)
    n = len(elems)
    _check_order(n, "psl2")
    arr = np.array(elems, dtype=np.int64)
    lookup = np.full(p ** 4, -1, dtype=np.int64)
    a, b, c, d = arr.T
    for sgn in (1, -1):
        key = (((sgn * a) % p * p + (sgn * b) % p) * p + (sgn * c) % p) * p + (sgn * d) % p
        lookup[key] = np.arange(n)
    A, B, C, D = (x[:, None] for x in (a, b, c, d))
    E, F, G_, H = (x[None, :] for x in (a, b, c, d))
    pa = (A * E + B * G_) % p
    pb = (A * F + B * H) % p
    pc = (C * E + D * G_) % p
    pd = (C * F + D * H) % p
    table = lookup[((pa * p + pb) * p + pc) * p + pd]
    return from_table(table, f"PSL2({p})", [psl2_name(m) for m in elems])


# -- closure primitives ---------------------------------------------------------

def element_order(g: FiniteGroup, x: int) -> int:
    return int(g.element_orders[x])


def closure_bits(g: FiniteGroup, gens: Iterable[int]) -> tuple[int, list[int]]:
    """Subgroup generated by ``gens`` as (bitmask, element list)."""
    rows = g.rows
    gens = [x for x in dict.fromkeys(int(x) for x in gens) if x != 0]
    bits = 1
    elems = [0]
    i = 0
    while i < len(elems):
        row = rows[elems[i]]
        for s in gens:
            y = row[s]
            if not bits >> y & 1:
                bits |= 1 << y
                elems.append(y)
        i += 1
    return bits, elems


def generated_subgroup(g: FiniteGroup, seed: ElementSet | Iterable[int]) -> ElementSet:
    """Smallest subgroup containing ``seed`` (always contains the identity)."""
    bits, _ = closure_bits(g, seed)
    return ElementSet(bits)


def coset_generates_proper(g: FiniteGroup, elems: ElementSet | Iterable[int]) -> bool:
    """True iff the elements lie together in some proper left coset."""
    items = list(elems)
    if not items:
        raise ValueError("coset_generates_proper needs a non-empty set")
    x1inv = g.inv_list[items[0]]
    rows = g.rows
    shifted = [rows[x1inv][x] for x in items[1:]]
    bits, _ = closure_bits(g, shifted)
    return bits.bit_count() < g.order


def left_translate(g: FiniteGroup, x: int, elems: Iterable[int]) -> list[int]:
    row = g.rows[x]
    return [row[e] for e in elems]


# -- automorphisms ------------------------------------------------------------

def small_generating_tuple(g: FiniteGroup, max_size: int = 3) -> tuple[int, ...]:
    """Greedy search for a short generating tuple, preferring high element orders."""
    n = g.order
    if n == 1:
        return ()
    orders = g.element_orders
    cand = sorted(range(1, n), key=lambda x: (-int(orders[x]), x))
    full = (1 << n) - 1
    for size in range(1, max_size + 1):
        # fix the first element greedily, search the rest
        for first in cand:
            if size == 1:
                if closure_bits(g, [first])[0] == full:
                    return (first,)
                continue
            for rest in itertools.combinations(cand, size - 1):
                if first in rest:
                    continue
                if closure_bits(g, (first,) + rest)[0] == full:
                    return (first,) + rest
            if size >= 2:
                # first element of maximal order is enough to try per size
                break
    raise GroupConstructionError(f"no generating tuple of size <= {max_size} found")


def _bfs_words(g: FiniteGroup, gens: Sequence[int]) -> list[tuple[int, int, int]]:
    """Spanning tree of the right Cayley graph: (element, parent, generator slot)."""
    rows = g.rows
    seen = {0}
    order = [(0, -1, -1)]
    i = 0
    while i < len(order):
        e = order[i][0]
        for slot, s in enumerate(gens):
            y = rows[e][s]
            if y not in seen:
                seen.add(y)
                order.append((y, e, slot))
        i += 1
    return order


def automorphisms(g: FiniteGroup, gens: Sequence[int] | None = None) -> list[np.ndarray]:
    """All automorphisms of G as element permutations.

    Images of a fixed generating tuple are enumerated over elements of matching
    order; each candidate map is built along a Cayley-graph spanning tree, then
    accepted only if it respects every table product and is a bijection.
    """
    if gens is None:
        gens = small_generating_tuple(g)
    n = g.order
    if n == 1:
        return [np.zeros(1, dtype=np.int64)]
    tree = _bfs_words(g, gens)
    rows = g.rows
    orders = g.element_orders
    pools = [[y for y in range(n) if orders[y] == orders[s]] for s in gens]
    table = g.mul_table
    gen_cols = [table[:, s] for s in gens]
    found = []
    for images in itertools.product(*pools):
        f = [0] * n
        for e, parent, slot in tree[1:]:
            f[e] = rows[f[parent]][images[slot]]
        fa = np.array(f, dtype=np.int64)
        ok = True
        for slot, col in enumerate(gen_cols):
            if not np.array_equal(fa[col], table[fa, images[slot]]):
                ok = False
                break
        if not ok or len(set(f)) != n:
            continue
        if not (fa[table] == table[fa][:, fa]).all():
            continue
        found.append(fa)
    return found


def automorphism_count(g: FiniteGroup) -> int:
    return len(automorphisms(g))


# -- recipes ------------------------------------------------------------------

RECIPE_KINDS = ("cyclic", "dihedral", "quaternion", "alternating", "symmetric",
                "psl2", "product", "semidirect", "cayley")


def from_recipe(recipe: dict) -> FiniteGroup:
    """Build a group from a JSON recipe (see README for the schema)."""
    if not isinstance(recipe, dict) or "kind" not in recipe:
        raise ValueError("recipe must be an object with a 'kind' field")
    kind = recipe["kind"]
    if kind == "cyclic":
        return make_cyclic(int(recipe["n"]))
    if kind == "dihedral":
        return make_dihedral(int(recipe["n"]))
    if kind == "quaternion":
        return make_quaternion()
    if kind == "alternating":
        return make_alternating(int(recipe["n"]))
    if kind == "symmetric":
        return make_symmetric(int(recipe["n"]))
    if kind == "psl2":
        return make_psl2(int(recipe["p"]))
    if kind == "product":
        factors = recipe["factors"]
        if len(factors) < 2:
            raise ValueError("product recipe needs at least two factors")
        grp = from_recipe(factors[0])
        for f in factors[1:]:
            grp = direct_product(grp, from_recipe(f))
        return grp
    if kind == "semidirect":
        normal = from_recipe(recipe["normal"])
        acting = from_recipe(recipe["acting"])
        action = recipe["action"]
        if isinstance(action, dict):
            if "multiplier" in action:
                action = cyclic_action(normal.order, acting.order, int(action["multiplier"]))
            elif action.get("type") == "inversion":
                action = inversion_action(normal)
            elif action.get("type") == "trivial":
                action = [list(range(normal.order))] * acting.order
            else:
                raise ValueError(f"unknown action descriptor {action!r}")
        return make_semidirect(normal, acting, action)
    if kind == "cayley":
        table = recipe["table"]
        names = recipe.get("names")
        return from_table(table, recipe.get("label", "cayley"), names)
    raise ValueError(f"unknown recipe kind {kind!r}")
