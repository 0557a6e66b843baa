from __future__ import annotations

import io
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from coset_topo.errors import BudgetExceeded, CosetTopoError, PruningRefused
from coset_topo.grp import direct_product, make_cyclic, make_semidirect, cyclic_action
from coset_topo.homology import euler_characteristic, euler_characteristic_poset, reduced_homology
from coset_topo.lattice import enumerate_subgroups
from coset_topo.pipeline import load_catalog, GroupContext
from coset_topo.topo import (SimplicialComplex, antichain, atom_cover, barycentric_subdivision,
                             chain, contractibility_certificate, coset_poset,
                             crosscut_prime_complex, invariant_coset_poset, minimal_cover_by_predicate,
                             minimal_cover_skeleton, nerve, nonsaturating_subposet, order_complex,
                             poset_from_relations, poset_product, prune_with_cone_fibers, read_complex,
                             subgroup_poset, write_complex)

import oracles as O
from conftest import ctx_for

# f-vectors of the order complex of C(G), produced by the brute-force oracle and frozen
FROZEN_F = {
    "Q8": (18, 44, 24),
    "S3": (17, 24),
    "D8": (34, 92, 56),
    "A4": (49, 114, 36),
    "Z2xZ4": (26, 68, 40),
    "Z12": (27, 64, 36),
    "S4": (233, 1336, 1800, 576),
    "Z7:Z3": (73, 168),
}


@pytest.mark.parametrize("name", sorted(FROZEN_F))
def test_frozen_f_vectors_reproduced_by_oracle(name):
    t = O.table(ctx_for(name).group)
    assert tuple(O.chains_by_length(O.proper_cosets(t))) == FROZEN_F[name]


@pytest.mark.parametrize("name", sorted(FROZEN_F))
def test_order_complex_f_vectors(name):
    ctx = ctx_for(name)
    ctx.coset_poset.verify()
    k = order_complex(ctx.coset_poset)
    k.verify()
    assert k.f_vector == FROZEN_F[name]


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_prime_cyclic_coset_poset_is_discrete(p):
    ctx = ctx_for(f"Z{p}")
    assert len(ctx.coset_poset) == p
    assert order_complex(ctx.coset_poset).f_vector == (p,)
    assert len(subgroup_poset(ctx.lattice)) == 0
    pr, _ = crosscut_prime_complex(ctx.group, ctx.lattice)
    assert pr.f_vector == (p,)


def test_a5_coset_count_and_subgroup_poset():
    ctx = ctx_for("A5")
    assert len(ctx.coset_poset) == 1018
    assert len(subgroup_poset(ctx.lattice)) == 57


def test_q8_subgroup_poset_is_cone():
    sp = subgroup_poset(ctx_for("Q8").lattice)
    assert contractibility_certificate(list(range(len(sp))), sp) == "cone"


def test_antichain_order_complex_is_discrete():
    assert order_complex(antichain(5)).f_vector == (5,)


def test_order_complex_truncation_and_budget():
    k = order_complex(ctx_for("Q8").coset_poset, max_dim=1)
    assert k.f_vector == (18, 44) and k.truncated_at == 1
    with pytest.raises(BudgetExceeded):
        order_complex(ctx_for("Q8").coset_poset, budget=10)


@pytest.mark.parametrize("name", ["Q8", "S3", "V4", "A4", "D8"])
def test_minimal_cover_one_skeleton_is_complete_graph(name):
    g = ctx_for(name).group
    k = minimal_cover_skeleton(g, ctx_for(name).lattice, 1)
    n = g.order
    assert k.f_vector == (n, n * (n - 1) // 2)


def test_minimal_cover_prime_cyclic_has_no_edges():
    ctx = ctx_for("Z5")
    assert minimal_cover_skeleton(ctx.group, ctx.lattice, 2).f_vector == (5,)


def test_minimal_cover_a5_two_skeleton_exhaustive():
    ctx = ctx_for("A5")
    k = minimal_cover_skeleton(ctx.group, ctx.lattice, 2)
    assert k.f_vector[:2] == (60, 1770)
    t = O.table(ctx.group)
    inv = [row.index(0) for row in t]
    want = [tri for tri in combinations(range(60), 3)
            if len(O.closure(t, [t[inv[tri[0]]][tri[1]], t[inv[tri[0]]][tri[2]]])) < 60]
    assert k.faces(2) == want


@pytest.mark.parametrize("name", ["Q8", "S3", "V4", "Z6", "A4", "D8", "Z12"])
def test_minimal_cover_fast_path_matches_predicate(name):
    ctx = ctx_for(name)
    assert minimal_cover_skeleton(ctx.group, ctx.lattice, 3).as_set() == \
        minimal_cover_by_predicate(ctx.group, 3).as_set()


def test_crosscut_examples():
    q = ctx_for("Q8")
    pr, labels = crosscut_prime_complex(q.group, q.lattice)
    assert pr.f_vector == (4, 6)
    s3 = ctx_for("S3")
    pr, labels = crosscut_prime_complex(s3.group, s3.lattice)
    assert len(labels) == 11
    assert euler_characteristic(pr) == euler_characteristic(order_complex(s3.coset_poset))


def test_nerve_examples():
    assert nerve([{0, 1, 2}]).f_vector == (1,)
    assert nerve([{0}, {1}]).f_vector == (2,)
    assert nerve([{0, 1}, {1, 2}, {0, 2}]).f_vector == (3, 3)


@pytest.mark.parametrize("e", [e for e in load_catalog() if GroupContext.from_recipe(e.recipe).group.order <= 12],
                         ids=lambda e: e.name)
def test_nerve_of_atom_cover_equals_minimal_cover(e):
    ctx = GroupContext.from_recipe(e.recipe)
    nv = nerve(atom_cover(ctx.group, ctx.coset_poset))
    mc = minimal_cover_skeleton(ctx.group, ctx.lattice, None)
    assert nv.as_set() == mc.as_set()


def test_barycentric_subdivision_examples():
    edge = SimplicialComplex.from_facets([[0, 1]])
    assert barycentric_subdivision(edge).f_vector == (3, 2)
    circle = SimplicialComplex.from_facets([[0, 1], [1, 2], [0, 2]])
    assert barycentric_subdivision(circle).f_vector == (6, 6)
    q = order_complex(ctx_for("Q8").coset_poset)
    assert reduced_homology(barycentric_subdivision(q)).betti == reduced_homology(q).betti


def unreduced_chi(p):
    return euler_characteristic_poset(p) + 1


def test_poset_product_examples():
    p = poset_from_relations(4, [(0, 2), (1, 2), (1, 3)])
    pt = antichain(1)
    prod = poset_product(p, pt)
    assert prod.up == p.up
    assert unreduced_chi(poset_product(chain(2), chain(2))) == 1
    assert unreduced_chi(poset_product(antichain(2), antichain(2))) == 4


@st.composite
def small_posets(draw):
    n = draw(st.integers(1, 6))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=8))
    return poset_from_relations(n, [(a, b) for a, b in pairs if a < b])


@settings(max_examples=60, deadline=None)
@given(small_posets(), small_posets())
def test_euler_multiplicative_on_products(p, q):
    prod = poset_product(p, q)
    prod.verify()
    assert unreduced_chi(prod) == unreduced_chi(p) * unreduced_chi(q)


@settings(max_examples=60, deadline=None)
@given(small_posets())
def test_chain_count_matches_order_complex(p):
    assert euler_characteristic_poset(p) == euler_characteristic(order_complex(p))


@pytest.mark.parametrize("a,b,want", [(2, 2, -1), (2, 3, -2), (3, 3, -4)])
def test_nonsaturating_join_identity(a, b, want):
    g = direct_product(make_cyclic(a), make_cyclic(b))
    c0 = nonsaturating_subposet(g, enumerate_subgroups(g))
    assert euler_characteristic_poset(c0) == want


def test_nonsaturating_rejects_degenerate_input():
    g = direct_product(make_cyclic(3), make_cyclic(1))
    with pytest.raises(CosetTopoError):
        nonsaturating_subposet(g, enumerate_subgroups(g))
    with pytest.raises(CosetTopoError):
        nonsaturating_subposet(make_cyclic(6), enumerate_subgroups(make_cyclic(6)))


def test_semidirect_join_identity():
    g = make_semidirect(make_cyclic(7), make_cyclic(3), cyclic_action(7, 3, 2))
    c0 = nonsaturating_subposet(g, enumerate_subgroups(g))
    inv = invariant_coset_poset(g.structure, enumerate_subgroups(g.structure.first))
    # the only proper invariant subgroup of Z/7 is trivial: seven points, and C(Z/3) is three points
    assert len(inv) == 7
    assert euler_characteristic_poset(c0) == -6 * 2


def _tag_indices(ctx, p, tags):
    return [i for i, lab in enumerate(p.labels) if ctx.lattice.tag(lab.subgroup_index) in tags]


def test_prune_a5_klein_four_cosets():
    ctx = ctx_for("A5")
    res = prune_with_cone_fibers(ctx.coset_poset, _tag_indices(ctx, ctx.coset_poset, {"V4"}))
    assert len(res.poset) == 1018 - 75
    res.poset.verify()
    assert euler_characteristic_poset(res.poset) == 1560


def test_prune_psl7_stepwise():
    ctx = ctx_for("PSL7")
    p = ctx.coset_poset
    chi = euler_characteristic_poset(p)
    for tags in ({"C4"}, {"V4"}, {"A4"}, {"C7"}):
        p = prune_with_cone_fibers(p, _tag_indices(ctx, p, tags)).poset
        assert euler_characteristic_poset(p) == chi
    assert len(p) == 4887
    assert order_complex(p).dim == 3


def test_prune_refuses_disconnected_lower_set():
    ctx = ctx_for("S3")
    p = ctx.coset_poset
    top3 = next(i for i, lab in enumerate(p.labels) if ctx.lattice.order(lab.subgroup_index) == 3)
    with pytest.raises(PruningRefused) as info:
        prune_with_cone_fibers(p, [top3])
    assert info.value.offending == top3


@pytest.mark.parametrize("e", load_catalog(), ids=lambda e: e.name)
def test_connectivity_iff_not_cyclic_prime_power(e):
    ctx = GroupContext.from_recipe(e.recipe)
    n = ctx.group.order
    if n == 1 or n > 60:
        return
    b0 = reduced_homology(order_complex(ctx.coset_poset, max_dim=1), 0).betti[0]
    cyclic = ctx.group.is_abelian and max(int(o) for o in ctx.group.element_orders) == n
    p = next(d for d in range(2, n + 1) if n % d == 0)
    m = n
    while m % p == 0:
        m //= p
    assert (b0 == 0) == (not (cyclic and m == 1))


@pytest.mark.parametrize("e", load_catalog(), ids=lambda e: e.name)
def test_two_atoms_never_generating_gives_connectivity(e):
    ctx = GroupContext.from_recipe(e.recipe)
    g = ctx.group
    if g.order > 60 or g.order == 1:
        return
    t = O.table(g)
    inv = [row.index(0) for row in t]
    no_pair_generates = all(len(O.closure(t, [t[inv[a]][b]])) < g.order
                            for a in range(g.order) for b in range(g.order))
    if no_pair_generates:
        assert reduced_homology(order_complex(ctx.coset_poset, max_dim=1), 0).betti[0] == 0


def test_export_roundtrip():
    k = order_complex(ctx_for("Q8").coset_poset)
    buf = io.StringIO()
    write_complex(k, buf, {"model": "delta"})
    buf.seek(0)
    back, header = read_complex(buf)
    assert back.as_set() == k.as_set()
    assert header["model"] == "delta" and header["f_vector"] == [18, 44, 24]
