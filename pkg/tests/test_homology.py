from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from coset_topo.errors import TruncationError
from coset_topo.grp import direct_product, make_cyclic
from coset_topo.homology import (betti_one_certified, boundary_matrices, chain_counts,
                                 euler_characteristic, euler_characteristic_poset, integer_invariants,
                                 rank_mod_p, reduced_homology, smith_normal_form)
from coset_topo.lattice import enumerate_subgroups
from coset_topo.topo import (SimplicialComplex, coset_poset, minimal_cover_skeleton, order_complex)

import oracles as O
from conftest import ctx_for

# a 6-vertex triangulation of the real projective plane
RP2 = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
       [1, 2, 4], [2, 3, 5], [1, 3, 4], [2, 4, 5], [1, 3, 5]]


def test_boundary_examples():
    edge = SimplicialComplex.from_facets([[0, 1]])
    d1 = boundary_matrices(edge, 0)[1]
    assert sorted(d1.cols[0]) == [(0, -1), (1, 1)]
    circle = SimplicialComplex.from_facets([[0, 1], [1, 2], [0, 2]])
    assert integer_invariants(boundary_matrices(circle, 0)[1])[0] == 2
    q = order_complex(ctx_for("Q8").coset_poset)
    mats = boundary_matrices(q, 1)
    assert (mats[1].n_rows, mats[1].n_cols) == (18, 44)
    assert (mats[2].n_rows, mats[2].n_cols) == (44, 24)


def test_boundary_needs_deep_enough_complex():
    k = order_complex(ctx_for("Q8").coset_poset, max_dim=1)
    with pytest.raises(TruncationError):
        boundary_matrices(k, 1)


def test_snf_examples():
    assert smith_normal_form([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == ([1, 1, 1], 3)
    assert smith_normal_form([[2, 0], [0, 3]]) == ([1, 6], 2)
    assert smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == ([2, 6, 12], 3)
    assert smith_normal_form([[0, 0], [0, 0]])[1] == 0


def random_unimodular(n, rng):
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-2, 2)
        m[i] = [a + c * b for a, b in zip(m[i], m[j])]
    return m


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_snf_recovers_planted_diagonal(seed):
    rng = random.Random(seed)
    d = [[0] * 6 for _ in range(6)]
    for i, v in enumerate([1, 2, 6]):
        d[i][i] = v
    m = O.integer_matrix_product(O.integer_matrix_product(random_unimodular(6, rng), d),
                                 random_unimodular(6, rng))
    factors, rank = smith_normal_form(m)
    assert rank == 3 and factors[:3] == [1, 2, 6]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=2, max_size=3))
def test_snf_matches_determinantal_divisors(rows):
    factors, rank = smith_normal_form(rows)
    assert factors[:rank] == O.invariant_factors_by_minors(rows)


def test_torsion_detected_on_projective_plane():
    prof = reduced_homology(SimplicialComplex.from_facets(RP2))
    assert prof.betti == {0: 0, 1: 0, 2: 0}
    assert prof.torsion[1] == [2]
    assert prof.euler_reduced == 0


def test_q8_homology():
    prof = reduced_homology(order_complex(ctx_for("Q8").coset_poset))
    assert prof.betti == {0: 0, 1: 3, 2: 0} and prof.torsion_free


def test_a5_homology():
    prof = reduced_homology(order_complex(ctx_for("A5").coset_poset))
    assert prof.betti == {0: 0, 1: 0, 2: 1560, 3: 0} and prof.torsion_free
    assert prof.euler_reduced == 1560


@pytest.mark.parametrize("q,p,n", [(2, 3, 1), (3, 2, 1), (2, 3, 2), (5, 2, 2), (3, 5, 1)])
def test_h1_of_cyclic_times_prime_power(q, p, n):
    g = direct_product(make_cyclic(q), make_cyclic(p ** n))
    prof = reduced_homology(order_complex(coset_poset(g, enumerate_subgroups(g)), max_dim=2), 1)
    assert prof.betti[1] == (p - 1) * (q - 1)


def test_point_and_empty():
    pt = SimplicialComplex.from_facets([[0]])
    assert euler_characteristic(pt) == 0
    assert reduced_homology(pt).betti == {0: 0}
    empty = order_complex(ctx_for("Z1").coset_poset)
    assert reduced_homology(empty).betti[-1] == 1


@pytest.mark.parametrize("name", ["Q8", "S3", "D8", "A4", "Z12", "V4"])
def test_betti_matches_rational_oracle(name):
    k = order_complex(ctx_for(name).coset_poset)
    assert reduced_homology(k).betti_list(k.dim) == O.betti_q(k.simplices)


@pytest.mark.parametrize("name", ["Q8", "S4", "A4", "Z7:Z3"])
def test_gfp_path_agrees_with_integers(name):
    k = order_complex(ctx_for(name).coset_poset)
    assert reduced_homology(k, torsion=False).betti == reduced_homology(k).betti


def test_rank_mod_p_cap():
    k = order_complex(ctx_for("A4").coset_poset)
    m = boundary_matrices(k, 1)[2]
    full = rank_mod_p(m)
    assert rank_mod_p(m, cap=5) == 5 <= full


def test_betti_one_certified():
    a5 = ctx_for("A5")
    assert betti_one_certified(minimal_cover_skeleton(a5.group, a5.lattice, 2)) == (0, "gfp-certified")
    q8 = ctx_for("Q8")
    assert betti_one_certified(minimal_cover_skeleton(q8.group, q8.lattice, 2)) == (3, "integer-snf")


@pytest.mark.parametrize("name", ["Q8", "S3", "A4", "S4", "A5"])
def test_chain_counts_equal_f_vector(name):
    p = ctx_for(name).coset_poset
    assert tuple(chain_counts(p)) == order_complex(p).f_vector
    assert euler_characteristic_poset(p) == euler_characteristic(order_complex(p))


@st.composite
def random_complexes(draw):
    n = draw(st.integers(1, 7))
    facets = draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=4), min_size=1, max_size=8))
    return SimplicialComplex.from_facets([sorted(f) for f in facets])


@settings(max_examples=60, deadline=None)
@given(random_complexes())
def test_homology_matches_oracle_and_euler(k):
    prof = reduced_homology(k)
    assert prof.betti_list(k.dim) == O.betti_q(k.simplices)
    assert prof.euler_reduced == sum((-1) ** d * b for d, b in prof.betti.items())
