from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coset_topo.errors import InvariantViolation
from coset_topo.grp import ElementSet, automorphism_count, make_cyclic
from coset_topo.lattice import (Phi_ab, chief_series, enumerate_subgroups, is_solvable, mobius,
                                mobius_by_euler, normalizer, phi_ab, phi_ab_bruteforce, prob_zeta,
                                subgroup_poset_components, verify_lattice)

import oracles as O
from conftest import ctx_for

SMALL = ["Q8", "S3", "D8", "A4", "V4", "Z2xZ4", "Z12", "S4", "Z7:Z3", "S3xZ2"]


@pytest.mark.parametrize("name", SMALL)
def test_subgroups_match_brute_force(name):
    ctx = ctx_for(name)
    want = O.all_subgroups(O.table(ctx.group))
    got = {frozenset(s) for s in ctx.lattice.element_lists}
    assert got == want
    verify_lattice(ctx.lattice)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_prime_cyclic_has_two_subgroups(p):
    assert len(enumerate_subgroups(make_cyclic(p))) == 2


def test_a5_maximal_census():
    lat = ctx_for("A5").lattice
    tags = sorted(lat.tag(i) for i in lat.maximal_indices)
    assert tags.count("A4") == 5 and tags.count("D10") == 6 and tags.count("D6") == 10
    assert len(lat) == 59


def test_psl7_census():
    census = ctx_for("PSL7").lattice.census()
    assert census["C4"] == 21 and census["C3"] == 28 and census["C7"] == 8
    assert census["D8"] == 21 and census["D6"] == 28 and census["S4"] == 14
    assert census["C7:C3"] == 8 and census["V4"] == 14 and census["A4"] == 14
    # the group has 21 involutions; 84 appears only as a coefficient in the counting formula
    assert census["C2"] == 21


def test_normalizers():
    a5 = ctx_for("A5").group
    assert len(normalizer(a5, ElementSet.of(O.closure(O.table(a5), [a5.index("(1 2 3 4 5)")])))) == 10
    assert len(normalizer(a5, a5.all_elements)) == 60
    g = ctx_for("PSL7").group
    three = next(i for i in range(168) if g.element_orders[i] == 3)
    assert len(normalizer(g, ElementSet.of(O.closure(O.table(g), [three])))) == 6


@pytest.mark.parametrize("name", SMALL + ["A5"])
def test_mobius_definition_and_euler_crosscheck(name):
    lat = ctx_for(name).lattice
    mu = mobius(lat)
    top = lat.top
    assert mu[top] == 1
    for i in lat.maximal_indices:
        assert mu[i] == -1
    for h in range(len(lat)):
        assert sum(mu[k] for k in range(len(lat)) if lat.leq(h, k)) == (1 if h == top else 0)
    if len(lat) < 80:
        for h in range(len(lat)):
            if h != top:
                assert mobius_by_euler(lat, h) == mu[h]


@pytest.mark.parametrize("name", ["Q8", "S3", "A4", "S4", "Z12", "Z7:Z3"])
def test_mobius_matches_brute_force(name):
    ctx = ctx_for(name)
    t = O.table(ctx.group)
    subs = list(O.all_subgroups(t))
    mu_o = O.mobius_brute(subs, frozenset(range(len(t))))
    for i, elems in enumerate(ctx.lattice.element_lists):
        assert ctx.mu[i] == mu_o[frozenset(elems)]


def test_psl7_mobius_table():
    ctx = ctx_for("PSL7")
    want = {"S4": -1, "C7:C3": -1, "D8": 1, "D6": 1, "C3": 2, "C2": -4,
            "C7": 0, "C4": 0, "V4": 0, "A4": 0, "C1": 0, "PSL2(7)": 1}
    lat = ctx.lattice
    for i, m in enumerate(ctx.mu):
        assert m == want[lat.tag(i)], lat.tag(i)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_prob_zeta_prime_cyclic(p):
    lat = enumerate_subgroups(make_cyclic(p))
    mu = mobius(lat)
    for s in (-2, -1, 1, 2):
        assert prob_zeta(lat, mu, s) == 1 - Fraction(p) ** (-s)
    assert prob_zeta(lat, mu, -1) == 1 - p


@pytest.mark.parametrize("name", ["Q8", "S3", "A4", "Z12", "Z7:Z3"])
def test_prob_zeta_matches_oracle(name):
    ctx = ctx_for(name)
    for s in (-1, 1, 2):
        assert ctx.zeta(s) == O.prob_zeta_brute(O.table(ctx.group), s)


def test_prob_zeta_is_generation_probability():
    ctx = ctx_for("S3")
    g = ctx.group
    t = O.table(g)
    hits = sum(len(O.closure(t, [a, b])) == 6 for a in range(6) for b in range(6))
    assert ctx.zeta(2) == Fraction(hits, 36)


def test_zeta_at_minus_one_known_values():
    assert ctx_for("A5").zeta(-1) == -1560
    assert ctx_for("PSL7").zeta(-1) == -2856
    assert ctx_for("Q8").zeta(-1) == 3


def test_psl7_counting_invariants():
    ctx = ctx_for("PSL7")
    lat, mu = ctx.lattice, ctx.mu
    assert phi_ab(lat, 2, 3, mu=mu) == 336
    assert phi_ab(lat, 2, 4, mu=mu) == 336
    assert Phi_ab(lat, 2, 7, 336, mu=mu) == 3
    assert phi_ab(lat, 2, 7, mu=mu) == phi_ab_bruteforce(ctx.group, 2, 7) == 1008


@pytest.mark.parametrize("name,a,b", [("A5", 2, 3), ("A5", 2, 5), ("A5", 3, 5), ("S4", 2, 3), ("S4", 2, 4), ("A4", 2, 3)])
def test_phi_matches_brute_force_and_is_aut_divisible(name, a, b):
    ctx = ctx_for(name)
    val = phi_ab(ctx.lattice, a, b, mu=ctx.mu)
    assert val == phi_ab_bruteforce(ctx.group, a, b)
    aut = automorphism_count(ctx.group)
    assert Phi_ab(ctx.lattice, a, b, aut, mu=ctx.mu) * aut == val


def test_Phi_rejects_non_integral():
    ctx = ctx_for("A5")
    with pytest.raises(InvariantViolation):
        Phi_ab(ctx.lattice, 2, 3, 7, mu=ctx.mu)


@pytest.mark.parametrize("name,d", [("Z2", 1), ("Z3", 1), ("Z4", 1), ("Z9", 1), ("V4", 2), ("Z6", 2),
                                    ("S3", 2), ("Q8", 2), ("D8", 2), ("A4", 2), ("S4", 3), ("Z7:Z3", 2)])
def test_chief_series_complemented_count(name, d):
    assert chief_series(ctx_for(name).lattice).d == d


@pytest.mark.parametrize("name,d", [("Q8", 2), ("V4", 2), ("D8", 2), ("S4", 3), ("Z12", 2), ("S3xZ2", 3)])
def test_coset_poset_rank_from_chief_series(name, d):
    """For solvable G the coset poset is a bouquet of (d-1)-spheres, so (-1)^(d-1) χ̃ >= 0."""
    ctx = ctx_for(name)
    assert chief_series(ctx.lattice).d == d
    assert (-1) ** (d - 1) * ctx.chi_coset() >= 0


def test_solvability():
    assert not is_solvable(ctx_for("A5").group)
    assert is_solvable(ctx_for("S4").group)
    assert not is_solvable(ctx_for("PSL7").group)


def test_subgroup_poset_components():
    assert subgroup_poset_components(enumerate_subgroups(make_cyclic(15))) == 2
    assert subgroup_poset_components(ctx_for("Q8").lattice) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40))
def test_cyclic_mobius_is_number_theoretic(n):
    lat = enumerate_subgroups(make_cyclic(n))
    mu = mobius(lat)

    def mu_nt(k):
        out, m, p = 1, k, 2
        while m > 1:
            if m % p == 0:
                m //= p
                if m % p == 0:
                    return 0
                out = -out
            p += 1
        return out

    for i in range(len(lat)):
        assert mu[i] == mu_nt(n // lat.order(i))
    assert len(lat) == sum(1 for k in range(1, n + 1) if n % k == 0)
