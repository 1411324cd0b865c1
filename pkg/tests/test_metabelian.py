import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_embeddings
from metabel.abelian import CapExceeded, GroupMismatch, contains, make_group, subgroup_basis, whole_group
from metabel.embeddings import Verdict, make_embedding
from metabel.families import birkhoff, corollary4
from metabel.metabelian import (
    MElement,
    center,
    commutator,
    commutator_product,
    commutator_subgroup,
    commutator_table,
    construct,
    group_exponent,
    group_exponent_enumerated,
    iota_image,
    is_identity,
    is_metabelian,
    mneg,
    mop,
    morder,
    power,
    render_b,
    round_trip,
)


def all_melements(M):
    from metabel.abelian import enumerate_elements

    return [MElement(a, b, d) for a in enumerate_elements(M.A) for b in enumerate_elements(M.B)
            for d in enumerate_elements(M.D)]


def iterated(M, n, g):
    out = M.identity()
    for _ in range(n):
        out = mop(M, out, g)
    return out


def test_mop_examples():
    M = construct(birkhoff(3, 1))
    rng = random.Random(0)
    g = M.random_element(rng)
    assert mop(M, g, M.identity()) == g == mop(M, M.identity(), g)
    a1, a2 = M.A.element([1, 2]), M.A.element([4, 1])
    zb, zd = M.B.zero(), M.D.zero()
    assert mop(M, MElement(a1, zb, zd), MElement(a2, zb, zd)) == MElement(a1 + a2, zb, zd)
    one = M.D.element([1])
    got = mop(M, MElement(M.A.zero(), zb, one), MElement(a1, zb, zd))
    iota_a = M.B.element([sum(M.iota.matrix[i][j] * a1.coords[j] for j in range(2)) for i in range(3)])
    assert got == MElement(a1, iota_a, one)
    with pytest.raises(GroupMismatch):
        mop(M, g, construct(birkhoff(2, 0)).identity())


def test_group_axioms_sampled():
    M = construct(corollary4(2, 1, 1))
    rng = random.Random(1)
    for _ in range(300):
        g, h, k = (M.random_element(rng) for _ in range(3))
        assert mop(M, mop(M, g, h), k) == mop(M, g, mop(M, h, k))
        assert is_identity(mop(M, g, mneg(M, g))) and is_identity(mop(M, mneg(M, g), g))


def test_mneg_examples():
    M = construct(birkhoff(2, 0))
    assert mneg(M, M.identity()) == M.identity()
    a = M.A.element([3, 1])
    assert mneg(M, MElement(a, M.B.zero(), M.D.zero())) == MElement(-a, M.B.zero(), M.D.zero())


def test_power_examples():
    M = construct(birkhoff(2, 1))
    rng = random.Random(2)
    g = M.random_element(rng)
    assert power(M, 0, g) == M.identity()
    assert power(M, 2, g) == mop(M, g, g)
    assert power(M, -3, g) == mneg(M, iterated(M, 3, g))


@pytest.mark.parametrize("family", [birkhoff(3, 2), corollary4(2, 0, 1)])
def test_power_and_commutator_closed_forms(family):
    M = construct(family)
    rng = random.Random(3)
    for _ in range(200):
        g, h = M.random_element(rng), M.random_element(rng)
        n = rng.randrange(0, 65)
        assert power(M, n, g) == iterated(M, n, g)
        assert commutator(M, g, h) == commutator_product(M, g, h)
    assert is_identity(commutator(M, g, g))


def test_orders_examples():
    M = construct(birkhoff(2, 0))
    assert morder(M, M.identity()) == 1
    d = dict(M.generators())["d"]
    assert morder(M, d) == 2 ** 4
    for p in (2, 3):
        M4 = construct(corollary4(p, 1, 0))
        gens = dict(M4.generators())
        assert [morder(M4, gens[n]) for n in ("u_1", "u_2", "v_1", "v_2")] == [p ** 4, p ** 4, p ** 2, p ** 2]


def test_cor4_commutator_rendering():
    M = construct(corollary4(2, 1, 1))
    gens = dict(M.generators())
    c = commutator(M, gens["v_1"], gens["d"])
    assert render_b(M, c.b.coords) == "(d p^2) y_1 + (d p) z_1"
    table = {(a, b): c for a, b, c in commutator_table(M)}
    assert ("v_1", "d") in table


def test_exponents_examples():
    for p in (2, 3):
        M = construct(birkhoff(p, 0))
        assert group_exponent(M) == p ** 6
        assert M.order == p ** 22
        M4 = construct(corollary4(p, 0, 0))
        assert group_exponent(M4) == p ** 7
        assert M4.order == p ** 41
    Z = construct(make_embedding(make_group(3, [2, 1]), []))
    assert group_exponent(Z) == 9 and Z.is_abelian()


@settings(max_examples=60)
@given(small_embeddings(max_log2=8))
def test_exponent_matches_enumeration(E):
    M = construct(E)
    assert group_exponent(M) == group_exponent_enumerated(M)


def test_exponent_enumeration_cap():
    with pytest.raises(CapExceeded):
        group_exponent_enumerated(construct(corollary4(3, 0, 0)), cap=1000)


def test_exponent_p2_binomial_case():
    # p = 2: C(2^t, 2) = 2^{t-1}(2^t - 1) can leave ι(A) alive when p^m is the largest exponent
    B = make_group(2, [2])
    M = construct(make_embedding(B, [B.element([1])]))
    assert group_exponent(M) == group_exponent_enumerated(M) == 8


def _table(M):
    els = all_melements(M)
    index = {g: i for i, g in enumerate(els)}
    return els, [[index[mop(M, g, h)] for h in els] for g in els]


@settings(max_examples=40)
@given(small_embeddings(max_log2=5))
def test_center_and_commutators_by_enumeration(E):
    M = construct(E)
    if M.order > 2 ** 9:
        return
    els, table = _table(M)
    n = len(els)
    centre = {els[z] for z in range(n) if all(table[z][g] == table[g][z] for g in range(n))}
    Z, tr = center(M)
    assert tr.ok
    assert centre == {MElement(M.A.zero(), b, M.D.zero()) for b in _b_elements(M, Z)}
    comms = set()
    for g, h in itertools.product(els, repeat=2):
        c = commutator(M, g, h)
        assert c == commutator_product(M, g, h)
        comms.add(c.b.coords)
    C1, tr = commutator_subgroup(M)
    assert tr.ok
    span = subgroup_basis(M.B, [M.B.element(v) for v in comms])
    assert span == C1 == iota_image(M)
    assert is_metabelian(M) and is_metabelian(table)


def _b_elements(M, Z):
    from metabel.abelian import enumerate_elements

    return [b for b in enumerate_elements(M.B) if contains(Z, b)]


def test_zero_subgroup_gives_abelian_group():
    E = make_embedding(make_group(2, [3, 1]), [])
    M = construct(E)
    assert M.is_abelian() and M.order == E.B.order
    Z, tr = center(M)
    assert tr.ok and Z == whole_group(E.B)
    C1, _ = commutator_subgroup(M)
    assert C1.type == ()
    assert is_metabelian(M)
    back, res = round_trip(M)
    assert back.A == E.A and res.verdict is Verdict.ISO


def test_symmetric_group_control():
    perms = list(itertools.permutations(range(3)))
    index = {q: i for i, q in enumerate(perms)}
    table = [[index[tuple(a[b[i]] for i in range(3))] for b in perms] for a in perms]
    assert not is_metabelian(table)
    # a cyclic group passes
    z4 = [[(i + j) % 4 for j in range(4)] for i in range(4)]
    assert is_metabelian(z4)


def test_center_sampled_on_birkhoff():
    M = construct(birkhoff(2, 0))
    Z, tr = center(M, sample=20000, seed=4)
    assert tr.ok and Z == whole_group(M.B)


@pytest.mark.parametrize("lam", [0, 1])
def test_round_trip_birkhoff(lam):
    M = construct(birkhoff(2, lam))
    back, res = round_trip(M)
    assert res.verdict is Verdict.ISO


@settings(max_examples=50)
@given(small_embeddings(max_log2=10))
def test_round_trip_random(E):
    back, res = round_trip(construct(E))
    assert res.verdict is Verdict.ISO


def test_render_b():
    M = construct(corollary4(3, 2, 1))
    gens = dict(M.generators())
    c = commutator(M, gens["u_2"], gens["d"])
    assert render_b(M, c.b.coords) == "(d p^2) x_2 + (d 2 p) y_1 + (d 2 p) y_2 + (d 2) z_1 + (d) z_2"
    assert render_b(M, [0] * 6) == "0"
