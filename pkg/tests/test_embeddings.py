import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import small_embeddings
from metabel.abelian import GroupMismatch, Hom, compose, make_group, subgroup_basis
from metabel.algebra import FpAlgebra
from metabel.embeddings import (
    Verdict,
    abstract_basis,
    are_isomorphic,
    direct_sum,
    endo_ring,
    find_monomorphism,
    hom_log_order,
    in_between_check,
    invariant_profile,
    is_indecomposable,
    is_morphism,
    make_embedding,
    permutation_hom,
    permuted,
    summand_projection,
    verify_certificate,
)
from metabel.families import birkhoff, corollary4, wild_I, wild_J


def simple(p, bexps, gens):
    B = make_group(p, bexps)
    return make_embedding(B, [B.element(g) for g in gens])


def test_make_embedding_examples():
    E = simple(3, [2, 1], [])
    assert E.A.type == () and E.B.exps == (2, 1)
    for p in (2, 3):
        b = birkhoff(p, 0)
        assert b.B.exps == (6, 4, 2) and b.A.type == (4, 2)
        J = wild_J(p)
        assert J.B.exps == (7, 4, 2)
    with pytest.raises(GroupMismatch):
        make_embedding(make_group(2, [2]), [make_group(2, [3]).element([1])])
    with pytest.raises(ValueError):
        make_embedding(make_group(2, [3]), [], bound=2)


def test_direct_sum_examples():
    p = 3
    E = birkhoff(p, 1)
    T = make_embedding(make_group(p, []), [])
    S = direct_sum(E, T)
    assert S.B == E.B and S.A == E.A
    a = simple(p, [1], [])
    b = simple(p, [1], [[1]])
    ab = direct_sum(a, b)
    assert ab.B.exps == (1, 1) and ab.A.type == (1,)
    I = wild_I(p)
    II = direct_sum(I, I)
    assert II.B.exps == (6, 6, 4, 4, 2, 2)
    # J_1 = <p^3x - py, py - z> has type [4,3], so I_1 = pJ_1 has type [3,2]
    assert I.A.type == (3, 2) and II.A.log_order == 10
    with pytest.raises(GroupMismatch):
        direct_sum(birkhoff(2, 0), birkhoff(3, 0))


@given(small_embeddings(max_log2=6), small_embeddings(max_log2=6))
def test_profile_additive(E1, E2):
    if E1.p != E2.p:
        return
    n = 4
    E1 = make_embedding(E1.B, E1.generators, bound=n)
    E2 = make_embedding(E2.B, E2.generators, bound=n)
    S = direct_sum(E1, E2)
    P, P1, P2 = invariant_profile(S), invariant_profile(E1), invariant_profile(E2)
    assert P.alpha == tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(P1.alpha, P2.alpha))


def test_profile_of_zero_subgroup():
    E = simple(2, [3, 1], [])
    P = invariant_profile(E)
    assert all(x == 0 for row in P.alpha for x in row)
    assert P.type_quotient == (3, 1)


def test_birkhoff_profiles_computed():
    P0, P1 = invariant_profile(birkhoff(2, 0)), invariant_profile(birkhoff(2, 1))
    assert P0.type_A == P1.type_A == (4, 2)


def test_endo_ring_examples():
    p = 5
    R = endo_ring(simple(p, [1], []))
    assert R.dim == 1
    R2 = endo_ring(simple(p, [1, 1], []))
    assert R2.dim == 4
    assert R2.algebra.is_associative() and R2.algebra.is_unital()
    assert is_indecomposable(birkhoff(2, 0))


def _random_endo(E, rng):
    """A random valid endomorphism respecting A, by rejection from the brute-force list."""
    return rng.choice(oracles.brute_endomorphisms(E.B, [g.coords for g in E.A.generators]))


@pytest.mark.parametrize("p, bexps, gens", [
    (2, [3, 1], [[2, 1]]),
    (2, [2, 2, 1], [[2, 1, 1]]),
    (3, [2, 1], [[3, 1]]),
    (2, [4, 2], [[4, 1]]),
])
def test_endo_ring_spans_all_endomorphisms(p, bexps, gens):
    E = simple(p, bexps, gens)
    R = endo_ring(E)
    ends = oracles.brute_endomorphisms(E.B, gens)
    assert len(ends) == p ** hom_log_order(E, E)
    for f in ends:
        assert R.coords(f) is not None
        assert is_morphism(f, E, E)


def test_endo_ring_sampled_span():
    E = corollary4(2, 1, 0)
    R = endo_ring(E)
    rng = random.Random(0)
    for _ in range(50):
        coeffs = [rng.randrange(E.p ** t) for t in R.orders]
        f = R.lift(coeffs)
        assert is_morphism(f, E, E)
        assert R.coords(f) is not None


def test_indecomposable_examples():
    p = 3
    assert is_indecomposable(simple(p, [1], [[1]]))
    E1, E2 = birkhoff(p, 0), simple(p, [2], [[p]])
    S = direct_sum(E1, E2)
    d = is_indecomposable(S)
    assert not d
    e = d.witness
    assert compose(e, e) == e and is_morphism(e, S, S)
    P = summand_projection(E1, E2)
    assert compose(P, P) == P and is_morphism(P, S, S)
    assert not is_indecomposable(make_embedding(make_group(2, []), []))


@pytest.mark.parametrize("lam, mu", list(itertools.product(range(2), repeat=2)))
def test_corollary4_indecomposable(lam, mu):
    assert is_indecomposable(corollary4(2, lam, mu))


def _brute_ok(E):
    return 0 < E.B.rank and oracles.hom_space_size(E.B, E.B) <= 2 ** 18


@settings(max_examples=80)
@given(small_embeddings(max_log2=8))
def test_indecomposable_against_brute_force(E):
    if not _brute_ok(E):
        return
    gens = [g.coords for g in E.A.generators]
    brute = oracles.brute_idempotent(E.B, gens)
    assert bool(is_indecomposable(E)) == (brute is None)


@settings(max_examples=80)
@given(small_embeddings(max_log2=8), st.randoms())
def test_iso_against_brute_force(E, rnd):
    if not _brute_ok(E):
        return
    B = E.B
    # a second subgroup of the same type, half the time an automorphic image
    if rnd.random() < 0.5:
        f = rnd.choice(oracles.brute_endomorphisms(B, []))
        if not oracles._injective(np.array([f.matrix]), B, B)[0]:
            f = Hom.identity(B)
        gens2 = [f(g).coords for g in E.A.generators]
    else:
        gens2 = [tuple(rnd.randrange(m) for m in B.mods) for _ in range(len(E.A.generators))]
    E2 = make_embedding(B, [B.element(g) for g in gens2])
    res = are_isomorphic(E, E2)
    brute = oracles.brute_isomorphic(B, [g.coords for g in E.A.generators], gens2)
    assert res.verdict is not Verdict.UNDECIDED
    assert (res.verdict is Verdict.ISO) == (brute is not None)
    if res.certificate is not None:
        assert verify_certificate(res.certificate, E, E2)
    orbit = are_isomorphic(E, E2, method="orbit")
    assert orbit.verdict == res.verdict


def test_iso_examples():
    E = birkhoff(2, 0)
    r = are_isomorphic(E, E)
    assert r.verdict is Verdict.ISO and r.certificate == Hom.identity(E.B)
    assert are_isomorphic(birkhoff(2, 0), birkhoff(2, 1)).verdict is Verdict.NONE
    assert are_isomorphic(birkhoff(2, 0), birkhoff(2, 1), method="orbit").verdict is Verdict.NONE


def test_permuted_copy_gives_permutation_certificate():
    E = corollary4(2, 1, 0)
    perm = [0, 1, 3, 2, 5, 4]
    E2 = permuted(E, perm)
    r = are_isomorphic(E, E2)
    assert r.verdict is Verdict.ISO
    assert verify_certificate(permutation_hom(E.B, perm), E, E2)
    assert verify_certificate(r.certificate, E, E2)


def test_orbit_cap_gives_undecided():
    # these two share their invariant profile, so the orbit search is reached
    E1, E2 = corollary4(2, 0, 0), corollary4(2, 0, 1)
    r = are_isomorphic(E1, E2, cap=10, method="orbit")
    assert r.verdict is Verdict.UNDECIDED


def test_abstract_basis():
    t, iota = abstract_basis(simple(2, [3], []))
    assert t == ()
    for p in (2, 3):
        for lam in range(p):
            E = birkhoff(p, lam)
            t, iota = abstract_basis(E)
            assert t == (4, 2)
            cols = [tuple(r[j] for r in iota.matrix) for j in range(2)]
            assert cols == [g.coords for g in E.generators]
    E = simple(2, [3, 2], [[2, 0], [4, 0]])
    t, iota = abstract_basis(E)
    assert t == (2,)


def test_wild_types_against_enumeration():
    J, I = wild_J(2), wild_I(2)
    SJ = oracles.span_set(J.B, [g.coords for g in J.generators])
    SI = oracles.span_set(I.B, [g.coords for g in I.generators])
    assert oracles.type_of_set(J.B, SJ) == J.A.type == (4, 3)
    assert oracles.type_of_set(I.B, SI) == I.A.type == (3, 2)


def test_wild_relations():
    for p in (2, 3):
        J, I = wild_J(p), wild_I(p)
        assert J.B.order == p ** 13
        assert I.B.exponent == p ** 6
        # I_1 = p J_1 inside J_0
        from metabel.families import wild_inclusion

        inc = wild_inclusion(p)
        scaled = subgroup_basis(J.B, [p * g for g in J.A.generators])
        assert subgroup_basis(J.B, [inc(g) for g in I.A.generators]) == scaled
        assert is_morphism(inc, I, J)


def test_in_between_examples():
    p = 2
    I, J = wild_I(p), wild_J(p)
    assert in_between_check(I, I, J, 1)
    assert in_between_check(J, I, J, 1)
    r = in_between_check(corollary4(2, 0, 0), I, J, 2)
    assert r.verdict == "TRUE"
    for f in r.maps:
        assert oracles._injective(np.array([f.matrix]), f.source, f.target)[0]


def test_find_monomorphism_obstruction():
    E1 = simple(2, [3], [[1]])
    E2 = simple(2, [3], [])
    assert find_monomorphism(E1, E2).verdict == "FALSE"
    assert find_monomorphism(E2, E1).verdict == "TRUE"


def _matrix_algebra(p, mats):
    """Structure constants of the span of the given matrices (assumed closed)."""
    flat = [np.array(m).reshape(-1) % p for m in mats]
    A = np.array(flat).T
    D = len(mats)
    table = np.zeros((D, D, D), dtype=np.int64)
    for a, b in itertools.product(range(D), repeat=2):
        prod = (np.array(mats[a]) @ np.array(mats[b])).reshape(-1) % p
        sol = None
        for c in itertools.product(range(p), repeat=D):
            if np.array_equal(A @ np.array(c) % p, prod):
                sol = c
                break
        assert sol is not None
        table[a, b] = sol
    one = next(c for c in itertools.product(range(p), repeat=D)
               if np.array_equal(A @ np.array(c) % p, np.eye(len(mats[0]), dtype=np.int64).reshape(-1)))
    return FpAlgebra(p, table, one)


def test_locality_on_known_algebras():
    p = 3
    E = lambda i, j: [[int((r, c) == (i, j)) for c in range(2)] for r in range(2)]  # noqa: E731
    full = _matrix_algebra(p, [E(0, 0), E(0, 1), E(1, 0), E(1, 1)])
    res = full.analyse_locality()
    assert not res.local
    e = res.idempotent
    assert np.array_equal(full.mul(e, e), e % p)
    upper = _matrix_algebra(p, [E(0, 0), E(0, 1), E(1, 1)])
    assert not upper.analyse_locality().local
    # F_9 as companion matrices of x^2 + 1
    ident, c = [[1, 0], [0, 1]], [[0, p - 1], [1, 0]]
    f9 = _matrix_algebra(p, [ident, c])
    r = f9.analyse_locality()
    assert r.local and r.residue_degree == 2
    dual = _matrix_algebra(p, [ident, E(0, 1)])
    r = dual.analyse_locality()
    assert r.local and r.residue_degree == 1
