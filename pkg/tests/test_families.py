import itertools
import math

import pytest

import oracles
from metabel.families import (
    EXPECTED,
    DecodeError,
    FamilySpec,
    birkhoff,
    build,
    corollary4,
    decode_diagram,
    decode_self_check,
    expected_count,
    from_diagram,
    instances,
    load_diagram,
    render_report,
    theorem5_a,
    theorem5_c,
    validate_constraints,
    verify_claims,
    wild_I,
    wild_J,
)
from metabel.metabelian import construct, group_exponent


def test_birkhoff_examples():
    E = birkhoff(2, 0)
    assert E.B.order == 2 ** 12 and E.A.order == 2 ** 6
    S = oracles.span_set(E.B, [g.coords for g in E.generators])
    assert len(S) == 2 ** 6
    E3 = birkhoff(3, 2)
    assert E3.B.log_exponent <= 6
    with pytest.raises(ValueError):
        birkhoff(2, 2)


def test_corollary4_examples():
    for p in (2, 3):
        for lam, mu in itertools.product(range(p), repeat=2):
            E = corollary4(p, lam, mu)
            from metabel.abelian import element_order

            assert [element_order(g) for g in E.generators] == [p ** 4, p ** 4, p ** 2, p ** 2]
    E = corollary4(2, 0, 0)
    assert E.A.log_order == 12
    u2 = corollary4(2, 1, 1).generators[1]
    # 4x_2 + 2y_1 + 4y_2 + z_1 + z_2, reduced mod (2^6, 2^4, 2^4, 2^2, 2^2)
    assert u2.coords == (0, 4, 2, 4, 1, 1)
    with pytest.raises(ValueError):
        corollary4(3, 0, 3)


def test_wild_examples():
    J = wild_J(2)
    assert J.B.order == 2 ** 13 and J.A.type == (4, 3)
    I = wild_I(2)
    assert I.B.exponent == 2 ** 6


def test_family_spec_ranges():
    FamilySpec("theorem5_c", 3, (0, 1))
    with pytest.raises(ValueError):
        FamilySpec("theorem5_c", 2, (1, 0))
    with pytest.raises(ValueError):
        FamilySpec("nosuch", 2, ())
    with pytest.raises(ValueError):
        FamilySpec("birkhoff", 2, (0, 1))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_counts(p):
    assert len(instances("birkhoff", p)) == expected_count("birkhoff", p) == p
    assert len(instances("corollary4", p)) == expected_count("corollary4", p) == p * p
    assert len(instances("theorem5_a", p)) == expected_count("theorem5_a", p) == p
    assert len(instances("theorem5_c", p)) == expected_count("theorem5_c", p) == math.comb(p, 2)


@pytest.mark.parametrize("name", ["birkhoff", "corollary4"])
@pytest.mark.parametrize("p", [2, 3, 5])
def test_decode_self_check(name, p):
    assert decode_self_check(name, p)


def test_decode_rejects_bad_pictures():
    data = {"boxes": [[0, 0], [2, 0]], "chains": []}
    with pytest.raises(DecodeError):
        decode_diagram(data, 2, {})
    data = {"boxes": [[0, 0], [1, 0], [1, 1]], "chains": []}
    with pytest.raises(DecodeError):
        decode_diagram(data, 2, {})


def test_decode_convention_on_a_small_picture():
    # one column of height 3; a mark at the bottom level has two boxes above it
    data = {"boxes": [[0, 0], [0, 1], [0, 2], [1, 0]], "chains": [[{"x": 0.5, "y": 0}, {"x": 1.5, "y": 0}]]}
    exps, gens = decode_diagram(data, 3, {})
    assert exps == [3, 1] and gens == [[9, 1]]


@pytest.mark.parametrize("name", ["theorem5_a", "theorem5_c"])
@pytest.mark.parametrize("p", [2, 3])
def test_theorem5_constraints(name, p):
    c = load_diagram(name)["constraints"]
    for spec in instances(name, p):
        E = build(spec)
        assert validate_constraints(E, c) == []
        M = construct(E)
        lo, le, lc = EXPECTED[name]
        assert M.log_order == lo
        assert group_exponent(M) == p ** le
        assert E.A.log_exponent == lc


def test_theorem5_examples():
    M = construct(theorem5_c(3, 0, 1))
    assert M.order == 3 ** 60 and group_exponent(M) == 3 ** 8
    for lam in range(2):
        M = construct(theorem5_a(2, lam))
        assert M.order == 2 ** 31 and group_exponent(M) == 2 ** 7
    with pytest.raises(ValueError):
        theorem5_c(2, 1, 0)


def test_broken_decode_is_reported():
    E = from_diagram("theorem5_a", 2, (0,))
    assert validate_constraints(E, {"exp_A": 2, "exp_B": 7, "log_order": 31})


def test_verify_birkhoff_report():
    rep = verify_claims("birkhoff", 2)
    assert rep.status == "PASS"
    assert len(rep.instances) == 2
    assert all(r.log_order == 22 and r.indecomposable for r in rep.instances)
    assert rep.matrix[(0, 1)][0] == "NOT-ISO"
    text = render_report(rep, timing=False)
    assert "claim birkhoff.p2.pairwise_noniso = PASS" in text


def test_verify_corollary4_p2():
    rep = verify_claims("corollary4", 2)
    assert rep.status == "PASS", render_report(rep)
    assert len(rep.instances) == 4
    assert all(rep.matrix[(i, j)][0] == "NOT-ISO" for i in range(4) for j in range(4) if i != j)


def test_verify_theorem5_c_p2_has_one_instance():
    rep = verify_claims("theorem5_c", 2)
    assert rep.status == "PASS" and len(rep.instances) == 1 and not rep.matrix


def test_verify_wild():
    rep = verify_claims("wild", 2)
    assert rep.status == "PASS"
    assert {c.id for c in rep.claims} == {"wild.p2.I1_is_pJ1", "wild.p2.I_in_J", "wild.p2.between_I2_J2"}


def test_orbit_cap_makes_report_undecided():
    rep = verify_claims("corollary4", 2, orbit_cap=5, method="orbit")
    assert rep.status == "UNDECIDED"


def test_unknown_family():
    with pytest.raises(ValueError):
        verify_claims("nosuch", 2)
