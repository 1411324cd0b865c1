"""Built-in families of embeddings and the claim-verification harness."""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .abelian import Element, GroupType, Hom, make_group, subgroup_basis
from .embeddings import (
    Embedding,
    Verdict,
    are_isomorphic,
    image_subgroup,
    in_between_check,
    is_indecomposable,
    make_embedding,
)
from .metabelian import (
    center,
    commutator,
    commutator_subgroup,
    construct,
    group_exponent,
    iota_image,
    is_identity,
    is_metabelian,
    round_trip,
)

FAMILY_NAMES = ("birkhoff", "corollary4", "wild_I", "wild_J", "theorem5_a", "theorem5_c")
VERIFIABLE = ("birkhoff", "corollary4", "theorem5_a", "theorem5_c", "wild")


class DecodeError(ValueError):
    """A diagram decode that fails the order/exponent constraints."""


@dataclass(frozen=True)
class FamilySpec:
    name: str
    p: int
    params: tuple[int, ...] = ()

    def __post_init__(self):
        check_params(self.name, self.p, self.params)

    def __str__(self):
        if not self.params:
            return f"{self.name}(p={self.p})"
        return f"{self.name}(p={self.p}, {', '.join(map(str, self.params))})"


def check_params(name: str, p: int, params) -> None:
    if name not in FAMILY_NAMES:
        raise ValueError(f"unknown family {name!r}")
    arity = {"birkhoff": 1, "theorem5_a": 1, "corollary4": 2, "theorem5_c": 2}.get(name, 0)
    if len(params) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(params)}")
    if any(not 0 <= t < p for t in params):
        raise ValueError(f"{name}: parameters must lie in [0, {p})")
    if name == "theorem5_c" and not params[0] < params[1]:
        raise ValueError("theorem5_c requires lambda < mu")


def instances(name: str, p: int) -> list[FamilySpec]:
    if name in ("birkhoff", "theorem5_a"):
        grid = [(lam,) for lam in range(p)]
    elif name == "corollary4":
        grid = list(itertools.product(range(p), repeat=2))
    elif name == "theorem5_c":
        grid = list(itertools.combinations(range(p), 2))
    else:
        grid = [()]
    return [FamilySpec(name, p, g) for g in grid]


def expected_count(name: str, p: int) -> int:
    return {"birkhoff": p, "theorem5_a": p, "corollary4": p * p, "theorem5_c": math.comb(p, 2)}.get(name, 1)


# ---------------------------------------------------------------------------
# constructors given by formulas


def birkhoff(p: int, lam: int) -> Embedding:
    check_params("birkhoff", p, (lam,))
    B = make_group(p, [6, 4, 2])
    u = B.element([p ** 2, p, 1])
    v = B.element([0, p ** 2, p * lam])
    return make_embedding(B, [u, v], gen_names=["u", "v"], coord_names=["x", "y", "z"])


def corollary4(p: int, lam: int, mu: int) -> Embedding:
    check_params("corollary4", p, (lam, mu))
    B = make_group(p, [7, 6, 4, 4, 2, 2])
    mu_star = mu + 1
    u1 = B.element([p ** 3, 0, p, p, 0, 1])
    u2 = B.element([0, p ** 2, lam * p, mu_star * p, lam, mu])
    v1 = B.element([0, 0, p ** 2, 0, p, 0])
    v2 = B.element([0, 0, 0, p ** 2, 0, p])
    return make_embedding(B, [u1, u2, v1, v2], gen_names=["u_1", "u_2", "v_1", "v_2"],
                          coord_names=["x_1", "x_2", "y_1", "y_2", "z_1", "z_2"])


def wild_J(p: int) -> Embedding:
    B = make_group(p, [7, 4, 2])
    g1 = B.element([p ** 3, -p, 0])
    g2 = B.element([0, p, -1])
    return make_embedding(B, [g1, g2], coord_names=["x", "y", "z"])


def wild_inclusion(p: int) -> Hom:
    """I_0 = <px, y, z> ⊆ J_0, with I_0 written on the generators x' = px, y, z."""
    I0 = make_group(p, [6, 4, 2])
    J0 = make_group(p, [7, 4, 2])
    return Hom(I0, J0, ((p, 0, 0), (0, 1, 0), (0, 0, 1)))


def wild_I(p: int) -> Embedding:
    """(I_1 ⊆ I_0) with I_1 = p·J_1, in the coordinates of ``wild_inclusion``."""
    I0 = make_group(p, [6, 4, 2])
    # p·(p^3 x − p y) = p^3 x' − p^2 y and p·(p y − z) = p^2 y − p z
    g1 = I0.element([p ** 3, -p ** 2, 0])
    g2 = I0.element([0, p ** 2, -p])
    return make_embedding(I0, [g1, g2], coord_names=["x'", "y", "z"])


# ---------------------------------------------------------------------------
# diagram data


@lru_cache(maxsize=None)
def load_diagram(name: str) -> dict:
    text = resources.files("metabel").joinpath("data", f"{name}.json").read_text()
    return json.loads(text)


def decode_diagram(data: dict, p: int, values: dict[str, int]):
    """Turn a box-and-bullet picture into (exponents, generator vectors).

    Column c holds one box per unit of height.  A mark at height y sits at
    level round(y) and contributes p^s·x_c, where s counts the boxes of
    column c strictly above that level; a label scales the contribution.
    Marks joined by a line form one generator.
    """
    cols: dict[int, list[int]] = {}
    for x, y in data["boxes"]:
        cols.setdefault(x, []).append(y)
    ncols = max(cols) + 1
    if sorted(cols) != list(range(ncols)):
        raise DecodeError("diagram has an empty column")
    exps = [len(cols[c]) for c in range(ncols)]
    if exps != sorted(exps, reverse=True):
        raise DecodeError("diagram columns are not in descending height")
    gens = []
    for chain in data["chains"]:
        vec = [0] * ncols
        for mark in chain:
            c = math.floor(mark["x"])
            level = round(mark["y"])
            s = sum(1 for y in cols[c] if y > level)
            label = mark.get("label")
            coef = 1 if label is None else values[label]
            vec[c] += coef * p ** s
        gens.append(vec)
    return exps, gens


def _values(data: dict, params) -> dict[str, int]:
    vals = dict(zip(data["params"], params))
    if "mu" in vals:
        vals["mu_star"] = vals["mu"] + 1
    return vals


def from_diagram(name: str, p: int, params=()) -> Embedding:
    data = load_diagram(name)
    exps, gens = decode_diagram(data, p, _values(data, params))
    B = make_group(p, exps)
    return make_embedding(B, [B.element(g) for g in gens], gen_names=data.get("gen_names", ()),
                          coord_names=data.get("coord_names", ()))


def validate_constraints(E: Embedding, constraints: dict) -> list[str]:
    """Violations of the stated exponent and order constraints (empty when valid)."""
    bad = []
    mA = E.A.log_exponent
    if mA != constraints["exp_A"]:
        bad.append(f"exp(A) = p^{mA}, expected p^{constraints['exp_A']}")
    if E.B.log_exponent != constraints["exp_B"]:
        bad.append(f"exp(B) = p^{E.B.log_exponent}, expected p^{constraints['exp_B']}")
    total = E.B.log_order + E.A.log_order + mA
    if total != constraints["log_order"]:
        bad.append(f"|B|·|A|·p^m = p^{total}, expected p^{constraints['log_order']}")
    return bad


def _diagram_family(name: str, p: int, params) -> Embedding:
    check_params(name, p, params)
    E = from_diagram(name, p, params)
    bad = validate_constraints(E, load_diagram(name)["constraints"])
    if bad:
        raise DecodeError("diagram decode unresolved: " + "; ".join(bad))
    return E


def theorem5_a(p: int, lam: int) -> Embedding:
    return _diagram_family("theorem5_a", p, (lam,))


def theorem5_c(p: int, lam: int, mu: int) -> Embedding:
    return _diagram_family("theorem5_c", p, (lam, mu))


def build(spec: FamilySpec) -> Embedding:
    ctor = {
        "birkhoff": birkhoff,
        "corollary4": corollary4,
        "wild_I": wild_I,
        "wild_J": wild_J,
        "theorem5_a": theorem5_a,
        "theorem5_c": theorem5_c,
    }[spec.name]
    return ctor(spec.p, *spec.params)


def decode_self_check(name: str, p: int) -> bool:
    """The decoded picture reproduces the formula generators exactly."""
    ctor = {"birkhoff": birkhoff, "corollary4": corollary4}[name]
    for spec in instances(name, p):
        E = ctor(p, *spec.params)
        D = from_diagram(name, p, spec.params)
        if D.B != E.B or D.gens != E.gens:
            return False
    return True


# ---------------------------------------------------------------------------
# claim verification

EXPECTED = {
    # log order, log exponent of the group, log exponent of the commutator subgroup
    "birkhoff": (22, 6, 4),
    "corollary4": (41, 7, 4),
    "theorem5_a": (31, 7, 3),
    "theorem5_c": (60, 8, 3),
}

REFS = {
    "count": "family size",
    "order": "stated group order",
    "exponent": "stated group exponent",
    "commutator_exponent": "stated exponent of the commutator subgroup",
    "center": "center C(M) = B",
    "commutator_subgroup": "commutator subgroup C_1(M) = ι(A)",
    "metabelian": "C_1(M) contained in C(M)",
    "round_trip": "(C_1(M) ⊆ C(M)) isomorphic to (A ⊆ B)",
    "indecomposable": "indecomposable objects",
    "pairwise_noniso": "pairwise nonisomorphic (reflected to the groups)",
    "commutator_formulas": "displayed commutators [u_1,d], [u_2,d], [v_1,d], [v_2,d]",
    "decode": "diagram decode meets the stated order and exponents",
    "diagram_self_check": "picture decode reproduces the formula generators",
    "I1_is_pJ1": "I_1 = pJ_1",
    "I_in_J": "I ⊆ J",
    "between_I2_J2": "I^2 ⊆ S ⊆ J^2 for the m = 1 family",
}


@dataclass
class Claim:
    id: str
    status: str  # PASS, FAIL, UNDECIDED
    ref: str
    detail: str = ""

    def line(self) -> str:
        return f"claim {self.id} = {self.status}  # ref: {self.ref}"


@dataclass
class InstanceRecord:
    spec: FamilySpec
    log_order: int
    log_exponent: int
    B_type: tuple
    center_type: tuple
    center_ok: bool
    comm_type: tuple
    comm_log_exponent: int
    comm_ok: bool
    metabelian: bool
    indecomposable: bool
    round_trip: str
    formulas_ok: bool | None = None
    seconds: float = 0.0


@dataclass
class ClaimReport:
    family: str
    p: int
    instances: list[InstanceRecord] = field(default_factory=list)
    matrix: dict = field(default_factory=dict)  # (i, j) -> (verdict, method, detail)
    claims: list[Claim] = field(default_factory=list)
    decode_error: str | None = None
    seconds: float = 0.0

    @property
    def status(self) -> str:
        st = {c.status for c in self.claims}
        if "FAIL" in st:
            return "FAIL"
        if "UNDECIDED" in st:
            return "UNDECIDED"
        return "PASS"


def _log_p(n: int, p: int) -> int:
    t = 0
    while n > 1:
        n //= p
        t += 1
    return t


def corollary4_formulas_hold(M, lam: int, mu: int) -> bool:
    """[g, d·δ] for every d in D matches the displayed formulas, with μ_* = μ + 1."""
    p = M.p
    B = M.B
    names = [n for n, _ in M.generators()]
    gens = dict(M.generators())
    delta = gens["d"]
    expected = {
        "u_1": lambda d: [d * p ** 3, 0, d * p, d * p, 0, d],
        "u_2": lambda d: [0, d * p ** 2, d * lam * p, d * p * (mu + 1), d * lam, d * mu],
        "v_1": lambda d: [0, 0, d * p ** 2, 0, d * p, 0],
        "v_2": lambda d: [0, 0, 0, d * p ** 2, 0, d * p],
    }
    if not set(expected) <= set(names):
        return False
    for d in range(M.D.order):
        dd = delta.__class__(delta.a, delta.b, M.D.element([d]))
        for name, f in expected.items():
            c = commutator(M, gens[name], dd)
            if c.a.is_zero() and c.d.is_zero() and c.b == B.element(f(d)):
                continue
            return False
    # every other pair of generators commutes
    for (n1, g), (n2, h) in itertools.combinations(M.generators(), 2):
        if "d" in (n1, n2) and ({n1, n2} - {"d"}) <= set(expected):
            continue
        if not is_identity(commutator(M, g, h)):
            return False
    return True


def check_instance(spec: FamilySpec, sample: int = 2000) -> InstanceRecord:
    t0 = time.perf_counter()
    E = build(spec)
    M = construct(E)
    p = spec.p
    Z, ztrace = center(M, sample=sample)
    C1, ctrace = commutator_subgroup(M)
    rt, iso = round_trip(M)
    formulas = corollary4_formulas_hold(M, *spec.params) if spec.name == "corollary4" else None
    return InstanceRecord(
        spec=spec,
        log_order=M.log_order,
        log_exponent=_log_p(group_exponent(M), p),
        B_type=E.B.exps,
        center_type=Z.type,
        center_ok=ztrace.ok and Z.type == E.B.exps,
        comm_type=C1.type,
        comm_log_exponent=C1.log_exponent,
        comm_ok=ctrace.ok and C1 == iota_image(M),
        metabelian=is_metabelian(M),
        indecomposable=bool(is_indecomposable(E)),
        round_trip=iso.verdict.value,
        formulas_ok=formulas,
        seconds=time.perf_counter() - t0,
    )


def _pair(args):
    s1, s2, cap, method = args
    res = are_isomorphic(build(s1), build(s2), cap=cap, method=method)
    return res.verdict.value, res.method, res.detail


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def verify_claims(name: str, p: int, orbit_cap: int | None = None, sample: int = 2000, jobs: int = 1,
                  method: str = "auto") -> ClaimReport:
    if name not in VERIFIABLE:
        raise ValueError(f"unknown family {name!r}; choose from {', '.join(VERIFIABLE)}")
    t0 = time.perf_counter()
    rep = ClaimReport(name, p)
    if name == "wild":
        _verify_wild(rep, p)
        rep.seconds = time.perf_counter() - t0
        return rep
    prefix = f"{name}.p{p}"

    def add(key, status, detail=""):
        rep.claims.append(Claim(f"{prefix}.{key}", status, REFS[key], detail))

    specs = instances(name, p)
    if name in ("birkhoff", "corollary4"):
        add("diagram_self_check", _status(decode_self_check(name, p)))
    if name.startswith("theorem5"):
        try:
            build(specs[0])
            add("decode", "PASS")
        except DecodeError as exc:
            rep.decode_error = str(exc)
            add("decode", "UNDECIDED", str(exc))
            rep.seconds = time.perf_counter() - t0
            return rep
    add("count", _status(len(specs) == expected_count(name, p)), f"{len(specs)} instances")

    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        mapper = pool.map if pool else map
        rep.instances = list(mapper(check_instance, specs, [sample] * len(specs)))
        pairs = list(itertools.combinations(range(len(specs)), 2))
        results = list(mapper(_pair, [(specs[i], specs[j], orbit_cap, method) for i, j in pairs]))
    finally:
        if pool:
            pool.shutdown()
    for (i, j), r in zip(pairs, results):
        rep.matrix[(i, j)] = r
        rep.matrix[(j, i)] = r

    lo, le, lc = EXPECTED[name]
    recs = rep.instances
    add("order", _status(all(r.log_order == lo for r in recs)), f"p^{lo}")
    add("exponent", _status(all(r.log_exponent == le for r in recs)), f"p^{le}")
    add("commutator_exponent", _status(all(r.comm_log_exponent == lc for r in recs)), f"p^{lc}")
    add("center", _status(all(r.center_ok for r in recs)))
    add("commutator_subgroup", _status(all(r.comm_ok for r in recs)))
    add("metabelian", _status(all(r.metabelian for r in recs)))
    add("round_trip", _status(all(r.round_trip == Verdict.ISO.value for r in recs)))
    add("indecomposable", _status(all(r.indecomposable for r in recs)))
    if name == "corollary4":
        add("commutator_formulas", _status(all(r.formulas_ok for r in recs)))
    verdicts = [v for v, _, _ in results]
    if Verdict.ISO.value in verdicts:
        st = "FAIL"
    elif Verdict.UNDECIDED.value in verdicts:
        st = "UNDECIDED"
    else:
        st = "PASS"
    add("pairwise_noniso", st, f"{len(pairs)} pairs")
    rep.seconds = time.perf_counter() - t0
    return rep


def _verify_wild(rep: ClaimReport, p: int) -> None:
    prefix = f"wild.p{p}"

    def add(key, status, detail=""):
        rep.claims.append(Claim(f"{prefix}.{key}", status, REFS[key], detail))

    I, J = wild_I(p), wild_J(p)
    inc = wild_inclusion(p)
    pJ1 = subgroup_basis(J.B, [p * g for g in J.A.generators])
    add("I1_is_pJ1", _status(image_subgroup(inc, I.A) == pJ1))
    r = in_between_check(J, I, J, 1)
    add("I_in_J", {"TRUE": "PASS", "FALSE": "FAIL"}.get(r.verdict, "UNDECIDED"), r.detail)
    if p == 2:
        r = in_between_check(corollary4(p, 0, 0), I, J, 2)
        add("between_I2_J2", {"TRUE": "PASS", "FALSE": "FAIL"}.get(r.verdict, "UNDECIDED"), r.detail)


def render_report(rep: ClaimReport, timing: bool = True) -> str:
    out = [f"family {rep.family}, p = {rep.p}"]
    if rep.decode_error:
        out.append(f"  {rep.decode_error}")
    if rep.instances:
        out.append(f"  {'instance':<28}{'order':>8}{'exp':>6}{'C(M)':>20}{'C_1(M)':>16}{'c-exp':>7}{'indec':>7}")
        for r in rep.instances:
            out.append(
                f"  {str(r.spec):<28}{'p^' + str(r.log_order):>8}{'p^' + str(r.log_exponent):>6}"
                f"{str(list(r.center_type)):>20}{str(list(r.comm_type)):>16}"
                f"{'p^' + str(r.comm_log_exponent):>7}{'yes' if r.indecomposable else 'no':>7}"
            )
        n = len(rep.instances)
        if n > 1:
            out.append("  pairwise isomorphism (embedding side; the construction reflects isomorphisms):")
            sym = {"ISO": "=", "NOT-ISO": ".", "UNDECIDED": "?"}
            for i in range(n):
                row = "".join("=" if i == j else sym[rep.matrix[(i, j)][0]] for j in range(n))
                out.append(f"    {row}")
            methods = sorted({m for (_, m, _) in rep.matrix.values()})
            out.append(f"  methods: {', '.join(methods)}")
    if timing:
        out.append(f"  time: {rep.seconds:.1f} s")
    out.append("")
    out.extend(c.line() for c in rep.claims)
    return "\n".join(out)
