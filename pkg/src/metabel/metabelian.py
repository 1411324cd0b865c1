"""The metabelian group G(A ⊆ B) = (A ⊕ B) ⋊ D with D = Z/p^m, p^m = exp(A).

Elements are triples (a, b, d) with a in the abstract group A, b in B and d in
D; the group law (written additively) is

    (a, b, d) + (a', b', d') = (a + a', b + d·ι(a') + b', d + d').
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import comb

from .abelian import (
    CapExceeded,
    Element,
    GroupMismatch,
    GroupType,
    Hom,
    SubgroupBasis,
    apply_hom,
    contains,
    enumerate_elements,
    is_injective,
    make_group,
    subgroup_basis,
    whole_group,
)
from .embeddings import Embedding, IsoResult, abstract_basis, are_isomorphic, make_embedding

DEFAULT_EXPONENT_CAP = 1 << 24


@dataclass(frozen=True)
class MetaGroup:
    E: Embedding
    typeA: tuple[int, ...]
    iota: Hom
    m: int
    D: GroupType

    @property
    def p(self) -> int:
        return self.E.p

    @property
    def A(self) -> GroupType:
        return self.iota.source

    @property
    def B(self) -> GroupType:
        return self.E.B

    @property
    def log_order(self) -> int:
        return self.A.log_order + self.B.log_order + self.m

    @property
    def order(self) -> int:
        return self.p ** self.log_order

    def is_abelian(self) -> bool:
        return self.m == 0

    def identity(self) -> "MElement":
        return MElement(self.A.zero(), self.B.zero(), self.D.zero())

    def element(self, a, b, d) -> "MElement":
        dd = self.D.element([d] if self.D.rank else [])
        return MElement(self.A.element(a), self.B.element(b), dd)

    def generators(self) -> list[tuple[str, "MElement"]]:
        """Standard generators: the A-basis, the B-basis and the generator of D."""
        out = []
        names = _a_names(self)
        for i in range(self.A.rank):
            out.append((names[i], MElement(self.A.gen(i), self.B.zero(), self.D.zero())))
        cn = _coord_names(self.E)
        for j in range(self.B.rank):
            out.append((cn[j], MElement(self.A.zero(), self.B.gen(j), self.D.zero())))
        if self.D.rank:
            out.append(("d", MElement(self.A.zero(), self.B.zero(), self.D.gen(0))))
        return out

    def random_element(self, rng: random.Random) -> "MElement":
        def rnd(G):
            return G.element([rng.randrange(m) for m in G.mods])

        return MElement(rnd(self.A), rnd(self.B), rnd(self.D))


@dataclass(frozen=True)
class MElement:
    a: Element
    b: Element
    d: Element

    @property
    def dval(self) -> int:
        return self.d.coords[0] if self.d.coords else 0

    def __repr__(self):
        return f"({list(self.a.coords)}, {list(self.b.coords)}, {self.dval})"


def _a_names(M: MetaGroup) -> list[str]:
    names = list(M.E.gen_names)
    if len(names) == M.A.rank and _supplied_basis(M):
        order = sorted(range(len(names)), key=lambda i: -_log(M, M.E.generators[i]))
        return [names[i] for i in order]
    return [f"a_{i + 1}" for i in range(M.A.rank)]


def _supplied_basis(M: MetaGroup) -> bool:
    cols = {M.iota.column(j) for j in range(M.A.rank)}
    return cols == {g.coords for g in M.E.generators}


def _log(M: MetaGroup, g: Element) -> int:
    from .abelian import element_order

    n, t = element_order(g), 0
    while n > 1:
        n //= M.p
        t += 1
    return t


def _coord_names(E: Embedding) -> list[str]:
    if len(E.coord_names) == E.B.rank:
        return list(E.coord_names)
    return [f"x_{j + 1}" for j in range(E.B.rank)]


def construct(E: Embedding) -> MetaGroup:
    typeA, iota = abstract_basis(E)
    m = typeA[0] if typeA else 0
    D = make_group(E.p, [m]) if m else GroupType(E.p, ())
    return MetaGroup(E, typeA, iota, m, D)


def _check(M: MetaGroup, g: MElement):
    if g.a.group != M.A or g.b.group != M.B or g.d.group != M.D:
        raise GroupMismatch("element does not belong to this group")


def mop(M: MetaGroup, g: MElement, h: MElement) -> MElement:
    _check(M, g)
    _check(M, h)
    twist = g.dval * apply_hom(M.iota, h.a)
    return MElement(g.a + h.a, g.b + twist + h.b, g.d + h.d)


def mneg(M: MetaGroup, g: MElement) -> MElement:
    _check(M, g)
    return MElement(-g.a, -g.b + g.dval * apply_hom(M.iota, g.a), -g.d)


def power(M: MetaGroup, n: int, g: MElement) -> MElement:
    """n·g via the closed form (na, nb + C(n,2)·d·ι(a), nd)."""
    _check(M, g)
    if n < 0:
        return power(M, -n, mneg(M, g))
    twist = (comb(n, 2) * g.dval) * apply_hom(M.iota, g.a)
    return MElement(n * g.a, n * g.b + twist, n * g.d)


def commutator(M: MetaGroup, g: MElement, h: MElement) -> MElement:
    """[g, h] = h + g − h − g, which equals (0, d_h·ι(a_g) − d_g·ι(a_h), 0)."""
    _check(M, g)
    _check(M, h)
    b = h.dval * apply_hom(M.iota, g.a) - g.dval * apply_hom(M.iota, h.a)
    return MElement(M.A.zero(), b, M.D.zero())


def commutator_product(M: MetaGroup, g: MElement, h: MElement) -> MElement:
    """The same commutator computed as the four-factor product."""
    return mop(M, mop(M, mop(M, h, g), mneg(M, h)), mneg(M, g))


def is_identity(g: MElement) -> bool:
    return g.a.is_zero() and g.b.is_zero() and g.d.is_zero()


def morder(M: MetaGroup, g: MElement) -> int:
    p = M.p
    top = max(M.B.log_exponent, M.m) + 1
    for t in range(top + 1):
        if is_identity(power(M, p ** t, g)):
            return p ** t
    raise AssertionError("element order exceeds the group exponent bound")


# ---------------------------------------------------------------------------
# exponent


def _iota_killed_by(M: MetaGroup, n: int) -> bool:
    """n·ι(A) = 0, checked on the columns of ι."""
    return all(smul_vec_zero(M.B, n, M.iota.column(j)) for j in range(M.A.rank))


def smul_vec_zero(G: GroupType, n: int, vec) -> bool:
    return all((n * x) % m == 0 for x, m in zip(vec, G.mods))


def group_exponent(M: MetaGroup) -> int:
    """Least p^t killing every element.

    p^t·(a,b,d) = (p^t a, p^t b + C(p^t,2)·d·ι(a), p^t d) vanishes for all
    elements iff p^t kills A, B and D and C(p^t,2)·ι(A) = 0 (take b = 0 and
    d = 1).  The last condition is linear in a, so the columns of ι suffice.
    """
    p = M.p
    t = max(M.B.log_exponent, M.m)
    while not _iota_killed_by(M, comb(p ** t, 2)):
        t += 1
    return p ** t


def group_exponent_enumerated(M: MetaGroup, cap: int = DEFAULT_EXPONENT_CAP) -> int:
    """Same value by iterating over all pairs (a, d); refuses when |A|·|D| > cap."""
    p = M.p
    need = M.A.order * M.D.order
    if need > cap:
        raise CapExceeded(need, cap)
    t = max(M.B.log_exponent, M.m)
    pairs = [(a, d) for a in enumerate_elements(M.A, cap) for d in enumerate_elements(M.D, cap)]
    while True:
        n = p ** t
        zero_b = M.B.zero()
        if all(is_identity(power(M, n, MElement(a, zero_b, d))) for a, d in pairs):
            return n
        t += 1


# ---------------------------------------------------------------------------
# center and commutator subgroup


@dataclass
class Trace:
    """A list of checked statements; ``ok`` is their conjunction."""

    steps: list[tuple[str, bool]] = field(default_factory=list)

    def check(self, text: str, value: bool) -> bool:
        self.steps.append((text, bool(value)))
        return bool(value)

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.steps)

    def __str__(self):
        return "\n".join(f"[{'ok' if v else 'FAILED'}] {t}" for t, v in self.steps)


def _commutes_with_generators(M: MetaGroup, g: MElement, gens) -> MElement | None:
    for _, x in gens:
        if mop(M, g, x) != mop(M, x, g):
            return x
    return None


def center(M: MetaGroup, cap: int = 1 << 16, sample: int = 2000, seed: int = 0) -> tuple[SubgroupBasis, Trace]:
    """The center {0} ⊕ B ⊕ {0} with a checked derivation.

    (a, b, d) is central iff d·ι(a') = d'·ι(a) for all (a', d').  With d' = 0
    this forces d·ι(A) = 0, and the annihilator of ι(A) in D is trivial
    because exp ι(A) = p^m.  Then d' = 1 forces ι(a) = 0, so a = 0 since ι
    is injective.  Conversely elements of B commute with every generator.
    """
    tr = Trace()
    p = M.p
    Z = whole_group(M.B)
    gens = M.generators()
    # annihilator of ι(A) in D: least s with p^s ι(A) = 0
    s = 0
    while not _iota_killed_by(M, p ** s):
        s += 1
    tr.check(f"p^s·ι(A) = 0 exactly from s = {s}, and |D| = p^{M.m}, so ann_D(ι(A)) is trivial", s == M.m)
    tr.check("ι is injective, so ι(a) = 0 forces a = 0", M.A.rank == 0 or is_injective(M.iota))
    tr.check(
        "every element of B commutes with every generator",
        all(_commutes_with_generators(M, x, gens) is None for name, x in gens if x.a.is_zero() and x.d.is_zero()),
    )
    if M.order <= cap:
        extra = 0
        for a in enumerate_elements(M.A, cap):
            for d in enumerate_elements(M.D, cap):
                if a.is_zero() and d.is_zero():
                    continue
                # b does not affect centrality: [(a,b,d), x] is independent of b
                g = MElement(a, M.B.zero(), d)
                if _commutes_with_generators(M, g, gens) is None:
                    extra += 1
        tr.check("exhaustive scan finds no central element outside B", extra == 0)
    elif sample:
        rng = random.Random(seed)
        extra = 0
        for _ in range(sample):
            g = M.random_element(rng)
            if g.a.is_zero() and g.d.is_zero():
                continue
            if _commutes_with_generators(M, g, gens) is None:
                extra += 1
        tr.check(f"sampled scan of {sample} elements finds no central element outside B", extra == 0)
    return Z, tr


def iota_image(M: MetaGroup) -> SubgroupBasis:
    return subgroup_basis(M.B, [Element(M.B, M.iota.column(j)) for j in range(M.A.rank)])


def commutator_subgroup(M: MetaGroup) -> tuple[SubgroupBasis, Trace]:
    """Subgroup of B generated by the commutators of the standard generators."""
    tr = Trace()
    gens = M.generators()
    comms = []
    for (_, g), (_, h) in itertools.combinations(gens, 2):
        c = commutator(M, g, h)
        tr_ok = c == commutator_product(M, g, h)
        if not tr_ok:
            tr.check("closed-form commutator agrees with the four-factor product", False)
        comms.append(c)
    C1 = subgroup_basis(M.B, [c.b for c in comms])
    image = iota_image(M)
    tr.check("generated subgroup equals ι(A) (mutual containment)", C1 <= image and image <= C1)
    tr.check("every generator commutator lies in {0} ⊕ B ⊕ {0}, which is central",
             all(c.a.is_zero() and c.d.is_zero() for c in comms))
    tr.check("central generator commutators make [·,·] bilinear, so they generate the commutator subgroup",
             tr.ok)
    return C1, tr


def is_metabelian(M) -> bool:
    """Commutator subgroup contained in the center.

    Also accepts a raw operation table (list of rows, ``table[i][j]`` = i·j)
    of an arbitrary finite group, decided by enumeration.
    """
    if isinstance(M, MetaGroup):
        C1, _ = commutator_subgroup(M)
        Z, _ = center(M, sample=0)
        return all(contains(Z, g) for g in C1.generators)
    return _table_is_metabelian(M)


def _table_is_metabelian(table) -> bool:
    n = len(table)
    e = next(i for i in range(n) if all(table[i][j] == j for j in range(n)))
    inv = [next(j for j in range(n) if table[i][j] == e) for i in range(n)]
    centre = {z for z in range(n) if all(table[z][g] == table[g][z] for g in range(n))}
    comms = {table[table[inv[g]][inv[h]]][table[g][h]] for g in range(n) for h in range(n)}
    closure = set(comms) | {e}
    while True:
        new = {table[a][b] for a in closure for b in closure} - closure
        if not new:
            break
        closure |= new
    return closure <= centre


def round_trip(M: MetaGroup) -> tuple[Embedding, IsoResult]:
    """(C_1(M) ⊆ C(M)) read back as an embedding, compared with the source."""
    C1, _ = commutator_subgroup(M)
    Z, _ = center(M, sample=0)
    assert Z == whole_group(M.B)
    back = make_embedding(M.B, C1.generators, bound=M.E.bound)
    return back, are_isomorphic(back, M.E)


# ---------------------------------------------------------------------------
# rendering


def render_b(M: MetaGroup, vec, dname: str = "d") -> str:
    """Write ``d·vec`` in additive notation, e.g. "(d p^2) y_1 + (d p) z_1"."""
    names = _coord_names(M.E)
    p = M.p
    terms = []
    for x, name in zip(vec, names):
        if not x:
            continue
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        parts = [dname]
        if x != 1:
            parts.append(str(x))
        if v == 1:
            parts.append("p")
        elif v > 1:
            parts.append(f"p^{v}")
        terms.append(f"({' '.join(parts)}) {name}")
    return " + ".join(terms) if terms else "0"


def commutator_table(M: MetaGroup) -> list[tuple[str, str, MElement]]:
    """Nonzero commutators [g, h] among the standard generators."""
    out = []
    for (n1, g), (n2, h) in itertools.combinations(M.generators(), 2):
        c = commutator(M, g, h)
        if not is_identity(c):
            out.append((n1, n2, c))
    return out
