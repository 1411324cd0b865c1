"""Finite abelian p-groups B = Z/p^{e1} ⊕ ... ⊕ Z/p^{ek}.

Elements are residue vectors with respect to the standard cyclic generators.
Subgroups are held in a canonical echelon form, so equal subgroups compare
equal and hash equally.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from sympy import isprime

from . import _kernels as K

MAX_MODULUS = 2 ** 63


class GroupMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GroupType:
    """Isomorphism type of a finite abelian p-group, exponents weakly decreasing."""

    p: int
    exps: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or not isprime(self.p):
            raise ValueError(f"not a prime: {self.p!r}")
        exps = tuple(int(e) for e in self.exps)
        if any(e < 1 for e in exps):
            raise ValueError(f"exponents must be positive: {list(exps)}")
        if list(exps) != sorted(exps, reverse=True):
            raise ValueError("exponents must be weakly decreasing; use make_group")
        if exps and self.p ** exps[0] > MAX_MODULUS:
            raise ValueError(f"modulus {self.p}^{exps[0]} exceeds 2^63")
        object.__setattr__(self, "exps", exps)

    @property
    def rank(self) -> int:
        return len(self.exps)

    @property
    def log_order(self) -> int:
        return sum(self.exps)

    @property
    def order(self) -> int:
        return self.p ** self.log_order

    @property
    def log_exponent(self) -> int:
        return self.exps[0] if self.exps else 0

    @property
    def exponent(self) -> int:
        return self.p ** self.log_exponent

    @cached_property
    def mods(self) -> tuple[int, ...]:
        return tuple(self.p ** e for e in self.exps)

    def zero(self) -> "Element":
        return Element(self, (0,) * self.rank)

    def element(self, coords: Iterable[int]) -> "Element":
        return Element(self, tuple(coords))

    def gen(self, i: int) -> "Element":
        c = [0] * self.rank
        c[i] = 1
        return Element(self, tuple(c))

    def __str__(self):
        return f"(p={self.p}, {list(self.exps)})"


def make_group(p: int, exps: Sequence[int]) -> GroupType:
    """Build a GroupType, sorting the exponent vector descending."""
    exps = [int(e) for e in exps]
    if any(e < 1 for e in exps):
        raise ValueError(f"exponents must be positive: {exps}")
    return GroupType(p, tuple(sorted(exps, reverse=True)))


@dataclass(frozen=True)
class Element:
    group: GroupType
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.group.rank:
            raise GroupMismatch(
                f"{len(self.coords)} coordinates for a group of rank {self.group.rank}"
            )
        red = tuple(int(c) % m for c, m in zip(self.coords, self.group.mods))
        object.__setattr__(self, "coords", red)

    def _check(self, other: "Element"):
        if not isinstance(other, Element) or other.group != self.group:
            raise GroupMismatch("elements live in different groups")

    def __add__(self, other):
        self._check(other)
        return Element(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return Element(self.group, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return Element(self.group, tuple(-a for a in self.coords))

    def __rmul__(self, n: int):
        return Element(self.group, tuple(n * a for a in self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __repr__(self):
        return f"Element{list(self.coords)}"


def add(g: Element, h: Element) -> Element:
    return g + h


def neg(g: Element) -> Element:
    return -g


def smul(n: int, g: Element) -> Element:
    return n * g


def element_order(g: Element) -> int:
    return g.group.p ** K.order_exp(g.coords, g.group.exps, g.group.p)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class Hom:
    """Homomorphism given by a matrix acting on coordinate columns.

    ``matrix[i][j]`` is the i-th target coordinate of the image of the j-th
    source generator, reduced mod p^{target.exps[i]}.
    """

    source: GroupType
    target: GroupType
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.source.p != self.target.p:
            raise GroupMismatch("source and target have different primes")
        m = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if len(m) != self.target.rank or any(len(r) != self.source.rank for r in m):
            raise GroupMismatch("matrix shape does not match source/target ranks")
        m = tuple(
            tuple(x % mod for x in row) for row, mod in zip(m, self.target.mods)
        )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, G: GroupType) -> "Hom":
        return cls(G, G, tuple(tuple(int(i == j) for j in range(G.rank)) for i in range(G.rank)))

    @classmethod
    def zero(cls, source: GroupType, target: GroupType) -> "Hom":
        return cls(source, target, tuple((0,) * source.rank for _ in range(target.rank)))

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.matrix)

    def __call__(self, g: Element) -> Element:
        return apply_hom(self, g)

    def __matmul__(self, other: "Hom") -> "Hom":
        return compose(self, other)


def hom_entry_shift(source_exp: int, target_exp: int) -> int:
    """Power of p forced on an entry from a Z/p^source_exp summand into Z/p^target_exp."""
    return max(0, target_exp - source_exp)


def validate_hom(h: Hom) -> bool:
    p = h.source.p
    for i, ei in enumerate(h.target.exps):
        for j, ej in enumerate(h.source.exps):
            s = hom_entry_shift(ej, ei)
            if s and h.matrix[i][j] % (p ** s):
                return False
    return True


def _apply(matrix, vec, mods):
    return [sum(a * b for a, b in zip(row, vec)) % m for row, m in zip(matrix, mods)]


def apply_hom(h: Hom, g: Element) -> Element:
    if g.group != h.source:
        raise GroupMismatch("element is not in the source group")
    if not validate_hom(h):
        raise ValueError("matrix does not define a homomorphism")
    return Element(h.target, tuple(_apply(h.matrix, g.coords, h.target.mods)))


def compose(g: Hom, f: Hom) -> Hom:
    """g ∘ f."""
    if f.target != g.source:
        raise GroupMismatch("cannot compose: f.target != g.source")
    cols = [_apply(g.matrix, f.column(j), g.target.mods) for j in range(f.source.rank)]
    return Hom(f.source, g.target, tuple(zip(*cols)) if cols else tuple(() for _ in range(g.target.rank)))


def is_invertible(h: Hom) -> bool:
    """Bijectivity test: a map of finite p-groups is injective iff it is injective on the socle."""
    if h.source.exps != h.target.exps:
        return False
    return _socle_rank(h) == h.source.rank


def _socle_rank(h: Hom) -> int:
    p = h.source.p
    rows = []
    for j, ej in enumerate(h.source.exps):
        img = _apply(h.matrix, [p ** (ej - 1) if i == j else 0 for i in range(h.source.rank)],
                     h.target.mods)
        row = []
        for x, ei in zip(img, h.target.exps):
            # socle coordinates: x = p^{ei-1} * y
            row.append((x // p ** (ei - 1)) % p)
        rows.append(row)
    return K.rank_mod(rows, p)


def is_injective(h: Hom) -> bool:
    if not h.source.rank:
        return True
    return _socle_rank(h) == h.source.rank


def inverse_hom(h: Hom) -> Hom:
    """Two-sided inverse found by solving f(x) = e_j for each generator."""
    if not is_invertible(h):
        raise ValueError("homomorphism is not invertible")
    G = h.source
    solver = K.Solver([h.column(j) for j in range(G.rank)], G.exps, G.p)
    cols = []
    for j in range(G.rank):
        c = solver.coords([int(i == j) for i in range(G.rank)])
        assert c is not None
        cols.append([x % m for x, m in zip(c, G.mods)])
    inv = Hom(G, G, tuple(zip(*cols)))
    assert compose(inv, h) == Hom.identity(G) and compose(h, inv) == Hom.identity(G)
    return inv


# ---------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True)
class SubgroupBasis:
    """Canonical echelon basis of a subgroup.

    ``rows[j]`` has first nonzero entry ``p**pivots[j]`` in column j, or is
    all zeros when ``pivots[j] == exps[j]``.  Entries above a pivot are
    reduced modulo that pivot.  The subgroup order is
    ``p ** Σ (exps[j] - pivots[j])``.
    """

    group: GroupType
    rows: tuple[tuple[int, ...], ...]
    pivots: tuple[int, ...]

    @property
    def key(self) -> tuple:
        return self.rows

    @property
    def generators(self) -> list[Element]:
        return [Element(self.group, r) for r in self.rows if any(r)]

    @property
    def log_order(self) -> int:
        return sum(e - t for e, t in zip(self.group.exps, self.pivots))

    @property
    def order(self) -> int:
        return self.group.p ** self.log_order

    @cached_property
    def type(self) -> tuple[int, ...]:
        return subgroup_type(self)

    @property
    def log_exponent(self) -> int:
        t = self.type
        return t[0] if t else 0

    def __contains__(self, g: Element) -> bool:
        return contains(self, g)

    def __le__(self, other: "SubgroupBasis") -> bool:
        return all(contains(other, g) for g in self.generators)


def _from_echelon(G: GroupType, basis, tvals) -> SubgroupBasis:
    rows = tuple(tuple(r) if r is not None else (0,) * G.rank for r in basis)
    return SubgroupBasis(G, rows, tuple(tvals))


def subgroup_from_vectors(G: GroupType, vecs) -> SubgroupBasis:
    basis, tvals = K.howell([list(v) for v in vecs], G.exps, G.p)
    return _from_echelon(G, basis, tvals)


def subgroup_basis(G: GroupType, gens: Iterable[Element]) -> SubgroupBasis:
    vecs = []
    for g in gens:
        if g.group != G:
            raise GroupMismatch(f"generator {g} is not in {G}")
        vecs.append(g.coords)
    return subgroup_from_vectors(G, vecs)


def whole_group(G: GroupType) -> SubgroupBasis:
    return subgroup_basis(G, [G.gen(i) for i in range(G.rank)])


def trivial_subgroup(G: GroupType) -> SubgroupBasis:
    return subgroup_basis(G, [])


def contains(b: SubgroupBasis, g: Element) -> bool:
    if g.group != b.group:
        raise GroupMismatch("element and subgroup live in different groups")
    return contains_vec(b, g.coords)


def contains_vec(b: SubgroupBasis, vec) -> bool:
    G = b.group
    basis = [r if any(r) else None for r in b.rows]
    red = K.reduce_vector(vec, basis, b.pivots, G.exps, G.p)
    return red is not None


def scaled(b: SubgroupBasis, n: int) -> SubgroupBasis:
    """n·A."""
    G = b.group
    return subgroup_from_vectors(G, [[n * x for x in r] for r in b.rows])


def _type_from_layers(p, log_orders):
    """Partition from ``log|p^i A|`` for i = 0, 1, ...; conjugate partition read off the differences."""
    conj = [log_orders[i] - log_orders[i + 1] for i in range(len(log_orders) - 1)]
    parts = []
    for i, c in enumerate(conj):
        nxt = conj[i + 1] if i + 1 < len(conj) else 0
        parts.extend([i + 1] * (c - nxt))
    return tuple(sorted(parts, reverse=True))


def subgroup_type(b: SubgroupBasis) -> tuple[int, ...]:
    G = b.group
    logs = [b.log_order]
    cur = b
    while logs[-1]:
        cur = scaled(cur, G.p)
        logs.append(cur.log_order)
    return _type_from_layers(G.p, logs)


def sum_subgroups(a: SubgroupBasis, b: SubgroupBasis) -> SubgroupBasis:
    if a.group != b.group:
        raise GroupMismatch("subgroups of different groups")
    return subgroup_from_vectors(a.group, list(a.rows) + list(b.rows))


def power_subgroup(G: GroupType, i: int) -> SubgroupBasis:
    """p^i B."""
    return subgroup_from_vectors(G, [[G.p ** i if r == c else 0 for c in range(G.rank)] for r in range(G.rank)])


def intersect(a: SubgroupBasis, b: SubgroupBasis) -> SubgroupBasis:
    G = a.group
    if b.group != G:
        raise GroupMismatch("subgroups of different groups")
    k = G.rank
    graph = [list(r) + list(r) for r in a.rows if any(r)]
    graph += [list(r) + [0] * k for r in b.rows if any(r)]
    rest = K.clear_columns(graph, list(G.exps) * 2, G.p, k)
    return subgroup_from_vectors(G, rest)


def quotient_type(G: GroupType, b: SubgroupBasis) -> tuple[int, ...]:
    if b.group != G:
        raise GroupMismatch("subgroup is not inside this group")
    logs = []
    i = 0
    while True:
        s = sum_subgroups(power_subgroup(G, i), b)
        logs.append(s.log_order - b.log_order)
        if not logs[-1]:
            break
        i += 1
    return _type_from_layers(G.p, logs)


def independent_generators(b: SubgroupBasis) -> tuple[tuple[int, ...], list[Element]]:
    """Independent generators realizing the subgroup type, largest order first."""
    G = b.group
    t, vecs = K.independent_basis([r for r in b.rows if any(r)], G.exps, G.p)
    return tuple(t), [Element(G, tuple(v)) for v in vecs]


# ---------------------------------------------------------------------------
# automorphisms and enumeration


def _unit_group_generators(p: int, e: int) -> list[int]:
    mod = p ** e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [3]
        return [mod - 1, 5]
    for g in range(2, p * p):
        if g % p == 0:
            continue
        # primitive mod p, and g^{p-1} != 1 mod p^2 makes it primitive mod every p^e
        if pow(g, p - 1, p) != 1:
            continue
        if all(pow(g, (p - 1) // q, p) != 1 for q in _prime_factors(p - 1)):
            if e == 1 or pow(g, p - 1, p * p) != 1:
                return [g % mod]
    raise AssertionError("no primitive root found")


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def aut_generators(G: GroupType) -> list[Hom]:
    """Generators of Aut(G): unit scalings of each summand and elementary transvections.

    The transvection for (i, j), i != j, sends generator j to
    ``e_j + p^{max(0, e_i - e_j)} e_i``.
    """
    k = G.rank
    gens = []
    ident = [[int(i == j) for j in range(k)] for i in range(k)]
    for i, e in enumerate(G.exps):
        for u in _unit_group_generators(G.p, e):
            m = [row[:] for row in ident]
            m[i][i] = u
            gens.append(Hom(G, G, tuple(map(tuple, m))))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            m = [row[:] for row in ident]
            m[i][j] = G.p ** hom_entry_shift(G.exps[j], G.exps[i])
            gens.append(Hom(G, G, tuple(map(tuple, m))))
    return gens


class CapExceeded(RuntimeError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration needs {required} elements, cap is {cap}")
        self.required = required
        self.cap = cap


def enumerate_elements(G: GroupType, cap: int = 2 ** 16) -> Iterator[Element]:
    """Every element exactly once; refuses groups larger than ``cap``."""
    if G.order > cap:
        raise CapExceeded(G.order, cap)
    return (Element(G, c) for c in itertools.product(*(range(m) for m in G.mods)))
