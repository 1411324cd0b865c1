"""Finite-dimensional associative algebras over F_p given by structure constants.

Used on residue algebras E/pE of endomorphism rings.  The central question is
whether the algebra is local; the answer is always backed by a certificate:
a nontrivial idempotent when it is not, and a nilpotent two-sided ideal with
a field quotient when it is.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np
from sympy import Poly, symbols

from ._kernels import SubspaceFp

_X = symbols("x")


class AlgebraUndecided(RuntimeError):
    pass


def np_rref(M, p):
    """Reduced row echelon form over F_p of an integer array; returns (rows, pivots)."""
    M = np.array(M, dtype=np.int64) % p
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        f = M[:, c].copy()
        f[r] = 0
        hit = np.nonzero(f)[0]
        if hit.size:
            M[hit] = (M[hit] - np.outer(f[hit], M[r])) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


@dataclass
class LocalityResult:
    local: bool
    radical: list | None = None  # basis of the radical when local
    idempotent: list | None = None  # nontrivial idempotent when not local
    residue_degree: int | None = None  # dim of the quotient by the radical


class FpAlgebra:
    """Algebra with basis b_0..b_{D-1}; ``table[a, b]`` holds the coordinates of b_a b_b."""

    def __init__(self, p: int, table, one):
        self.p = p
        self.table = np.asarray(table, dtype=np.int64) % p
        self.dim = self.table.shape[0]
        self.one = np.asarray(one, dtype=np.int64) % p

    def mul(self, x, y):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        # reduce between the two contractions so int64 never overflows
        t = np.tensordot(x, self.table, axes=(0, 0)) % self.p
        return np.tensordot(y, t, axes=(0, 0)) % self.p

    def left_matrix(self, x):
        """Matrix of y -> x*y acting on coordinate columns."""
        x = np.asarray(x, dtype=np.int64)
        return (np.tensordot(x, self.table, axes=(0, 0)) % self.p).T

    def basis_vector(self, a):
        v = np.zeros(self.dim, dtype=np.int64)
        v[a] = 1
        return v

    def is_associative(self) -> bool:
        D = self.dim
        for a, b, c in itertools.product(range(D), repeat=3):
            ea, eb, ec = (self.basis_vector(i) for i in (a, b, c))
            if not np.array_equal(self.mul(self.mul(ea, eb), ec), self.mul(ea, self.mul(eb, ec))):
                return False
        return True

    def is_unital(self) -> bool:
        return all(
            np.array_equal(self.mul(self.one, self.basis_vector(a)), self.basis_vector(a))
            and np.array_equal(self.mul(self.basis_vector(a), self.one), self.basis_vector(a))
            for a in range(self.dim)
        )

    def right_matrix(self, x):
        """Matrix of y -> y*x acting on coordinate columns."""
        x = np.asarray(x, dtype=np.int64)
        return (np.tensordot(self.table, x, axes=(1, 0)) % self.p).T

    def is_unit(self, x) -> bool:
        return len(np_rref(self.left_matrix(x), self.p)[1]) == self.dim

    def _products(self, rows):
        """All b_a·r and r·b_a for the given rows r, stacked."""
        R = np.asarray(rows, dtype=np.int64).reshape(-1, self.dim)
        left = np.einsum("abc,rb->rac", self.table, R) % self.p
        right = np.einsum("bac,rb->rac", self.table, R) % self.p
        return np.concatenate([left.reshape(-1, self.dim), right.reshape(-1, self.dim)])

    def evaluate(self, coeffs, x):
        """Evaluate a polynomial (coefficients highest degree first) at x."""
        R = self.right_matrix(x)
        acc = np.zeros(self.dim, dtype=np.int64)
        for c in coeffs:
            acc = (R @ acc + int(c) * self.one) % self.p
        return acc

    def minimal_polynomial(self, x) -> list[int]:
        """Monic minimal polynomial of x, highest degree first."""
        p = self.p
        D = self.dim
        # rows: (reduced vector, combination of powers that produced it)
        rows = []
        R = self.right_matrix(x)
        power = self.one.copy()
        for n in range(D + 2):
            vec = [int(v) for v in power]
            comb = [0] * (n + 1)
            comb[n] = 1
            for rv, rc, piv in rows:
                f = vec[piv]
                if f:
                    vec = [(a - f * b) % p for a, b in zip(vec, rv)]
                    rc_ext = rc + [0] * (len(comb) - len(rc))
                    comb = [(a - f * b) % p for a, b in zip(comb, rc_ext)]
            if not any(vec):
                # comb is a monic relation of degree n (lowest degree first)
                return [c % p for c in reversed(comb)]
            piv = next(i for i, v in enumerate(vec) if v)
            inv = pow(vec[piv], -1, p)
            vec = [(inv * a) % p for a in vec]
            comb = [(inv * a) % p for a in comb]
            rows.append((vec, comb, piv))
            power = (R @ power) % p
        raise AssertionError("minimal polynomial degree exceeds dimension")

    def split_idempotent(self, x):
        """Nontrivial idempotent from x when its minimal polynomial has two coprime factors."""
        p = self.p
        mu = Poly(self.minimal_polynomial(x), _X, modulus=p)
        _, factors = mu.factor_list()
        if len(factors) < 2:
            return None
        g, k = factors[0]
        u = g ** k
        v = mu.exquo(u)
        s, t, h = u.gcdex(v)
        h_inv = pow(int(h.LC()), -1, p)
        e_poly = (s * u) * h_inv
        coeffs = [int(c) % p for c in e_poly.all_coeffs()]
        e = self.evaluate(coeffs, x)
        assert np.array_equal(self.mul(e, e), e)
        return e

    def radical_polynomial_image(self, x):
        """g(x) where g is the product of the distinct irreducible factors of the minimal polynomial.

        Returns None when the minimal polynomial has two coprime factors.
        """
        mu = Poly(self.minimal_polynomial(x), _X, modulus=self.p)
        _, factors = mu.factor_list()
        if len(factors) >= 2:
            return None
        g = factors[0][0]
        return self.evaluate([int(c) % self.p for c in g.monic().all_coeffs()], x)

    def ideal_closure(self, vectors) -> SubspaceFp:
        """Two-sided ideal generated by ``vectors``."""
        p = self.p
        V = np.asarray([list(map(int, v)) for v in vectors] or [[0] * self.dim], dtype=np.int64)
        J, piv = np_rref(V, p)
        while True:
            if not len(J):
                break
            J2, piv2 = np_rref(np.concatenate([J, self._products(J)]), p)
            if len(piv2) == len(piv):
                break
            J, piv = J2, piv2
        return SubspaceFp(self.dim, p, [[int(t) for t in r] for r in J])

    def is_nilpotent_ideal(self, J: SubspaceFp) -> bool:
        p = self.p
        if not J.rows:
            return True
        gens = np.asarray(J.rows, dtype=np.int64)
        cur = gens
        for _ in range(self.dim + 1):
            # products x*y for x in cur, y in gens
            t = np.einsum("ra,abc->rbc", cur, self.table) % p
            prod = np.einsum("rbc,sb->rsc", t, gens) % p
            nxt, piv = np_rref(prod.reshape(-1, self.dim), p)
            if not len(piv):
                return True
            if len(piv) == len(cur):
                return False
            cur = nxt
        return False

    def _quotient_is_field(self, J: SubspaceFp, enum_cap: int):
        """Check every nonzero element of the quotient by J is a unit.

        Returns (True, None), (False, witness element) or (None, None) if too large.
        """
        p = self.p
        comp = [a for a in range(self.dim) if a not in J.pivots]
        f = len(comp)
        if f == 1:
            return True, None
        if p ** f > enum_cap:
            return None, None
        for coeffs in itertools.product(range(p), repeat=f):
            if not any(coeffs):
                continue
            x = np.zeros(self.dim, dtype=np.int64)
            for c, a in zip(coeffs, comp):
                x[a] = c
            if not self.is_unit(x):
                return False, x
        return True, None

    def analyse_locality(self, seed: int = 0, trials: int = 400, enum_cap: int = 1 << 16) -> LocalityResult:
        p = self.p
        D = self.dim
        if D == 0:
            return LocalityResult(local=False)
        rng = random.Random(seed)
        basis = [self.basis_vector(a) for a in range(D)]
        candidates = basis + [
            np.array([rng.randrange(p) for _ in range(D)], dtype=np.int64) for _ in range(min(8, D))
        ]
        nil = []
        for x in candidates:
            gx = self.radical_polynomial_image(x)
            if gx is None:
                return LocalityResult(local=False, idempotent=self.split_idempotent(x))
            nil.append(gx)
        # commutators of basis elements, read off the structure constants
        comm = (self.table - self.table.transpose(1, 0, 2)) % p
        iu = np.triu_indices(D, 1)
        nil.extend(comm[iu])
        J = self.ideal_closure(nil)
        if J.dim < D and self.is_nilpotent_ideal(J):
            field, witness = self._quotient_is_field(J, enum_cap)
            if field:
                return LocalityResult(local=True, radical=[list(r) for r in J.rows], residue_degree=D - J.dim)
            if witness is not None:
                e = self.split_idempotent(witness)
                if e is not None:
                    return LocalityResult(local=False, idempotent=e)
        # not local (or undetermined): look for an element whose minimal polynomial splits
        for _ in range(trials):
            x = np.array([rng.randrange(p) for _ in range(D)], dtype=np.int64)
            e = self.split_idempotent(x)
            if e is not None:
                return LocalityResult(local=False, idempotent=e)
        raise AlgebraUndecided("could not certify locality nor find an idempotent")
