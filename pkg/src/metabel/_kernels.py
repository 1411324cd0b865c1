"""Exact kernels for modules over Z/p^e.

Vectors are plain lists of ints; column ``j`` lives in Z/p^{exps[j]}.  The
column exponents need not be sorted here, which lets the same routines work
on Hom spaces and graph constructions as well as on the groups themselves.
"""

from __future__ import annotations


def vp(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _scan(rows, exps, p, mods, ncols):
    """Eliminate the first ``ncols`` columns.

    Returns ``(pivot_rows, tvals, rest)`` where ``pivot_rows[j]`` is the row
    with leading entry ``p**tvals[j]`` in column j (or None) and ``rest``
    generates the part of the span whose first ``ncols`` entries vanish.
    """
    work = []
    for r in rows:
        r = [x % m for x, m in zip(r, mods)]
        if any(r):
            work.append(r)
    k = len(exps)
    pivots = [None] * ncols
    tvals = [None] * ncols
    for j in range(ncols):
        e = exps[j]
        best = -1
        bestv = e
        for idx, r in enumerate(work):
            c = r[j]
            if c:
                v = 0
                while c % p == 0:
                    c //= p
                    v += 1
                if v < bestv:
                    bestv = v
                    best = idx
                    if v == 0:
                        break
        if best < 0:
            tvals[j] = e
            continue
        piv = work[best]
        work[best] = work[-1]
        work.pop()
        pv = p ** bestv
        unit = piv[j] // pv
        if unit != 1:
            w = pow(unit, -1, p ** (e - bestv))
            piv = [(w * x) % m for x, m in zip(piv, mods)]
        nxt = []
        for r in work:
            c = r[j]
            if c:
                q = c // pv
                r = [(x - q * y) % m for x, y, m in zip(r, piv, mods)]
                if any(r):
                    nxt.append(r)
            else:
                nxt.append(r)
        sat = p ** (e - bestv)
        s = [(sat * x) % m for x, m in zip(piv, mods)]
        if any(s):
            nxt.append(s)
        work = nxt
        pivots[j] = piv
        tvals[j] = bestv
    return pivots, tvals, work


def howell(rows, exps, p):
    """Canonical echelon form of the subgroup spanned by ``rows``.

    Returns ``(basis, tvals)``: ``basis[j]`` is the row whose first nonzero
    entry is ``p**tvals[j]`` in column j, or None when ``tvals[j] == exps[j]``.
    Entries above a pivot are reduced into ``[0, p**tvals[j])``.  Two spans
    are equal exactly when their outputs are equal.
    """
    k = len(exps)
    mods = [p ** e for e in exps]
    basis, tvals, rest = _scan(rows, exps, p, mods, k)
    assert not rest
    for j in range(k):
        row = basis[j]
        if row is None:
            continue
        pv = p ** tvals[j]
        for i in range(j):
            other = basis[i]
            if other is None:
                continue
            q = other[j] // pv
            if q:
                basis[i] = [(x - q * y) % m for x, y, m in zip(other, row, mods)]
    return basis, tvals


def clear_columns(rows, exps, p, ncols):
    """Generators of ``span(rows) ∩ {v : v[:ncols] == 0}``, truncated to the remaining columns."""
    mods = [p ** e for e in exps]
    _, _, rest = _scan(rows, exps, p, mods, ncols)
    return [r[ncols:] for r in rest]


def reduce_vector(vec, basis, tvals, exps, p, ncols=None):
    """Reduce ``vec`` by the echelon rows over the first ``ncols`` columns.

    Returns the reduced vector, or None if some column cannot be cleared.
    """
    k = len(exps)
    if ncols is None:
        ncols = k
    mods = [p ** e for e in exps]
    v = [x % m for x, m in zip(vec, mods)]
    for j in range(ncols):
        c = v[j]
        if not c:
            continue
        row = basis[j]
        if row is None:
            return None
        pv = p ** tvals[j]
        if c % pv:
            return None
        q = c // pv
        v = [(x - q * y) % m for x, y, m in zip(v, row, mods)]
    return v


def order_exp(vec, exps, p):
    """log_p of the additive order of ``vec``."""
    t = 0
    for x, e in zip(vec, exps):
        x %= p ** e
        if x:
            t = max(t, e - vp(x, p))
    return t


class Solver:
    """Expresses vectors as combinations of fixed generators.

    Built from the graph ``{(g_i, e_i)}`` inside ``G ⊕ ⊕ Z/p^{o_i}``; reducing
    ``(v, 0)`` over the G-columns leaves ``(0, -c)`` with ``v = Σ c_i g_i``.
    """

    def __init__(self, gens, exps, p):
        self.p = p
        self.exps = list(exps)
        self.gens = [list(g) for g in gens]
        self.k = len(exps)
        self.coef_exps = [order_exp(g, exps, p) for g in self.gens]
        r = len(self.gens)
        graph = []
        for i, g in enumerate(self.gens):
            unit = [0] * r
            unit[i] = 1
            graph.append(list(g) + unit)
        self.all_exps = self.exps + self.coef_exps
        self.basis, self.tvals = howell(graph, self.all_exps, p)

    def coords(self, vec):
        """Coefficients c with ``Σ c_i g_i == vec`` or None if ``vec`` is outside the span."""
        full = list(vec) + [0] * len(self.gens)
        red = reduce_vector(full, self.basis, self.tvals, self.all_exps, self.p, self.k)
        if red is None:
            return None
        return [(-x) % (self.p ** e) for x, e in zip(red[self.k:], self.coef_exps)]


def local_smith(relations, ncols, N, p):
    """Smith form of a relation matrix over Z/p^N.

    Returns ``(diag_exps, qinv)``; the quotient ``(Z/p^N)^ncols / rows`` is
    ``⊕ Z/p^{d_s}`` with new generator s equal to row s of ``qinv`` in the old
    coordinates.  Missing pivots mean ``d_s = N``.
    """
    mod = p ** N
    R = [[x % mod for x in r] for r in relations]
    R = [r for r in R if any(r)]
    qinv = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    diag = []
    for s in range(ncols):
        best = None
        bestv = N
        for i in range(s, len(R)):
            row = R[i]
            for j in range(s, ncols):
                c = row[j]
                if c:
                    v = vp(c, p)
                    if v < bestv:
                        bestv = v
                        best = (i, j)
            if bestv == 0:
                break
        if best is None:
            diag.extend([N] * (ncols - s))
            break
        i, j = best
        R[s], R[i] = R[i], R[s]
        if j != s:
            for row in R:
                row[s], row[j] = row[j], row[s]
            qinv[s], qinv[j] = qinv[j], qinv[s]
        pv = p ** bestv
        unit = R[s][s] // pv
        if unit != 1:
            w = pow(unit, -1, mod)
            R[s] = [(w * x) % mod for x in R[s]]
        prow = R[s]
        for i in range(s + 1, len(R)):
            c = R[i][s]
            if c:
                q = c // pv
                R[i] = [(x - q * y) % mod for x, y in zip(R[i], prow)]
        for j in range(s + 1, ncols):
            c = prow[j]
            if c:
                q = c // pv
                # column op col_j -= q col_s; inverse transform acts on rows of qinv
                for row in R:
                    row[j] = (row[j] - q * row[s]) % mod
                qinv[s] = [(x + q * y) % mod for x, y in zip(qinv[s], qinv[j])]
        diag.append(bestv)
    return diag, qinv


def independent_basis(gens, exps, p):
    """An independent generating set of ``span(gens)``.

    Returns ``(type_exps, vectors)`` with ``type_exps`` weakly decreasing and
    ``vectors[i]`` of order ``p**type_exps[i]``.
    """
    gens = [list(g) for g in gens]
    gens = [g for g in gens if any(x % (p ** e) for x, e in zip(g, exps))]
    if not gens:
        return [], []
    k = len(exps)
    r = len(gens)
    oexps = [order_exp(g, exps, p) for g in gens]
    N = max(oexps)
    graph = []
    for i, g in enumerate(gens):
        unit = [0] * r
        unit[i] = 1
        graph.append(g + unit)
    kernel = clear_columns(graph, list(exps) + oexps, p, k)
    relations = [list(row) for row in kernel]
    for i, o in enumerate(oexps):
        rel = [0] * r
        rel[i] = p ** o
        relations.append(rel)
    diag, qinv = local_smith(relations, r, N, p)
    mods = [p ** e for e in exps]
    out = []
    for d, coeffs in zip(diag, qinv):
        if d == 0:
            continue
        v = [0] * k
        for c, g in zip(coeffs, gens):
            if c:
                v = [(x + c * y) % m for x, y, m in zip(v, g, mods)]
        out.append((d, v))
    out.sort(key=lambda t: -t[0])
    return [d for d, _ in out], [v for _, v in out]


# ---------------------------------------------------------------------------
# linear algebra over F_p


def rref_mod(rows, p):
    """Reduced row echelon form over F_p; returns ``(rows, pivot_columns)``."""
    M = [[x % p for x in r] for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivcols = []
    rank = 0
    for c in range(ncols):
        pr = None
        for i in range(rank, len(M)):
            if M[i][c]:
                pr = i
                break
        if pr is None:
            continue
        M[rank], M[pr] = M[pr], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [(inv * x) % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[rank])]
        pivcols.append(c)
        rank += 1
        if rank == len(M):
            break
    return M[:rank], pivcols


def rank_mod(rows, p):
    return len(rref_mod(rows, p)[0])


class SubspaceFp:
    """A subspace of F_p^n kept in reduced echelon form."""

    def __init__(self, n, p, vectors=()):
        self.n = n
        self.p = p
        self.rows = []
        self.pivots = []
        for v in vectors:
            self.add(v)

    @property
    def dim(self):
        return len(self.rows)

    def reduce(self, v):
        p = self.p
        v = [x % p for x in v]
        for row, c in zip(self.rows, self.pivots):
            f = v[c]
            if f:
                v = [(x - f * y) % p for x, y in zip(v, row)]
        return v

    def __contains__(self, v):
        return not any(self.reduce(v))

    def add(self, v):
        """Insert ``v``; returns True if the dimension grew."""
        p = self.p
        v = self.reduce(v)
        if not any(v):
            return False
        c = next(i for i, x in enumerate(v) if x)
        inv = pow(v[c], -1, p)
        v = [(inv * x) % p for x in v]
        for i, row in enumerate(self.rows):
            f = row[c]
            if f:
                self.rows[i] = [(x - f * y) % p for x, y in zip(row, v)]
        pos = 0
        while pos < len(self.pivots) and self.pivots[pos] < c:
            pos += 1
        self.rows.insert(pos, v)
        self.pivots.insert(pos, c)
        return True
