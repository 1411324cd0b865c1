"""Breadth-first orbit search of subgroup keys under automorphism generators."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .abelian import GroupType, Hom, compose

try:
    from ._orbit_nb import expand_all

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def _elementary(G: GroupType, h: Hom):
    """Classify a generator as ('scale', i, u) or ('shear', i, j, c) when possible."""
    k = G.rank
    m = h.matrix
    off = [(i, j) for i in range(k) for j in range(k) if i != j and m[i][j]]
    diag = [i for i in range(k) if m[i][i] != 1]
    if not off and len(diag) == 1:
        i = diag[0]
        return ("scale", i, m[i][i])
    if len(off) == 1 and not diag:
        i, j = off[0]
        return ("shear", i, j, m[i][j])
    return ("matrix", m)


def _canon(rows, exps, mods, p, k):
    """Canonical echelon key of span(rows); rows are reduced lists.  Inlined copy of the kernel for speed."""
    work = [r for r in rows if any(r)]
    basis = [None] * k
    tv = [0] * k
    for j in range(k):
        e = exps[j]
        best = -1
        bestv = e
        for idx in range(len(work)):
            c = work[idx][j]
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
            tv[j] = e
            continue
        piv = work.pop(best)
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
        if bestv:
            sat = p ** (e - bestv)
            s = [(sat * x) % m for x, m in zip(piv, mods)]
            if any(s):
                nxt.append(s)
        work = nxt
        basis[j] = piv
        tv[j] = bestv
    for j in range(k):
        row = basis[j]
        if row is None:
            continue
        pv = p ** tv[j]
        for i in range(j):
            other = basis[i]
            if other is not None and other[j] >= pv:
                q = other[j] // pv
                basis[i] = [(x - q * y) % m for x, y, m in zip(other, row, mods)]
    zero = (0,) * k
    return tuple(tuple(r) if r is not None else zero for r in basis)


@dataclass
class OrbitOutcome:
    status: str  # "found", "exhausted", "cap"
    visited: int
    expansions: int
    seconds: float
    path: list | None = None  # generator indices from start to target
    hits: set = field(default_factory=set)  # indices of watched keys met during the search


def orbit_search(G: GroupType, start_key, target_key, gens: list[Hom], cap: int = 10 ** 7,
                 record_parents: bool = True, backend: str = "auto", watch=()) -> OrbitOutcome:
    """BFS over ``{φ(A) : φ ∈ <gens>}`` starting from the canonical key of A.

    Each key is visited at most once.  ``target_key=None`` enumerates the
    whole orbit (used for benchmarking and stabilizer sanity checks).
    ``backend`` is "auto", "python" or "compiled".  Keys listed in ``watch``
    are reported in ``hits`` (by position) when the search meets them.
    """
    ops = [_elementary(G, h) for h in gens]
    compiled_ok = (_HAVE_NUMBA and G.rank > 0 and all(op[0] != "matrix" for op in ops)
                   and max(G.mods) < 2 ** 31)
    if backend == "compiled" and not compiled_ok:
        raise ValueError("compiled backend unavailable for these generators")
    if start_key == target_key:
        return OrbitOutcome("found", 1, 0, 0.0, [])
    if backend != "python" and compiled_ok:
        return _search_compiled(G, start_key, target_key, ops, cap, record_parents, list(watch))
    return _search_python(G, start_key, target_key, ops, cap, record_parents, list(watch))


def _finish(parents, child, n, expansions, t0, hits):
    path = []
    cur = child
    while parents[cur] is not None:
        prev, g = parents[cur]
        path.append(g)
        cur = prev
    path.reverse()
    return OrbitOutcome("found", n, expansions, time.perf_counter() - t0, path, hits)


def _search_python(G, start_key, target_key, ops, cap, record_parents, watch):
    p = G.p
    exps = list(G.exps)
    mods = list(G.mods)
    k = G.rank
    watched = {w: i for i, w in enumerate(watch)}
    parents = {start_key: None} if record_parents else None
    seen = parents if record_parents else {start_key}
    queue = deque([start_key])
    expansions = 0
    hits = {watched[queue[0]]} if queue[0] in watched else set()
    t0 = time.perf_counter()
    while queue:
        key = queue.popleft()
        rows = [list(r) for r in key if any(r)]
        for gi, op in enumerate(ops):
            kind = op[0]
            if kind == "scale":
                _, i, u = op
                m = mods[i]
                img = []
                for r in rows:
                    r = r[:]
                    r[i] = (r[i] * u) % m
                    img.append(r)
            elif kind == "shear":
                _, i, j, c = op
                m = mods[i]
                img = []
                for r in rows:
                    if r[j]:
                        r = r[:]
                        r[i] = (r[i] + c * r[j]) % m
                    img.append(r)
            else:
                mat = op[1]
                img = [[sum(a * b for a, b in zip(row, r)) % mm for row, mm in zip(mat, mods)] for r in rows]
            child = _canon(img, exps, mods, p, k)
            expansions += 1
            if child in seen:
                continue
            if record_parents:
                parents[child] = (key, gi)
            else:
                seen.add(child)
            if child in watched:
                hits.add(watched[child])
            if child == target_key:
                return _finish(parents, child, len(seen), expansions, t0, hits)
            if len(seen) >= cap:
                return OrbitOutcome("cap", len(seen), expansions, time.perf_counter() - t0, None, hits)
            queue.append(child)
    return OrbitOutcome("exhausted", len(seen), expansions, time.perf_counter() - t0, None, hits)


def _search_compiled(G, start_key, target_key, ops, cap, record_parents, watch):
    k = G.rank
    exps = np.array(G.exps, dtype=np.int64)
    mods = np.array(G.mods, dtype=np.int64)
    top = max(G.mods)
    # narrow storage keeps a million-key orbit within memory
    kdt = np.int16 if top < 2 ** 15 else (np.int32 if top < 2 ** 31 else np.int64)
    table = np.array([(0, op[1], 0, op[2]) if op[0] == "scale" else (1, op[1], op[2], op[3]) for op in ops],
                     dtype=np.int64).reshape(len(ops), 4)
    result = np.empty((len(ops), k, k), dtype=np.int64)
    nops = len(ops)
    width = k * k * np.dtype(kdt).itemsize

    def pack(key):
        return np.array(key, dtype=kdt).tobytes()

    watched = {pack(w): i for i, w in enumerate(watch)}
    start = pack(start_key)
    target = pack(target_key) if target_key is not None else None
    parents = {start: None} if record_parents else None
    seen = parents if record_parents else {start}
    queue = deque([start])
    expansions = 0
    hits = {watched[queue[0]]} if queue[0] in watched else set()
    t0 = time.perf_counter()
    while queue:
        key = queue.popleft()
        arr = np.frombuffer(key, dtype=kdt).reshape(k, k).astype(np.int64)
        expand_all(arr, table, exps, mods, G.p, result)
        blob = result.astype(kdt).tobytes()
        for gi in range(nops):
            child = blob[gi * width:(gi + 1) * width]
            expansions += 1
            if child in seen:
                continue
            if record_parents:
                parents[child] = (key, gi)
            else:
                seen.add(child)
            if child in watched:
                hits.add(watched[child])
            if child == target:
                return _finish(parents, child, len(seen), expansions, t0, hits)
            if len(seen) >= cap:
                return OrbitOutcome("cap", len(seen), expansions, time.perf_counter() - t0, None, hits)
            queue.append(child)
    return OrbitOutcome("exhausted", len(seen), expansions, time.perf_counter() - t0, None, hits)


def path_to_hom(G: GroupType, gens: list[Hom], path: list[int]) -> Hom:
    f = Hom.identity(G)
    for gi in path:
        f = compose(gens[gi], f)
    return f
