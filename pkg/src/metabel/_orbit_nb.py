"""Compiled canonicalisation for the orbit search.

Keys are k×k int64 arrays: row j holds the pivot row for column j, or zeros
when column j has no pivot.  The result matches ``orbit._canon`` exactly; the
tests compare the two.  Products of two residues must fit in int64, so the
caller only uses this path when every modulus is below 2^31.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _inv_mod(a, m):
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % m


@njit(cache=True)
def _canon_into(W, n, exps, mods, p, out, tv):
    k = exps.shape[0]
    for a in range(k):
        for b in range(k):
            out[a, b] = 0
    for j in range(k):
        e = exps[j]
        best = -1
        bestv = e
        for idx in range(n):
            c = W[idx, j]
            if c != 0:
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
        for l in range(k):
            out[j, l] = W[best, l]
        n -= 1
        if best != n:
            for l in range(k):
                W[best, l] = W[n, l]
        pv = p ** bestv
        unit = out[j, j] // pv
        if unit != 1:
            w = _inv_mod(unit, p ** (e - bestv))
            for l in range(j, k):
                out[j, l] = (w * out[j, l]) % mods[l]
        idx = 0
        while idx < n:
            c = W[idx, j]
            if c != 0:
                q = c // pv
                nz = False
                for l in range(j, k):
                    x = (W[idx, l] - q * out[j, l]) % mods[l]
                    W[idx, l] = x
                    if x != 0:
                        nz = True
                if not nz:
                    n -= 1
                    if idx != n:
                        for l in range(k):
                            W[idx, l] = W[n, l]
                    continue
            idx += 1
        if bestv > 0:
            sat = p ** (e - bestv)
            nz = False
            for l in range(k):
                if l <= j:
                    W[n, l] = 0
                else:
                    x = (sat * out[j, l]) % mods[l]
                    W[n, l] = x
                    if x != 0:
                        nz = True
            if nz:
                n += 1
        tv[j] = bestv
    for j in range(k):
        if tv[j] == exps[j]:
            continue
        pv = p ** tv[j]
        for i in range(j):
            if tv[i] == exps[i]:
                continue
            if out[i, j] >= pv:
                q = out[i, j] // pv
                for l in range(j, k):
                    out[i, l] = (out[i, l] - q * out[j, l]) % mods[l]


@njit(cache=True)
def expand_all(key, ops, exps, mods, p, result):
    """Canonical keys of the images of ``key`` under every elementary op.

    ``ops[g] = (kind, i, j, c)`` with kind 0 = scale column i by c and
    kind 1 = add c times column j to column i.
    """
    k = exps.shape[0]
    W = np.empty((k + 1, k), dtype=np.int64)
    tv = np.empty(k, dtype=np.int64)
    for g in range(ops.shape[0]):
        kind = ops[g, 0]
        i = ops[g, 1]
        j = ops[g, 2]
        c = ops[g, 3]
        n = 0
        for r in range(k):
            nz = False
            for l in range(k):
                if key[r, l] != 0:
                    nz = True
                    break
            if not nz:
                continue
            for l in range(k):
                W[n, l] = key[r, l]
            if kind == 0:
                W[n, i] = (W[n, i] * c) % mods[i]
            else:
                W[n, i] = (W[n, i] + c * W[n, j]) % mods[i]
            n += 1
        _canon_into(W, n, exps, mods, p, result[g], tv)
