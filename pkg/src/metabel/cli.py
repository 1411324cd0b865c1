"""Command-line front end: embedding files, verification reports, benchmark."""

from __future__ import annotations

import argparse
import re
import sys
import time

from .abelian import aut_generators, make_group
from .embeddings import (
    Embedding,
    Verdict,
    are_isomorphic,
    invariant_profile,
    is_indecomposable,
    make_embedding,
)
from .families import FAMILY_NAMES, VERIFIABLE, FamilySpec, build, render_report, verify_claims
from .metabelian import (
    center,
    commutator_subgroup,
    commutator_table,
    construct,
    group_exponent,
    morder,
    render_b,
)
from .orbit import orbit_search

EX_USAGE = 64
EX_DATAERR = 65


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


# ---------------------------------------------------------------------------
# embedding files

_VEC = re.compile(r"^\[\s*(-?\d+(\s*,\s*-?\d+)*)?\s*\]$")


def _vector(text: str, lineno: int) -> list[int]:
    text = text.strip()
    if not _VEC.match(text):
        raise ParseError(f"expected an integer list like [1, 2, 3], got {text!r}", lineno)
    inner = text[1:-1].strip()
    return [int(t) for t in inner.split(",")] if inner else []


def parse_embedding(text: str) -> Embedding:
    p = None
    exps = None
    gens: list[tuple[int, list[int]]] = []
    coord_names: list[str] = []
    gen_names: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("A") and "+=" in line:
            head, _, rest = line.partition("+=")
            if head.strip() != "A":
                raise ParseError(f"unknown statement {line!r}", lineno)
            gens.append((lineno, _vector(rest, lineno)))
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        if not eq:
            raise ParseError(f"unknown statement {line!r}", lineno)
        if key == "p":
            try:
                p = int(value)
            except ValueError:
                raise ParseError(f"p must be an integer, got {value.strip()!r}", lineno) from None
            try:
                make_group(p, [])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
        elif key == "B":
            exps = _vector(value, lineno)
            if any(e < 1 for e in exps):
                raise ParseError("exponents of B must be positive", lineno)
            if exps != sorted(exps, reverse=True):
                raise ParseError("exponents of B must be listed in descending order", lineno)
            b_line = lineno
        elif key == "coord_names":
            coord_names = [t.strip() for t in value.split(",") if t.strip()]
        elif key == "gen_names":
            gen_names = [t.strip() for t in value.split(",") if t.strip()]
        else:
            raise ParseError(f"unknown key {key!r}", lineno)
    if p is None:
        raise ParseError("missing 'p = <prime>' line")
    if exps is None:
        raise ParseError("missing 'B = [e1, ..., ek]' line")
    try:
        B = make_group(p, exps)
    except ValueError as exc:
        raise ParseError(str(exc), b_line) from None
    elems = []
    for lineno, v in gens:
        if len(v) != B.rank:
            raise ParseError(f"generator has {len(v)} entries, B has rank {B.rank}", lineno)
        elems.append(B.element(v))
    if coord_names and len(coord_names) != B.rank:
        raise ParseError("coord_names must name every coordinate of B")
    if gen_names and len(gen_names) != len(elems):
        raise ParseError("gen_names must name every generator")
    return make_embedding(B, elems, gen_names=gen_names, coord_names=coord_names)


def format_embedding(E: Embedding, comment: str = "") -> str:
    out = []
    if comment:
        out.append(f"# {comment}")
    out.append(f"p = {E.p}")
    out.append(f"B = [{', '.join(map(str, E.B.exps))}]")
    if E.coord_names:
        out.append(f"coord_names = {', '.join(E.coord_names)}")
    if E.gen_names and len(E.gen_names) == len(E.gens):
        out.append(f"gen_names = {', '.join(E.gen_names)}")
    for g in (E.gens if E.gens else [r.coords for r in E.A.generators]):
        out.append(f"A += [{', '.join(map(str, g))}]")
    return "\n".join(out) + "\n"


def load(path: str) -> Embedding:
    with open(path) as fh:
        return parse_embedding(fh.read())


# ---------------------------------------------------------------------------
# commands


def _pp(p: int, t: int) -> str:
    return f"{p}^{t}"


def _log(n: int, p: int) -> int:
    t = 0
    while n > 1:
        n //= p
        t += 1
    return t


def cmd_describe(args) -> int:
    E = load(args.file)
    prof = invariant_profile(E)
    print(f"p = {E.p}")
    print(f"B: {list(E.B.exps)}; A: {list(E.A.type)}; B/A: {list(prof.type_quotient)}")
    print(f"|B| = {_pp(E.p, E.B.log_order)}, |A| = {_pp(E.p, E.A.log_order)}, bound n = {E.bound}")
    print("invariant profile (row i, column j = length of ((A ∩ p^iB) + p^jB)/p^jB):")
    for row in prof.alpha:
        print("  " + " ".join(f"{v:2d}" for v in row))
    return 0


def cmd_construct(args) -> int:
    E = load(args.file)
    M = construct(E)
    p = M.p
    print(f"embedding: B = {list(E.B.exps)}, A = {list(E.A.type)}")
    if M.is_abelian():
        print("abelian, M = B")
    print(f"order = {_pp(p, M.log_order)}")
    print(f"exponent = {_pp(p, _log(group_exponent(M), p))}")
    Z, _ = center(M, sample=args.sample)
    C1, _ = commutator_subgroup(M)
    print(f"center = B, type {list(Z.type)}")
    print(f"commutator subgroup = ι(A), type {list(C1.type)}, exponent {_pp(p, C1.log_exponent)}")
    gens = M.generators()
    print("generators: " + ", ".join(f"{n} (order {_pp(p, _log(morder(M, g), p))})" for n, g in gens))
    table = commutator_table(M)
    if table:
        print("commutators (all other pairs of generators commute):")
        for n1, n2, c in table:
            if n2 == "d":
                print(f"  [{n1},d] = {render_b(M, c.b.coords)}")
            else:
                print(f"  [{n1},{n2}] = {render_b(M, c.b.coords, dname='1')}")
    return 0


def _matrix_lines(f) -> list[str]:
    return ["  [" + ", ".join(f"{x:>4}" for x in row) + "]" for row in f.matrix]


def cmd_iso(args) -> int:
    E1, E2 = load(args.file1), load(args.file2)
    res = are_isomorphic(E1, E2, cap=args.orbit_cap, method=args.method)
    print(f"{res.verdict.value}  (method: {res.method}{'; ' + res.detail if res.detail else ''})")
    if res.certificate is not None:
        print("certificate f: B1 -> B2 (invertible, f(A1) = A2):")
        print("\n".join(_matrix_lines(res.certificate)))
    return {Verdict.ISO: 0, Verdict.NONE: 1, Verdict.UNDECIDED: 2}[res.verdict]


def cmd_indec(args) -> int:
    E = load(args.file)
    d = is_indecomposable(E)
    if d.indecomposable:
        print(f"INDECOMPOSABLE  (End/pEnd has dimension {d.residue_dim}, radical dimension {d.radical_dim})")
        return 0
    print("DECOMPOSABLE")
    if d.witness is not None:
        print("idempotent witness e (e∘e = e, e ≠ 0, 1, e(A) ⊆ A):")
        print("\n".join(_matrix_lines(d.witness)))
    return 1


def cmd_verify(args) -> int:
    rep = verify_claims(args.family, args.p, orbit_cap=args.orbit_cap, sample=args.sample, jobs=args.jobs,
                        method=args.method)
    print(render_report(rep, timing=not args.no_timing))
    return {"PASS": 0, "FAIL": 1, "UNDECIDED": 2}[rep.status]


def bench_rate(p: int = 3, seconds: float = 1.0, backend: str = "auto") -> tuple[float, int, int]:
    """Expansions per second of the full orbit enumeration for the Birkhoff objects."""
    specs = [build(FamilySpec("birkhoff", p, (lam,))) for lam in range(p)]
    gens = aut_generators(specs[0].B)
    orbit_search(specs[0].B, specs[0].A.key, None, gens, backend=backend)  # warm-up
    total = 0
    runs = 0
    t0 = time.perf_counter()
    while True:
        for E in specs:
            out = orbit_search(E.B, E.A.key, None, gens, backend=backend)
            total += out.expansions
            runs += 1
        el = time.perf_counter() - t0
        if el >= seconds:
            return total / el, total, runs


def cmd_bench(args) -> int:
    rate, total, runs = bench_rate(args.p, args.seconds, args.backend)
    print(f"orbit BFS, Birkhoff objects at p = {args.p}, backend {args.backend}: "
          f"{total} expansions in {runs} orbit enumerations")
    print(f"rate = {rate:.0f} expansions/s (gate {args.min_rate:.0f})")
    return 0 if rate >= args.min_rate else 1


def cmd_export(args) -> int:
    params = tuple(args.params)
    try:
        spec = FamilySpec(args.family, args.p, params)
        E = build(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    text = format_embedding(E, comment=str(spec))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _prime(text: str) -> int:
    try:
        p = int(text)
        make_group(p, [])
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a prime") from None
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="metabel", description="Subgroup embeddings and the metabelian groups built from them.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("describe", help="types and invariant profile of an embedding file")
    s.add_argument("file")
    s.set_defaults(func=cmd_describe)

    s = sub.add_parser("construct", help="summary of the metabelian group built from an embedding")
    s.add_argument("file")
    s.add_argument("--sample", type=int, default=2000, help="random elements for the center scan")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("iso", help="decide isomorphism of two embeddings (exit 0 ISO, 1 NOT-ISO, 2 UNDECIDED)")
    s.add_argument("file1")
    s.add_argument("file2")
    s.add_argument("--orbit-cap", type=int, default=None)
    s.add_argument("--method", choices=["auto", "orbit", "local-ring"], default="auto")
    s.set_defaults(func=cmd_iso)

    s = sub.add_parser("indec", help="decide indecomposability (exit 0 yes, 1 no)")
    s.add_argument("file")
    s.set_defaults(func=cmd_indec)

    s = sub.add_parser("verify", help="check every claim for a family at one prime")
    s.add_argument("family", choices=VERIFIABLE)
    s.add_argument("p", type=_prime)
    s.add_argument("--orbit-cap", type=int, default=None)
    s.add_argument("--sample", type=int, default=2000, help="random elements for the center scan")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--method", choices=["auto", "orbit", "local-ring"], default="auto")
    s.add_argument("--no-timing", action="store_true", help="omit timings from the human section")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", help="orbit BFS throughput on the Birkhoff objects")
    s.add_argument("--p", type=_prime, default=3)
    s.add_argument("--seconds", type=float, default=1.0)
    s.add_argument("--backend", choices=["auto", "python", "compiled"], default="auto")
    s.add_argument("--min-rate", type=float, default=1e5)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("export", help="write a family instance as an embedding file")
    s.add_argument("family", choices=FAMILY_NAMES)
    s.add_argument("p", type=_prime)
    s.add_argument("params", type=int, nargs="*")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 66


if __name__ == "__main__":
    sys.exit(main())
