"""Command-line entry point.

Exit codes: 0 success, 1 verification failure or disagreement, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import det_formulas as df
from . import f2_search, geometry, tensor_decomp, waring
from .combinatorics import bell, bell_nk, count_opp
from .errors import DetBellError, SchemaViolation
from .scalar import Domain, parse_matrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 20240917


class UsageError(Exception):
    pass


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _frac(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _read_matrix(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_matrix(fh.read())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    A = _read_matrix(args.matrix_file)
    if args.compare:
        table = df.compare_all(A)
        rows = [(k.value, k.target, str(v), ok) for k, (v, ok) in table.items()]
        ok = all(r[3] for r in rows)
        doc = {
            "n": A.n,
            "domain": str(A.domain),
            "results": [{"formula": f, "target": t, "value": v, "agrees": a} for f, t, v, a in rows],
            "agree": ok,
        }
        lines = [f"{f:<12} {t:<4} {v:>12}  {'✓' if a else '✗'}" for f, t, v, a in rows]
        _emit(args, doc, lines)
        return EXIT_OK if ok else EXIT_FAIL
    kind = df.FormulaKind.parse(args.formula)
    stats = df.EvalStats()
    value = df.evaluate(kind, A, stats)
    doc = {
        "formula": kind.value,
        "target": kind.target,
        "domain": str(A.domain),
        "value": str(value),
        "products": stats.products,
    }
    _emit(args, doc, [str(value)])
    return EXIT_OK


def cmd_counts(args) -> int:
    n_max = args.n
    rows = []
    for n in range(n_max + 1):
        rows.append({"n": n, "bell": bell(n), "bell_nk": [bell_nk(n, k) for k in range(n // 2 + 1)]})
    lines = [f"{'n':>3} {'B_n':>8}  B_n,k (k = 0, 1, ...)"]
    for r in rows:
        lines.append(f"{r['n']:>3} {r['bell']:>8}  " + " ".join(str(x) for x in r["bell_nk"]))
    _emit(args, {"rows": rows}, lines)
    return EXIT_OK


def cmd_decompose(args) -> int:
    kind = df.FormulaKind.parse(args.formula)
    dom = Domain.parse(args.domain)
    D = tensor_decomp.decomposition_from_formula(kind, args.n, dom)
    if args.output:
        tensor_decomp.save_decomposition(D, args.output)
        _emit(
            args,
            {"formula": kind.value, "n": D.n, "domain": str(dom), "rank": D.rank, "path": args.output},
            [f"wrote {D.rank} terms to {args.output}"],
        )
    else:
        print(json.dumps(tensor_decomp.export_decomposition(D), indent=1))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        D = tensor_decomp.load_decomposition(args.file)
    except OSError as e:
        raise UsageError(f"cannot read {args.file}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{args.file}: not JSON ({e})") from None
    res = tensor_decomp.expand_and_check(D)
    dom = D.domain
    doc = {"n": D.n, "target": D.target, "domain": str(dom), "rank": D.rank, "valid": res.valid}
    if res.valid:
        lines = [f"valid: {D.rank} rank-1 terms give the {D.n}x{D.n} {D.target} tensor over {dom}"]
    else:
        doc["witness"] = list(res.witness)
        doc["expected"] = dom.format(res.expected)
        doc["found"] = dom.format(res.found)
        lines = [
            f"invalid: entry {res.witness} is {doc['found']}, expected {doc['expected']}"
        ]
    _emit(args, doc, lines)
    return EXIT_OK if res.valid else EXIT_FAIL


def cmd_bounds(args) -> int:
    t = tensor_decomp.bounds_table(args.n, args.q)
    field = "any field" if args.q is None else f"F_{args.q}"
    lines = [
        f"det_{args.n} over {field}",
        f"lower {t['lower']}",
        f"upper {t['upper']}  ({', '.join(f'{k} {v}' for k, v in t['upper_by'].items())})",
    ]
    if "exact" in t:
        lines.append(f"exact {t['exact']}")
    _emit(args, t, lines)
    return EXIT_OK


def cmd_waring(args) -> int:
    dom = Domain.parse(args.domain)
    W = waring.waring_from_formula(args.n, dom)
    ref = waring.reference_bounds(args.n)
    doc = waring.export_waring(W)
    doc["count"] = W.rank
    doc["reference_bounds"] = ref
    if args.verify:
        doc["valid"] = waring.verify_waring(W).valid
    summary = f"{W.rank} powers; 2^(n-1) B_n = {ref['bell']}; n n! = {ref['n_factorial']}"
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(doc, fh, indent=1)
        _emit(args, {k: v for k, v in doc.items() if k != "terms"}, [summary])
    else:
        print(json.dumps(doc, indent=1))
        print(summary, file=sys.stderr)
    return EXIT_OK if doc.get("valid", True) else EXIT_FAIL


def cmd_polytope(args) -> int:
    rng = random.Random(args.seed)
    if args.matrix_file:
        A = _read_matrix(args.matrix_file)
        if args.n is not None and args.n != A.n:
            raise UsageError(f"-n {args.n} does not match the {A.n}x{A.n} matrix")
    elif args.n is not None:
        A = geometry.canonical_matrix(args.n)
    else:
        raise UsageError("polytope needs --matrix-file or -n")
    geometry.check_admissible(A)
    n = A.n
    sk = geometry.skeleton(A)
    deg = set(sk.degree().values())
    vol = geometry.volume_inclusion_exclusion(A)
    det = df.det_leibniz(A.over(Domain.rationals())).value
    doc = {
        "n": n,
        "vertices": len(sk.vertices),
        "expected_vertices": count_opp(n),
        "edges": len(sk.edges),
        "regular": deg == {n},
        "axis_parallel": geometry.check_edges_axis_parallel(sk),
        "volume": _frac(vol),
        "det": _frac(det),
    }
    ok = (
        doc["vertices"] == doc["expected_vertices"]
        and doc["regular"]
        and doc["axis_parallel"]
        and vol == det
    )
    lines = [
        f"vertices {doc['vertices']} (ordered partial partitions: {doc['expected_vertices']})",
        f"edges {doc['edges']}, {'n-regular' if doc['regular'] else 'not regular'}, "
        f"{'axis-parallel' if doc['axis_parallel'] else 'NOT axis-parallel'}",
        f"volume {doc['volume']}  det {doc['det']}  {'✓' if vol == det else '✗'}",
    ]
    if n <= 3:
        rep = geometry.check_neighbors(A)
        doc["neighbours"] = {
            "count": len(rep.neighbours),
            "expected": 2 * (2**n - 1),
            "interior_overlaps": [list(v) for v in rep.interior_overlaps],
            "ok": rep.ok,
        }
        ok &= rep.ok
        lines.append(
            f"neighbours {len(rep.neighbours)} (expected {2 * (2**n - 1)}), "
            f"interior overlaps {len(rep.interior_overlaps)}  {'✓' if rep.ok else '✗'}"
        )
    if args.points:
        cov = geometry.check_coverage(A, geometry.random_points(n, rng, args.points))
        doc["coverage"] = {"points": cov.points, "covered": cov.covered, "max_steps": cov.max_steps}
        ok &= cov.ok
        lines.append(f"coverage {cov.covered}/{cov.points} (max steps {cov.max_steps})")
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(geometry.svg_tiling(A))
        doc["svg"] = args.svg
        lines.append(f"wrote {args.svg}")
    doc["ok"] = ok
    _emit(args, doc, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_search(args) -> int:
    cfg = f2_search.SearchConfig(
        r=args.r,
        workers=args.workers,
        lemma_filter=not args.no_lemma_filter,
        pair_check=not args.no_pair_check,
        allow_r11=args.allow_r11,
    )
    try:
        cfg.validate()
    except ValueError as e:
        raise UsageError(str(e)) from None

    def progress(k, total):
        if args.progress:
            print(f"\r{k}/{total} prefixes", end="", file=sys.stderr, flush=True)

    res = f2_search.search(cfg, progress)
    if args.progress:
        print(file=sys.stderr)
    cert = f2_search.certify(res)
    if args.cert:
        with open(args.cert, "w") as fh:
            json.dump(cert, fh, indent=1)
    doc = {k: cert[k] for k in ("r", "outcome", "nodes_visited", "pruned", "span_candidates",
                                "lemma_eliminated", "pair_eliminated", "wall_seconds",
                                "alphabet_hash")}
    doc["candidates"] = len(res.candidates)
    lines = [
        f"r = {res.r}: {res.outcome}",
        f"nodes {res.nodes_visited}, pruned {res.pruned}",
        f"span candidates {res.span_candidates}, removed by lemma filter {res.lemma_eliminated}, "
        f"by pair check {res.pair_eliminated}",
        f"surviving candidates {len(res.candidates)}",
        f"{res.wall_seconds:.2f} s",
    ]
    _emit(args, doc, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    kinds = [k.value for k in df.FormulaKind]
    ap = argparse.ArgumentParser(
        prog="detbell",
        description="Exact determinant and permanent formulas, decompositions, tilings and the F2 rank search.",
    )
    sub = ap.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a formula on a matrix")
    p.add_argument("--formula", choices=kinds, default="main", help="formula to evaluate")
    p.add_argument("--matrix-file", required=True, help="matrix in the 'n domain' text format")
    p.add_argument("--compare", action="store_true", help="run every applicable formula and compare")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("counts", parents=[common], help="Bell numbers and B_n,k")
    p.add_argument("-n", type=int, default=9, help="largest n (default 9)")
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("decompose", parents=[common], help="export a tensor decomposition")
    p.add_argument("--formula", choices=kinds, default="main")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--domain", default="Q", help="Z, Q, F2 or Fp:<p>")
    p.add_argument("-o", "--output", help="JSON file (stdout when omitted)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", parents=[common], help="check a decomposition file")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", parents=[common], help="tensor rank bounds for det_n")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--q", type=int, help="field size (prime power)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("waring", parents=[common], help="Waring decomposition of det_n")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--domain", default="Q")
    p.add_argument("--verify", action="store_true", help="expand and compare (n <= 4)")
    p.add_argument("-o", "--output", help="JSON file")
    p.set_defaults(func=cmd_waring)

    p = sub.add_parser("polytope", parents=[common], help="skeleton, volume and tiling checks")
    p.add_argument("-n", type=int, help="size; uses (n+1)I - J without a matrix file")
    p.add_argument("--matrix-file", help="admissible matrix over Z or Q")
    p.add_argument("--points", type=int, default=0, help="random points for the coverage check")
    p.add_argument("--svg", help="write the tile and its neighbours (n = 2)")
    p.set_defaults(func=cmd_polytope)

    p = sub.add_parser("search", parents=[common], help="rank-r search for det_4 over F2")
    p.add_argument("--r", type=int, required=True, choices=range(6, 12), metavar="R",
                   help="target rank, 6..11")
    p.add_argument("--no-lemma-filter", action="store_true", help="report every spanning tuple")
    p.add_argument("--no-pair-check", action="store_true", help="skip the pair contraction check")
    p.add_argument("--workers", type=int, help="processes (default: DETBELL_WORKERS or 1)")
    p.add_argument("--cert", help="write a certificate JSON")
    p.add_argument("--allow-r11", action="store_true", help="permit the very long r = 11 run")
    p.add_argument("--progress", action="store_true", help="report prefixes on stderr")
    p.set_defaults(func=cmd_search)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, SchemaViolation) as e:
        print(f"detbell {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DetBellError, ValueError) as e:
        print(f"detbell {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
