"""Command-line front end.

Machine-readable JSON goes to stdout (or ``--output``), a short human report
to stderr. Exit codes: 0 success, 1 the analysis found a not-positive
verdict (or ``check`` found a disagreement), 2 invalid input, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .certificates import (NON_POSITIVE, GeneratorShortfall, certificate_to_obj,
                           find_stable_involution, grid_pipeline, involution_to_obj,
                           levi_witness_to_obj, necessary_conditions, odd_edge_certificate,
                           tensorize, verify_certificate)
from .checks import run_checks
from .decomposition import (DEFAULT_PRECISION, Inconclusive, SamplerExhausted, decompose,
                            decomposition_to_obj, rescale_odd, rescaled_to_obj,
                            transfer_witness)
from .density import bip_from_obj, density_bip, density_sym, sym_from_obj
from .homomorphism import count_homs, weighted_hom_sum
from .structures import (Hypergraph, ParseError, WeightedHypergraph, bipartite_from_obj,
                         bipartite_to_obj, box_product, cycle, fano, format_rational, grid,
                         hypergraph_from_obj, hypergraph_to_obj, levi, set_inclusion_graph,
                         set_inclusion_rgraph, single_edge, star, subdivided_complete_bipartite)

OK, NOT_POSITIVE, INVALID, INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers


def _read_json(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path} line {exc.lineno} column {exc.colno}") from exc


def _input_obj(args):
    return _read_json(args.input if args.input is not None else "-")


def _as_hypergraph(obj) -> Hypergraph:
    h = hypergraph_from_obj(obj)
    return h.base if isinstance(h, WeightedHypergraph) else h


NAMED = {
    "single-edge": lambda k: single_edge(k),
    "grid": lambda k: grid(k),
    "cycle": lambda k: cycle(k),
    "star": lambda k: star(k),
}


def _named(name_or_path: str):
    """``fano``, ``single-edge-3``, ``grid-3``, ``cycle-4``, ``star-3``, or a JSON file."""
    if name_or_path == "fano":
        return fano()
    name, _, arg = name_or_path.rpartition("-")
    if name in NAMED and arg.isdigit():
        return NAMED[name](int(arg))
    return hypergraph_from_obj(_read_json(name_or_path))


# ---------------------------------------------------------------------------
# verbs


def cmd_construct(args):
    kind, params = args.kind, args.params
    need = {"grid": 1, "single-edge": 1, "subdivision-Krr": 1, "set-inclusion": 3,
            "fano": 0, "cycle": 1, "star": 1, "levi": 0, "box-product": 0}
    if kind not in need:
        raise UsageError(f"unknown object {kind!r}; choose from {', '.join(need)}")
    if len(params) != need[kind]:
        raise UsageError(f"{kind} takes {need[kind]} integer argument(s)")
    if kind == "grid":
        obj = hypergraph_to_obj(grid(*params))
    elif kind == "single-edge":
        obj = hypergraph_to_obj(single_edge(*params))
    elif kind == "subdivision-Krr":
        obj = bipartite_to_obj(subdivided_complete_bipartite(*params))
    elif kind == "set-inclusion":
        if args.bipartite:
            obj = bipartite_to_obj(set_inclusion_graph(*params))
        else:
            obj = hypergraph_to_obj(set_inclusion_rgraph(*params))
    elif kind == "fano":
        obj = hypergraph_to_obj(fano())
    elif kind == "cycle":
        obj = hypergraph_to_obj(cycle(*params))
    elif kind == "star":
        obj = hypergraph_to_obj(star(*params))
    elif kind == "levi":
        obj = bipartite_to_obj(levi(_as_hypergraph(_input_obj(args))))
    else:
        g1 = _as_hypergraph(_input_obj(args))
        g2 = _as_hypergraph(_read_json(args.other)) if args.other else g1
        obj = hypergraph_to_obj(box_product(g1, g2))
    return OK, obj, f"constructed {kind} with {len(obj['edges'])} edges on {obj['n']} vertices"


def cmd_homcount(args):
    h = _as_hypergraph(_input_obj(args))
    target = _named(args.target)
    if isinstance(target, WeightedHypergraph):
        s = weighted_hom_sum(h, target)
        obj = {"hom_count": s.hom_count, "weighted_sum": format_rational(s.value)}
        return OK, obj, f"{s.hom_count} homomorphisms, weighted sum {s.value}"
    n = count_homs(h, target)
    return OK, {"hom_count": n}, f"{n} homomorphisms"


def cmd_density(args):
    if args.step is None:
        raise UsageError("density needs --step FILE")
    g_obj, f_obj = _input_obj(args), _read_json(args.step)
    if "N" in f_obj:
        g, f = bipartite_from_obj(g_obj), bip_from_obj(f_obj)
        t = density_bip(g, f)
    else:
        t = density_sym(_as_hypergraph(g_obj), sym_from_obj(f_obj))
    return OK, {"density": format_rational(t)}, f"density {t} (~{float(t):.6g})"


def cmd_involution(args):
    h = _as_hypergraph(_input_obj(args))
    s = find_stable_involution(h)
    if s is None:
        obj = {"kind": "none", "hypergraph": hypergraph_to_obj(h), "exhaustive": True}
        return OK, obj, "no stable involution exists"
    return OK, involution_to_obj(h, s), \
        f"stable involution: fixed {list(s.fixed)}, swapped {[list(p) for p in s.pairs]}"


def cmd_certify(args):
    h = _as_hypergraph(_input_obj(args))
    report = necessary_conditions(h)
    cert = None
    if report.involution is not None:
        cert = involution_to_obj(h, report.involution)
    elif report.odd_edge is not None:
        cert = certificate_to_obj(odd_edge_certificate(h))
    obj = {"verdict": report.verdict, "reasons": report.reasons(),
           "even_degree_vertex": report.has_even_degree_vertex,
           "even_degree_test_applies": report.even_degree_applies,
           "odd_edge": report.odd_edge, "certificate": cert}
    code = NOT_POSITIVE if report.verdict == NON_POSITIVE else OK
    why = "; ".join(report.reasons()) or "no test decided"
    return code, obj, f"{report.verdict}: {why}"


def cmd_grid_pipeline(args):
    min_edges = Fraction(args.min_edges) if args.min_edges else None
    cert = grid_pipeline(args.r, args.n, seed=args.seed, retries=args.retries,
                         min_edges=min_edges)
    d = cert.details
    msg = (f"G: n={d['n']}, e={d['e']}; sum 2*{d['c_r']}*n*e - {d['C_r']}*e^2 = {cert.total}"
           + (" (direct enumeration agrees)" if "direct_sum" in d else ""))
    return NOT_POSITIVE, certificate_to_obj(cert), msg


def cmd_decompose(args):
    a = sym_from_obj(_input_obj(args))
    d = decompose(a, seed=args.seed, method=args.method)
    obj = decomposition_to_obj(d)
    if args.rescale:
        obj["rescaled"] = rescaled_to_obj(rescale_odd(d, args.precision))
    return OK, obj, f"{d.N} rank-one terms for an order-{a.r} tensor of size {a.n}"


def cmd_transfer(args):
    obj = _input_obj(args)
    if obj.get("kind") == "negativity":
        pattern = _as_hypergraph(obj["pattern"])
        source = hypergraph_from_obj(obj["target"])
        a = tensorize(source)
    else:
        if args.step is None:
            raise UsageError("transfer needs a negativity certificate or --step FILE")
        pattern = _as_hypergraph(obj)
        source = a = sym_from_obj(_read_json(args.step))
    w = transfer_witness(pattern, a, precision=args.precision, seed=args.seed,
                         direct=args.direct)
    out = levi_witness_to_obj(pattern, source, w, args.seed)
    msg = (f"Levi graph density in [{float(w.lower):.6e}, {float(w.upper):.6e}] "
           f"with a {w.f.n} x {w.f.N} step function at {w.precision} bits")
    return NOT_POSITIVE, out, msg


def cmd_verify(args):
    obj = _input_obj(args)
    if isinstance(obj, dict) and "kind" not in obj and "certificate" in obj:
        obj = obj["certificate"]
    if not isinstance(obj, dict):
        raise UsageError("no certificate to verify")
    ok, msg = verify_certificate(obj)
    return (OK if ok else INVALID), {"ok": ok, "message": msg}, \
        ("accepted: " if ok else "rejected: ") + msg


def cmd_check(args):
    tallies = run_checks(budget=args.budget, seed=args.seed)
    failures = sum(t["failures"] for t in tallies.values())
    obj = {"budget": args.budget, "seed": args.seed, "suites": tallies, "ok": failures == 0}
    return (OK if failures == 0 else NOT_POSITIVE), obj, \
        f"{sum(t['cases'] for t in tallies.values())} cases, {failures} disagreements"


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="FILE|-", help="JSON input (default stdin)")
    common.add_argument("--output", metavar="FILE", help="write the JSON result here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, metavar="BITS")

    p = argparse.ArgumentParser(prog="posigraph",
                                description="Exact positivity tools for graphs and hypergraphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("construct", parents=[common], help="emit a named object as JSON")
    s.add_argument("kind")
    s.add_argument("params", nargs="*", type=int)
    s.add_argument("--bipartite", action="store_true",
                   help="set-inclusion: emit the bipartite graph instead of the r-graph")
    s.add_argument("--other", metavar="FILE", help="box-product: second factor")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("homcount", parents=[common], help="count homomorphisms into a target")
    s.add_argument("--target", required=True,
                   help="fano, single-edge-R, grid-R, cycle-L, star-K, or a JSON file")
    s.set_defaults(func=cmd_homcount)

    s = sub.add_parser("density", parents=[common], help="exact density against a step function")
    s.add_argument("--step", metavar="FILE")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("involution", parents=[common], help="search for a stable involution")
    s.set_defaults(func=cmd_involution)

    s = sub.add_parser("certify", parents=[common], help="run the necessary-condition battery")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("grid-pipeline", parents=[common],
                       help="negativity certificate for the grid hypergraph")
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--n", type=int, default=15)
    s.add_argument("--retries", type=int, default=4)
    s.add_argument("--min-edges", metavar="Q", help="also require e(G) > Q*n, e.g. 2/3")
    s.set_defaults(func=cmd_grid_pipeline)

    s = sub.add_parser("decompose", parents=[common], help="symmetric decomposition of a tensor")
    s.add_argument("--method", choices=["auto", "dense", "sparse"], default="auto")
    s.add_argument("--rescale", action="store_true", help="add the odd-order rescaled form")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("transfer", parents=[common],
                       help="move a negative witness to the Levi graph")
    s.add_argument("--step", metavar="FILE")
    s.add_argument("--direct", action="store_true",
                   help="also evaluate the Levi density directly (small inputs)")
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("verify", parents=[common], help="recheck a certificate file")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("check", parents=[common], help="oracle comparison suites")
    s.add_argument("--budget", type=int, default=20, help="random instances per suite")
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, obj, message = args.func(args)
    except (ParseError, UsageError, ValueError, KeyError, TypeError) as exc:
        print(f"posigraph: invalid input: {exc}", file=sys.stderr)
        return INVALID
    except (Inconclusive, GeneratorShortfall, SamplerExhausted) as exc:
        print(f"posigraph: inconclusive: {exc}", file=sys.stderr)
        return INCONCLUSIVE
    text = json.dumps(obj, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(message, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
