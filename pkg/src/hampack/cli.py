"""Command-line front end: `hampack <command> [options]`.

Every command writes one document to --out (stdout by default), either JSON
(sorted keys, "schema": 1) or CSV.  Output depends only on the inputs and
--seed, except for pack --timings.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from typing import Any, Callable

import numpy as np

from hampack.errors import HampackError, Infeasible
from hampack.factors import r_factor
from hampack.graph import Graph, gen_gnp, read_graph, split_layers, write_graph
from hampack.pipeline import SCHEMA, PipelineParams, run_full
from hampack.plan import PlanOverrides
from hampack.pseudo import CLAUSES, VIOLATED, mc_frequencies, run_clause
from hampack.twofactor import decompose_with_budget, petersen_decompose
from hampack.verify import verify_packing

DEFAULT_CLAUSES = ("degree_window", "simplicity", "strongly_2_jumping", "jumbled")


class Result:
    """A command's output: the JSON document, a CSV table and an exit code."""

    def __init__(self, doc: dict, header: list[str], rows: list[list], code: int = 0):
        self.doc = {"schema": SCHEMA, **doc}
        self.header = header
        self.rows = rows
        self.code = code


def _plain(obj: Any):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return dataclasses.asdict(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, default=_plain) + "\n"


def render(res: Result, fmt: str) -> str:
    if fmt == "json":
        return dumps(res.doc)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.header)
    w.writerows(res.rows)
    return buf.getvalue()


def _pair(text: str) -> tuple[int, float]:
    try:
        n, p = text.split(",")
        return int(n), float(p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,p, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _load(args) -> tuple[Graph, float | None]:
    """Graph from --graph or --gnp, with the generating p when known."""
    if getattr(args, "graph", None):
        return read_graph(args.graph), None
    if getattr(args, "gnp", None):
        n, p = args.gnp
        return gen_gnp(n, p, args.seed), p
    raise HampackError("give --graph FILE or --gnp n,p")


def _density(g: Graph) -> float:
    pairs = g.n * (g.n - 1) // 2
    return g.m / pairs if pairs else 0.0


def _edge_rows(g: Graph) -> list[list]:
    return [[u, v] for u, v in g.edges()]


# commands

def cmd_gen(args) -> Result:
    g = gen_gnp(args.n, args.p, args.seed)
    if args.graph_out:
        write_graph(g, args.graph_out)
    doc = {"command": "gen", "n": g.n, "p": args.p, "seed": args.seed, "m": g.m,
           "min_degree": g.min_degree(), "max_degree": g.max_degree(), "edges": _edge_rows(g)}
    return Result(doc, ["u", "v"], _edge_rows(g))


def cmd_split(args) -> Result:
    g, p = _load(args)
    p0 = args.p0 if args.p0 is not None else (p if p is not None else _density(g))
    layers = split_layers(g, args.weights, seed=args.seed, p0=p0)
    if args.prefix:
        for i, h in enumerate(layers):
            write_graph(h, f"{args.prefix}{i}.txt")
    doc = {"command": "split", "n": g.n, "p0": p0, "weights": args.weights, "seed": args.seed,
           "layers": [{"index": i, "m": h.m, "min_degree": h.min_degree(), "edges": _edge_rows(h)}
                      for i, h in enumerate(layers)]}
    rows = [[i, u, v] for i, h in enumerate(layers) for u, v in h.edges()]
    return Result(doc, ["layer", "u", "v"], rows)


def cmd_check(args) -> Result:
    g, p = _load(args)
    p = args.p if args.p is not None else (p if p is not None else _density(g))
    clauses = args.clause or list(DEFAULT_CLAUSES)
    results = [run_clause(g, p, c, seed=args.seed) for c in clauses]
    bad = any(r.verdict == VIOLATED for r in results)
    doc = {"command": "check", "n": g.n, "p": p, "seed": args.seed,
           "clauses": {c: r.to_dict() for c, r in zip(clauses, results)}}
    rows = [[c, r.verdict, r.mode] for c, r in zip(clauses, results)]
    return Result(doc, ["clause", "verdict", "mode"], rows, 1 if bad else 0)


def cmd_factor(args) -> Result:
    g, _ = _load(args)
    doc = {"command": "factor", "n": g.n, "r": args.r, "seed": args.seed}
    try:
        h = r_factor(g, args.r, seed=args.seed, strategy=args.strategy)
    except Infeasible as exc:
        cert = exc.certificate
        doc.update(found=False, reason=str(exc),
                   certificate=None if cert is None else {"S": sorted(cert.S), "T": sorted(cert.T),
                                                          "R": cert.R, "Q": cert.Q})
        return Result(doc, ["u", "v"], [], 1)
    if args.graph_out:
        write_graph(h, args.graph_out)
    doc.update(found=True, m=h.m, edges=_edge_rows(h))
    return Result(doc, ["u", "v"], _edge_rows(h))


def cmd_twofactor(args) -> Result:
    g, _ = _load(args)
    if args.r is not None:
        g = r_factor(g, args.r, seed=args.seed)
    if args.budget:
        factors, _ = decompose_with_budget(g, seed=args.seed)
    else:
        factors = petersen_decompose(g, seed=args.seed, improve=args.improve)
    doc = {"command": "twofactor", "n": g.n, "seed": args.seed, "c_total": sum(f.c for f in factors),
           "factors": [{"cycles": [list(c) for c in f.cycles], "c": f.c, "flags": list(f.flags)}
                       for f in factors]}
    rows = [[i, k, " ".join(map(str, c))] for i, f in enumerate(factors) for k, c in enumerate(f.cycles)]
    return Result(doc, ["factor", "cycle", "vertices"], rows)


def cmd_pack(args) -> Result:
    if args.graph:
        source: Graph | tuple = read_graph(args.graph)
    elif args.gnp:
        source = (args.gnp[0], args.gnp[1], args.seed)
    else:
        raise HampackError("give --graph FILE or --gnp n,p")
    ov = PlanOverrides.strict() if args.strict else PlanOverrides()
    params = PipelineParams(overrides=ov, instrument=args.instrument, timings=args.timings)
    pk = run_full(source, params, seed=args.seed)
    doc = pk.to_dict()
    doc.pop("schema")
    rows = [["cycle", i, " ".join(map(str, c))] for i, c in enumerate(pk.cycles)]
    rows += [["matching", i, f"{u} {v}"] for i, (u, v) in enumerate(pk.matching)]
    return Result(doc, ["kind", "index", "vertices"], rows, 0 if pk.complete else 1)


def cmd_verify(args) -> Result:
    g = read_graph(args.graph)
    with open(args.packing, encoding="utf-8") as fh:
        packing = json.load(fh)
    rep = verify_packing(g, packing)
    doc = {"command": "verify", **rep.to_dict()}
    rows = [[e["check"], json.dumps(e, sort_keys=True)] for e in rep.errors]
    return Result(doc, ["check", "detail"], rows, 0 if rep.ok else 1)


def cmd_mc(args) -> Result:
    clauses = args.clause or ["degree_window.lower"]
    reps = mc_frequencies(args.n, args.p, args.trials, clauses, args.seed, threads=args.threads)
    doc = {"command": "mc", "n": args.n, "p": args.p, "trials": args.trials, "seed": args.seed,
           "reports": {c: r.to_dict() for c, r in reps.items()}}
    rows = [[i, c, o] for c, r in reps.items() for i, o in enumerate(r.outcomes)]
    return Result(doc, ["trial", "clause", "outcome"], rows)


COMMANDS: dict[str, Callable[[argparse.Namespace], Result]] = {
    "gen": cmd_gen, "split": cmd_split, "check": cmd_check, "factor": cmd_factor,
    "twofactor": cmd_twofactor, "pack": cmd_pack, "verify": cmd_verify, "mc": cmd_mc,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hampack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="-", help="output file, '-' for stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    source = argparse.ArgumentParser(add_help=False)
    src = source.add_mutually_exclusive_group()
    src.add_argument("--graph", help="graph file ('n m' header, one 'u v' per edge)")
    src.add_argument("--gnp", type=_pair, metavar="N,P", help="sample G(n, p) with --seed")

    p = sub.add_parser("gen", parents=[common], help="sample G(n, p)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--graph-out", help="also write the graph file")

    p = sub.add_parser("split", parents=[common, source], help="split edges into random layers")
    p.add_argument("--weights", type=_floats, required=True, help="layer probabilities, comma separated")
    p.add_argument("--p0", type=float, help="edge probability of the input (default: generating p or density)")
    p.add_argument("--prefix", help="write layer i to PREFIXi.txt")

    p = sub.add_parser("check", parents=[common, source], help="pseudorandomness clauses")
    p.add_argument("--p", type=float, help="edge probability (default: generating p or density)")
    p.add_argument("--clause", action="append", help=f"repeatable; one of {', '.join(CLAUSES)} (u_jumping:U)")

    p = sub.add_parser("factor", parents=[common, source], help="spanning r-regular subgraph")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--strategy", choices=("auto", "gadget", "augment"), default="auto")
    p.add_argument("--graph-out", help="also write the factor as a graph file")

    p = sub.add_parser("twofactor", parents=[common, source], help="2-factorisation of an even-regular graph")
    p.add_argument("--r", type=int, help="first take an r-factor of the input")
    p.add_argument("--budget", action="store_true", help="keep per-factor cycle counts low")
    p.add_argument("--improve", action="store_true", help="merge permutation cycles when possible")

    p = sub.add_parser("pack", parents=[common, source], help="edge-disjoint Hamilton cycle packing")
    p.add_argument("--strict", action="store_true", help="unscaled schedule (fails at desk sizes)")
    p.add_argument("--instrument", action="store_true", help="audit neighbourhood sandwiches")
    p.add_argument("--timings", action="store_true", help="record stage times (output no longer reproducible)")

    p = sub.add_parser("verify", parents=[common], help="re-check a saved packing")
    p.add_argument("--graph", required=True)
    p.add_argument("--packing", required=True, help="JSON written by pack")

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo frequency of a clause over G(n, p)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--clause", action="append", help="repeatable; default degree_window.lower")
    p.add_argument("--threads", type=int, help="worker processes (default HAMPACK_THREADS or 1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        res = COMMANDS[args.command](args)
    except HampackError as exc:
        print(f"hampack {args.command}: {exc}", file=sys.stderr)
        return 2
    text = render(res, args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
