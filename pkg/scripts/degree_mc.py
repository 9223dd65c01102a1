"""Monte Carlo pass rates of the pseudorandomness clauses on G(n, p).

    python scripts/degree_mc.py --n 1024 4096 --p 0.5 --trials 100
"""

from __future__ import annotations

import argparse
import json

from hampack.pseudo import mc_frequencies

DEFAULT = ["degree_window.lower", "degree_window.max", "degree_window.upper", "strongly_2_jumping", "simplicity"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[4096])
    ap.add_argument("--p", type=float, nargs="+", default=[0.5])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--clause", action="append")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out", default="degree_mc.json")
    args = ap.parse_args()
    clauses = args.clause or DEFAULT

    out = []
    for n in args.n:
        for p in args.p:
            reps = mc_frequencies(n, p, args.trials, clauses, args.seed, threads=args.threads)
            for c, r in reps.items():
                lo, hi = r.wilson
                print(f"n={n:5d} p={p:.2f} {c:22s} {r.frequency:.3f}  [{lo:.3f}, {hi:.3f}]", flush=True)
                d = r.to_dict()
                d.pop("outcomes")
                out.append(d)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({"schema": 1, "reports": out}, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
