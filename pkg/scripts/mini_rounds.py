"""Bad-edge trajectory of the layered cover on a dense fixture.

Splits G(n, p) into H0, an absorbing layer and two reservoirs, regularises
each and runs mini_ham_decomp, reporting how many H0 edges remain uncovered
after every round.

    python scripts/mini_rounds.py --n 200 --p 0.9 --seeds 5
"""

from __future__ import annotations

import argparse
import time

from hampack.factors import r_factor
from hampack.graph import gen_gnp, split_layers
from hampack.pipeline import mini_ham_decomp
from hampack.rotation import Instrument
from hampack.merge import MergeParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--p", type=float, default=0.9)
    ap.add_argument("--weights", type=float, nargs=4, default=[0.06, 0.12, 0.5, 0.15])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    for s in range(args.seeds):
        G = gen_gnp(args.n, args.p, s)
        parts = split_layers(G, args.weights, seed=s, p0=args.p)
        hs = []
        for g in parts[:4]:
            d = g.min_degree()
            hs.append(r_factor(g, d - d % 2, seed=s))
        inst = Instrument()
        t = time.perf_counter()
        res = mini_ham_decomp(hs[0], hs[1:], merge=MergeParams(instrument=inst), seed=s)
        covered = {tuple(sorted(e)) for c in res.cycles for e in zip(c, c[1:] + c[:1])}
        print(f"seed {s}: degrees {[h.degree(0) for h in hs]}  cycles {len(res.cycles)}  "
              f"bad {res.bad_trajectory}  H0 covered {hs[0].edge_set() <= covered}  "
              f"sandwich {inst.to_dict()}  {time.perf_counter() - t:.1f}s", flush=True)


if __name__ == "__main__":
    main()
