"""End-to-end packing: split G0, build regular layers, decompose, merge, verify.

Stage order
  1. plan the schedule and split E(G0) into G1, the tier sublayers and G5;
  2. if delta(G0) is odd take an optimal matching covering x0 out of G1;
  3. move every edge at x0 outside the regular layers into G1' (so the
     reservoir never touches x0), and top up low-degree vertices of G1'
     from the reservoir pool;
  4. H1 = the d(x0)-factor of G1';
  5. each kept tier runs the alternating decompose/merge/absorb scheme;
  6. the final even-regular remainder is split into 2-factors and merged
     with x0 kept fixed, using H5 plus all spare edges as the reservoir.
Every edge at x0 then sits in a Hamilton cycle or in the matching.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from hampack.errors import HampackError, Infeasible, StallError
from hampack.factors import r_factor
from hampack.graph import Edge, Graph, canon, gen_gnp, split_layers
from hampack.matching import optimal_matching_covering
from hampack.merge import MergeParams, merge_all, merge_avoiding_vertex
from hampack.plan import LayerPlan, PlanOverrides, plan_parameters
from hampack.pseudo import HOLDS, u_jumping_from_degrees
from hampack.rng import stream, child_seed
from hampack.rotation import Instrument
from hampack.twofactor import AbsorbConfig, absorb_decompose, decompose_with_budget
from hampack.verify import verify_packing

SCHEMA = 1


@dataclass
class PipelineParams:
    overrides: PlanOverrides = field(default_factory=PlanOverrides)
    absorb: AbsorbConfig = field(default_factory=AbsorbConfig.desk)
    merge_retries: int = 6
    stage_retries: int = 3
    bare_retries: int = 200             # final-stage redraws when the reservoir is (nearly) empty
    stall_rounds: int = 2
    repair_slack: int = 2
    instrument: bool = False
    timings: bool = False


@dataclass
class Packing:
    n: int
    seed: int
    plan: dict
    cycles: list[list[int]]
    matching: list[list[int]]
    x0: int
    target: int
    verified: bool = False
    complete: bool = False
    overrides: list[dict] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)
    audits: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"schema": SCHEMA}
        d.update(asdict(self))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class MiniResult:
    cycles: list[tuple[int, ...]]
    leftover: Graph
    bad_trajectory: list[int]
    flags: list[str]
    steps: list[dict]


def _union(n: int, graphs: Sequence[Graph]) -> Graph:
    return Graph.from_edges(n, [e for g in graphs for e in g.edges()], check=False)


def mini_ham_decomp(H0: Graph, layers: Sequence[Graph], r_g: float | None = None,
                    merge: MergeParams | None = None, absorb: AbsorbConfig | None = None,
                    stall_rounds: int = 2, seed: int = 0) -> MiniResult:
    """Cover H0 by Hamilton cycles drawn from H0 and the even-regular layers H_1..H_{2m+1}.

    Round 1 decomposes H0 and merges with H_1 as reservoir.  The leftover's
    H0 edges are the bad edges; each later round absorbs the leftover into
    H_even and merges with H_odd while protecting them.  Unused layers go to
    the leftover, which stays even-regular.
    """
    n = H0.n
    merge = merge or MergeParams()
    absorb = absorb or AbsorbConfig.desk()
    rng = stream(seed, "mini")
    h0_edges = H0.edge_set()
    if H0.m == 0:
        return MiniResult([], _union(n, layers), [0], [], [])
    if len(layers) % 2 == 0 or not layers:
        raise HampackError("need an odd number of layers")
    flags: list[str] = []
    cycles: list[tuple[int, ...]] = []
    steps: list[dict] = []
    if r_g is None:
        r_g = float(np.mean([g.degrees().mean() for g in layers]))
    Fs, _ = decompose_with_budget(H0, r_g, child_seed(rng))
    rep = merge_all(Fs, layers[0], (), merge, child_seed(rng))
    if rep.failures:
        flags.append(f"round 1: {len(rep.failures)} factors unmerged")
    cycles += rep.cycles
    steps += rep.steps
    left = rep.leftover
    bad = left.edge_set() & h0_edges
    trajectory = [len(bad)]
    stall = 0
    j = 1
    while bad and j + 1 < len(layers):
        h_abs, h_res = layers[j], layers[j + 1]
        Fs, _ = absorb_decompose(h_abs, left, bad, float(h_abs.degrees().mean()), absorb, child_seed(rng))
        rep = merge_all(Fs, h_res, bad, merge, child_seed(rng))
        if rep.failures:
            flags.append(f"round {j // 2 + 2}: {len(rep.failures)} factors unmerged")
        cycles += rep.cycles
        steps += rep.steps
        left = rep.leftover
        new_bad = left.edge_set() & h0_edges
        trajectory.append(len(new_bad))
        stall = stall + 1 if len(new_bad) >= len(bad) else 0
        if stall >= stall_rounds:
            raise StallError("bad edges stopped decreasing", state={"trajectory": trajectory})
        bad = new_bad
        j += 2
    if bad:
        flags.append(f"{len(bad)} bad edges left after the last layer")
    left = _union(n, [left, *layers[j:]]) if j < len(layers) else left
    return MiniResult(cycles, left, trajectory, flags, steps)


def _even_floor(d: int) -> int:
    return d - (d % 2)


class _Run:
    def __init__(self, G0: Graph, seed: int, params: PipelineParams):
        self.G0 = G0
        self.n = G0.n
        self.seed = seed
        self.params = params
        self.timings: dict[str, float] = {}
        self.diagnostics: list[dict] = []
        self.audits: dict = {}
        self.cycles: list[list[int]] = []
        self.matching: list[Edge] = []
        self.instrument = Instrument() if params.instrument else None

    def merge_params(self) -> MergeParams:
        return MergeParams(retries=self.params.merge_retries, instrument=self.instrument)

    def timed(self, name: str, fn, *args, **kw):
        t = time.perf_counter()
        try:
            return fn(*args, **kw)
        finally:
            self.timings[name] = round(time.perf_counter() - t, 4)

    def run(self) -> Packing:
        G0, n = self.G0, self.n
        m_all = G0.m
        p0 = 2 * m_all / (n * (n - 1)) if n > 1 else 0.0
        x0 = G0.argmin_degree() if n else 0
        delta = G0.min_degree() if n else 0
        self.x0 = x0
        self.plan: LayerPlan | None = None
        target = delta // 2
        packing = Packing(n, self.seed, {}, [], [], x0, target)
        try:
            p_plan = min(max(p0, 1e-12), 1 - 1e-9)
            if p_plan != p0:
                self.diagnostics.append({"stage": "plan", "note": f"density {p0} clamped to {p_plan} for planning"})
            self.plan = plan_parameters(n, p_plan, self.params.overrides)
            packing.plan = self.plan.to_dict()
            packing.overrides = self.plan.overrides
            self.stages()
        except HampackError as exc:
            self.diagnostics.append({"stage": getattr(self, "stage", "plan"), "error": type(exc).__name__,
                                     "message": str(exc)})
        packing.cycles = [list(map(int, c)) for c in self.cycles]
        packing.matching = [list(e) for e in sorted(self.matching)]
        report = verify_packing(G0, packing)
        packing.verified = report.ok
        # a stage error means the run stopped short, even if the target happens to be met
        packing.complete = report.complete and not any("error" in d and not d.get("recovered") for d in self.diagnostics)
        if report.errors:
            self.diagnostics.append({"stage": "verify", "errors": report.errors[:20]})
        packing.diagnostics = self.diagnostics
        if self.instrument is not None:
            self.audits["preserve_nhood"] = self.instrument.to_dict()
        packing.audits = self.audits
        packing.timings = self.timings if self.params.timings else {}
        return packing

    def stages(self) -> None:
        G0, n, x0, plan = self.G0, self.n, self.x0, self.plan
        rng = stream(self.seed, "pipeline")
        self.stage = "split"
        layers = self.timed("split", split_layers, G0, plan.weights(), child_seed(rng), plan.p0)
        G1, G5 = layers[0], layers[-1]
        subs: dict[int, list[Graph]] = {}
        k = 1
        for i in plan.tiers:
            cnt = len(plan.sub[i])
            subs[i] = layers[k:k + cnt]
            k += cnt
        delta = G0.min_degree()

        self.stage = "matching"
        if delta % 2:
            try:
                M = self.timed("matching", optimal_matching_covering, G1, x0, child_seed(rng))
            except Infeasible:
                # desk fallback: look for the matching in the whole graph minus the tier layers
                pool = _union(n, [G1, G5])
                M = optimal_matching_covering(pool, x0, child_seed(rng))
                self.diagnostics.append({"stage": "matching", "note": "matching taken from G1 + G5"})
                G5 = G5.without_edges(M.edges)
                G1 = G1.without_edges(M.edges)
            self.matching = sorted(M.edges)
            G1p = G1.without_edges(M.edges)
        else:
            G1p = G1

        self.stage = "layers"
        at_x0 = G5.edges_at(x0)
        H5 = G5.without_edges(at_x0)
        moved = list(at_x0)
        H: dict[int, list[Graph]] = {}
        spare: list[Edge] = []
        for i, gs in subs.items():
            H[i] = []
            for g in gs:
                r = _even_floor(g.min_degree())
                h = r_factor(g, r, child_seed(rng))
                rest = g.without_edges(h.edges())
                for e in rest.edges():
                    (moved if x0 in e else spare).append(e)
                H[i].append(h)
        G1p = G1p.with_edges(moved)
        self.audit_x0(G1p, H)
        self.audit_claims(G1, G5, subs)

        self.stage = "repair"
        r1 = G1p.degree(x0)
        G1p, H5, spare = self.repair(G1p, H5, spare, r1)

        self.stage = "h1"
        H1 = self.timed("h1", r_factor, G1p, r1, child_seed(rng))
        rest1 = G1p.without_edges(H1.edges())

        H0 = H1
        r_g = float(G1.degrees().mean())
        for i in plan.tiers:
            self.stage = f"tier{i}"
            try:
                res = self.timed(f"tier{i}", mini_ham_decomp, H0, H[i], None, self.merge_params(),
                                 self.params.absorb, self.params.stall_rounds, child_seed(rng))
            except HampackError as exc:
                # runtime tier collapse: the tier's regular layers join H0 for the later stages
                self.diagnostics.append({"stage": f"tier{i}", "note": "tier collapsed at runtime",
                                         "error": type(exc).__name__, "message": str(exc), "recovered": True})
                H0 = _union(n, [H0, *H[i]])
                continue
            self.cycles += [list(c) for c in res.cycles]
            self.audits[f"tier{i}_bad"] = res.bad_trajectory
            if res.flags:
                self.diagnostics.append({"stage": f"tier{i}", "flags": res.flags})
            H0 = res.leftover

        self.stage = "final"
        reservoir = _union(n, [H5, rest1, Graph.from_edges(n, spare, check=False)])
        last = None
        # with no spare edges only already-Hamilton factors survive, so redraw more often
        tries = self.params.stage_retries if reservoir.m >= n else max(self.params.stage_retries,
                                                                        self.params.bare_retries)
        for attempt in range(tries):
            Fs, c_total = decompose_with_budget(H0, r_g, child_seed(rng))
            report = merge_avoiding_vertex(Fs, G0, x0, self.merge_params(), child_seed(rng), reservoir=reservoir)
            last = report
            if not report.failures:
                break
            if attempt < 3:
                self.diagnostics.append({"stage": "final", "attempt": attempt, "failures": report.failures})
        self.cycles += [list(c) for c in last.cycles]
        self.audits["final_steps"] = len(last.steps)
        self.audits["final_used_max"] = max((s["used"] / max(1, s["c_before"] - s["c_after"]) for s in last.steps),
                                            default=0)

    def audit_x0(self, G1p: Graph, H: dict[int, list[Graph]]) -> None:
        x0 = self.x0
        total = G1p.degree(x0) + sum(h.degree(x0) for hs in H.values() for h in hs)
        total += sum(1 for e in self.matching if x0 in e)
        self.audits["x0_edges"] = {"d_G0": self.G0.degree(x0), "accounted": total,
                                   "ok": total == self.G0.degree(x0)}

    def audit_claims(self, G1: Graph, G5: Graph, subs: dict[int, list[Graph]]) -> None:
        u = self.plan.u
        lhs = G5.max_degree() + sum(g.max_degree() - g.min_degree() + 1 for gs in subs.values() for g in gs)
        self.audits["degree_spread"] = {"lhs": int(lhs), "u": u, "ok": bool(lhs <= u)}
        res = u_jumping_from_degrees(G1.degrees(), int(math.ceil(2 * u)))
        ok = res.verdict == HOLDS and G1.argmin_degree() == self.x0
        self.audits["g1_jumping"] = {"u": 2 * u, "ok": bool(ok)}

    def repair(self, G1p: Graph, H5: Graph, spare: list[Edge], r1: int):
        """Move reservoir edges into G1' until every vertex has degree >= r1 (+ slack when possible)."""
        x0 = self.x0
        deg = [G1p.degree(v) for v in range(self.n)]
        want = r1 + self.params.repair_slack
        h5 = [set(a) for a in H5.adj]
        sp = {}
        for e in spare:
            sp.setdefault(e[0], set()).add(e[1])
            sp.setdefault(e[1], set()).add(e[0])
        added: list[Edge] = []
        for v in range(self.n):
            if v == x0:
                continue
            for pool in (h5, sp):
                while deg[v] < want:
                    nb = pool[v] if isinstance(pool, list) else pool.get(v, set())
                    cand = sorted(w for w in nb if w != x0)
                    if not cand:
                        break
                    w = min(cand, key=lambda w: (deg[w], w))
                    nb.discard(w)
                    other = pool[w] if isinstance(pool, list) else pool.get(w, set())
                    other.discard(v)
                    added.append(canon(v, w))
                    deg[v] += 1
                    deg[w] += 1
        short = [v for v in range(self.n) if deg[v] < r1]
        self.audits["repair"] = {"moved": len(added), "short": len(short)}
        if added:
            self.diagnostics.append({"stage": "repair", "note": f"moved {len(added)} reservoir edges into G1'"})
        G1p = G1p.with_edges(added)
        H5 = Graph.from_adjacency(h5)
        spare = sorted({canon(u, w) for u, nb in sp.items() for w in nb})
        if short:
            raise Infeasible(f"{len(short)} vertices stay below degree {r1}", certificate=short[:10])
        return G1p, H5, spare


def run_full(G0: Graph | tuple, params: PipelineParams | None = None, seed: int = 0) -> Packing:
    """Pack floor(delta/2) Hamilton cycles (+ optimal matching when delta is odd).

    G0 may be a Graph or an (n, p, seed) triple; the triple's seed draws the
    graph, `seed` drives the packing.  Failures produce a partial Packing
    whose diagnostics name the stage.
    """
    params = params or PipelineParams()
    if isinstance(G0, tuple):
        n, p, gseed = G0
        G0 = gen_gnp(int(n), float(p), int(gseed))
    return _Run(G0, seed, params).run()
