"""Merging the cycles of a 2-factor into a Hamilton cycle with reservoir edges.

One merge step grows a path P out of F: it joins two cycles through a
reservoir edge, then keeps absorbing further cycles via short rotation
sequences (extension cases), and finally closes P into a cycle by rotating
both ends into two far-apart regions joined by a reservoir edge.  Pivots are
kept inside Int_F(V''), where V'' avoids the endpoints of bad edges and an
optional forbidden vertex, so those edges are never broken.  Broken factor
edges are returned to the reservoir, used reservoir edges leave it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from hampack.errors import MergeStuck, PreconditionError
from hampack.graph import Edge, Graph, canon
from hampack.rng import stream
from hampack.rotation import (
    Instrument, ReachRecord, Reservoir, RotPath, apply_record, closure, edge_budget_factor,
    extend, interior, reachable_set, tau0,
)
from hampack.twofactor import TwoFactor


@dataclass
class MergeParams:
    tau: int | None = None              # rotation depth, default tau0(n)
    eps_segments: float = 1 / 15        # segment construction tolerance
    r_g: float | None = None            # degree scale for the weak-connection threshold
    r_gp: float | None = None           # degree scale of the ambient graph (budget warning only)
    r_h: float | None = None            # reservoir degree for the avoid-set threshold
    retries: int = 6
    enforce_budget: bool = True
    budget_factor: int | None = None    # default ceil(5 ln n / ln ln n)
    max_close_attempts: int = 48
    segment_slack: int = 2              # boundary vertices excused from segment interiors
    instrument: Instrument | None = None
    trace: list | None = None

    def depth(self, n: int) -> int:
        return self.tau if self.tau is not None else tau0(n)

    def budget(self, n: int) -> int:
        return self.budget_factor if self.budget_factor is not None else edge_budget_factor(n)


@dataclass
class AvoidSets:
    v1: frozenset[int]          # V'
    v2: frozenset[int]          # V''
    int_v1: frozenset[int]
    int_v2: frozenset[int]
    removed: tuple[int, ...]
    stats: dict
    flags: tuple[str, ...] = ()


def _adj_of(h) -> Sequence[Iterable[int]]:
    return h.adj


def build_avoid_sets(hp, F: TwoFactor, W: Iterable[int], r_h: float | None = None) -> AvoidSets:
    """Shrink V \\ W until every survivor sees > r_h/2 reservoir neighbours in Int_F(V'').

    At most |W| vertices are removed; hitting that cap sets the 'degraded'
    flag.  V' drops the vertices with >= r_h/2 reservoir neighbours in
    Cl_F(W u removed).
    """
    n = F.n
    adj = _adj_of(hp)
    W = frozenset(W)
    if r_h is None:
        r_h = float(np.median([len(a) for a in adj])) if n else 0.0
    thr = r_h / 2
    if not W:
        every = frozenset(range(n))
        return AvoidSets(every, every, every, every, (), {"W": 0, "int_v2": n, "int_v1": n, "min_nbrs": None})
    fnb = F.neighbors()
    v2 = set(range(n)) - W
    inner = {v for v in v2 if fnb[v][0] in v2 and fnb[v][1] in v2}
    cnt = [sum(1 for w in adj[v] if w in inner) for v in range(n)]
    removed: list[int] = []
    flags = []
    while True:
        weak = next((v for v in sorted(v2) if cnt[v] <= thr), None)
        if weak is None:
            break
        if len(removed) >= len(W):
            flags.append("degraded")
            break
        v2.discard(weak)
        removed.append(weak)
        for u in (weak, *fnb[weak]):
            if u in inner:
                inner.discard(u)
                for w in adj[u]:
                    cnt[w] -= 1
    cl = closure(W | set(removed), F)
    heavy = {v for v in range(n) if sum(1 for w in adj[v] if w in cl) >= thr}
    v1 = frozenset(range(n)) - heavy
    int_v2 = frozenset(inner)
    int_v1 = interior(v1, F)
    min_nbrs = min((sum(1 for w in adj[v] if w in int_v2) for v in v1), default=None)
    ln2 = math.log(max(n, 3)) ** 2
    stats = {"W": len(W), "int_v2": len(int_v2), "int_v1": len(int_v1), "min_nbrs": min_nbrs,
             "removed": len(removed)}
    if len(int_v2) < n - 6 * len(W):
        flags.append("int_v2_small")
    if len(int_v1) < n - len(W) / ln2:
        flags.append("int_v1_small")
    if min_nbrs is not None and min_nbrs < thr:
        flags.append("v1_weak")
    return AvoidSets(v1, frozenset(v2), int_v1, int_v2, tuple(removed), stats, tuple(flags))


@dataclass
class Segments:
    blocks: list[tuple[int, ...]]       # J_i, consecutive along P
    kept: dict[int, frozenset[int]]     # i in I -> J'_i
    flags: tuple[str, ...] = ()
    stats: dict = field(default_factory=dict)

    @property
    def index(self) -> list[int]:
        return sorted(self.kept)

    def weakly_connected(self, v: int, j: int, hp, P: RotPath, thr: float) -> bool:
        return sum(1 for w in hp.adj[v] if w in interior(self.kept[j], P)) <= thr


def build_segments(P: RotPath, hp, U: Iterable[int], eps: float = 1 / 15, r_g: float | None = None,
                   count: int | None = None, slack: int = 2) -> Segments:
    """Split P into floor(ln n) near-equal segments and prune weakly tied vertices.

    A vertex is weakly connected to segment j when it has at most
    r_g/(25 ln n) reservoir neighbours in Int_P(J'_j).  Vertices weakly
    connected to more than eps*ln n surviving segments are dropped from
    their own segment, and a segment whose interior falls to at most
    (1 - eps)|P|/ln n - slack vertices leaves I.
    """
    n = P.n
    ln = math.log(max(n, 3))
    k = count if count is not None else max(1, int(math.floor(ln)))
    L = len(P)
    k = min(k, max(1, L // 3))
    adj = _adj_of(hp)
    if r_g is None:
        r_g = float(np.mean([len(a) for a in adj])) if n else 0.0
    thr = r_g / (25 * ln)
    allow = eps * ln
    U = set(U)
    size, extra = divmod(L, k)
    blocks, start = [], 0
    for i in range(k):
        ln_i = size + (1 if i < extra else 0)
        blocks.append(tuple(P.seq[start:start + ln_i]))
        start += ln_i
    kept = {i: set(b) & U for i, b in enumerate(blocks)}
    floor_size = (1 - eps) * L / k - slack

    def inner(i: int) -> set[int]:
        s = kept[i]
        return {v for v in s if all(w in s for w in _pnb(P, v))}

    ints = {i: inner(i) for i in kept}
    seg_of = {v: i for i, b in enumerate(blocks) for v in b}
    # ties[v][j] = reservoir neighbours of v inside Int(J'_j)
    ties: dict[int, dict[int, int]] = {}
    for i in kept:
        for v in kept[i]:
            t = dict.fromkeys(kept, 0)
            for w in adj[v]:
                j = seg_of.get(w)
                if j is not None and w in ints[j]:
                    t[j] += 1
            ties[v] = t
    flags = []
    removed = 0
    changed = True
    while changed:
        changed = False
        for i in sorted(kept):
            if len(ints[i]) <= floor_size:
                for v in kept[i]:
                    ties.pop(v, None)
                del kept[i]
                del ints[i]
                for t in ties.values():
                    t.pop(i, None)
                changed = True
        for i in sorted(kept):
            for v in sorted(kept[i]):
                if sum(1 for j, c in ties[v].items() if c <= thr) > allow:
                    kept[i].discard(v)
                    ties.pop(v)
                    removed += 1
                    old = ints[i]
                    ints[i] = inner(i)
                    for u in old - ints[i]:
                        for w in adj[u]:
                            if w in ties:
                                ties[w][i] -= 1
                    changed = True
    if len(kept) < (1 - eps) * k:
        flags.append("few_segments")
    if not kept:
        flags.append("empty")
    stats = {"segments": k, "kept": len(kept), "removed": removed, "threshold": thr}
    return Segments(blocks, {i: frozenset(s) for i, s in kept.items()}, tuple(flags), stats)


def _pnb(P: RotPath, v: int) -> list[int]:
    i = P.pos[v]
    return [P.seq[j] for j in (i - 1, i + 1) if 0 <= j < len(P.seq)]


@dataclass
class StepResult:
    factor: TwoFactor
    used: int
    merged: int
    cases: list[str]
    flags: tuple[str, ...] = ()


EXTENDED = object()


class _Step:
    """State of one merge step: the growing path, the reservoir and the guards."""

    def __init__(self, F: TwoFactor, res: Reservoir, bad: frozenset[Edge], params: MergeParams,
                 rng: np.random.Generator, avoid: int | None):
        self.F, self.res, self.bad, self.params, self.rng = F, res, bad, params, rng
        self.avoid = avoid
        self.n = F.n
        self.tau = params.depth(F.n)
        self.cycle_of = F.cycle_of()
        self.fnb = F.neighbors()
        self.cases: list[str] = []
        self.broken: list[Edge] = []
        self.flags: list[str] = []

    def forbid(self, e: Edge) -> bool:
        return e in self.bad or (self.avoid is not None and self.avoid in e)

    def log(self, **event) -> None:
        if self.params.trace is not None:
            self.params.trace.append(event)

    # path surgery with bookkeeping

    def rotate_to(self, P: RotPath, rec: ReachRecord) -> None:
        inst = self.params.instrument
        for pivot, broken in rec.steps:
            if self.forbid(broken):
                raise MergeStuck(f"rotation would break protected edge {broken}")
            self.log(op="rotate", pivot=pivot, broken=list(broken), new=list(canon(P.first, pivot)))
            self.broken.append(broken)
        apply_record(P, rec, self.res, inst, self.v2 if inst is not None else None)

    def absorb(self, P: RotPath, z: int) -> None:
        cyc = self.F.cycles[self.cycle_of[z]]
        a, b = self.fnb[z]
        options = [w for w in (a, b) if not self.forbid(canon(z, w))]
        if not options:
            raise MergeStuck(f"both factor edges at {z} are protected")
        w = options[int(self.rng.integers(len(options)))]
        broken = canon(z, w)
        self.log(op="extend", join=z, broken=list(broken), new=list(canon(P.first, z)))
        before = P.copy() if self.params.instrument is not None else None
        extend(P, cyc, z, broken, self.res)
        if before is not None:
            self.params.instrument.check_extension(before, cyc, P, z, self.v2)
        self.broken.append(broken)

    def search(self, P: RotPath, pivots, stop: Callable[[int], bool]) -> ReachRecord | None:
        recs = reachable_set(P, self.res, pivots, self.tau, mode="endpoint", forbid=self.forbid, stop=stop)
        last = recs[-1]
        return last if stop(last.vertex) else None

    # phases

    def seed(self) -> RotPath:
        """Join two cycles through a reservoir edge xy, giving x' ... x y ... y'."""
        res, cyc_of = self.res, self.cycle_of
        loose = frozenset(v for v in range(self.n) if v != self.avoid)
        for pool in (self.sets.int_v2, self.sets.int_v1, loose):
            xs = sorted(pool)
            self.rng.shuffle(xs)
            for x in xs:
                ys = sorted(y for y in res.adj[x] if y in pool and cyc_of[y] != cyc_of[x])
                if not ys:
                    continue
                y = ys[int(self.rng.integers(len(ys)))]
                yps = [w for w in self.fnb[y] if not self.forbid(canon(y, w))]
                if not yps or all(self.forbid(canon(x, w)) for w in self.fnb[x]):
                    continue
                yp = yps[int(self.rng.integers(len(yps)))]
                cyc = self.F.cycles[cyc_of[y]]
                k = len(cyc)
                j = cyc.index(y)
                step = -1 if cyc[(j + 1) % k] == yp else 1
                seq = [cyc[(j + step * t) % k] for t in range(k)]
                res.give(y, yp)
                self.broken.append(canon(y, yp))
                self.log(op="cut", broken=[y, yp])
                P = RotPath(self.n, seq)
                self.absorb(P, x)
                self.X = {x, y}
                return P
        raise MergeStuck("no reservoir edge joins two cycles inside the protected interior")

    def fix_endpoint(self, P: RotPath) -> None:
        """Make the first endpoint lie in V'' by one rotation or extension."""
        if P.first in self.sets.v2:
            return
        cands = sorted(z for z in self.res.adj[P.first] if z in self.sets.int_v2 and z not in self.X)
        for z in cands:
            if z in P:
                i = P.pos[z]
                if i >= 2 and not self.forbid(canon(P.seq[i - 1], z)) and P.seq[i - 1] in self.sets.v2:
                    self.rotate_to(P, ReachRecord(P.seq[i - 1], ((z, canon(P.seq[i - 1], z)),)))
                    self.X.add(z)
                    return
            else:
                self.absorb(P, z)
                self.X.add(z)
                if P.first in self.sets.v2:
                    return
        self.flags.append("endpoint_outside")

    def off_path_hook(self, P: RotPath) -> Callable[[int], bool]:
        Qp = self.Qp
        adj = self.res.adj
        return lambda v: any(z in Qp and z not in P for z in adj[v])

    def try_extend(self, P: RotPath, label: str) -> bool:
        hook = self.off_path_hook(P)
        rec = self.search(P, self.Qp, hook)
        if rec is None:
            return False
        self.rotate_to(P, rec)
        zs = sorted(z for z in self.res.adj[P.first] if z in self.Qp and z not in P)
        self.absorb(P, zs[int(self.rng.integers(len(zs)))])
        self.cases.append(label)
        return True

    def close_by_segments(self, P: RotPath):
        """Case 2 / 2a / 2b: the closed path, EXTENDED after a 2a extension, or None."""
        p = self.params
        segs = build_segments(P, self.res, self.Qp, p.eps_segments, p.r_g, slack=p.segment_slack)
        if len(segs.kept) < 2:
            self.flags.append("segments_" + ("empty" if not segs.kept else "few"))
            return self.close_generic(P)
        seg_of = {v: i for i, b in enumerate(segs.blocks) for v in b}
        target = {v for s in segs.kept.values() for v in s}
        mark = len(self.broken)
        rec = self.search(P, self.Qp, lambda v: v in target)
        if rec is None:
            self.flags.append("case2_unreachable")
            return self.close_generic(P)
        self.rotate_to(P, rec)
        self.cases.append("2")
        P.reverse()
        if self.try_extend(P, "2a"):
            return EXTENDED

        def hit(edges: Iterable[Edge]) -> set[int]:
            out = set()
            for u, v in edges:
                if seg_of.get(u) is not None and seg_of.get(u) == seg_of.get(v):
                    out.add(seg_of[u])
            return out

        broken2 = hit(self.broken[mark:])
        good = {i for i in segs.kept if i not in broken2}
        target = {v for i in good for v in segs.kept[i]}
        mark2 = len(self.broken)
        rec = self.search(P, self.Qp, lambda v: v in target)
        if rec is None:
            self.flags.append("case2b_unreachable")
            return self.close_generic(P)
        self.rotate_to(P, rec)
        self.cases.append("2b")
        broken_b = hit(self.broken[mark2:])
        clean = sorted((i for i in segs.kept if i not in broken2 | broken_b),
                       key=lambda i: min(P.pos[v] for v in segs.kept[i]))
        half = len(clean) // 2
        if half == 0:
            self.flags.append("halves_empty")
            return self.close_generic(P)
        I1, I2 = clean[:half], clean[len(clean) - half:]
        Q1 = {P.first} | {v for i in I1 for v in segs.kept[i]}
        Q2 = {P.last} | {v for i in I2 for v in segs.kept[i]}
        closed = self.close_between(P, interior(Q1, P), interior(Q2, P))
        if closed is None:
            self.flags.append("ab_no_edge")
            return self.close_generic(P)
        return closed

    def close_between(self, P: RotPath, piv_a, piv_b) -> RotPath | None:
        tau = self.tau
        A = reachable_set(P, self.res, piv_a, tau, mode="endpoint", forbid=self.forbid)
        rev = P.copy().reverse()
        B = reachable_set(rev, self.res, piv_b, tau, mode="endpoint", forbid=self.forbid)
        bmap = {r.vertex: r for r in B}
        pairs = []
        for ra in A:
            for y in self.res.adj[ra.vertex]:
                rb = bmap.get(y)
                if rb is not None and y != ra.vertex:
                    pairs.append((ra.depth + rb.depth, ra.vertex, y, ra, rb))
        pairs.sort(key=lambda t: t[:3])
        for _, x3, y3, ra, rb in pairs[: self.params.max_close_attempts]:
            mark = self.res.checkpoint()
            nb = len(self.broken)
            trial = P.copy()
            try:
                self.rotate_to(trial, ra)
                trial.reverse()
                self.rotate_to(trial, rb)
                if not self.res.has(trial.first, trial.last):
                    raise PreconditionError("closing edge gone")
            except (PreconditionError, MergeStuck):
                self.res.rollback(mark)
                del self.broken[nb:]
                continue
            self.res.take(trial.first, trial.last)
            self.log(op="close", new=list(canon(trial.first, trial.last)))
            return trial
        return None

    def close_generic(self, P: RotPath) -> RotPath | None:
        """Fallback: rotate the front anywhere allowed, then search from the other end."""
        for pivots in (self.Qp, self.loose):
            A = reachable_set(P, self.res, pivots, self.tau, mode="endpoint", forbid=self.forbid)
            for ra in A[: self.params.max_close_attempts]:
                mark = self.res.checkpoint()
                nb = len(self.broken)
                trial = P.copy()
                try:
                    self.rotate_to(trial, ra)
                    trial.reverse()
                    end = trial.last
                    rb = self.search(trial, pivots, lambda w, end=end: self.res.has(w, end))
                    if rb is None:
                        raise PreconditionError("no closing endpoint")
                    self.rotate_to(trial, rb)
                except (PreconditionError, MergeStuck):
                    self.res.rollback(mark)
                    del self.broken[nb:]
                    continue
                self.res.take(trial.first, trial.last)
                self.log(op="close", new=list(canon(trial.first, trial.last)))
                self.cases.append("fallback")
                return trial
        return None

    def run(self) -> StepResult:
        F = self.F
        W = {v for e in self.bad for v in e}
        if self.avoid is not None:
            W.add(self.avoid)
        self.sets = build_avoid_sets(self.res, F, W, self.params.r_h)
        self.v2 = self.sets.v2
        P = self.seed()
        self.fix_endpoint(P)
        P.reverse()
        self.fix_endpoint(P)
        P.reverse()
        self.Qp = frozenset(self.sets.int_v2 - self.X)
        self.loose = frozenset(v for v in range(self.n) if v != self.avoid)
        closed = None
        while closed is None:
            if self.try_extend(P, "1"):
                continue
            closed = self.close_by_segments(P)
            if closed is EXTENDED:
                closed = None
                continue
            if closed is None:
                raise MergeStuck("could not close the path", state={"path_len": len(P), "cases": self.cases})
        on_path = set(closed.seq)
        cycles = [tuple(closed.seq)] + [c for c in F.cycles if c[0] not in on_path]
        out = TwoFactor(F.n, tuple(cycles), tuple(self.flags))
        merged = F.c - out.c
        used = len(F.edge_set() - out.edge_set())
        return StepResult(out, used, merged, self.cases, tuple(self.flags))


def merge_step(F: TwoFactor, reservoir: Reservoir, bad: Iterable[Edge] = (), params: MergeParams | None = None,
               seed: int | np.random.Generator = 0, avoid: int | None = None) -> StepResult:
    """Merge at least two cycles of F, protecting `bad` edges and the vertex `avoid`.

    On failure the reservoir is rolled back and MergeStuck is raised.
    """
    params = params or MergeParams()
    if F.is_hamilton:
        raise PreconditionError("factor is already a Hamilton cycle")
    bad = frozenset(canon(*e) for e in bad)
    fe = F.edge_set()
    if not bad <= fe:
        raise PreconditionError("bad edges must lie in the factor", witness=sorted(bad - fe)[0])
    seen: set[int] = set()
    for u, v in bad:
        if u in seen or v in seen:
            raise PreconditionError("bad edges must form a matching", witness=(u, v))
        seen.update((u, v))
    for u, v in fe:
        if reservoir.has(u, v):
            raise PreconditionError(f"factor edge {(u, v)} is also in the reservoir", witness=(u, v))
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed, "merge_step")
    mark = reservoir.checkpoint()
    trace_mark = len(params.trace) if params.trace is not None else 0
    step = _Step(F, reservoir, bad, params, rng, avoid)
    try:
        out = step.run()
    except (MergeStuck, PreconditionError) as exc:
        reservoir.rollback(mark)
        if params.trace is not None:
            del params.trace[trace_mark:]
        if isinstance(exc, MergeStuck):
            raise
        raise MergeStuck(str(exc), state={"cases": step.cases}) from exc
    cap = params.budget(F.n) * out.merged
    if params.enforce_budget and out.used > cap:
        reservoir.rollback(mark)
        if params.trace is not None:
            del params.trace[trace_mark:]
        raise MergeStuck(f"used {out.used} edges for {out.merged} cycles, cap {cap}",
                         state={"used": out.used, "merged": out.merged, "cases": out.cases})
    if reservoir.balance(mark) != 0:
        raise AssertionError("reservoir out of balance after a merge step")
    return out


@dataclass
class MergeReport:
    cycles: list[tuple[int, ...]]
    leftover: Graph
    broken_bad: int
    failures: list[dict]
    steps: list[dict]
    flags: list[str]

    @property
    def complete(self) -> bool:
        return not self.failures


def _merge_one(F: TwoFactor, res: Reservoir, bad: frozenset[Edge], params: MergeParams,
               rng: np.random.Generator, avoid: int | None, steps: list[dict], label: int) -> TwoFactor:
    cur = F
    while not cur.is_hamilton:
        protect = frozenset(e for e in bad if e in cur.edge_set())
        last: Exception | None = None
        done = False
        for attempt in range(params.retries):
            try:
                r = merge_step(cur, res, protect, params, rng, avoid)
            except MergeStuck as exc:
                last = exc
                if attempt == params.retries // 2 and protect:
                    protect = frozenset()       # same escape as the few-cycles branch
                continue
            steps.append({"factor": label, "c_before": cur.c, "c_after": r.factor.c, "used": r.used,
                          "cases": r.cases, "attempt": attempt, "protected": len(protect)})
            cur = r.factor
            done = True
            break
        if not done:
            raise MergeStuck(str(last), state={"factor": label, "partial": cur})
    return cur


def merge_all(Fs: Sequence[TwoFactor], H: Graph, bad: Iterable[Edge] = (), params: MergeParams | None = None,
              seed: int = 0, avoid: int | None = None) -> MergeReport:
    """Turn each factor into a Hamilton cycle using H as the shared reservoir.

    Factors are handled in order and the reservoir carries over.  A factor
    with fewer than 2|bad in F|/ln^2 n cycles is merged without protecting
    its bad edges.  A factor that stays stuck after all retries is reported
    in `failures` and its current edges go to the leftover.
    """
    params = params or MergeParams()
    n = H.n
    bad = frozenset(canon(*e) for e in bad)
    ln2 = math.log(max(n, 3)) ** 2
    flags: list[str] = []
    if params.r_g and params.r_gp:
        c_all = sum(F.c for F in Fs)
        if c_all * params.r_gp * math.log(n) ** 3 > 4 * n * params.r_g ** 2:
            flags.append("cycle_count_above_bound")
    seen_edges: set[Edge] = set()
    for F in Fs:
        fe = F.edge_set()
        if fe & seen_edges:
            raise PreconditionError("factors share an edge", witness=sorted(fe & seen_edges)[0])
        seen_edges |= fe
    res = Reservoir(H)
    if params.r_h is None:
        params = MergeParams(**{**params.__dict__, "r_h": float(np.median(H.degrees())) if n else 0.0})
    rng = stream(seed, "merge_all")
    cycles, failures, steps = [], [], []
    broken_bad = 0
    for k, F in enumerate(Fs):
        fbad = bad & F.edge_set()
        if F.c < 2 * len(fbad) / ln2:
            fbad = frozenset()
            flags.append(f"factor {k}: few cycles, bad edges unprotected")
        try:
            out = _merge_one(F, res, fbad, params, rng, avoid, steps, k)
        except MergeStuck as exc:
            partial = exc.state.get("partial", F)
            for u, v in partial.edges():
                res.give(u, v)
            failures.append({"factor": k, "reason": str(exc), "c": partial.c})
            continue
        cycles.append(out.cycles[0])
        broken_bad += len((bad & F.edge_set()) - out.edge_set())
    if bad and broken_bad > len(bad) / math.log(max(n, 3)):
        flags.append("broken_bad_above_bound")
    return MergeReport(cycles, res.graph(), broken_bad, failures, steps, flags)


def merge_avoiding_vertex(Fs: Sequence[TwoFactor], G: Graph, x0: int, params: MergeParams | None = None,
                          seed: int = 0, reservoir: Graph | None = None) -> MergeReport:
    """merge_all with x0 never used as pivot, join vertex or endpoint.

    The reservoir is G minus the edges at x0 and minus every factor edge
    (or `reservoir` minus the edges at x0 when given), so each output cycle
    keeps the two factor edges at x0.
    """
    base = reservoir if reservoir is not None else G
    drop = set(base.edges_at(x0))
    for F in Fs:
        drop.update(F.edges())
    H = base.without_edges(e for e in drop if base.has_edge(*e))
    report = merge_all(Fs, H, (), params, seed, avoid=x0)
    return report


def trace_lines(trace: Sequence[dict]) -> str:
    return "".join(json.dumps(e, sort_keys=True) + "\n" for e in trace)
