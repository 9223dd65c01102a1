"""2-factors of even-regular graphs with few cycles, and absorption of a second graph.

Every 2-factor here comes from a perfect matching sigma of a bipartite graph
whose left copy i is joined to right copy j along an arc i -> j.  Reading
sigma as a permutation, its cycles are the cycles of the 2-factor, so cycle
counts can be lowered by swapping sigma(i) and sigma(j) for i, j on
different permutation cycles whenever both crossed arcs exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from hampack.errors import Infeasible, ParameterError, PreconditionError
from hampack.factors import edge_coloring
from hampack.flow import bipartite_regular_subgraph
from hampack.graph import BipartiteGraph, Edge, Graph, bipartite_double, canon, euler_orient
from hampack.matching import bipartite_perfect_matching, max_matching


@dataclass(frozen=True)
class TwoFactor:
    n: int
    cycles: tuple[tuple[int, ...], ...]
    flags: tuple[str, ...] = field(default=(), compare=False)

    @property
    def c(self) -> int:
        return len(self.cycles)

    @property
    def is_hamilton(self) -> bool:
        return self.c == 1 and len(self.cycles[0]) == self.n

    def edges(self) -> list[Edge]:
        out = []
        for cyc in self.cycles:
            k = len(cyc)
            out.extend(canon(cyc[i], cyc[(i + 1) % k]) for i in range(k))
        return out

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges())

    def cycle_of(self) -> list[int]:
        lab = [-1] * self.n
        for k, cyc in enumerate(self.cycles):
            for v in cyc:
                lab[v] = k
        return lab

    def neighbors(self) -> list[tuple[int, int]]:
        nb = [(-1, -1)] * self.n
        for cyc in self.cycles:
            k = len(cyc)
            for i, v in enumerate(cyc):
                nb[v] = (cyc[i - 1], cyc[(i + 1) % k])
        return nb

    def graph(self) -> Graph:
        return Graph.from_edges(self.n, self.edges())

    def validate(self) -> list[str]:
        problems = []
        seen = [0] * self.n
        for cyc in self.cycles:
            if len(cyc) < 3:
                problems.append(f"cycle {cyc} shorter than 3")
            for v in cyc:
                if not 0 <= v < self.n:
                    problems.append(f"vertex {v} out of range")
                else:
                    seen[v] += 1
        for v, k in enumerate(seen):
            if k != 1:
                problems.append(f"vertex {v} appears {k} times")
        if len(set(self.edges())) != sum(len(c) for c in self.cycles):
            problems.append("repeated edge")
        return problems

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], flags: tuple[str, ...] = ()) -> "TwoFactor":
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        if any(len(a) != 2 for a in adj):
            bad = next(v for v in range(n) if len(adj[v]) != 2)
            raise PreconditionError(f"vertex {bad} has degree {len(adj[bad])} in a 2-factor", witness=bad)
        seen = [False] * n
        cycles = []
        for s in range(n):
            if seen[s]:
                continue
            cyc = [s]
            seen[s] = True
            prev, cur = s, min(adj[s])
            while cur != s:
                seen[cur] = True
                cyc.append(cur)
                a, b = adj[cur]
                prev, cur = cur, (b if a == prev else a)
            cycles.append(tuple(cyc))
        return cls(n, tuple(cycles), flags)

    def to_dict(self) -> dict:
        return {"c": self.c, "cycles": [list(c) for c in self.cycles], "flags": list(self.flags)}


def is_pseudomatching(edges: Iterable[Edge], n: int) -> bool:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    twos = sum(1 for d in deg if d == 2)
    return twos == 1 and all(d <= 2 for d in deg)


@dataclass(frozen=True)
class CycleBudget:
    """Cycle-count budgets, clamped at n/3 (no 2-factor has more cycles)."""

    n: int
    r_g: float
    r_h: float

    def _clamp(self, value: float) -> tuple[float, bool]:
        cap = self.n / 3
        return (cap, True) if value > cap else (value, False)

    @property
    def ln(self) -> float:
        return math.log(self.n)

    def single(self) -> tuple[float, bool]:
        return self._clamp(4 * self.n * math.sqrt(self.r_g * self.ln) / self.r_h)

    def total(self) -> tuple[float, bool]:
        return self._clamp(3 * self.n * math.sqrt(self.r_g * self.ln ** 3))

    def absorb(self) -> tuple[float, bool]:
        return self._clamp(4 * self.n * math.sqrt(self.r_g * self.ln ** 3))

    def sizeofp(self, r_b: float) -> tuple[float, bool]:
        return self._clamp(2 * self.n * math.sqrt(self.r_g * self.ln) / r_b)

    def step(self, i: int) -> tuple[float, bool]:
        """Per-step budget while splitting off factor i (1-based)."""
        return self._clamp(2 * self.n * math.sqrt(self.r_g * self.ln) / (self.r_h / 2 - i + 1))

    def to_dict(self) -> dict:
        out = {}
        for name in ("single", "total", "absorb"):
            value, vac = getattr(self, name)()
            out[name] = {"value": value, "vacuous": vac}
        return out


# permutations

def permutation_cycles(sigma: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(sigma)
    out = []
    for s in range(len(sigma)):
        if seen[s]:
            continue
        cyc = []
        v = s
        while not seen[v]:
            seen[v] = True
            cyc.append(v)
            v = sigma[v]
        out.append(cyc)
    return out


def merge_permutation_cycles(sigma: list[int], arcs: Sequence[Iterable[int]], order: Sequence[int] | None = None) -> list[int]:
    """Swap images to join permutation cycles while staying inside `arcs`.

    For i, j on different cycles with arcs i -> sigma(j) and j -> sigma(i),
    exchanging sigma(i) and sigma(j) fuses the two cycles.  Repeats until a
    single cycle remains or no such swap exists.
    """
    n = len(sigma)
    sigma = list(sigma)
    inv = [0] * n
    for i, j in enumerate(sigma):
        inv[j] = i
    arcsets = [set(a) for a in arcs]
    label = [0] * n
    members: dict[int, list[int]] = {}
    for k, cyc in enumerate(permutation_cycles(sigma)):
        members[k] = cyc
        for v in cyc:
            label[v] = k
    order = list(range(n)) if order is None else list(order)
    changed = True
    while changed and len(members) > 1:
        changed = False
        for i in order:
            for k in arcs[i]:
                j = inv[k]
                if label[j] == label[i] or sigma[i] not in arcsets[j]:
                    continue
                a = sigma[i]
                sigma[i], sigma[j] = k, a
                inv[k], inv[a] = i, j
                keep, gone = label[i], label[j]
                if len(members[keep]) < len(members[gone]):
                    keep, gone = gone, keep
                for v in members[gone]:
                    label[v] = keep
                members[keep].extend(members.pop(gone))
                changed = True
                break
            if len(members) == 1:
                break
    return sigma


def factor_from_permutation(sigma: Sequence[int], flags: tuple[str, ...] = ()) -> TwoFactor:
    n = len(sigma)
    return TwoFactor(n, tuple(tuple(c) for c in permutation_cycles(sigma)), flags)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _regular_degree(h: Graph) -> int:
    if not h.is_regular():
        raise PreconditionError("graph is not regular")
    r = h.min_degree() if h.n else 0
    if r % 2:
        raise PreconditionError(f"degree {r} is odd", witness=r)
    return r


# decompositions

def petersen_decompose(h: Graph, seed=None, improve: bool = False) -> list[TwoFactor]:
    """All r/2 2-factors of an r-regular graph (r even), via one Euler orientation.

    The bipartite double of the orientation is r/2-regular, so perfect
    matchings can be peeled off one at a time.
    """
    r = _regular_degree(h)
    rng = None if seed is None else _rng(seed)
    b = bipartite_double(euler_orient(h))
    adj = [set(a) for a in b.adj]
    out = []
    for _ in range(r // 2):
        cur = BipartiteGraph(h.n, h.n, adj)
        sigma = bipartite_perfect_matching(cur, rng)
        if improve:
            sigma = merge_permutation_cycles(sigma, cur.adj)
        for i, j in enumerate(sigma):
            adj[i].discard(j)
        out.append(factor_from_permutation(sigma))
    return out


def low_cycle_2factor(h: Graph, budget: float | None = None, retries: int = 50, seed=0,
                      improve: bool = True) -> tuple[TwoFactor, bool]:
    """A 2-factor with at most `budget` cycles if one turns up.

    Samples randomised perfect matchings of the bipartite double, optionally
    merges their permutation cycles, and keeps the best.  Returns the factor
    and whether it met the budget.
    """
    _regular_degree(h)
    rng = _rng(seed)
    b = bipartite_double(euler_orient(h))
    if budget is None:
        budget = h.n / 3
    best = None
    for _ in range(max(1, retries)):
        sigma = bipartite_perfect_matching(b, rng)
        if improve:
            sigma = merge_permutation_cycles(sigma, b.adj, rng.permutation(h.n).tolist())
        c = len(permutation_cycles(sigma))
        if best is None or c < best[0]:
            best = (c, sigma)
        if c <= budget:
            break
    ok = best[0] <= budget
    return factor_from_permutation(best[1], () if ok else ("over-budget",)), ok


def remove_factor(adj: list[set[int]], factor: TwoFactor) -> None:
    for u, v in factor.edges():
        adj[u].remove(v)
        adj[v].remove(u)


def decompose_with_budget(h: Graph, r_g: float | None = None, seed=0, retries: int = 50,
                          improve: bool = True) -> tuple[list[TwoFactor], int]:
    """Split an even-regular graph into r/2 2-factors, keeping cycle counts low.

    While i <= r/2 - sqrt(r_g)*log n the i-th factor is searched with the
    per-step budget; the remaining factors come from one Petersen pass.  When
    r <= 8*sqrt(r_g)*log n the Petersen pass does everything.  With
    `improve` the Petersen factors also get the cycle-merging swaps.
    """
    r = _regular_degree(h)
    n = h.n
    if r == 0:
        return [], 0
    r_g = float(r if r_g is None else r_g)
    rng = _rng(seed)
    ln = math.log(n)
    budget = CycleBudget(n, r_g, r)
    plain_tail = math.sqrt(r_g) * ln
    i0 = 0 if r <= 8 * plain_tail else int(math.floor(r / 2 - plain_tail))
    adj = [set(s) for s in h.adj]
    factors: list[TwoFactor] = []
    for i in range(1, i0 + 1):
        cur = Graph.from_adjacency(adj)
        step_budget, vac = budget.step(i)
        f, _ = low_cycle_2factor(cur, step_budget, retries, rng, improve=True)
        if vac:
            f = TwoFactor(f.n, f.cycles, f.flags + ("vacuous-budget",))
        remove_factor(adj, f)
        factors.append(f)
    rest = Graph.from_adjacency(adj)
    if rest.m:
        factors.extend(petersen_decompose(rest, rng, improve=improve))
    return factors, sum(f.c for f in factors)


# pseudomatchings and completions

def _complete_half(half: Sequence[Edge], hadj: list[set[int]], rng: np.random.Generator,
                   path_tries: int = 20) -> tuple[frozenset[Edge], list[Edge]]:
    """Extend a matching to a perfect matching (or pseudomatching) using hadj edges."""
    n = len(hadj)
    covered = {v for e in half for v in e}
    W = [v for v in range(n) if v not in covered]
    Wset = set(W)
    attempts = [None]
    if len(W) % 2:
        centres = [v for v in W if len(hadj[v] & Wset) >= 2]
        rng.shuffle(centres)
        attempts = []
        for v2 in centres[:path_tries]:
            nb = sorted(hadj[v2] & Wset)
            pick = rng.choice(len(nb), size=2, replace=False)
            attempts.append((v2, nb[pick[0]], nb[pick[1]]))
        if not attempts:
            raise Infeasible("no 2-path available for the pseudomatching")
    for att in attempts:
        used: list[Edge] = []
        keep = set(Wset)
        if att is not None:
            v2, v1, v3 = att
            used = [canon(v1, v2), canon(v2, v3)]
            keep -= {v1, v2, v3}
        sub = Graph.from_adjacency([(hadj[v] & keep) if v in keep else () for v in range(n)])
        mate = max_matching(sub, rng)
        if all(mate[v] != -1 for v in keep):
            used += [canon(v, mate[v]) for v in keep if mate[v] > v]
            return frozenset(list(half) + used), used
    raise Infeasible("cannot complete the matching inside H")


def half_match(M: Iterable[Edge], h: Graph, seed=0, retries: int = 20,
               min_fraction: float = 1 / 3) -> tuple[frozenset[Edge], frozenset[Edge]]:
    """Split M at random into two halves and complete each with disjoint H-edges.

    Each half is resampled (up to `retries` times) when some uncovered vertex
    keeps fewer than min_fraction * delta(H) H-neighbours among the uncovered
    vertices.  For odd n each completion starts with a 2-path, giving
    pseudomatchings.
    """
    rng = _rng(seed)
    M = sorted(canon(*e) for e in M)
    hset = h.edge_set()
    if any(e in hset for e in M):
        raise PreconditionError("M and H share an edge")
    delta = h.min_degree()
    last_err = None
    for attempt in range(max(1, retries)):
        side = rng.random(len(M)) < 0.5
        halves = [[e for e, s in zip(M, side) if s], [e for e, s in zip(M, side) if not s]]
        if attempt < retries - 1 and not all(_degree_ok(h, half, min_fraction * delta) for half in halves):
            continue
        hadj = [set(s) for s in h.adj]
        try:
            p1, used1 = _complete_half(halves[0], hadj, rng)
            for u, v in used1:
                hadj[u].discard(v)
                hadj[v].discard(u)
            p2, _ = _complete_half(halves[1], hadj, rng)
            return p1, p2
        except Infeasible as err:
            last_err = err
    raise Infeasible(f"half_match failed after {retries} attempts", certificate=getattr(last_err, "certificate", None))


def _degree_ok(h: Graph, half: Sequence[Edge], need: float) -> bool:
    covered = {v for e in half for v in e}
    free = [v for v in range(h.n) if v not in covered]
    fs = set(free)
    return all(len(h.adj[v] & fs) >= need for v in free)


def complete_to_2factor(P: Iterable[Edge], h: Graph, seed=0, retries: int = 50,
                        budget: float | None = None) -> TwoFactor:
    """Add H-edges to a perfect matching (or pseudomatching) P to get a 2-factor.

    Each P-edge a_i b_i is labelled at random; left vertex i stands for a_i,
    right vertex j for b_j, joined when a_i b_j is an H-edge.  An r_B-regular
    piece of that graph (by max-flow) is matched perfectly; permutation cycle
    i1 -> i2 -> ... becomes the cycle b_i1 a_i1 b_i2 a_i2 ...  For a
    pseudomatching with degree-2 vertex v1 and neighbours v2, v3, the pair
    v2 v3 plays the role of a P-edge and is later replaced by v2 v1 v3.
    """
    rng = _rng(seed)
    n = h.n
    P = [canon(*e) for e in P]
    hadj = [set(s) for s in h.adj]
    deg = [0] * n
    pn: list[list[int]] = [[] for _ in range(n)]
    for u, v in P:
        deg[u] += 1
        deg[v] += 1
        pn[u].append(v)
        pn[v].append(u)
        if v in hadj[u]:
            raise PreconditionError(f"P-edge {u}-{v} is also in H")
    twos = [v for v in range(n) if deg[v] == 2]
    special = None
    pairs = list(P)
    if twos:
        if len(twos) != 1 or any(d not in (1, 2) for d in deg):
            raise PreconditionError("not a perfect pseudomatching")
        v1 = twos[0]
        v2, v3 = sorted(pn[v1])
        pairs = [e for e in P if v1 not in e] + [canon(v2, v3)]
        hadj[v2].discard(v3)
        hadj[v3].discard(v2)
        special = (v1, v2, v3)
    elif any(d != 1 for d in deg):
        raise PreconditionError("P is not a perfect matching")
    pairs.sort()
    k = len(pairs)
    delta_h = min(len(hadj[v]) for v in range(n) if special is None or v != special[0])
    flags = []
    sub = None
    for _ in range(max(1, retries)):
        # a fresh a/b labelling changes B; redraw until an r_B-regular piece exists
        a = [0] * k
        bb = [0] * k
        flips = rng.random(k) < 0.5
        for i, (u, v) in enumerate(pairs):
            a[i], bb[i] = (v, u) if flips[i] else (u, v)
        right_of = {bb[i]: i for i in range(k)}
        arcs = [[right_of[w] for w in hadj[a[i]] if w in right_of] for i in range(k)]
        b = BipartiteGraph(k, k, arcs)
        degs = b.left_degrees() + b.right_degrees()
        r_b = min(2 * delta_h // 5, min(degs) if degs else 0)
        while r_b >= 1:
            try:
                sub = bipartite_regular_subgraph(b, r_b)
                break
            except Infeasible:
                r_b -= 1
                flags.append("r_B lowered")
        if sub is not None:
            break
    if sub is None:
        sub = b
        flags.append("no regular subgraph")
    if budget is None:
        budget = CycleBudget(n, max(1, delta_h), max(1, delta_h)).sizeofp(max(1, r_b))[0]
    best = None
    for _ in range(max(1, retries)):
        sigma = bipartite_perfect_matching(sub, rng)
        sigma = merge_permutation_cycles(sigma, sub.adj, rng.permutation(k).tolist())
        c = len(permutation_cycles(sigma))
        if best is None or c < best[0]:
            best = (c, sigma)
        if c <= budget:
            break
    if best[0] > budget:
        flags.append("over-budget")
    sigma = best[1]
    cycles = []
    for cyc in permutation_cycles(sigma):
        seq = []
        for i in cyc:
            seq += [bb[i], a[i]]
        if special is not None:
            v1, v2, v3 = special
            for t in range(len(seq)):
                x, y = seq[t], seq[(t + 1) % len(seq)]
                if {x, y} == {v2, v3}:
                    seq.insert(t + 1, v1)
                    break
        cycles.append(tuple(seq))
    return TwoFactor(n, tuple(cycles), tuple(flags))


@dataclass(frozen=True)
class AbsorbConfig:
    """Constants of the absorption step.  Defaults are the asymptotic values."""

    spread: float = 1e6
    divisor: float = 5000.0
    retries: int = 20
    enforce_budget: bool = True

    @classmethod
    def desk(cls) -> "AbsorbConfig":
        return cls(spread=4.0, divisor=4.0)


def absorb_decompose(h: Graph, hp: Graph, bad: Iterable[Edge], r_g: float,
                     config: AbsorbConfig = AbsorbConfig(), seed=0) -> tuple[list[TwoFactor], int]:
    """Decompose H + H' into 2-factors in which bad edges form small matchings.

    H' is edge coloured; each colour class is cut into pieces holding at most
    max(1, n/K) bad edges; each piece is halved, the halves completed inside
    H, and each completion extended to a 2-factor, again inside H.  Whatever
    is left of H is even-regular and decomposed directly.
    """
    rng = _rng(seed)
    n = h.n
    bad = frozenset(canon(*e) for e in bad)
    hp_edges = hp.edge_set()
    if not bad <= hp_edges:
        raise PreconditionError("bad edges must lie in H'")
    if hp_edges & h.edge_set():
        raise PreconditionError("H and H' share edges")
    if hp.m == 0:
        return decompose_with_budget(h, r_g, rng)
    r_hp = _regular_degree(hp)
    _regular_degree(h)
    lhs = r_hp + 1 + config.spread * len(bad) / n
    if config.enforce_budget and lhs > r_g / config.divisor:
        raise ParameterError(f"absorption budget fails: r_H' + 1 + K|E_bad|/n = {lhs:.4g} > r_G/{config.divisor:g} = {r_g / config.divisor:.4g}")
    cap = max(1, int(n // config.spread))
    pieces: list[list[Edge]] = []
    for cls in edge_coloring(hp):
        edges = sorted(cls.edges)
        b_edges = [e for e in edges if e in bad]
        g_edges = [e for e in edges if e not in bad]
        k = max(int(config.spread * len(b_edges) / n + 1), math.ceil(len(b_edges) / cap) if b_edges else 1)
        k = max(1, min(k, len(edges)))
        parts: list[list[Edge]] = [[] for _ in range(k)]
        for idx, e in enumerate(b_edges):
            parts[idx % k].append(e)
        for idx, e in enumerate(g_edges):
            parts[idx % k].append(e)
        pieces.extend(p for p in parts if p)
    cur = [set(s) for s in h.adj]
    factors: list[TwoFactor] = []
    for piece in pieces:
        hg = Graph.from_adjacency(cur)
        p1, p2 = half_match(piece, hg, rng, retries=config.retries)
        for e in (p1 | p2) - set(piece):
            cur[e[0]].discard(e[1])
            cur[e[1]].discard(e[0])
        for half in (p1, p2):
            f = complete_to_2factor(half, Graph.from_adjacency(cur), rng)
            for u, v in set(f.edges()) - half:
                cur[u].discard(v)
                cur[v].discard(u)
            factors.append(f)
    rest = Graph.from_adjacency(cur)
    more, _ = decompose_with_budget(rest, r_g, rng) if rest.m else ([], 0)
    factors.extend(more)
    return factors, sum(f.c for f in factors)


def bad_edge_cap(n: int, config: AbsorbConfig) -> int:
    return max(1, int(n // config.spread))
