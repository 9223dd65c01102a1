"""Regular factors, Tutte's r-factor condition and edge colouring.

r_factor looks for a spanning r-regular subgraph.  Two routes are available:

* ``augment``: greedy start plus alternating-trail augmentation on the degree
  deficits.  Fast, but it may give up on a feasible instance.
* ``gadget``: the edge-subdivision reduction of an f-factor to a perfect
  matching, solved with the blossom kernel.  Complete, but the gadget has
  2m + sum(f) vertices, so it is used for small inputs and as a fallback.

Whichever target is lighter is solved: the factor itself (f = r) or the
excess to delete (f = d - r).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from hampack.errors import Infeasible, ParameterError
from hampack.graph import Edge, Graph, canon
from hampack.matching import Matching, max_matching

GADGET_SMALL = 600
GADGET_LIMIT = 4000


# Tutte quantities

def tutte_r(g: Graph, r: int, S: Iterable[int], T: Iterable[int]) -> int:
    S, T = set(S), set(T)
    return sum(g.degree(v) for v in T) - g.e_between(S, T) + r * (len(S) - len(T))


def tutte_q(g: Graph, r: int, S: Iterable[int], T: Iterable[int]) -> int:
    S, T = set(S), set(T)
    removed = S | T
    seen = set(removed)
    count = 0
    for s in range(g.n):
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        i = 0
        while i < len(comp):
            for w in g.adj[comp[i]]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
            i += 1
        e_ct = sum(len(g.adj[v] & T) for v in comp)
        count += (r * len(comp) + e_ct) % 2
    return count


@dataclass(frozen=True)
class TutteCertificate:
    S: frozenset
    T: frozenset
    r: int
    R: int
    Q: int

    @property
    def deficiency(self) -> int:
        return self.R - self.Q

    def verify(self, g: Graph) -> bool:
        return tutte_r(g, self.r, self.S, self.T) == self.R and tutte_q(g, self.r, self.S, self.T) == self.Q

    @classmethod
    def evaluate(cls, g: Graph, r: int, S, T) -> "TutteCertificate":
        S, T = frozenset(S), frozenset(T)
        return cls(S, T, r, tutte_r(g, r, S, T), tutte_q(g, r, S, T))


def _components_mask(adjm: list[int], rest: int) -> list[int]:
    comps = []
    while rest:
        low = rest & -rest
        comp = low
        frontier = low
        while frontier:
            nxt = 0
            f = frontier
            while f:
                b = f & -f
                nxt |= adjm[b.bit_length() - 1]
                f ^= b
            nxt &= rest & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def tutte_oracle(g: Graph, r: int, mode: str = "exact", budget: int = 2000, seed: int = 0) -> TutteCertificate:
    """Disjoint pair (S, T) minimising R_r - Q_r.

    Exact mode enumerates all 3^n pairs (n <= 14): for each U = S + T the
    components of G - U are found once, then T walks the subsets of U in Gray
    code order so R_r and the parity vector behind Q_r update in O(1) per step.
    """
    n = g.n
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        best = TutteCertificate.evaluate(g, r, (), ())
        for _ in range(budget):
            lab = rng.integers(0, 3, size=n)
            cert = TutteCertificate.evaluate(g, r, np.flatnonzero(lab == 1).tolist(), np.flatnonzero(lab == 2).tolist())
            if cert.deficiency < best.deficiency:
                best = cert
        return best
    if n > 14:
        raise ParameterError("exhaustive oracle limited to n <= 14")
    adjm = [0] * n
    for u, v in g.edges():
        adjm[u] |= 1 << v
        adjm[v] |= 1 << u
    deg = [g.degree(v) for v in range(n)]
    full = (1 << n) - 1
    best_val = None
    best_pair = (0, 0)
    for U in range(1 << n):
        comps = _components_mask(adjm, full & ~U)
        base = 0
        for c, cm in enumerate(comps):
            if (r * cm.bit_count()) & 1:
                base |= 1 << c
        par = {}
        ubits = [v for v in range(n) if U >> v & 1]
        for v in ubits:
            pv = 0
            for c, cm in enumerate(comps):
                if (adjm[v] & cm).bit_count() & 1:
                    pv |= 1 << c
            par[v] = pv
        S, T = U, 0
        sum_dt, e_st, parity = 0, 0, base
        size_s, size_t = len(ubits), 0
        k = 0
        while True:
            val = sum_dt - e_st + r * (size_s - size_t) - parity.bit_count()
            if best_val is None or val < best_val:
                best_val, best_pair = val, (S, T)
            k += 1
            if k >> len(ubits):
                break
            v = ubits[(k & -k).bit_length() - 1]
            bit = 1 << v
            if S & bit:
                S ^= bit
                e_st += (adjm[v] & S).bit_count() - (adjm[v] & T).bit_count()
                T |= bit
                sum_dt += deg[v]
                size_s -= 1
                size_t += 1
            else:
                T ^= bit
                e_st += (adjm[v] & T).bit_count() - (adjm[v] & S).bit_count()
                S |= bit
                sum_dt -= deg[v]
                size_s += 1
                size_t -= 1
            parity ^= par[v]
    S = frozenset(v for v in range(n) if best_pair[0] >> v & 1)
    T = frozenset(v for v in range(n) if best_pair[1] >> v & 1)
    return TutteCertificate.evaluate(g, r, S, T)


# f-factors

def _gadget_size(g: Graph, f: list[int]) -> int:
    return 2 * g.m + sum(f)


def f_factor_gadget(g: Graph, f: list[int], rng: np.random.Generator | None = None) -> set[Edge] | None:
    """Exact f-factor via the edge-subdivision gadget and blossom."""
    edges = g.edges()
    m = len(edges)
    offset = [0] * (g.n + 1)
    for v in range(g.n):
        offset[v + 1] = offset[v] + f[v]
    total = 2 * m + offset[g.n]
    adj: list[set[int]] = [set() for _ in range(total)]
    copies = lambda v: range(2 * m + offset[v], 2 * m + offset[v + 1])
    for k, (u, v) in enumerate(edges):
        au, av = 2 * k, 2 * k + 1
        adj[au].add(av)
        adj[av].add(au)
        for c in copies(u):
            adj[au].add(c)
            adj[c].add(au)
        for c in copies(v):
            adj[av].add(c)
            adj[c].add(av)
    gad = Graph.from_adjacency(adj)
    mate = max_matching(gad, rng)
    if any(x == -1 for x in mate):
        return None
    return {e for k, e in enumerate(edges) if mate[2 * k] != 2 * k + 1}


def f_factor_augment(g: Graph, f: list[int], rng: np.random.Generator | None = None) -> set[Edge] | None:
    """Greedy plus alternating-trail augmentation; None when it gets stuck."""
    adj = g.adj
    edges = g.edges()
    if rng is not None:
        order = rng.permutation(len(edges)).tolist()
        edges = [edges[i] for i in order]
    K: set[Edge] = set()
    deficit = list(f)
    for u, v in edges:
        if deficit[u] > 0 and deficit[v] > 0:
            K.add((u, v))
            deficit[u] -= 1
            deficit[v] -= 1
    pending = [v for v in range(g.n) if deficit[v] > 0]
    stuck: set[int] = set()
    while True:
        pending = [v for v in pending if deficit[v] > 0]
        active = [v for v in pending if v not in stuck]
        if not pending:
            return K
        if not active:
            return None
        s = active[0]
        found = _alternating_trail(adj, K, deficit, s)
        if found is None:
            stuck.add(s)
            continue
        trail, end = found
        for e in trail:
            if e in K:
                K.remove(e)
            else:
                K.add(e)
        deficit[s] -= 1
        deficit[end] -= 1
        stuck.clear()


def _alternating_trail(adj, K: set[Edge], deficit: list[int], s: int) -> tuple[list[Edge], int] | None:
    """Shortest trail from s, alternating non-K / K edges, first and last non-K,
    ending at a deficient vertex (s itself only if its deficit is >= 2)."""
    parent: dict[tuple[int, int], tuple[int, int] | None] = {(s, 0): None}
    q = deque([(s, 0)])
    while q:
        u, par = q.popleft()
        for w in adj[u]:
            in_k = canon(u, w) in K
            if par == 0 and in_k or par == 1 and not in_k:
                continue
            state = (w, 1 - par)
            if state in parent:
                continue
            parent[state] = (u, par)
            if par == 0 and deficit[w] > 0 and (w != s or deficit[s] >= 2):
                walk = []
                cur = state
                while parent[cur] is not None:
                    prev = parent[cur]
                    walk.append(canon(prev[0], cur[0]))
                    cur = prev
                walk.reverse()
                if len(set(walk)) == len(walk):
                    return walk, w
                continue
            q.append(state)
    return None


def f_factor(g: Graph, f: list[int], rng: np.random.Generator | None = None, strategy: str = "auto") -> set[Edge] | None:
    if any(f[v] < 0 or f[v] > g.degree(v) for v in range(g.n)) or sum(f) % 2:
        return None
    if strategy == "gadget":
        return f_factor_gadget(g, f, rng)
    if strategy == "augment":
        return f_factor_augment(g, f, rng)
    size = _gadget_size(g, f)
    if size <= GADGET_SMALL:
        return f_factor_gadget(g, f, rng)
    K = f_factor_augment(g, f, rng)
    if K is None and size <= GADGET_LIMIT:
        K = f_factor_gadget(g, f, rng)
    return K


def r_factor(g: Graph, r: int, seed: int | None = None, strategy: str = "auto") -> Graph:
    """Spanning r-regular subgraph of g.

    Raises Infeasible.  For n <= 14 the error carries the worst TutteCertificate
    found by the exhaustive oracle; beyond that the certificate is a single
    low-degree vertex when one exists, else None.
    """
    if r < 0:
        raise ParameterError("r must be nonnegative")
    rng = None if seed is None else np.random.default_rng(seed)
    deg = [g.degree(v) for v in range(g.n)]
    if r == 0:
        return Graph.empty(g.n)
    result = None
    if min(deg, default=r) >= r:
        direct = g.n * r <= sum(deg) - g.n * r
        if direct:
            K = f_factor(g, [r] * g.n, rng, strategy)
            if K is not None:
                result = Graph.from_edges(g.n, K, check=False)
        else:
            K = f_factor(g, [d - r for d in deg], rng, strategy)
            if K is not None:
                result = g.without_edges(K)
    if result is not None:
        return result
    if g.n <= 14:
        cert = tutte_oracle(g, r)
    else:
        low = [v for v in range(g.n) if deg[v] < r]
        cert = TutteCertificate.evaluate(g, r, (), (low[0],)) if low else None
    raise Infeasible(f"no {r}-factor found", certificate=cert)


# edge colouring

def _drop_class(col: list[dict[int, int]], at: list[dict[int, int]], delta: int):
    """Try to empty the smallest colour class with Kempe swaps; on failure keep the input."""
    col2 = [dict(a) for a in col]
    at2 = [dict(a) for a in at]
    sizes: dict[int, int] = {}
    for a in at2:
        for c in a:
            sizes[c] = sizes.get(c, 0) + 1
    target = min(sizes, key=lambda c: (sizes[c], -c))
    palette = sorted(c for c in sizes if c != target)
    if len(palette) < delta:
        return col, at
    victims = sorted({tuple(sorted((u, v))) for u, a in enumerate(at2) for c, v in a.items() if c == target})

    def setc(u, v, c):
        col2[u][v] = c
        col2[v][u] = c
        at2[u][c] = v
        at2[v][c] = u

    def unset(u, v):
        c = col2[u].pop(v)
        del col2[v][u]
        del at2[u][c]
        del at2[v][c]

    for u, v in victims:
        unset(u, v)
        placed = False
        for c in palette:
            if c in at2[u]:
                continue
            if c not in at2[v]:
                setc(u, v, c)
                placed = True
                break
            for d in palette:
                if d == c or d in at2[v]:
                    continue
                # c/d chain starting at v with its c-edge; it cannot end at u unless u sits on it
                chain, x, cur = [], v, c
                while cur in at2[x]:
                    y = at2[x][cur]
                    chain.append((x, y, cur))
                    x = y
                    cur = d if cur == c else c
                if x == u or any(u in (a, b) for a, b, _ in chain):
                    continue
                for a, b, _ in chain:
                    unset(a, b)
                for a, b, cc in chain:
                    setc(a, b, d if cc == c else c)
                setc(u, v, c)
                placed = True
                break
            if placed:
                break
        if not placed:
            return col, at
    return col2, at2


def edge_coloring(g: Graph) -> list[Matching]:
    """Misra-Gries: a proper colouring with at most max_degree + 1 colours."""
    n = g.n
    col: list[dict[int, int]] = [dict() for _ in range(n)]
    at: list[dict[int, int]] = [dict() for _ in range(n)]

    def setc(u, v, c):
        col[u][v] = c
        col[v][u] = c
        at[u][c] = v
        at[v][c] = u

    def unset(u, v):
        c = col[u].pop(v)
        del col[v][u]
        del at[u][c]
        del at[v][c]

    def first_free(u):
        c = 0
        while c in at[u]:
            c += 1
        return c

    for u, v in g.edges():
        fan = [v]
        infan = {v}
        grown = True
        while grown:
            grown = False
            last = fan[-1]
            for w in sorted(col[u]):
                if w not in infan and col[u][w] not in at[last]:
                    fan.append(w)
                    infan.add(w)
                    grown = True
                    break
        c = first_free(u)
        d = first_free(fan[-1])
        if c != d:
            path = []
            x, cur = u, d
            while cur in at[x]:
                y = at[x][cur]
                path.append((x, y, cur))
                x = y
                cur = c if cur == d else d
            for x, y, _ in path:
                unset(x, y)
            for x, y, cc in path:
                setc(x, y, c if cc == d else d)
        k = None
        for i, w in enumerate(fan):
            if i > 0 and col[u].get(w) in at[fan[i - 1]]:
                break
            if d not in at[w]:
                k = i
                break
        assert k is not None, "Misra-Gries invariant broken"
        shifted = [col[u][fan[i]] for i in range(1, k + 1)]
        for i in range(1, k + 1):
            unset(u, fan[i])
        for i in range(k):
            setc(u, fan[i], shifted[i])
        setc(u, fan[k], d)
    if col and len({c for a in at for c in a}) > g.max_degree():
        col, at = _drop_class(col, at, g.max_degree())
    classes: dict[int, set[Edge]] = {}
    for u in range(n):
        for v, c in col[u].items():
            if u < v:
                classes.setdefault(c, set()).add((u, v))
    return [Matching(n, frozenset(classes[c])) for c in sorted(classes)]
