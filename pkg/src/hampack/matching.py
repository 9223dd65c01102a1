"""Matching kernels: Edmonds' blossom algorithm and Hopcroft-Karp.

The general-graph kernel is the classical O(V^3) contraction-free variant of
Edmonds' algorithm (base labels plus BFS), written over plain adjacency lists.
When it stops, the outer vertices of the failed searches give the
Gallai-Edmonds set D, and A = N(D) \\ D is a Tutte-Berge witness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hampack.errors import Infeasible, ParameterError
from hampack.graph import BipartiteGraph, Edge, Graph, canon


@dataclass(frozen=True)
class Matching:
    n: int
    edges: frozenset

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    @property
    def optimal(self) -> bool:
        return self.size == self.n // 2

    def is_matching(self) -> bool:
        return len(self.covered) == 2 * self.size

    @classmethod
    def from_mate(cls, mate: Sequence[int]) -> "Matching":
        return cls(len(mate), frozenset(canon(v, w) for v, w in enumerate(mate) if w > v))


def _adjacency(g: Graph, rng: np.random.Generator | None) -> list[list[int]]:
    adj = [g.sorted_neighbors(v).tolist() for v in range(g.n)]
    if rng is not None:
        for a in adj:
            rng.shuffle(a)
    return adj


class _Blossom:
    def __init__(self, n: int, adj: list[list[int]], mate: list[int]):
        self.n = n
        self.adj = adj
        self.mate = mate

    def _lca(self, a: int, b: int) -> int:
        base, mate, p = self.base, self.mate, self.p
        seen = set()
        while True:
            a = base[a]
            seen.add(a)
            if mate[a] == -1:
                break
            a = p[mate[a]]
        while True:
            b = base[b]
            if b in seen:
                return b
            b = p[mate[b]]

    def _mark(self, v: int, b: int, child: int, blossom: set) -> None:
        base, mate, p = self.base, self.mate, self.p
        while base[v] != b:
            blossom.add(base[v])
            blossom.add(base[mate[v]])
            p[v] = child
            child = mate[v]
            v = p[mate[v]]

    def search(self, root: int) -> int:
        """BFS for an augmenting path from root; returns its far end or -1."""
        n, adj, mate = self.n, self.adj, self.mate
        self.used = used = [False] * n
        self.p = p = [-1] * n
        self.base = base = list(range(n))
        used[root] = True
        q = deque([root])
        while q:
            v = q.popleft()
            for to in adj[v]:
                if base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] != -1 and p[mate[to]] != -1):
                    cur = self._lca(v, to)
                    blossom: set[int] = set()
                    self._mark(v, cur, to, blossom)
                    self._mark(to, cur, v, blossom)
                    for i in range(n):
                        if base[i] in blossom:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                q.append(i)
                elif p[to] == -1:
                    p[to] = v
                    if mate[to] == -1:
                        return to
                    nxt = mate[to]
                    used[nxt] = True
                    q.append(nxt)
        return -1

    def augment(self, end: int) -> None:
        mate, p = self.mate, self.p
        v = end
        while v != -1:
            pv = p[v]
            ppv = mate[pv]
            mate[v] = pv
            mate[pv] = v
            v = ppv


def max_matching(g: Graph, rng: np.random.Generator | None = None) -> list[int]:
    """Maximum matching as a mate array (-1 for exposed vertices)."""
    n = g.n
    adj = _adjacency(g, rng)
    order = list(range(n))
    if rng is not None:
        rng.shuffle(order)
    mate = [-1] * n
    for v in order:
        if mate[v] == -1:
            for w in adj[v]:
                if mate[w] == -1:
                    mate[v], mate[w] = w, v
                    break
    kernel = _Blossom(n, adj, mate)
    for root in order:
        if mate[root] == -1:
            end = kernel.search(root)
            if end != -1:
                kernel.augment(end)
    return mate


def gallai_edmonds(g: Graph, mate: Sequence[int]) -> tuple[frozenset[int], frozenset[int]]:
    """(D, A) for a maximum matching: D = vertices missed by some maximum matching."""
    kernel = _Blossom(g.n, _adjacency(g, None), list(mate))
    D: set[int] = set()
    for root in range(g.n):
        if mate[root] == -1:
            if kernel.search(root) != -1:
                raise ParameterError("matching is not maximum")
            D.update(i for i in range(g.n) if kernel.used[i])
    A = {w for v in D for w in g.adj[v]} - D
    return frozenset(D), frozenset(A)


def odd_components(g: Graph, removed: frozenset[int] | set[int]) -> int:
    seen = set(removed)
    odd = 0
    for s in range(g.n):
        if s in seen:
            continue
        seen.add(s)
        stack, size = [s], 0
        while stack:
            v = stack.pop()
            size += 1
            for w in g.adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        odd += size % 2
    return odd


def perfect_matching(g: Graph, seed: int | None = None) -> Matching:
    """A perfect matching, or Infeasible carrying a Tutte-Berge set.

    The raised error has `certificate` = S and `odd_components` = o(G - S)
    with o(G - S) > |S|.
    """
    if g.n % 2:
        raise ParameterError("odd vertex count: use optimal_matching_covering")
    rng = None if seed is None else np.random.default_rng(seed)
    mate = max_matching(g, rng)
    if all(m != -1 for m in mate):
        return Matching.from_mate(mate)
    _, A = gallai_edmonds(g, mate)
    raise Infeasible("no perfect matching", certificate=A, odd_components=odd_components(g, A))


def optimal_matching_covering(g: Graph, x: int, seed: int | None = None) -> Matching:
    """Matching of size floor(n/2) that covers x.

    Even n reduces to a perfect matching.  For odd n a vertex y != x is deleted
    and a perfect matching of the rest is sought, trying y in increasing id.
    """
    rng = None if seed is None else np.random.default_rng(seed)
    mate = max_matching(g, rng)
    size = sum(1 for m in mate if m != -1) // 2
    if size == g.n // 2 and mate[x] != -1:
        return Matching.from_mate(mate)
    if g.n % 2 == 0:
        _, A = gallai_edmonds(g, mate)
        raise Infeasible("no perfect matching", certificate=A, odd_components=odd_components(g, A))
    last = None
    for y in range(g.n):
        if y == x:
            continue
        sub = g.without_edges(g.edges_at(y))
        mate = max_matching(sub, rng)
        if sum(1 for v, m in enumerate(mate) if m != -1 and v != y) == g.n - 1:
            return Matching.from_mate(mate)
        _, A = gallai_edmonds(sub, mate)
        last = (y, A)
    raise Infeasible(f"no optimal matching covers {x}", certificate=last)


# bipartite

def bipartite_max_matching(b: BipartiteGraph, rng: np.random.Generator | None = None) -> tuple[list[int], list[int]]:
    """Hopcroft-Karp; returns (mate_left, mate_right)."""
    nl, nr = b.n_left, b.n_right
    adj = [list(a) for a in b.adj]
    order = list(range(nl))
    if rng is not None:
        for a in adj:
            rng.shuffle(a)
        rng.shuffle(order)
    ml = [-1] * nl
    mr = [-1] * nr
    for i in order:
        for j in adj[i]:
            if mr[j] == -1:
                ml[i], mr[j] = j, i
                break
    INF = nl + nr + 1
    while True:
        dist = [INF] * nl
        q = deque()
        for i in order:
            if ml[i] == -1:
                dist[i] = 0
                q.append(i)
        found = False
        while q:
            i = q.popleft()
            for j in adj[i]:
                k = mr[j]
                if k == -1:
                    found = True
                elif dist[k] == INF:
                    dist[k] = dist[i] + 1
                    q.append(k)
        if not found:
            break
        ptr = [0] * nl
        for root in order:
            if ml[root] != -1:
                continue
            # iterative layered DFS
            stack = [root]
            while stack:
                i = stack[-1]
                advanced = False
                while ptr[i] < len(adj[i]):
                    j = adj[i][ptr[i]]
                    k = mr[j]
                    if k == -1:
                        # augment along the stack
                        for depth in range(len(stack) - 1, -1, -1):
                            u = stack[depth]
                            jj = adj[u][ptr[u]]
                            ml[u], mr[jj] = jj, u
                            ptr[u] += 1
                        stack = []
                        advanced = True
                        break
                    if dist[k] == dist[i] + 1:
                        stack.append(k)
                        advanced = True
                        break
                    ptr[i] += 1
                if not advanced:
                    dist[i] = INF
                    stack.pop()
                    if stack:
                        ptr[stack[-1]] += 1
    return ml, mr


def hall_violator(b: BipartiteGraph, ml: Sequence[int], mr: Sequence[int]) -> frozenset[int]:
    """Left set S with |N(S)| < |S|, grown from exposed left vertices."""
    S = {i for i in range(b.n_left) if ml[i] == -1}
    q = deque(S)
    seen_right = set()
    while q:
        i = q.popleft()
        for j in b.adj[i]:
            if j not in seen_right:
                seen_right.add(j)
                k = mr[j]
                if k != -1 and k not in S:
                    S.add(k)
                    q.append(k)
    return frozenset(S)


def bipartite_perfect_matching(b: BipartiteGraph, seed: int | np.random.Generator | None = None) -> list[int]:
    """Perfect matching as mate_left (left i matched to right mate_left[i]).

    The traversal order is shuffled by `seed`, so different seeds tend to
    return different matchings.
    """
    if b.n_left != b.n_right:
        raise ParameterError("classes differ in size")
    rng = seed if isinstance(seed, np.random.Generator) else (None if seed is None else np.random.default_rng(seed))
    ml, mr = bipartite_max_matching(b, rng)
    if any(j == -1 for j in ml):
        raise Infeasible("no perfect matching", certificate=hall_violator(b, ml, mr))
    return ml


def matching_edges(mate: Sequence[int]) -> list[Edge]:
    return [canon(v, w) for v, w in enumerate(mate) if w > v]
