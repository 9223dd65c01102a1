"""Dinic max-flow and the regular bipartite subgraph it is used for."""

from __future__ import annotations

from collections import deque

from hampack.errors import Infeasible, ParameterError
from hampack.graph import BipartiteGraph


class Dinic:
    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, c: int) -> int:
        idx = len(self.to)
        self.to += [v, u]
        self.cap += [c, 0]
        self.head[u].append(idx)
        self.head[v].append(idx + 1)
        return idx

    def _bfs(self, s: int, t: int) -> bool:
        self.level = level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    q.append(v)
        return level[t] >= 0

    def _dfs(self, s: int, t: int) -> int:
        # one augmenting path in the level graph, iteratively
        to, cap, head, level, it = self.to, self.cap, self.head, self.level, self.it
        path: list[int] = []
        u = s
        while True:
            if u == t:
                f = min(cap[e] for e in path)
                for e in path:
                    cap[e] -= f
                    cap[e ^ 1] += f
                return f
            advanced = False
            while it[u] < len(head[u]):
                e = head[u][it[u]]
                v = to[e]
                if cap[e] > 0 and level[v] == level[u] + 1:
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if not path:
                    return 0
                level[u] = -1
                e = path.pop()
                u = to[e ^ 1]
                it[u] += 1

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while self._bfs(s, t):
            self.it = [0] * self.n
            while True:
                f = self._dfs(s, t)
                if not f:
                    break
                flow += f
        return flow

    def source_side(self, s: int) -> set[int]:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen


def bipartite_regular_subgraph(b: BipartiteGraph, r: int) -> BipartiteGraph:
    """Spanning r-regular subgraph of a balanced bipartite graph.

    Network: source -> each left vertex (capacity r), left -> right along
    every edge (capacity 1), each right vertex -> sink (capacity r).  A flow
    of value n*r saturates every vertex and its unit arcs form the subgraph.
    On failure the error carries the source side of a minimum cut, as
    (left vertices, right vertices).
    """
    if b.n_left != b.n_right:
        raise ParameterError("classes differ in size")
    if r < 0:
        raise ParameterError("negative degree")
    n = b.n_left
    net = Dinic(2 * n + 2)
    s, t = 2 * n, 2 * n + 1
    arcs = []
    for i in range(n):
        net.add_edge(s, i, r)
        net.add_edge(n + i, t, r)
    for i, a in enumerate(b.adj):
        for j in a:
            arcs.append((i, j, net.add_edge(i, n + j, 1)))
    value = net.max_flow(s, t)
    if value < n * r:
        side = net.source_side(s)
        cut = (frozenset(v for v in side if v < n), frozenset(v - n for v in side if n <= v < 2 * n))
        raise Infeasible(f"max flow {value} < {n * r}", certificate=cut, flow=value)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j, e in arcs:
        if net.cap[e] == 0:
            adj[i].append(j)
    return BipartiteGraph(n, n, adj)
