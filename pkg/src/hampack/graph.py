"""Graph model, G(n, p) sampling, layer splitting, Euler orientation and file I/O.

A Graph stores one sorted numpy array of neighbours per vertex.  That keeps
large samples (n in the thousands, dense p) cheap when only degrees or subset
counts are needed; frozenset adjacency is materialised lazily for the
pure-Python kernels.
"""

from __future__ import annotations

import gzip
import io
import os
from typing import Iterable, Sequence

import numpy as np

from hampack.errors import GraphParseError, ParameterError, PreconditionError
from hampack.rng import stream

Edge = tuple[int, int]


def canon(u: int, v: int) -> Edge:
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


def edge_set(edges: Iterable[Sequence[int]]) -> frozenset[Edge]:
    """Canonical (min, max) pairs; loops are rejected."""
    out = set()
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise ParameterError(f"loop at vertex {u}")
        out.add(canon(u, v))
    return frozenset(out)


class Graph:
    """Immutable simple undirected graph on vertices 0..n-1."""

    __slots__ = ("n", "_nbrs", "_deg", "_sets", "_m")

    def __init__(self, n: int, nbrs: Sequence[np.ndarray]):
        self.n = int(n)
        arrs = []
        for a in nbrs:
            a = np.asarray(a, dtype=np.int64)
            a.setflags(write=False)
            arrs.append(a)
        if len(arrs) != self.n:
            raise ParameterError("neighbour list count differs from n")
        self._nbrs = tuple(arrs)
        self._deg = np.fromiter((len(a) for a in arrs), dtype=np.int64, count=self.n)
        self._deg.setflags(write=False)
        self._sets = None
        self._m = int(self._deg.sum()) // 2

    # construction
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], check: bool = True) -> "Graph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if check:
                if u == v:
                    raise ParameterError(f"loop at vertex {u}")
                if not (0 <= u < n and 0 <= v < n):
                    raise ParameterError(f"edge ({u}, {v}) out of range for n={n}")
                if v in adj[u]:
                    raise ParameterError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        return cls.from_adjacency(adj)

    @classmethod
    def from_adjacency(cls, adj: Sequence[Iterable[int]]) -> "Graph":
        nbrs = [np.array(sorted(a), dtype=np.int64) for a in adj]
        g = cls(len(nbrs), nbrs)
        return g

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, [np.zeros(0, dtype=np.int64) for _ in range(n)])

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, [np.array([u for u in range(n) if u != v], dtype=np.int64) for v in range(n)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    # basic queries
    @property
    def m(self) -> int:
        return self._m

    @property
    def adj(self) -> tuple[frozenset[int], ...]:
        if self._sets is None:
            self._sets = tuple(frozenset(a.tolist()) for a in self._nbrs)
        return self._sets

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adj[v]

    def sorted_neighbors(self, v: int) -> np.ndarray:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return int(self._deg[v])

    def degrees(self) -> np.ndarray:
        return self._deg

    def min_degree(self) -> int:
        return int(self._deg.min()) if self.n else 0

    def max_degree(self) -> int:
        return int(self._deg.max()) if self.n else 0

    def argmin_degree(self) -> int:
        """Lowest-id vertex of minimum degree."""
        return int(np.argmin(self._deg))

    def is_regular(self, r: int | None = None) -> bool:
        if self.n == 0:
            return True
        lo, hi = self.min_degree(), self.max_degree()
        return lo == hi and (r is None or lo == r)

    def has_edge(self, u: int, v: int) -> bool:
        a = self._nbrs[u]
        i = int(np.searchsorted(a, v))
        return i < len(a) and int(a[i]) == v

    def edges(self) -> list[Edge]:
        out = []
        for u, a in enumerate(self._nbrs):
            for v in a[np.searchsorted(a, u, side="right"):].tolist():
                out.append((u, v))
        return out

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges())

    def mask(self, S: Iterable[int]) -> np.ndarray:
        mk = np.zeros(self.n, dtype=bool)
        idx = np.fromiter(S, dtype=np.int64)
        mk[idx] = True
        return mk

    def e_within(self, S: Iterable[int]) -> int:
        S = list(S)
        mk = self.mask(S)
        return int(sum(int(mk[self._nbrs[v]].sum()) for v in S)) // 2

    def e_between(self, S: Iterable[int], T: Iterable[int]) -> int:
        """Number of pairs (s, t) with s in S, t in T and st an edge (S, T disjoint)."""
        mk = self.mask(T)
        return int(sum(int(mk[self._nbrs[v]].sum()) for v in S))

    def degree_into(self, v: int, mk: np.ndarray) -> int:
        return int(mk[self._nbrs[v]].sum())

    # derived graphs
    def with_edges(self, edges: Iterable[Sequence[int]]) -> "Graph":
        adj = [set(s) for s in self.adj]
        for u, v in edges:
            if v in adj[u] or u == v:
                raise ParameterError(f"edge ({u}, {v}) already present or a loop")
            adj[u].add(v)
            adj[v].add(u)
        return Graph.from_adjacency(adj)

    def without_edges(self, edges: Iterable[Sequence[int]]) -> "Graph":
        adj = [set(s) for s in self.adj]
        for u, v in edges:
            if v not in adj[u]:
                raise ParameterError(f"edge ({u}, {v}) not present")
            adj[u].discard(v)
            adj[v].discard(u)
        return Graph.from_adjacency(adj)

    def union(self, *others: "Graph") -> "Graph":
        """Union of edge-disjoint graphs on the same vertex set."""
        g = self
        for o in others:
            if o.n != self.n:
                raise ParameterError("vertex counts differ")
            g = g.with_edges(o.edges())
        return g

    def edges_at(self, x: int) -> list[Edge]:
        return [canon(x, v) for v in self._nbrs[x].tolist()]

    def induced(self, W: Iterable[int]) -> "Graph":
        """Same vertex set, keeping only edges with both ends in W."""
        keep = set(W)
        return Graph.from_adjacency([(self.adj[v] & keep) if v in keep else () for v in range(self.n)])

    def audit(self) -> list[str]:
        """Simplicity and symmetry problems, empty when the graph is well formed."""
        problems = []
        for v, a in enumerate(self._nbrs):
            lst = a.tolist()
            if lst != sorted(set(lst)):
                problems.append(f"vertex {v}: adjacency not sorted/unique")
            for w in lst:
                if w == v:
                    problems.append(f"loop at {v}")
                elif not (0 <= w < self.n):
                    problems.append(f"vertex {v}: neighbour {w} out of range")
                elif not self.has_edge(w, v):
                    problems.append(f"asymmetric edge {v}-{w}")
        if int(self._deg.sum()) % 2:
            problems.append("odd degree sum")
        return problems

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph) or other.n != self.n:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self._nbrs, other._nbrs))

    def __hash__(self):
        return hash((self.n, tuple(self.edges())))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class DiGraph:
    __slots__ = ("n", "out")

    def __init__(self, n: int, out: Sequence[Iterable[int]]):
        self.n = n
        self.out = tuple(frozenset(o) for o in out)

    def arcs(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in sorted(self.out[u])]

    def out_degrees(self) -> list[int]:
        return [len(o) for o in self.out]

    def in_degrees(self) -> list[int]:
        d = [0] * self.n
        for o in self.out:
            for v in o:
                d[v] += 1
        return d

    def underlying(self) -> Graph:
        return Graph.from_edges(self.n, self.arcs())


class BipartiteGraph:
    """Left class 0..n_left-1, right class 0..n_right-1, edges stored left to right."""

    __slots__ = ("n_left", "n_right", "adj")

    def __init__(self, n_left: int, n_right: int, adj: Sequence[Iterable[int]]):
        self.n_left = n_left
        self.n_right = n_right
        self.adj = tuple(tuple(sorted(set(a))) for a in adj)
        if len(self.adj) != n_left:
            raise ParameterError("adjacency length differs from left size")
        for i, a in enumerate(self.adj):
            if a and (a[0] < 0 or a[-1] >= n_right):
                raise ParameterError(f"left vertex {i} has an out-of-range neighbour")

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj)

    def edges(self) -> list[Edge]:
        return [(i, j) for i, a in enumerate(self.adj) for j in a]

    def left_degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    def right_degrees(self) -> list[int]:
        d = [0] * self.n_right
        for a in self.adj:
            for j in a:
                d[j] += 1
        return d

    def without_edges(self, edges: Iterable[Edge]) -> "BipartiteGraph":
        adj = [set(a) for a in self.adj]
        for i, j in edges:
            adj[i].remove(j)
        return BipartiteGraph(self.n_left, self.n_right, adj)


# generation

def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Sample G(n, p).

    Row i draws n-i-1 uniforms from the ("gnp") Philox stream, in order, and
    keeps pair (i, j) when its uniform is below p.
    """
    if n < 1 or not (0.0 <= p <= 1.0):
        raise ParameterError("need n >= 1 and 0 <= p <= 1")
    rng = stream(seed, "gnp")
    if n <= 8192:
        mat = np.zeros((n, n), dtype=bool)
        for i in range(n - 1):
            mat[i, i + 1:] = rng.random(n - i - 1) < p
        mat |= mat.T
        return Graph(n, [np.flatnonzero(mat[v]) for v in range(n)])
    us, vs = [], []
    for i in range(n - 1):
        js = np.flatnonzero(rng.random(n - i - 1) < p) + i + 1
        us.append(np.full(len(js), i, dtype=np.int64))
        vs.append(js)
    return _from_arrays(n, np.concatenate(us), np.concatenate(vs))


def _from_arrays(n: int, us: np.ndarray, vs: np.ndarray) -> Graph:
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    return Graph(n, np.split(dst, np.cumsum(counts)[:-1]))


def split_layers(g: Graph, weights: Sequence[float], seed: int, p0: float | None = None) -> list[Graph]:
    """Randomly partition E(g) into len(weights)+1 layers.

    Each edge independently joins layer k with probability weights[k]/p0
    (p0 = 1 when omitted) and the final layer takes the residual probability.
    Edges are visited in sorted order, one uniform each.
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ParameterError("negative layer weight")
    if p0 is not None:
        if p0 <= 0:
            raise ParameterError("p0 must be positive")
        w = w / p0
    total = float(w.sum())
    if total > 1.0 + 1e-9:
        raise ParameterError(f"layer weights sum to {total:.6g} > 1")
    edges = g.edges()
    rng = stream(seed, "split")
    u = rng.random(len(edges))
    cuts = np.cumsum(w)
    which = np.searchsorted(cuts, u, side="right")
    buckets: list[list[Edge]] = [[] for _ in range(len(w) + 1)]
    for e, k in zip(edges, which.tolist()):
        buckets[min(k, len(w))].append(e)
    return [Graph.from_edges(g.n, b, check=False) for b in buckets]


# orientation

def euler_orient(h: Graph) -> DiGraph:
    """Orient every edge along Euler circuits, one per component.

    Iterative Hierholzer: each closed trail walked is oriented in walking
    direction, so in- and out-degree agree everywhere.
    """
    deg = h.degrees()
    odd = np.flatnonzero(deg % 2)
    if len(odd):
        raise PreconditionError(f"vertex {int(odd[0])} has odd degree", witness=int(odd[0]))
    nbrs = [a.tolist() for a in (h.sorted_neighbors(v) for v in range(h.n))]
    ptr = [0] * h.n
    used: set[Edge] = set()
    out: list[list[int]] = [[] for _ in range(h.n)]
    for start in range(h.n):
        if ptr[start] >= len(nbrs[start]):
            continue
        stack = [start]
        while stack:
            v = stack[-1]
            lst = nbrs[v]
            while ptr[v] < len(lst) and canon(v, lst[ptr[v]]) in used:
                ptr[v] += 1
            if ptr[v] == len(lst):
                stack.pop()
                continue
            w = lst[ptr[v]]
            used.add(canon(v, w))
            out[v].append(w)
            stack.append(w)
    return DiGraph(h.n, out)


def bipartite_double(d: DiGraph) -> BipartiteGraph:
    """Left copy i joined to right copy j exactly when i -> j is an arc."""
    return BipartiteGraph(d.n, d.n, d.out)


# persistence

def _open(path, mode: str):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def format_graph(g: Graph) -> str:
    buf = io.StringIO()
    buf.write(f"{g.n} {g.m}\n")
    for u, v in g.edges():
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def parse_graph(text: str) -> Graph:
    lines = text.splitlines()
    if not lines:
        raise GraphParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 2 or not all(t.lstrip("-").isdigit() for t in head):
        raise GraphParseError("header must be 'n m'", 1)
    n, m = int(head[0]), int(head[1])
    if n < 0 or m < 0:
        raise GraphParseError("negative header value", 1)
    adj: list[set[int]] = [set() for _ in range(n)]
    count = 0
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2 or not all(t.lstrip("-").isdigit() for t in parts):
            raise GraphParseError(f"malformed edge line {line!r}", no)
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"vertex out of range in {line!r}", no)
        if u == v:
            raise GraphParseError(f"loop {u} {v}", no)
        if v in adj[u]:
            raise GraphParseError(f"duplicate edge {u} {v}", no)
        adj[u].add(v)
        adj[v].add(u)
        count += 1
    if count != m:
        raise GraphParseError(f"header promises {m} edges, found {count}", 1)
    return Graph.from_adjacency(adj)


def write_graph(g: Graph, path) -> None:
    with _open(path, "w") as fh:
        fh.write(format_graph(g))


def read_graph(path) -> Graph:
    with _open(path, "r") as fh:
        return parse_graph(fh.read())
