"""Rotations, extensions and reachability for paths built out of 2-factor cycles.

A path is stored as a list of vertices plus a position table.  A rotation with
pivot at position i (0-based, i >= 2) reverses the prefix [0, i): the edge
between positions i-1 and i is broken and the pivot is joined to the old first
endpoint, so the vertex at position i-1 becomes the new first endpoint.

Reachability search never materialises intermediate paths.  A state is the
tuple of prefix lengths reversed so far; the current position of a vertex is
found by pushing its original position through those reversals.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from hampack.errors import ParameterError, PreconditionError
from hampack.graph import Edge, Graph, canon


def _loglog(ln: float) -> float:
    return max(1.0, math.log(ln)) if ln > 1 else 1.0


def tau0_ln(ln: float) -> int:
    """Rotation depth from ln n: ceil(ln n / ln ln n) + 3, with ln ln n floored at 1."""
    return math.ceil(ln / _loglog(ln)) + 3


def tau0(n: float) -> int:
    return tau0_ln(math.log(max(n, 2)))


def edge_budget_factor(n: float) -> int:
    """Allowed used edges per merged cycle: ceil(5 ln n / ln ln n)."""
    ln = math.log(max(n, 2))
    return math.ceil(5 * ln / _loglog(ln))


class Reservoir:
    """Mutable edge pool with a journal, so a failed merge can be rolled back.

    `used` lists edges taken out (new path edges), `returned` lists edges put
    in (broken factor edges).  Both are kept as lists since an edge can be
    taken, broken and taken again.
    """

    def __init__(self, g: Graph | int):
        if isinstance(g, Graph):
            self.n = g.n
            self.adj: list[set[int]] = [set(a) for a in g.adj]
            self._m = g.m
        else:
            self.n = int(g)
            self.adj = [set() for _ in range(self.n)]
            self._m = 0
        self.used: list[Edge] = []
        self.returned: list[Edge] = []
        self._journal: list[tuple[str, Edge]] = []

    @property
    def m(self) -> int:
        return self._m

    def has(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def take(self, u: int, v: int) -> None:
        if v not in self.adj[u]:
            raise PreconditionError(f"edge {canon(u, v)} not in reservoir", witness=canon(u, v))
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self._m -= 1
        e = canon(u, v)
        self.used.append(e)
        self._journal.append(("take", e))

    def give(self, u: int, v: int) -> None:
        if u == v or v in self.adj[u]:
            raise PreconditionError(f"edge {canon(u, v)} already in reservoir", witness=canon(u, v))
        self.adj[u].add(v)
        self.adj[v].add(u)
        self._m += 1
        e = canon(u, v)
        self.returned.append(e)
        self._journal.append(("give", e))

    def checkpoint(self) -> int:
        return len(self._journal)

    def rollback(self, mark: int) -> None:
        while len(self._journal) > mark:
            kind, (u, v) = self._journal.pop()
            if kind == "take":
                self.adj[u].add(v)
                self.adj[v].add(u)
                self._m += 1
                self.used.pop()
            else:
                self.adj[u].discard(v)
                self.adj[v].discard(u)
                self._m -= 1
                self.returned.pop()

    def balance(self, mark: int = 0) -> int:
        """returned minus used since `mark`."""
        return sum(1 if k == "give" else -1 for k, _ in self._journal[mark:])

    def graph(self) -> Graph:
        return Graph.from_adjacency(self.adj)

    def edges(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v]


class RotPath:
    __slots__ = ("n", "seq", "pos", "origin", "history")

    def __init__(self, n: int, seq: Sequence[int]):
        self.n = n
        self.seq = [int(v) for v in seq]
        self.pos = [-1] * n
        for i, v in enumerate(self.seq):
            if self.pos[v] != -1:
                raise PreconditionError(f"vertex {v} repeats on path", witness=v)
            self.pos[v] = i
        self.origin = tuple(self.seq)
        self.history: list[tuple] = []

    def __len__(self) -> int:
        return len(self.seq)

    @property
    def first(self) -> int:
        return self.seq[0]

    @property
    def last(self) -> int:
        return self.seq[-1]

    def __contains__(self, v: int) -> bool:
        return self.pos[v] != -1

    def edges(self) -> list[Edge]:
        s = self.seq
        return [canon(s[i], s[i + 1]) for i in range(len(s) - 1)]

    def copy(self) -> "RotPath":
        out = RotPath.__new__(RotPath)
        out.n = self.n
        out.seq = list(self.seq)
        out.pos = list(self.pos)
        out.origin = self.origin
        out.history = list(self.history)
        return out

    def _reindex(self, lo: int, hi: int) -> None:
        for i in range(lo, hi):
            self.pos[self.seq[i]] = i

    def reverse(self) -> "RotPath":
        self.seq.reverse()
        self._reindex(0, len(self.seq))
        self.history.append(("reverse",))
        return self

    def replay(self) -> list[int]:
        """Rebuild the sequence from the origin and history alone."""
        seq = list(self.origin)
        for op in self.history:
            if op[0] == "reverse":
                seq.reverse()
            elif op[0] == "rotate":
                i = seq.index(op[1])
                seq[:i] = seq[:i][::-1]
            elif op[0] == "extend":
                seq = list(op[1]) + seq
        return seq


def rotate(P: RotPath, pivot: int, reservoir: Reservoir | None = None) -> RotPath:
    """Rotate P in place with the given pivot and return it.

    A pivot right after the first endpoint breaks and re-adds the same edge,
    so the path is left unchanged and nothing is recorded.
    """
    i = P.pos[pivot]
    if i < 0:
        raise PreconditionError(f"pivot {pivot} not on path", witness=pivot)
    if i == 0:
        raise PreconditionError("pivot is the first endpoint", witness=pivot)
    if i == 1:
        return P
    v1 = P.seq[0]
    broken = canon(P.seq[i - 1], pivot)
    if reservoir is not None:
        reservoir.take(v1, pivot)
        reservoir.give(*broken)
    P.seq[:i] = P.seq[:i][::-1]
    P._reindex(0, i)
    P.history.append(("rotate", pivot, broken, canon(v1, pivot)))
    return P


def extend(P: RotPath, cycle: Sequence[int], join: int, broken: Edge, reservoir: Reservoir | None = None) -> RotPath:
    """Absorb a vertex-disjoint cycle in front of P through `join`.

    With cycle w_1..w_k, join w_j and broken edge w_{j-1}w_j the new path is
    w_{j-1} w_{j-2} ... w_{j+1} w_j v_1 ... v_l.
    """
    k = len(cycle)
    if any(P.pos[w] != -1 for w in cycle):
        raise PreconditionError("cycle meets the path", witness=next(w for w in cycle if P.pos[w] != -1))
    try:
        j = list(cycle).index(join)
    except ValueError:
        raise PreconditionError(f"join {join} not on cycle", witness=join) from None
    prev, nxt = cycle[j - 1], cycle[(j + 1) % k]
    b = canon(*broken)
    if b == canon(prev, join):
        front = [cycle[(j - 1 - t) % k] for t in range(k)]
    elif b == canon(nxt, join):
        front = [cycle[(j + 1 + t) % k] for t in range(k)]
    else:
        raise PreconditionError(f"broken edge {b} is not a cycle edge at {join}", witness=b)
    v1 = P.seq[0]
    if reservoir is not None:
        reservoir.take(v1, join)
        reservoir.give(*b)
    P.seq[:0] = front
    P._reindex(0, len(P.seq))
    P.history.append(("extend", tuple(front), b, canon(v1, join)))
    return P


# reachability

@dataclass(frozen=True)
class ReachRecord:
    vertex: int
    steps: tuple[tuple[int, Edge], ...] = ()

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.steps)


def _cur_pos(p: int, lens: Sequence[int]) -> int:
    for L in lens:
        if p < L:
            p = L - 1 - p
    return p


def _orig_pos(p: int, lens: Sequence[int]) -> int:
    for L in reversed(lens):
        if p < L:
            p = L - 1 - p
    return p


def _neighbors(h, v: int) -> list[int]:
    if isinstance(h, Graph):
        return h.sorted_neighbors(v).tolist()
    return sorted(h.adj[v])


def reachable_set(P: RotPath, h, Q: Iterable[int], tau: int, mode: str = "state",
                  forbid: Callable[[Edge], bool] | None = None,
                  stop: Callable[[int], bool] | None = None) -> list[ReachRecord]:
    """First endpoints reachable by at most tau rotations with pivots in Q.

    New edges come from `h` (a Graph or Reservoir, read but not modified).
    mode 'state' deduplicates on the whole path and is exact; 'endpoint'
    keeps one shortest witness per endpoint, which is much cheaper but may
    miss endpoints only reachable through a longer detour.  `forbid` vetoes
    rotations whose broken edge it flags.  With `stop`, the search returns as
    soon as a vertex satisfying it is reached, with that record last.
    """
    if mode not in ("state", "endpoint"):
        raise ParameterError(f"unknown mode {mode!r}")
    Qset = set(Q)
    seq, pos = P.seq, P.pos
    root = ReachRecord(seq[0])
    records = {seq[0]: root}
    out = [root]
    if stop is not None and stop(seq[0]):
        return out
    seen_states = {()}
    frontier: deque = deque([((), root)])
    while frontier:
        lens, rec = frontier.popleft()
        if len(lens) >= tau:
            continue
        v1 = seq[_orig_pos(0, lens)]
        for w in _neighbors(h, v1):
            if w not in Qset or pos[w] < 0:
                continue
            i = _cur_pos(pos[w], lens)
            if i < 2:
                continue
            u = seq[_orig_pos(i - 1, lens)]
            broken = canon(u, w)
            if forbid is not None and forbid(broken):
                continue
            nl = lens + (i,)
            if mode == "state":
                key = tuple(seq[_orig_pos(t, nl)] for t in range(max(nl)))
                if key in seen_states:
                    continue
                seen_states.add(key)
            elif u in records:
                continue
            nrec = ReachRecord(u, rec.steps + ((w, broken),))
            frontier.append((nl, nrec))
            if u not in records:
                records[u] = nrec
                out.append(nrec)
                if stop is not None and stop(u):
                    return out
    return out


def reachable_oracle(P: Sequence[int], h: Graph, Q: Iterable[int], tau: int) -> set[int]:
    """Exhaustive enumeration of every rotation sequence, for testing."""
    Qset = set(Q)
    found: set[int] = set()

    def walk(seq: list[int], depth: int) -> None:
        found.add(seq[0])
        if depth == tau:
            return
        for i in range(2, len(seq)):
            w = seq[i]
            if w in Qset and h.has_edge(seq[0], w):
                walk(seq[:i][::-1] + seq[i:], depth + 1)

    walk(list(P), 0)
    return found


def apply_record(P: RotPath, rec: ReachRecord, reservoir: Reservoir | None = None,
                 instrument: "Instrument | None" = None, Q: frozenset[int] | None = None) -> RotPath:
    """Replay a witness on P, checking each broken edge matches the record."""
    for pivot, broken in rec.steps:
        i = P.pos[pivot]
        if i < 2 or canon(P.seq[i - 1], pivot) != broken:
            raise PreconditionError(f"witness for {rec.vertex} no longer applies at pivot {pivot}", witness=pivot)
        if reservoir is not None and not reservoir.has(P.seq[0], pivot):
            raise PreconditionError(f"edge {canon(P.seq[0], pivot)} left the reservoir", witness=pivot)
        before = P.copy() if instrument is not None and Q is not None else None
        rotate(P, pivot, reservoir)
        if before is not None:
            instrument.check_rotation(before, P, pivot, Q)
    if P.seq[0] != rec.vertex:
        raise PreconditionError("witness replay ended elsewhere", witness=P.seq[0])
    return P


# interiors

def _nbr_lists(X, cyclic: bool = False) -> tuple[Iterable[int], Callable[[int], Iterable[int]]]:
    if isinstance(X, Graph):
        return range(X.n), lambda v: X.adj[v]
    if isinstance(X, RotPath):
        seq = X.seq
        pos = X.pos
        last = len(seq) - 1

        def nb(v: int) -> list[int]:
            i = pos[v]
            return [seq[j] for j in (i - 1, i + 1) if 0 <= j <= last]
        return seq, nb
    if hasattr(X, "cycles"):
        nbrs = {}
        for cyc in X.cycles:
            k = len(cyc)
            for i, v in enumerate(cyc):
                nbrs[v] = (cyc[i - 1], cyc[(i + 1) % k])
        return nbrs.keys(), lambda v: nbrs[v]
    seq = list(X)
    k = len(seq)
    idx = {v: i for i, v in enumerate(seq)}

    def nb2(v: int) -> list[int]:
        i = idx[v]
        if cyclic and k > 2:
            return [seq[i - 1], seq[(i + 1) % k]]
        return [seq[j] for j in (i - 1, i + 1) if 0 <= j < k]
    return seq, nb2


def interior(S: Iterable[int], X, cyclic: bool = False) -> frozenset[int]:
    """Vertices of X in S whose X-neighbours all lie in S."""
    S = set(S)
    verts, nb = _nbr_lists(X, cyclic)
    return frozenset(v for v in verts if v in S and all(w in S for w in nb(v)))


def closure(S: Iterable[int], X, cyclic: bool = False) -> frozenset[int]:
    """S together with its X-neighbourhood."""
    S = set(S)
    verts, nb = _nbr_lists(X, cyclic)
    vs = set(verts)
    out = set(S)
    for v in S:
        if v in vs:
            out.update(nb(v))
    return frozenset(out)


@dataclass
class Instrument:
    """Checks the interior sandwich around every constrained rotation/extension.

    For a rotation with pivot z in Int_P(Q):  Int_P(Q) - {z} <= Int_P'(Q) <= Int_P(Q),
    with equality when the first endpoint lies in Q.  For an extension by a
    cycle C joined at z in Int_C(Q) the same holds with Int_P(Q) | Int_C(Q).
    """

    checked: int = 0
    skipped: int = 0
    violations: list = field(default_factory=list)

    def _sandwich(self, kind: str, old: frozenset, new: frozenset, z: int, eq: bool) -> None:
        self.checked += 1
        ok = (old - {z}) <= new <= old and (not eq or new == old)
        if not ok:
            self.violations.append({"op": kind, "z": z, "lost": sorted(old - {z} - new),
                                    "gained": sorted(new - old), "equality": eq})

    def check_rotation(self, before: RotPath, after: RotPath, z: int, Q: frozenset[int]) -> None:
        old = interior(Q, before)
        if z not in old:
            self.skipped += 1
            return
        self._sandwich("rotate", old, interior(Q, after), z, before.first in Q)

    def check_extension(self, before: RotPath, cycle: Sequence[int], after: RotPath, z: int,
                        Q: frozenset[int]) -> None:
        ic = interior(Q, cycle, cyclic=True)
        if z not in ic:
            self.skipped += 1
            return
        old = interior(Q, before) | ic
        self._sandwich("extend", old, interior(Q, after), z, before.first in Q)

    def to_dict(self) -> dict:
        return {"checked": self.checked, "skipped": self.skipped, "violations": len(self.violations)}
