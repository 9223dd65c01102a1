import math
from collections import Counter

import pytest

from hampack.errors import MergeStuck, PreconditionError
from hampack.factors import r_factor
from hampack.graph import Graph, gen_gnp, split_layers
from hampack.merge import (MergeParams, build_avoid_sets, build_segments, merge_all, merge_avoiding_vertex,
                           merge_step, trace_lines)
from hampack.rotation import Instrument, Reservoir, RotPath, edge_budget_factor
from hampack.twofactor import TwoFactor, petersen_decompose

from conftest import cycle_edges

TRIANGLES = TwoFactor(6, ((0, 1, 2), (3, 4, 5)))
CROSS = Graph.from_edges(6, [(u, v) for u in range(3) for v in range(3, 6)])


def _is_hamilton(cyc, n):
    return sorted(cyc) == list(range(n))


def test_two_triangles_merge():
    inst = Instrument()
    res = Reservoir(CROSS)
    out = merge_step(TRIANGLES, res, params=MergeParams(instrument=inst), seed=0)
    assert out.factor.is_hamilton and out.merged == 1
    assert out.used <= math.ceil(5 * math.log(6) / math.log(math.log(6)))
    assert res.balance() == 0
    assert inst.violations == []
    # the new cycle only uses factor and reservoir edges
    assert set(out.factor.edges()) <= TRIANGLES.edge_set() | CROSS.edge_set()


def test_two_triangles_keep_bad_edges():
    bad = [(0, 1), (3, 4)]
    for seed in range(10):
        out = merge_step(TRIANGLES, Reservoir(CROSS), bad=bad, seed=seed)
        assert set(bad) <= out.factor.edge_set()


def test_two_triangles_avoid_vertex():
    for seed in range(10):
        out = merge_step(TRIANGLES, Reservoir(CROSS), seed=seed, avoid=0)
        assert {(0, 1), (0, 2)} <= out.factor.edge_set()


def test_preconditions():
    ham = TwoFactor(4, ((0, 1, 2, 3),))
    with pytest.raises(PreconditionError):
        merge_step(ham, Reservoir(4))
    with pytest.raises(PreconditionError):
        merge_step(TRIANGLES, Reservoir(CROSS), bad=[(0, 3)])
    with pytest.raises(PreconditionError):
        merge_step(TRIANGLES, Reservoir(CROSS), bad=[(0, 1), (1, 2)])
    with pytest.raises(PreconditionError):
        merge_step(TRIANGLES, Reservoir(CROSS.with_edges([(0, 1)])))


def test_stuck_rolls_back():
    res = Reservoir(6)
    with pytest.raises(MergeStuck):
        merge_step(TRIANGLES, res)
    assert res.m == 0 and res.used == [] and res.returned == []


def test_merge_all_passthrough():
    ham = TwoFactor(5, ((0, 1, 2, 3, 4),))
    H = Graph.complete(5).without_edges(cycle_edges(ham.cycles[0]))
    rep = merge_all([ham], H)
    assert rep.cycles == [ham.cycles[0]] and rep.leftover == H and rep.complete


def edge_multiset(graphs=(), cycles=()):
    c = Counter()
    for g in graphs:
        c.update(g.edges())
    for cyc in cycles:
        c.update(cycle_edges(cyc))
    return c


def test_merge_all_k7():
    k7 = Graph.complete(7)
    fs = petersen_decompose(k7, seed=3)
    H = k7.without_edges([e for f in fs[:2] for e in f.edges()])
    rep = merge_all(fs[:2], H, seed=1)
    assert all(_is_hamilton(c, 7) for c in rep.cycles)
    got = [e for c in rep.cycles for e in cycle_edges(c)]
    assert len(got) == len(set(got))
    factor_edges = Counter(e for f in fs[:2] for e in f.edges())
    assert edge_multiset([rep.leftover], rep.cycles) == edge_multiset([H]) + factor_edges


def _dense_fixture(n, p, seed):
    G = gen_gnp(n, p, seed)
    G1, G2 = split_layers(G, [0.7], seed=seed + 1)
    d = G1.min_degree()
    H = r_factor(G1, d - d % 2, seed=seed + 2)
    return H, G2.union(G1.without_edges(H.edges()))


@pytest.mark.parametrize("seed", [0, 1])
def test_merge_all_accounting(seed):
    H, res = _dense_fixture(120, 0.6, seed)
    fs = petersen_decompose(H, seed=seed)
    inst = Instrument()
    rep = merge_all(fs, res, params=MergeParams(instrument=inst), seed=seed)
    before = edge_multiset([res]) + Counter(e for f in fs for e in f.edges())
    assert edge_multiset([rep.leftover], rep.cycles) == before
    assert inst.violations == []
    cap = edge_budget_factor(120)
    assert all(s["used"] <= cap * (s["c_before"] - s["c_after"]) for s in rep.steps)


def test_merge_all_with_bad_edges():
    H, res = _dense_fixture(150, 0.6, 3)
    fs = petersen_decompose(H, seed=2)
    bad = set()
    for f in fs:
        taken = set()
        for u, v in f.edges()[::7][:3]:
            if u not in taken and v not in taken:
                bad.add((u, v))
                taken |= {u, v}
    rep = merge_all(fs, res, bad, seed=4)
    assert rep.complete
    kept = sum(1 for e in bad if any(e in set(cycle_edges(c)) for c in rep.cycles))
    assert kept + rep.broken_bad == len(bad)


def test_merge_avoiding_vertex_keeps_x0_edges():
    H, res = _dense_fixture(100, 0.6, 5)
    fs = petersen_decompose(H, seed=1)
    G = H.union(res)
    rep = merge_avoiding_vertex(fs, G, 0, seed=2)
    assert rep.complete
    for f, cyc in zip(fs, rep.cycles):
        at_x0 = {e for e in f.edges() if 0 in e}
        assert at_x0 <= set(cycle_edges(cyc))


def test_avoid_sets_empty_w():
    av = build_avoid_sets(CROSS, TRIANGLES, [])
    assert av.v1 == av.v2 == frozenset(range(6)) and av.flags == ()


def test_avoid_sets_one_vertex():
    H, res = _dense_fixture(120, 0.7, 1)
    F = petersen_decompose(H, seed=0)[0]
    av = build_avoid_sets(res, F, [7])
    assert 7 not in av.v2 and "degraded" not in av.flags
    assert len(av.removed) <= 1


def test_avoid_sets_sparse_degrades():
    F = TwoFactor(9, ((0, 1, 2), (3, 4, 5), (6, 7, 8)))
    sparse = Graph.from_edges(9, [(0, 3)])
    av = build_avoid_sets(sparse, F, [0], r_h=4)
    assert "degraded" in av.flags and len(av.removed) == 1


def test_segments_complete_reservoir():
    n = 30
    P = RotPath(n, list(range(n)))
    seg = build_segments(P, Graph.complete(n), range(n), r_g=n - 1)
    assert seg.stats["removed"] == 0
    assert seg.index == list(range(len(seg.blocks)))
    assert [v for b in seg.blocks for v in b] == list(range(n))


def test_segments_empty_reservoir():
    P = RotPath(30, list(range(30)))
    seg = build_segments(P, Graph.empty(30), range(30), r_g=10)
    assert "few_segments" in seg.flags or "empty" in seg.flags


def test_trace_lines():
    trace = []
    merge_step(TRIANGLES, Reservoir(CROSS), params=MergeParams(trace=trace), seed=0)
    text = trace_lines(trace)
    assert text.count("\n") == len(trace)
