import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hampack.errors import Infeasible, ParameterError
from hampack.factors import edge_coloring
from hampack.flow import bipartite_regular_subgraph
from hampack.graph import BipartiteGraph, Graph, gen_gnp
from hampack.matching import (bipartite_max_matching, bipartite_perfect_matching, gallai_edmonds,
                              matching_edges, max_matching, odd_components, optimal_matching_covering,
                              perfect_matching)

from conftest import small_graphs


def brute_matching_number(g: Graph) -> int:
    edges = g.edges()
    best = 0

    def go(i, used, size):
        nonlocal best
        best = max(best, size)
        if size + (g.n - len(used)) // 2 <= best:
            return
        for j in range(i, len(edges)):
            u, v = edges[j]
            if u not in used and v not in used:
                go(j + 1, used | {u, v}, size + 1)

    go(0, frozenset(), 0)
    return best


def _size(mate):
    return sum(1 for m in mate if m != -1) // 2


def _is_matching(g, mate):
    return all(m == -1 or (mate[m] == v and g.has_edge(v, m)) for v, m in enumerate(mate))


@given(small_graphs(max_n=8))
def test_max_matching_vs_enumeration(g):
    mate = max_matching(g)
    assert _is_matching(g, mate)
    assert _size(mate) == brute_matching_number(g)


@given(small_graphs(max_n=10))
def test_tutte_berge_certificate(g):
    mate = max_matching(g)
    _, A = gallai_edmonds(g, mate)
    # Tutte-Berge: deficiency equals o(G - A) - |A|
    assert g.n - 2 * _size(mate) == odd_components(g, A) - len(A)


def test_max_matching_vs_networkx_larger():
    for s in range(10):
        g = gen_gnp(60, 0.08, s)
        ref = nx.max_weight_matching(nx.Graph(g.edges()), maxcardinality=True)
        assert _size(max_matching(g)) == len(ref)


def test_perfect_matching_c6():
    m = perfect_matching(Graph.cycle(6))
    assert m.edges in ({(0, 1), (2, 3), (4, 5)}, {(1, 2), (3, 4), (0, 5)})


def test_perfect_matching_two_triangles():
    two = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    with pytest.raises(Infeasible) as err:
        perfect_matching(two)
    assert err.value.certificate == frozenset()
    assert err.value.odd_components == 2


def test_perfect_matching_odd_n():
    with pytest.raises(ParameterError):
        perfect_matching(Graph.complete(5))


def test_covering_matching_k4_c5():
    for x in range(4):
        m = optimal_matching_covering(Graph.complete(4), x)
        assert m.size == 2 and x in m.covered
    for x in range(5):
        m = optimal_matching_covering(Graph.cycle(5), x)
        assert m.size == 2 and x in m.covered and m.is_matching()


def test_covering_matching_star_fails():
    star = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    with pytest.raises(Infeasible):
        optimal_matching_covering(star, 0)


def _bip(nl, nr, edges):
    adj = [[] for _ in range(nl)]
    for i, j in edges:
        adj[i].append(j)
    return BipartiteGraph(nl, nr, adj)


@st.composite
def bipartites(draw, max_n=7):
    nl = draw(st.integers(1, max_n))
    nr = draw(st.integers(1, max_n))
    pairs = list(itertools.product(range(nl), range(nr)))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return _bip(nl, nr, [e for e, k in zip(pairs, keep) if k])


@given(bipartites())
def test_hopcroft_karp_vs_networkx(b):
    ml, mr = bipartite_max_matching(b)
    size = sum(1 for j in ml if j != -1)
    assert all(j == -1 or mr[j] == i for i, j in enumerate(ml))
    G = nx.Graph()
    G.add_nodes_from(("L", i) for i in range(b.n_left))
    G.add_nodes_from(("R", j) for j in range(b.n_right))
    G.add_edges_from((("L", i), ("R", j)) for i, j in b.edges())
    ref = nx.bipartite.hopcroft_karp_matching(G, top_nodes=[("L", i) for i in range(b.n_left)])
    assert size == len(ref) // 2


def test_unique_matching_any_seed():
    b = _bip(3, 3, [(0, 1), (1, 2), (2, 0)])
    assert {tuple(bipartite_perfect_matching(b, s)) for s in range(20)} == {(1, 2, 0)}


def test_k22_both_matchings_seen():
    b = _bip(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert {tuple(bipartite_perfect_matching(b, s)) for s in range(100)} == {(0, 1), (1, 0)}


def test_isolated_left_vertex_hall_set():
    b = _bip(2, 2, [(1, 0), (1, 1)])
    with pytest.raises(Infeasible) as err:
        bipartite_perfect_matching(b)
    S = err.value.certificate
    assert 0 in S and len({j for i in S for j in b.adj[i]}) < len(S)


def test_regular_subgraph_examples():
    one = _bip(3, 3, [(0, 1), (1, 2), (2, 0)])
    assert sorted(bipartite_regular_subgraph(one, 1).edges()) == sorted(one.edges())
    k33 = _bip(3, 3, list(itertools.product(range(3), range(3))))
    sub = bipartite_regular_subgraph(k33, 2)
    assert sub.left_degrees() == [2] * 3 and sub.right_degrees() == [2] * 3
    minus = _bip(3, 3, [(i, j) for i, j in itertools.product(range(3), range(3)) if i != j])
    assert sorted(bipartite_regular_subgraph(minus, 2).edges()) == sorted(minus.edges())


def test_regular_subgraph_cut_witness():
    b = _bip(2, 2, [(0, 0), (1, 0), (1, 1)])
    with pytest.raises(Infeasible) as err:
        bipartite_regular_subgraph(b, 2)
    assert err.value.flow < 4


def _check_coloring(g, classes):
    seen = [e for m in classes for e in m.edges]
    assert sorted(seen) == sorted(g.edges())
    assert all(m.is_matching() for m in classes)
    assert len(classes) <= g.max_degree() + 1


def test_coloring_examples():
    c5 = edge_coloring(Graph.cycle(5))
    _check_coloring(Graph.cycle(5), c5)
    assert len(c5) == 3
    k4 = edge_coloring(Graph.complete(4))
    _check_coloring(Graph.complete(4), k4)
    assert len(k4) == 3 and all(m.size == 2 for m in k4)
    m = Graph.from_edges(6, [(0, 1), (2, 3)])
    assert len(edge_coloring(m)) == 1


@given(small_graphs(max_n=12))
def test_coloring_vizing(g):
    _check_coloring(g, edge_coloring(g))


def test_matching_edges_helper():
    assert matching_edges([1, 0, 3, 2, -1]) == [(0, 1), (2, 3)]
    assert np.all(np.array(max_matching(Graph.empty(3))) == -1)
