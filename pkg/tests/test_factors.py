import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hampack.errors import Infeasible, ParameterError
from hampack.factors import (TutteCertificate, f_factor, r_factor, tutte_oracle, tutte_q, tutte_r)
from hampack.graph import Graph, gen_gnp

from conftest import small_graphs


def brute_r_factor_exists(g: Graph, r: int) -> bool:
    """Search over edge subsets, vertex by vertex, for a spanning r-regular subgraph."""
    edges = g.edges()
    need = [r] * g.n
    if any(g.degree(v) < r for v in range(g.n)):
        return False

    def go(i):
        if i == len(edges):
            return all(x == 0 for x in need)
        u, v = edges[i]
        # u's later edges must still be able to fill its need
        if need[u] > 0 and need[v] > 0:
            need[u] -= 1
            need[v] -= 1
            if go(i + 1):
                return True
            need[u] += 1
            need[v] += 1
        left_u = sum(1 for e in edges[i + 1:] if u in e)
        left_v = sum(1 for e in edges[i + 1:] if v in e)
        if need[u] > left_u or need[v] > left_v:
            return False
        return go(i + 1)

    return go(0)


def _is_r_factor(g, h, r):
    return h.n == g.n and h.is_regular(r) and h.edge_set() <= g.edge_set()


def test_c4_and_k5():
    c4 = Graph.cycle(4)
    assert r_factor(c4, 2) == c4
    h = r_factor(Graph.complete(5), 2)
    assert _is_r_factor(Graph.complete(5), h, 2) and h.m == 5


def test_k5_has_twelve_hamilton_cycles():
    # every 2-factor of K5 is a 5-cycle (no 2+3 split without a 2-cycle)
    cycles = {frozenset(zip(p, p[1:] + p[:1])) for p in itertools.permutations(range(5)) if p[0] == 0}
    undirected = {frozenset(tuple(sorted(e)) for e in c) for c in cycles}
    assert len(undirected) == 12
    seen = {r_factor(Graph.complete(5), 2, seed=s).edge_set() for s in range(40)}
    assert seen <= undirected


def test_k4_minus_edge_has_c4():
    g = Graph.complete(4).without_edges([(0, 1)])
    h = r_factor(g, 2)
    assert h.edge_set() == {(0, 2), (0, 3), (1, 2), (1, 3)}


def test_oracle_small_examples():
    assert tutte_oracle(Graph.cycle(4), 2).deficiency >= 0
    two = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert tutte_oracle(two, 2).deficiency >= 0
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    cert = tutte_oracle(p3, 2)
    assert cert.deficiency < 0 and cert.verify(p3)


def test_infeasible_carries_certificate():
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(Infeasible) as err:
        r_factor(p3, 2)
    assert err.value.certificate.deficiency < 0


def test_certificate_quantities_by_hand():
    g = Graph.cycle(5)
    # S = {0}: R = 2*1 = 2; G - S is a path of 4 vertices, r*4 even -> Q = 0
    cert = TutteCertificate.evaluate(g, 2, {0}, ())
    assert (cert.R, cert.Q) == (2, 0)
    assert tutte_r(g, 2, (), {0}) == 2 - 2
    assert tutte_q(g, 1, (), ()) == 1


@given(small_graphs(max_n=7), st.integers(0, 6))
def test_three_routes_agree(g, r):
    if r > max(g.n - 1, 0):
        r = r % g.n if g.n else 0
    brute = brute_r_factor_exists(g, r)
    oracle = tutte_oracle(g, r).deficiency >= 0
    try:
        h = r_factor(g, r, seed=0)
        found = True
        assert _is_r_factor(g, h, r)
    except Infeasible:
        found = False
    assert brute == oracle == found


@given(small_graphs(max_n=9), st.sampled_from(["gadget", "augment"]))
def test_strategies_return_valid_factors(g, strategy):
    d = g.min_degree() if g.n else 0
    f = [d] * g.n
    K = f_factor(g, f, np.random.default_rng(0), strategy)
    if K is not None:
        h = Graph.from_edges(g.n, K)
        assert h.is_regular(d) and h.edge_set() <= g.edge_set()


def test_augment_never_claims_false_positive():
    for s in range(30):
        g = gen_gnp(9, 0.5, s)
        for r in (2, 4):
            K = f_factor(g, [r] * 9, None, "augment")
            if K is not None:
                assert tutte_oracle(g, r).deficiency >= 0


def test_larger_even_floor_factor():
    g = gen_gnp(300, 0.3, 4)
    d = g.min_degree()
    r = d - d % 2
    h = r_factor(g, r, seed=1)
    assert _is_r_factor(g, h, r)


def test_sampled_oracle_finds_obvious_obstruction():
    star = Graph.from_edges(6, [(0, i) for i in range(1, 6)])
    assert tutte_oracle(star, 2, mode="sampled", budget=300).deficiency < 0


def test_parameter_checks():
    with pytest.raises(ParameterError):
        r_factor(Graph.cycle(4), -1)
    with pytest.raises(ParameterError):
        tutte_oracle(Graph.empty(15), 2)
    assert r_factor(Graph.cycle(4), 0).m == 0
