import itertools
import math

import pytest
from hypothesis import given, strategies as st

from hampack.graph import Graph, gen_gnp
from hampack.pseudo import (HOLDS, NOT_REFUTED, VIOLATED, check_degree_window, check_edge_bounds,
                            check_jumbled, check_simplicity, check_strongly_2_jumping, check_u_jumping,
                            jumbled_excess, mc_frequency, pair_bound, reevaluate, run_clause,
                            strongly_2_jumping_from_degrees, u_jumping_from_degrees, wilson_interval)

from conftest import small_graphs


def brute_strongly_2_jumping(g: Graph) -> bool:
    n = g.n
    log2n = math.log(n) ** 2 if n > 1 else 0.0
    delta = g.min_degree()
    for k in range(1, n + 1):
        need = delta + min(k - 1, log2n)
        for T in itertools.combinations(range(n), k):
            if sum(g.degree(v) for v in T) < need * k - 1e-9:
                return False
    return True


def brute_jumbled(g: Graph, p: float, beta: float) -> bool:
    return all(jumbled_excess(g, p, beta, S) <= 1e-9
               for k in range(g.n + 1) for S in itertools.combinations(range(g.n), k))


def test_c5_jumbled_thresholds():
    # the worst set is an edge: e = 1 against 0.4 expected, slack 0.6 = beta * 2
    c5 = Graph.cycle(5)
    assert check_jumbled(c5, 0.4, 0.3).verdict == HOLDS
    r = check_jumbled(c5, 0.4, 0.29)
    assert r.verdict == VIOLATED and r.witness["S"] == [0, 1]
    r = check_jumbled(c5, 0.4, 0.19)
    assert r.verdict == VIOLATED and r.witness["S"] == [0, 1, 2]
    # the whole vertex set alone would allow beta = 0.2
    assert jumbled_excess(c5, 0.4, 0.2, range(5)) <= 1e-12


def test_k4_exactly_jumbled():
    assert check_jumbled(Graph.complete(4), 1.0, 0.0).verdict == HOLDS


@given(small_graphs(max_n=8), st.floats(0.05, 0.95), st.floats(0.0, 1.5))
def test_exact_jumbled_vs_enumeration(g, p, beta):
    r = check_jumbled(g, p, beta, mode="exact")
    assert (r.verdict == HOLDS) == brute_jumbled(g, p, beta)
    if r.verdict == VIOLATED:
        assert reevaluate(g, r)


def test_sampled_jumbled_not_refuted():
    r = check_jumbled(gen_gnp(500, 0.3, 2), 0.3, budget=200)
    assert r.verdict == NOT_REFUTED and r.mode == "sampled"


def test_sampled_jumbled_catches_wrong_density():
    g = gen_gnp(200, 0.5, 3)
    r = check_jumbled(g, 0.1, budget=200)
    assert r.verdict == VIOLATED and reevaluate(g, r)


def test_edge_bounds_examples():
    assert check_edge_bounds(Graph.empty(12), 0.3).verdict == HOLDS
    assert [c for c, _ in pair_bound(1, 1, 10**6, 1e-4)] == ["i"]
    assert 1 <= pair_bound(1, 1, 10**6, 1e-4)[0][1] == 4 * math.log(10**6)
    r = check_edge_bounds(gen_gnp(200, 0.4, 1), 0.4, mode="sweep", max_set_size=4)
    assert r.verdict == HOLDS


def brute_edge_bounds(g: Graph, p: float) -> bool:
    from hampack.pseudo import _pair_violation, _set_violation
    n = g.n
    verts = range(n)
    for s in range(1, n + 1):
        for S in itertools.combinations(verts, s):
            if _set_violation(n, p, s, g.e_within(S)):
                return False
            rest = [v for v in verts if v not in S]
            for t in range(1, len(rest) + 1):
                for T in itertools.combinations(rest, t):
                    if _pair_violation(n, p, s, t, g.e_between(S, T)):
                        return False
    return True


@given(small_graphs(min_n=2, max_n=6), st.floats(0.05, 0.9))
def test_exact_edge_bounds_vs_enumeration(g, p):
    r = check_edge_bounds(g, p, mode="exact")
    assert (r.verdict == HOLDS) == brute_edge_bounds(g, p)
    if r.verdict == VIOLATED:
        assert reevaluate(g, r)


def _circulant(n, offsets):
    return Graph.from_edges(n, {tuple(sorted((v, (v + d) % n))) for v in range(n) for d in offsets})


def test_degree_window_regular_12():
    g = _circulant(12, (1, 2, 6))
    assert g.is_regular(5)
    r = check_degree_window(g, 0.5)
    parts = {pt.name: pt for pt in r.parts}
    assert parts["degree_window.lower"].verdict == HOLDS
    assert parts["degree_window.lower"].params["bound"] == pytest.approx(6 - 2 * math.sqrt(6 * math.log(12)))
    assert parts["degree_window.upper"].verdict == VIOLATED
    assert "asymptotic-regime" in parts["degree_window.upper"].flags
    assert parts["degree_window.max"].verdict == HOLDS


def test_degree_window_complete():
    r = check_degree_window(Graph.complete(9), 1.0)
    assert r.verdict == HOLDS
    assert r.parts[1].params["bound"] == 9


def test_strongly_2_jumping_examples():
    assert check_strongly_2_jumping(Graph.cycle(7)).verdict == VIOLATED
    r = check_strongly_2_jumping(Graph.cycle(7))
    assert r.witness["k"] == 2
    r = strongly_2_jumping_from_degrees([2, 4, 4, 5], 3)
    assert r.verdict == VIOLATED and r.witness["T"] == [0, 1, 2]
    assert r.witness["mean"] == pytest.approx(10 / 3)
    assert strongly_2_jumping_from_degrees([2, 5, 7, 9], 3).verdict == HOLDS


@given(small_graphs(max_n=9))
def test_strongly_2_jumping_vs_brute(g):
    r = check_strongly_2_jumping(g)
    assert (r.verdict == HOLDS) == brute_strongly_2_jumping(g)
    if r.verdict == VIOLATED:
        assert reevaluate(g, r)


def test_u_jumping_examples():
    star = Graph.from_edges(6, [(0, i) for i in range(1, 6)])
    assert check_u_jumping(star, 0).verdict == HOLDS
    assert check_u_jumping(star, 1).verdict == VIOLATED
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert check_u_jumping(p3, 1).verdict == VIOLATED
    r = u_jumping_from_degrees([3, 7, 8, 9], 4)
    assert r.verdict == HOLDS and r.params["x0"] == 0
    assert u_jumping_from_degrees([3, 7, 8, 9], 5).verdict == VIOLATED


@given(st.lists(st.integers(0, 20), min_size=1, max_size=12), st.integers(0, 10))
def test_u_jumping_monotone(degs, u):
    if u_jumping_from_degrees(degs, u).verdict == HOLDS:
        assert all(u_jumping_from_degrees(degs, v).verdict == HOLDS for v in range(u + 1))


def test_simplicity():
    assert check_simplicity(gen_gnp(30, 0.5, 0)).verdict == HOLDS


def test_wilson_interval_by_hand():
    z = 1.959963984540054
    k, n = 45, 50
    ph = k / n
    centre = (ph + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    lo, hi = wilson_interval(k, n)
    assert lo == pytest.approx(centre - half) and hi == pytest.approx(centre + half)


def test_mc_deterministic_and_thread_free():
    a = mc_frequency(120, 0.5, 6, "degree_window.lower", seed=4, threads=1)
    b = mc_frequency(120, 0.5, 6, "degree_window.lower", seed=4, threads=2)
    assert a == b
    assert mc_frequency(60, 0.5, 5, "simplicity", seed=1).frequency == 1.0


def test_run_clause_unknown():
    with pytest.raises(ValueError):
        run_clause(Graph.cycle(4), 0.5, "nonsense")
