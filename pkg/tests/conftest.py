from __future__ import annotations

import itertools

from hypothesis import HealthCheck, settings, strategies as st

from hampack.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def small_graphs(draw, min_n: int = 1, max_n: int = 10) -> Graph:
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k])


def cycle_edges(cyc) -> list[tuple[int, int]]:
    k = len(cyc)
    return [tuple(sorted((cyc[i], cyc[(i + 1) % k]))) for i in range(k)]


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(__import__("sys").modules.items()) if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "REPORT", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
