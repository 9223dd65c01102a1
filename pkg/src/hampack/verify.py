"""Independent check of a packing against the input graph.

Only Graph is used here; the packing may be a Packing object or the decoded
JSON dictionary, so a saved result can be audited without rerunning anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from hampack.graph import Graph


@dataclass
class VerifyReport:
    ok: bool
    complete: bool
    target_cycles: int
    cycles: int
    errors: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "complete": self.complete, "target_cycles": self.target_cycles,
                "cycles": self.cycles, "errors": self.errors}


def _field(packing: Any, name: str, default=None):
    if isinstance(packing, Mapping):
        return packing.get(name, default)
    return getattr(packing, name, default)


def verify_packing(G: Graph, packing: Any) -> VerifyReport:
    """Audit cycles and matching; `ok` means no structural error, `complete` adds the counts."""
    n = G.n
    cycles = [list(map(int, c)) for c in (_field(packing, "cycles") or [])]
    matching = [tuple(map(int, e)) for e in (_field(packing, "matching") or [])]
    x0 = _field(packing, "x0")
    delta = G.min_degree() if n else 0
    errors: list[dict] = []
    owner: dict[tuple[int, int], str] = {}

    def claim(u: int, v: int, who: str) -> None:
        e = (u, v) if u < v else (v, u)
        if e in owner:
            errors.append({"check": "disjoint", "edge": list(e), "first": owner[e], "second": who})
        else:
            owner[e] = who

    for k, cyc in enumerate(cycles):
        name = f"cycle {k}"
        seen = set()
        for v in cyc:
            if not 0 <= v < n:
                errors.append({"check": "range", "where": name, "vertex": v})
            elif v in seen:
                errors.append({"check": "simple", "where": name, "vertex": v})
            seen.add(v)
        missing = sorted(set(range(n)) - seen)
        if missing:
            errors.append({"check": "spanning", "where": name, "vertex": missing[0], "missing": len(missing)})
        if len(cyc) < 3:
            errors.append({"check": "length", "where": name, "length": len(cyc)})
            continue
        for i in range(len(cyc)):
            u, v = cyc[i], cyc[(i + 1) % len(cyc)]
            if not (0 <= u < n and 0 <= v < n) or u == v:
                continue
            if not G.has_edge(u, v):
                errors.append({"check": "edge", "where": name, "edge": [min(u, v), max(u, v)]})
            claim(u, v, name)
    covered = set()
    for u, v in matching:
        if not (0 <= u < n and 0 <= v < n) or u == v or not G.has_edge(u, v):
            errors.append({"check": "edge", "where": "matching", "edge": [u, v]})
            continue
        if u in covered or v in covered:
            errors.append({"check": "matching", "edge": [u, v]})
        covered.update((u, v))
        claim(u, v, "matching")
    target = delta // 2
    if len(cycles) > target:
        errors.append({"check": "count", "cycles": len(cycles), "want": target})
    if delta % 2 and len(matching) != n // 2:
        errors.append({"check": "matching_size", "size": len(matching), "want": n // 2})
    if x0 is not None:
        x0 = int(x0)
        if not 0 <= x0 < n or G.degree(x0) != delta:
            errors.append({"check": "x0_degree", "x0": x0})
        elif len(cycles) == target:
            for w in sorted(G.neighbors(x0)):
                e = (x0, w) if x0 < w else (w, x0)
                if e not in owner:
                    errors.append({"check": "x0_cover", "edge": list(e)})
                    break
    ok = not any(e["check"] not in SOFT for e in errors)
    complete = ok and len(cycles) == target and not errors
    return VerifyReport(ok, complete, target, len(cycles), errors)


# failures that only mean "not finished"
SOFT = frozenset({"matching_size", "x0_cover"})
