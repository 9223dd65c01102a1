"""Layer schedule: how G0 is split into the main layer, iteration tiers and the reservoir.

The asymptotic formulas are always evaluated and kept in `raw`.  At desk
sizes they are far outside their range (p2 alone usually exceeds p0), so the
default overrides keep only tiers that fit, raise the reservoir to a
workable density and clamp the iteration counts; every change lands in
`overrides`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from hampack.errors import ParameterError, PlanningError
from hampack.rotation import tau0


@dataclass(frozen=True)
class PlanOverrides:
    exact: bool = False                 # strict formulas, no rescaling
    reservoir_multiplier: float = 4.0   # even/odd sublayer ratio (asymptotic value 1e10)
    floor_c: float = 8.0                # a tier needs n*p >= floor_c*ln n per sublayer
    bulk_floor_c: float = 2.0           # n*p0 >= bulk_floor_c*ln n or planning fails
    reservoir_floor_c: float = 2.0      # n*p5 raised to at least this times ln n
    reservoir_cap: float = 0.25         # ... but never above this share of p0
    tiers: int | None = None            # forced tier count (None = automatic)
    tier_p: tuple[float, ...] | None = None
    m_max: int = 2

    @classmethod
    def strict(cls) -> "PlanOverrides":
        return cls(exact=True, reservoir_multiplier=1e10)


@dataclass
class LayerPlan:
    n: int
    p0: float
    p: dict[int, float]                  # 1..5
    u: float
    m: dict[int, int]                    # kept tiers only
    sub: dict[int, list[float]]          # p_(i,j), j = 1..2m_i+1
    raw: dict[str, float]
    overrides: list[dict] = field(default_factory=list)
    tau0: int = 0

    @property
    def tiers(self) -> list[int]:
        return sorted(self.sub)

    def weights(self) -> list[float]:
        """Layer probabilities in split order: p1, then every p_(i,j); p5 is the residual."""
        w = [self.p[1]]
        for i in self.tiers:
            w.extend(self.sub[i])
        return w

    def check(self) -> list[str]:
        problems = []
        total = sum(self.p.values())
        if not math.isclose(total, self.p0, rel_tol=1e-9, abs_tol=1e-12):
            problems.append(f"p1..p5 sum to {total!r}, not p0 = {self.p0!r}")
        for i, subs in self.sub.items():
            if not math.isclose(sum(subs), self.p[i], rel_tol=1e-9, abs_tol=1e-15):
                problems.append(f"tier {i} sublayers sum to {sum(subs)!r}, not {self.p[i]!r}")
        return problems

    def to_dict(self) -> dict:
        return {
            "n": self.n, "p0": self.p0, "p": {str(k): v for k, v in sorted(self.p.items())}, "u": self.u,
            "m": {str(k): v for k, v in sorted(self.m.items())},
            "sub": {str(k): v for k, v in sorted(self.sub.items())},
            "raw": self.raw, "tau0": self.tau0,
        }


def raw_schedule(n: int, p0: float) -> dict[str, float]:
    """The unscaled formulas."""
    ln = math.log(n)
    lnln = math.log(ln)
    p2 = (n * p0) ** 0.75 * ln ** 3.5 / n
    p3 = (n * p2) ** 0.75 * ln ** 3.5 / n
    p4 = (n * p3) ** 0.75 * ln ** 3.5 / n
    p5 = math.sqrt(n * p0 * (1 - p0)) / (n * ln ** 0.75)
    out = {"p2": p2, "p3": p3, "p4": p4, "p5": p5, "p1": p0 - p2 - p3 - p4 - p5, "u": 2 * n * p5}
    for i, pi in ((2, p2), (3, p3), (4, p4)):
        out[f"m{i}"] = 2 * math.log(n * n * pi) / lnln
    return out


def _sublayers(p_i: float, m: int, mult: float) -> list[float]:
    unit = p_i / ((mult + 1) * m + 1)
    return [unit * (mult if j % 2 == 0 else 1.0) for j in range(1, 2 * m + 2)]


def plan_parameters(n: int, p0: float, overrides: PlanOverrides | None = None) -> LayerPlan:
    if not 0 < p0 < 1:
        raise ParameterError("p0 must lie strictly between 0 and 1")
    if n < 4:
        raise ParameterError("need at least 4 vertices")
    ov = overrides or PlanOverrides()
    raw = raw_schedule(n, p0)
    ln = math.log(n)
    notes: list[dict] = []
    if ov.exact:
        if raw["p1"] <= 0:
            raise PlanningError(f"p1 = {raw['p1']:.4g} <= 0 at n={n}, p0={p0}: the schedule needs tier collapse "
                                "(use the default overrides)")
        m = {i: max(1, math.ceil(raw[f"m{i}"])) for i in (2, 3, 4)}
        p = {i: raw[f"p{i}"] for i in range(1, 6)}
        sub = {i: _sublayers(p[i], m[i], ov.reservoir_multiplier) for i in (2, 3, 4)}
        plan = LayerPlan(n, p0, p, raw["u"], m, sub, raw, notes, tau0(n))
        return plan
    if n * p0 < ov.bulk_floor_c * ln:
        raise PlanningError(f"n*p0 = {n * p0:.3g} is below {ov.bulk_floor_c:g} ln n = {ov.bulk_floor_c * ln:.3g}; "
                            "too sparse for any schedule")
    if ov.reservoir_multiplier != 1e10:
        notes.append({"what": "reservoir_multiplier", "formula": 1e10, "used": ov.reservoir_multiplier,
                      "why": "desk-scale sublayer ratio"})
    p5 = raw["p5"]
    want = ov.reservoir_floor_c * ln / n
    if p5 < want:
        p5_new = min(want, ov.reservoir_cap * p0)
        notes.append({"what": "p5", "formula": p5, "used": p5_new, "why": "reservoir raised to a usable density"})
        p5 = p5_new
    # tiers: explicit probabilities, or the formula values if they fit
    cand = list(ov.tier_p) if ov.tier_p is not None else [raw["p2"], raw["p3"], raw["p4"]]
    kept: dict[int, float] = {}
    m: dict[int, int] = {}
    budget = p0 / 2 - p5
    limit = ov.tiers if ov.tiers is not None else 3
    for idx, pi in enumerate(cand[:3]):
        i = idx + 2
        if len(kept) >= limit:
            break
        mi = min(max(1, math.ceil(raw[f"m{i}"])) if raw[f"m{i}"] > 0 else 1, ov.m_max)
        smallest = pi / ((ov.reservoir_multiplier + 1) * mi + 1)
        forced = ov.tiers is not None
        fits = 0 < pi <= budget and n * smallest >= ov.floor_c * ln
        if not fits and not (forced and 0 < pi <= budget):
            break
        kept[i] = pi
        m[i] = mi
        budget -= pi
        if mi != math.ceil(raw[f"m{i}"]):
            notes.append({"what": f"m{i}", "formula": raw[f"m{i}"], "used": mi, "why": "iteration count clamped"})
        if ov.tier_p is not None:
            notes.append({"what": f"p{i}", "formula": raw[f"p{i}"], "used": pi, "why": "explicit tier probability"})
    dropped = [i for i in (2, 3, 4) if i not in kept]
    if dropped:
        notes.append({"what": "tiers", "formula": [2, 3, 4], "used": sorted(kept),
                      "why": f"tiers {dropped} collapsed into the main layer"})
    p = {1: 0.0, 2: kept.get(2, 0.0), 3: kept.get(3, 0.0), 4: kept.get(4, 0.0), 5: p5}
    p[1] = p0 - sum(p[i] for i in (2, 3, 4, 5))
    if p[1] <= 0:
        raise PlanningError(f"p1 = {p[1]:.4g} <= 0 after the reservoir and tiers")
    sub = {i: _sublayers(kept[i], m[i], ov.reservoir_multiplier) for i in kept}
    return LayerPlan(n, p0, p, 2 * n * p5, m, sub, raw, notes, tau0(n))


def overrides_dict(ov: PlanOverrides) -> dict:
    return asdict(ov)
