"""Deterministic pseudorandomness checks and their Monte Carlo frequencies.

Each check returns a ClauseResult.  A "violated" verdict always comes with a
witness that `reevaluate` can recheck; sampled checks can only say
"not-refuted".  Logarithms are natural.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from hampack.errors import ParameterError
from hampack.graph import Graph, gen_gnp
from hampack.rng import child_seed, stream

HOLDS, VIOLATED, NOT_REFUTED = "holds", "violated", "not-refuted"
EXACT_JUMBLED_MAX_N = 22
EXACT_PAIRS_MAX_N = 18
TOL = 1e-9


@dataclass
class ClauseResult:
    name: str
    verdict: str
    mode: str
    params: dict
    witness: dict | None = None
    samples: int = 0
    flags: list[str] = field(default_factory=list)
    parts: list["ClauseResult"] = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def to_dict(self) -> dict:
        return asdict(self)


def default_beta(n: int, p: float) -> float:
    return 2.0 * math.sqrt(n * p * (1 - p))


def g_bound(s: int, t: int, n: int, p: float) -> float:
    """Diagnostic utility: the pair bound used by the expansion estimates."""
    ln = math.log(n)
    return 2 * (s + t) * ln if ln / (s * p) >= 3.5 else 7 * s * (s + t) * p


def h_bound(s: int, n: int, p: float) -> float:
    ln = math.log(n)
    return 2 * s * ln if ln / (s * p) >= 3.5 else 7 * s * s * p


def _adj_masks(g: Graph) -> list[int]:
    masks = [0] * g.n
    for u, v in g.edges():
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def _subset_edge_counts(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """e(S) and |S| for every bitmask S, by adding the top vertex last."""
    n = g.n
    masks = _adj_masks(g)
    e = np.zeros(1 << n, dtype=np.int32)
    size = np.zeros(1 << n, dtype=np.int8)
    for v in range(n):
        lo = np.arange(1 << v, dtype=np.int64)
        lower = masks[v] & ((1 << v) - 1)
        e[(1 << v):(2 << v)] = e[:1 << v] + np.bitwise_count(lo & lower).astype(np.int32)
        size[(1 << v):(2 << v)] = size[:1 << v] + 1
    return e, size


def _bits(mask: int, n: int) -> list[int]:
    return [v for v in range(n) if mask >> v & 1]


def _log_uniform_size(rng: np.random.Generator, lo: int, hi: int) -> int:
    return int(min(hi, max(lo, round(math.exp(rng.uniform(math.log(lo), math.log(hi + 1)))))))


# jumbledness

def jumbled_excess(g: Graph, p: float, beta: float, S: Sequence[int]) -> float:
    s = len(S)
    return abs(g.e_within(S) - p * s * (s - 1) / 2) - beta * s


def pair_excess(g: Graph, p: float, beta: float, S: Sequence[int], T: Sequence[int]) -> float:
    s, t = len(S), len(T)
    return abs(g.e_between(S, T) - p * s * t) - 2 * beta * (s + t)


def check_jumbled(g: Graph, p: float, beta: float | None = None, mode: str = "auto",
                  budget: int = 200, seed: int = 0) -> ClauseResult:
    n = g.n
    if beta is None:
        beta = default_beta(n, p)
    if beta < 0:
        raise ParameterError("beta must be nonnegative")
    params = {"p": p, "beta": beta}
    if mode == "exact" or (mode == "auto" and n <= EXACT_JUMBLED_MAX_N):
        if n > EXACT_JUMBLED_MAX_N:
            raise ParameterError(f"exact jumbled check limited to n <= {EXACT_JUMBLED_MAX_N}")
        e, size = _subset_edge_counts(g)
        s = size.astype(np.float64)
        excess = np.abs(e - p * s * (s - 1) / 2) - beta * s
        k = int(np.argmax(excess))
        if excess[k] > TOL:
            return ClauseResult("jumbled", VIOLATED, "exact", params,
                                {"S": _bits(k, n), "excess": float(excess[k])}, samples=1 << n)
        return ClauseResult("jumbled", HOLDS, "exact", params, samples=1 << n)
    rng = stream(seed, "jumbled")
    classes = max(1, int(math.log2(n)) + 1)
    count = 0
    for k in range(classes):
        lo, hi = 1 << k, min(n, (2 << k) - 1)
        for _ in range(budget):
            s = int(rng.integers(lo, hi + 1))
            S = rng.choice(n, size=s, replace=False).tolist()
            count += 1
            ex = jumbled_excess(g, p, beta, S)
            if ex > TOL:
                return ClauseResult("jumbled", VIOLATED, "sampled", params,
                                    {"S": sorted(S), "excess": ex}, samples=count)
            rest = n - s
            if rest > 0:
                t = _log_uniform_size(rng, 1, rest)
                others = np.setdiff1d(np.arange(n), S)
                T = rng.choice(others, size=t, replace=False).tolist()
                ex = pair_excess(g, p, beta, S, T)
                if ex > TOL:
                    return ClauseResult("jumbled", VIOLATED, "sampled", params,
                                        {"S": sorted(S), "T": sorted(T), "excess": ex, "kind": "pair"},
                                        samples=count)
    return ClauseResult("jumbled", NOT_REFUTED, "sampled", params, samples=count)


# edge-count regimes

def pair_bound(s: int, t: int, n: int, p: float) -> list[tuple[str, float]]:
    """Applicable (clause, bound) pairs for e(S, T) with |S|=s, |T|=t."""
    ln = math.log(n)
    lhs = (1 / s + 1 / t) * ln / p
    out = []
    if lhs >= 3.5:
        out.append(("i", 2 * (s + t) * ln))
    if lhs <= 3.5:
        out.append(("ii", 7 * s * t * p))
    return out


def set_bound(s: int, n: int, p: float) -> list[tuple[str, float]]:
    ln = math.log(n)
    lhs = ln / (s * p)
    out = []
    if lhs >= 1.75:
        out.append(("iii", 2 * s * ln))
    if lhs <= 1.75:
        out.append(("iv", 3.5 * s * s * p))
    return out


def _pair_violation(n, p, s, t, value):
    for clause, bound in pair_bound(s, t, n, p):
        if value > bound + TOL:
            return clause, bound
    return None


def _set_violation(n, p, s, value):
    for clause, bound in set_bound(s, n, p):
        if value > bound + TOL:
            return clause, bound
    return None


def _top_t_check(g: Graph, p: float, S: list[int]):
    """Worst T for a fixed S: the t vertices outside S with most neighbours in S."""
    n = g.n
    counts = np.zeros(n, dtype=np.int64)
    for v in S:
        counts[g.sorted_neighbors(v)] += 1
    counts[S] = -1
    order = np.argsort(-counts, kind="stable")
    cum = np.cumsum(counts[order])
    s = len(S)
    for t in range(1, n - s + 1):
        hit = _pair_violation(n, p, s, t, int(cum[t - 1]))
        if hit:
            return {"S": sorted(S), "T": sorted(order[:t].tolist()), "clause": hit[0],
                    "value": int(cum[t - 1]), "bound": hit[1]}
    return None


def check_edge_bounds(g: Graph, p: float, mode: str = "auto", budget: int = 200, seed: int = 0,
                      max_set_size: int | None = None) -> ClauseResult:
    """Clauses (i)-(iv) on e(S, T) and e(S).

    Exact mode (n <= 18) visits every S; for each S and t the largest e(S, T)
    over |T| = t is the sum of the t largest |N(v) & S| outside S, so no
    enumeration of T is needed.  Sweep mode covers every pair with
    |S|, |T| <= max_set_size, settling sizes analytically when even a complete
    graph could not break the bound.
    """
    n = g.n
    if not 0 < p < 1:
        raise ParameterError("need 0 < p < 1")
    params = {"p": p}
    if mode == "sweep":
        return _sweep_edge_bounds(g, p, max_set_size or 4, params)
    if mode == "exact" or (mode == "auto" and n <= EXACT_PAIRS_MAX_N):
        if n > EXACT_PAIRS_MAX_N:
            raise ParameterError(f"exact edge-bound check limited to n <= {EXACT_PAIRS_MAX_N}")
        e, size = _subset_edge_counts(g)
        for S in range(1, 1 << n):
            hit = _set_violation(n, p, int(size[S]), int(e[S]))
            if hit:
                return ClauseResult("edge_bounds", VIOLATED, "exact", params,
                                    {"S": _bits(S, n), "clause": hit[0], "value": int(e[S]), "bound": hit[1]},
                                    samples=1 << n)
        masks = np.array(_adj_masks(g), dtype=np.int64)
        allS = np.arange(1 << n, dtype=np.int64)
        dS = np.stack([np.bitwise_count(allS & masks[v]).astype(np.int16) for v in range(n)], axis=1)
        inS = np.stack([(allS >> v) & 1 for v in range(n)], axis=1).astype(bool)
        dS[inS] = -1
        dS = -np.sort(-dS, axis=1)
        cum = np.cumsum(dS, axis=1)
        for t in range(1, n):
            valid = (size.astype(np.int64) >= 1) & (size.astype(np.int64) <= n - t)
            for s in range(1, n - t + 1):
                rows = np.flatnonzero(valid & (size == s))
                if not len(rows):
                    continue
                worst = int(rows[np.argmax(cum[rows, t - 1])])
                value = int(cum[worst, t - 1])
                hit = _pair_violation(n, p, s, t, value)
                if hit:
                    w = _top_t_check(g, p, _bits(worst, n))
                    return ClauseResult("edge_bounds", VIOLATED, "exact", params, w, samples=1 << n)
        return ClauseResult("edge_bounds", HOLDS, "exact", params, samples=1 << n)
    rng = stream(seed, "edge_bounds")
    for k in range(budget):
        s = _log_uniform_size(rng, 1, n)
        S = rng.choice(n, size=s, replace=False).tolist()
        hit = _set_violation(n, p, s, g.e_within(S))
        if hit:
            return ClauseResult("edge_bounds", VIOLATED, "sampled", params,
                                {"S": sorted(S), "clause": hit[0], "value": g.e_within(S), "bound": hit[1]},
                                samples=k + 1)
        w = _top_t_check(g, p, S)
        if w:
            return ClauseResult("edge_bounds", VIOLATED, "sampled", params, w, samples=k + 1)
    return ClauseResult("edge_bounds", NOT_REFUTED, "sampled", params, samples=budget)


def _sweep_edge_bounds(g: Graph, p: float, k: int, params: dict) -> ClauseResult:
    from itertools import combinations
    n = g.n
    enumerated = 0
    for s in range(1, min(k, n) + 1):
        need_set = any(s * (s - 1) / 2 > b for _, b in set_bound(s, n, p))
        need_pair = any(s * t > b for t in range(1, min(k, n - s) + 1) for _, b in pair_bound(s, t, n, p))
        if not (need_set or need_pair):
            continue
        if math.comb(n, s) > 2_000_000:
            return ClauseResult("edge_bounds", NOT_REFUTED, "sampled", params,
                                flags=[f"size {s} too many subsets to sweep"], samples=enumerated)
        for S in combinations(range(n), s):
            S = list(S)
            enumerated += 1
            if need_set:
                hit = _set_violation(n, p, s, g.e_within(S))
                if hit:
                    return ClauseResult("edge_bounds", VIOLATED, "exact", params,
                                        {"S": S, "clause": hit[0], "bound": hit[1]}, samples=enumerated)
            if need_pair:
                w = _top_t_check(g, p, S)
                if w and len(w["T"]) <= k:
                    return ClauseResult("edge_bounds", VIOLATED, "exact", params, w, samples=enumerated)
    return ClauseResult("edge_bounds", HOLDS, "exact", {**params, "max_set_size": k}, samples=enumerated,
                        flags=["restricted to small sets"])


# degrees

def check_degree_window(g: Graph, p: float, np_value: float | None = None) -> ClauseResult:
    """The three degree inequalities, each reported as its own part.

    `np_value` replaces n*p when the caller works with a regular subgraph of
    degree r_G and wants the window at r_G.
    """
    n = g.n
    if not 0 < p <= 1:
        raise ParameterError("need 0 < p <= 1")
    mean = n * p if np_value is None else float(np_value)
    ln = math.log(n) if n > 1 else 0.0
    delta, Delta = g.min_degree(), g.max_degree()
    lower = mean - 2 * math.sqrt(mean * ln)
    upper = mean - 200 * math.sqrt(mean * (1 - p))
    top = mean + 2 * math.sqrt(mean * ln)
    parts = [
        ClauseResult("degree_window.lower", HOLDS if delta >= lower - TOL else VIOLATED, "exact",
                     {"bound": lower, "min_degree": delta},
                     None if delta >= lower - TOL else {"vertex": g.argmin_degree()}),
        ClauseResult("degree_window.upper", HOLDS if delta <= upper + TOL else VIOLATED, "exact",
                     {"bound": upper, "min_degree": delta},
                     None if delta <= upper + TOL else {"vertex": g.argmin_degree()},
                     flags=["asymptotic-regime"]),
        ClauseResult("degree_window.max", HOLDS if Delta <= top + TOL else VIOLATED, "exact",
                     {"bound": top, "max_degree": Delta},
                     None if Delta <= top + TOL else {"vertex": int(np.argmax(g.degrees()))}),
    ]
    verdict = VIOLATED if any(pt.violated for pt in parts) else HOLDS
    flags = [f"{pt.name} fails (asymptotic-regime)" for pt in parts if pt.violated and pt.flags]
    return ClauseResult("degree_window", verdict, "exact", {"p": p, "np": mean}, parts=parts, flags=flags)


def strongly_2_jumping_from_degrees(degrees: Sequence[int], log2n: float | None = None) -> ClauseResult:
    """Prefix check: the least average degree over |T| = k is the mean of the k smallest."""
    degs = np.asarray(degrees, dtype=np.int64)
    n = len(degs)
    if log2n is None:
        log2n = math.log(n) ** 2 if n > 1 else 0.0
    order = np.argsort(degs, kind="stable")
    prefix = np.cumsum(degs[order])
    delta = int(degs[order[0]]) if n else 0
    for k in range(1, n + 1):
        need = delta + min(k - 1, log2n)
        if prefix[k - 1] < need * k - TOL:
            return ClauseResult("strongly_2_jumping", VIOLATED, "exact", {"log2n": log2n},
                                {"T": sorted(order[:k].tolist()), "k": k, "mean": float(prefix[k - 1] / k), "need": float(need)})
    return ClauseResult("strongly_2_jumping", HOLDS, "exact", {"log2n": log2n})


def check_strongly_2_jumping(g: Graph, log2n: float | None = None) -> ClauseResult:
    return strongly_2_jumping_from_degrees(g.degrees(), log2n)


def u_jumping_from_degrees(degrees: Sequence[int], u: int) -> ClauseResult:
    if u < 0:
        raise ParameterError("u must be nonnegative")
    degs = np.asarray(degrees, dtype=np.int64)
    x0 = int(np.argmin(degs))
    params = {"u": u, "x0": x0}
    if len(degs) < 2:
        return ClauseResult("u_jumping", HOLDS, "exact", params)
    order = np.argsort(degs, kind="stable")
    second = int(order[1])
    if degs[second] >= degs[x0] + u and (u == 0 or degs[second] > degs[x0]):
        return ClauseResult("u_jumping", HOLDS, "exact", params)
    return ClauseResult("u_jumping", VIOLATED, "exact", params,
                        {"vertex": second, "degree": int(degs[second]), "need": int(degs[x0]) + u})


def check_u_jumping(g: Graph, u: int) -> ClauseResult:
    return u_jumping_from_degrees(g.degrees(), u)


def check_simplicity(g: Graph) -> ClauseResult:
    problems = g.audit()
    if problems:
        return ClauseResult("simplicity", VIOLATED, "exact", {}, {"problems": problems[:10]})
    return ClauseResult("simplicity", HOLDS, "exact", {})


def reevaluate(g: Graph, result: ClauseResult) -> bool:
    """True when the stored witness still shows a violation."""
    w = result.witness
    if result.verdict != VIOLATED or w is None:
        return False
    p = result.params.get("p")
    if result.name == "jumbled":
        if w.get("kind") == "pair":
            return pair_excess(g, p, result.params["beta"], w["S"], w["T"]) > TOL
        return jumbled_excess(g, p, result.params["beta"], w["S"]) > TOL
    if result.name == "edge_bounds":
        n = g.n
        if "T" in w:
            return _pair_violation(n, p, len(w["S"]), len(w["T"]), g.e_between(w["S"], w["T"])) is not None
        return _set_violation(n, p, len(w["S"]), g.e_within(w["S"])) is not None
    if result.name == "strongly_2_jumping":
        T = w["T"]
        return sum(g.degree(v) for v in T) < w["need"] * len(T) - TOL
    if result.name == "u_jumping":
        return g.degree(w["vertex"]) < w["need"] or (result.params["u"] > 0 and g.degree(w["vertex"]) == g.min_degree())
    if result.name.startswith("degree_window"):
        return any(reevaluate(g, part) for part in result.parts) if result.parts else True
    return True


# Monte Carlo

CLAUSES = ("degree_window", "degree_window.lower", "degree_window.upper", "degree_window.max",
           "simplicity", "strongly_2_jumping", "jumbled", "edge_bounds", "u_jumping")


def run_clause(g: Graph, p: float, clause: str, seed: int = 0) -> ClauseResult:
    name, _, arg = clause.partition(":")
    if name.startswith("degree_window"):
        res = check_degree_window(g, p)
        if name == "degree_window":
            return res
        for part in res.parts:
            if part.name == name:
                return part
    if name == "simplicity":
        return check_simplicity(g)
    if name == "strongly_2_jumping":
        return check_strongly_2_jumping(g)
    if name == "u_jumping":
        return check_u_jumping(g, int(arg or 0))
    if name == "jumbled":
        return check_jumbled(g, p, seed=seed)
    if name == "edge_bounds":
        return check_edge_bounds(g, p, seed=seed)
    raise ParameterError(f"unknown clause {clause!r}; choose from {', '.join(CLAUSES)}")


@dataclass
class MCReport:
    clause: str
    n: int
    p: float
    trials: int
    seed: int
    passes: int
    frequency: float
    wilson: tuple[float, float]
    outcomes: list[str]

    def to_dict(self) -> dict:
        return asdict(self)


def _trial(args) -> list[str]:
    n, p, clauses, trial_seed = args
    g = gen_gnp(n, p, trial_seed)
    return [run_clause(g, p, c, seed=trial_seed).verdict for c in clauses]


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HAMPACK_THREADS", "1")))
    except ValueError:
        return 1


def wilson_interval(passes: int, trials: int) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(passes, trials, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def mc_frequencies(n: int, p: float, trials: int, clauses: Sequence[str], seed: int,
                   threads: int | None = None) -> dict[str, MCReport]:
    """Pass frequency of each clause, all evaluated on the same `trials` samples of G(n, p).

    Trial i uses a seed drawn from the ("mc/i") stream, so results do not
    depend on the worker count or on which other clauses ride along.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    clauses = tuple(clauses)
    jobs = [(n, p, clauses, child_seed(stream(seed, f"mc/{i}"))) for i in range(trials)]
    threads = threads or thread_count()
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_trial, jobs))
    else:
        rows = [_trial(j) for j in jobs]
    out = {}
    for k, clause in enumerate(clauses):
        outcomes = [r[k] for r in rows]
        passes = sum(1 for o in outcomes if o != VIOLATED)
        out[clause] = MCReport(clause, n, p, trials, seed, passes, passes / trials,
                               wilson_interval(passes, trials), outcomes)
    return out


def mc_frequency(n: int, p: float, trials: int, clause: str, seed: int, threads: int | None = None) -> MCReport:
    """Pass frequency of one clause over `trials` independent G(n, p) samples."""
    return mc_frequencies(n, p, trials, [clause], seed, threads)[clause]
