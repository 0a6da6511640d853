"""Inequality validator: evaluates each energy bound on one graph with signed slacks.

A report's ``slack`` is ``lhs - rhs`` oriented so the bound holds iff
``slack >= -tol``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .game import PASS, FAIL, SKIPPED, coalition_values, subset_sums
from .graph import Graph, SizeCapError, mask_to_vertices
from .spectral import EnergyProfile, vertex_energy_profiles
from .tolerances import tol_core

MAX_BOUNDS_N = 16
MAX_EDGE_CUT_N = 12


class BoundId(str, Enum):
    SUBGRAPH_INEQUALITY = "subgraph-inequality"
    EDGE_CUT = "edge-cut"
    SCHATTEN_MONOTONICITY = "schatten-monotonicity"
    NORMALIZED_MONOTONICITY = "normalized-monotonicity"
    EDGE_COUNT_BOUND = "edge-count-bound"
    BIPARTITE_BOUND = "bipartite-bound"
    BIPARTITE_SPLIT = "bipartite-split"
    VERTEX_HOLDER = "vertex-holder"
    DEGREE_BOUND = "degree-bound"
    ADJACENT_PAIR = "adjacent-pair"
    PATH_ORDERING = "path-ordering"
    PATH_ORDERING_STRICT = "path-ordering-strict"


@dataclass(frozen=True)
class BoundReport:
    bound_id: BoundId
    status: str
    slack: float | None
    params: dict = field(default_factory=dict)
    witness: dict | None = None
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.status != FAIL

    def as_dict(self) -> dict:
        return {
            "bound_id": self.bound_id.value,
            "status": self.status,
            "holds": self.holds,
            "slack": self.slack,
            "params": self.params,
            "witness": self.witness,
            "reason": self.reason,
        }


def _report(bound_id: BoundId, slack: float, params: dict, witness: dict | None, tol: float) -> BoundReport:
    return BoundReport(bound_id, PASS if slack >= -tol else FAIL, float(slack), params, witness)


def _skip(bound_id: BoundId, params: dict, reason: str) -> BoundReport:
    return BoundReport(bound_id, SKIPPED, None, params, None, reason)


def is_bipartite(g: Graph) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """BFS 2-coloring; the lowest vertex of each component gets color 0."""
    color = [-1] * g.n
    for start in range(g.n):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in g.neighbors(v):
                if color[u] < 0:
                    color[u] = 1 - color[v]
                    queue.append(u)
                elif color[u] == color[v]:
                    return None
    return (tuple(v for v in range(g.n) if color[v] == 0),
            tuple(v for v in range(g.n) if color[v] == 1))


def is_labeled_path(g: Graph) -> bool:
    return g.n >= 1 and g.edges == frozenset((i, i + 1) for i in range(g.n - 1))


def _pairs(p_grid: Sequence[float]) -> list[tuple[float, float]]:
    return list(itertools.combinations(sorted(set(p_grid) | {2.0}), 2))


def path_chain(n: int) -> list[tuple[int, int]]:
    """Ordered vertex pairs ``(a, b)`` (0-based) with ``E(a) < E(b)`` expected on ``path(n)``.

    Covers the odd/even chain for every ``k < n // 4`` plus: the ends are the
    minimum and the second vertices the maximum.
    """
    pairs: set[tuple[int, int]] = set()
    for k in range(n // 4):
        # 1-based: v1 < v3 < ... < v_{2k+1} < v_{2k+2} < v_{2k} < ... < v4 < v2
        chain = list(range(1, 2 * k + 2, 2)) + [2 * k + 2] + list(range(2 * k, 1, -2))
        pairs.update((a - 1, b - 1) for a, b in zip(chain, chain[1:]))
    if n >= 3:
        ends, seconds = {0, n - 1}, {1, n - 2}
        for v in range(n):
            if v not in ends:
                pairs.add((0, v))
            if v not in seconds:
                pairs.add((v, 1))
    return sorted(pairs)


def check_path_ordering(profile: EnergyProfile, tol: float | None = None) -> list[BoundReport]:
    tol = tol_core() if tol is None else tol
    e = profile.per_vertex
    n = len(e)
    chain = path_chain(n)
    if not chain:
        return [_skip(BoundId.PATH_ORDERING, {"n": n}, "no ordering asserted for n < 3")]
    diffs = [(e[b] - e[a], a, b) for a, b in chain]
    gap, a, b = min(diffs)
    witness = {"lower": a, "upper": b}
    return [
        _report(BoundId.PATH_ORDERING, gap, {"n": n}, witness, tol),
        # holds iff every link is separated by at least 10 * tol
        _report(BoundId.PATH_ORDERING_STRICT, gap - 11 * tol, {"n": n, "separation": 10 * tol}, witness, tol),
    ]


def run_all_bounds(g: Graph, p_grid: Sequence[float] = (1.0, 1.5, 2.0, 3.0),
                   tol: float | None = None, *,
                   profiles: dict[float, EnergyProfile] | None = None,
                   tables: dict[float, np.ndarray] | None = None) -> list[BoundReport]:
    """Evaluate every bound on ``g`` for each exponent in ``p_grid``.

    ``profiles`` and ``tables`` (coalition values keyed by p) may be passed in
    when the caller already has them; missing exponents are computed.
    """
    tol = tol_core() if tol is None else tol
    if g.n > MAX_BOUNDS_N:
        raise SizeCapError(f"run_all_bounds supports n <= {MAX_BOUNDS_N}, got n={g.n}")
    grid = [float(p) for p in p_grid]
    for p in grid:
        if not p >= 1:
            raise ValueError(f"p_grid values must be >= 1, got {p}")
    all_p = sorted(set(grid) | {1.0, 2.0})
    profiles = dict(profiles or {})
    missing = [p for p in all_p if p not in profiles]
    if missing:
        profiles.update(vertex_energy_profiles(g, missing))
    tables = dict(tables or {})
    missing = [p for p in sorted(set(grid) | {1.0}) if p not in tables]
    if missing:
        tables.update(zip(missing, coalition_values(g, missing)))
    n, m = g.n, g.m
    deg = np.array(g.degrees, dtype=float)
    parts = is_bipartite(g)
    reports: list[BoundReport] = []

    # (a) induced-subgraph inequality: e(S) >= w(S)
    for p in grid:
        slack = subset_sums(profiles[p].per_vertex)[1:] - tables[p][1:]
        if len(slack):
            k = int(np.argmin(slack))
            reports.append(_report(BoundId.SUBGRAPH_INEQUALITY, slack[k], {"p": p},
                                   {"coalition": mask_to_vertices(k + 1)}, tol))
        else:
            reports.append(_skip(BoundId.SUBGRAPH_INEQUALITY, {"p": p}, "empty graph"))

    # (b) edge cut: E(H) + E(K) <= E(G) over vertex bipartitions
    if n > MAX_EDGE_CUT_N:
        reports.append(_skip(BoundId.EDGE_CUT, {"p": 1.0}, f"edge-cut scan limited to n <= {MAX_EDGE_CUT_N}"))
    elif n < 2:
        reports.append(_skip(BoundId.EDGE_CUT, {"p": 1.0}, "needs n >= 2"))
    else:
        w = tables[1.0]
        full = (1 << n) - 1
        masks = np.arange(1, full)
        slack = w[full] - w[masks] - w[full ^ masks]
        k = int(np.argmin(slack))
        reports.append(_report(BoundId.EDGE_CUT, slack[k], {"p": 1.0},
                               {"side": mask_to_vertices(int(masks[k]))}, tol))

    total = {p: profiles[p].total for p in all_p}

    # (c) E_p^(1/p) >= E_q^(1/q) and (d) (E_p/n)^(1/p) <= (E_q/n)^(1/q), p < q
    for p, q in _pairs(grid):
        params = {"p": p, "q": q}
        reports.append(_report(BoundId.SCHATTEN_MONOTONICITY,
                               total[p] ** (1 / p) - total[q] ** (1 / q), params, None, tol))
        if n:
            reports.append(_report(BoundId.NORMALIZED_MONOTONICITY,
                                   (total[q] / n) ** (1 / q) - (total[p] / n) ** (1 / p), params, None, tol))

    # (e) (2m)^(p/2) <= E_p for p <= 2, reversed for p > 2
    for p in grid:
        edge_term = (2 * m) ** (p / 2)
        slack = total[p] - edge_term if p <= 2 else edge_term - total[p]
        reports.append(_report(BoundId.EDGE_COUNT_BOUND, slack, {"p": p}, None, tol))

    # (f) bipartite: 2 m^(p/2) <= E_p for p <= 2, reversed for p > 2; (g) even split
    for p in grid:
        if parts is None:
            reports.append(_skip(BoundId.BIPARTITE_BOUND, {"p": p}, "graph is not bipartite"))
            reports.append(_skip(BoundId.BIPARTITE_SPLIT, {"p": p}, "graph is not bipartite"))
            continue
        bip_term = 2 * m ** (p / 2)
        slack = total[p] - bip_term if p <= 2 else bip_term - total[p]
        reports.append(_report(BoundId.BIPARTITE_BOUND, slack, {"p": p}, None, tol))
        e = profiles[p].per_vertex
        left, right = float(e[list(parts[0])].sum()), float(e[list(parts[1])].sum())
        reports.append(_report(BoundId.BIPARTITE_SPLIT, -abs(left - right), {"p": p},
                               {"parts": [list(parts[0]), list(parts[1])], "sums": [left, right]}, tol))

    # (h) E_r(v) <= E_s(v)^(r/s), r < s
    if n:
        for r, s in _pairs(grid):
            slack = profiles[s].per_vertex ** (r / s) - profiles[r].per_vertex
            k = int(np.argmin(slack))
            reports.append(_report(BoundId.VERTEX_HOLDER, slack[k], {"r": r, "s": s}, {"vertex": k}, tol))

    # (i) E(v) >= d(v) / max degree
    if g.max_degree == 0:
        reports.append(_skip(BoundId.DEGREE_BOUND, {"p": 1.0}, "no edges"))
    else:
        slack = profiles[1.0].per_vertex - deg / g.max_degree
        k = int(np.argmin(slack))
        reports.append(_report(BoundId.DEGREE_BOUND, slack[k], {"p": 1.0}, {"vertex": k}, tol))

    # (j) adjacent vertices: E(v) + E(w) >= 2
    if m == 0:
        reports.append(_skip(BoundId.ADJACENT_PAIR, {"p": 1.0}, "no edges"))
    else:
        e1 = profiles[1.0].per_vertex
        edge_arr = np.array(g.sorted_edges())
        slack = e1[edge_arr[:, 0]] + e1[edge_arr[:, 1]] - 2
        k = int(np.argmin(slack))
        reports.append(_report(BoundId.ADJACENT_PAIR, slack[k], {"p": 1.0},
                               {"edge": edge_arr[k].tolist()}, tol))

    if is_labeled_path(g) and n >= 3:
        reports.extend(check_path_ordering(profiles[1.0], tol))
    return reports


def worst_by_bound(reports: Sequence[BoundReport]) -> dict[str, float]:
    out: dict[str, float] = {}
    for r in reports:
        if r.slack is None:
            continue
        key = r.bound_id.value
        out[key] = min(out.get(key, math.inf), r.slack)
    return out
