"""Exhaustive sweeps over small labeled graphs and trees.

Checks come in two kinds. *Guaranteed* checks restate theorems: a surviving
violation is a bug. *Evidence* checks test conjectures: a surviving violation
is a finding. Every float64 violation is recomputed in extended precision
before it is counted.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import precise
from .bounds import BoundId, run_all_bounds
from .game import (
    FAIL,
    CoalitionTable,
    audit_superadditivity,
    check_core,
    coalition_values,
    marginal_contribution_audit,
    shapley_exact,
)
from .graph import (
    Graph,
    SizeCapError,
    count_labeled_graphs,
    count_labeled_trees,
    encode_graph6,
    graph_from_index,
    mask_to_vertices,
    parse_graph6,
    path,
    star,
    tree_from_index,
)
from .spectral import vertex_energy_profiles
from .tolerances import tol_core

log = logging.getLogger(__name__)

GUARANTEED, EVIDENCE = "guaranteed", "evidence"
GRAPHS, TREES = "graphs", "trees"
MAX_SWEEP_GRAPHS_N = 7
MAX_SWEEP_GRAPHS_SHAPLEY_N = 6
MAX_SWEEP_TREES_N = 8
CHUNK = 2048


@dataclass
class Outcome:
    """Result of one check on one graph: worst slack plus flagged violations."""

    slack: float | None
    witness: object = None
    violations: list[dict] = field(default_factory=list)


class GraphContext:
    """Lazily computed spectral and game data for one graph, shared by checks."""

    def __init__(self, g: Graph, p_grid: Sequence[float], tol: float):
        self.g = g
        self.p_grid = [float(p) for p in p_grid]
        self.tol = tol

    @cached_property
    def table_values(self) -> dict[float, np.ndarray]:
        ps = sorted(set(self.p_grid) | {1.0, 2.0})
        return dict(zip(ps, coalition_values(self.g, ps)))

    def table(self, p: float) -> CoalitionTable:
        return CoalitionTable(self.g.n, p, self.table_values[p])

    @cached_property
    def profiles(self):
        return vertex_energy_profiles(self.g, sorted(set(self.p_grid) | {1.0, 2.0}))

    @cached_property
    def bound_reports(self):
        return run_all_bounds(self.g, self.p_grid, self.tol, profiles=self.profiles, tables=self.table_values)


def _violation(ctx: GraphContext, check: str, slack: float, witness, record) -> dict:
    return {
        "check": check,
        "graph6": encode_graph6(ctx.g),
        "n": ctx.g.n,
        "m": ctx.g.m,
        "slack": slack,
        "witness": witness,
        "reverification": record.as_dict(),
        "survived": record.survived,
    }


def _fold(outcomes: Iterable[tuple[float, object]]) -> tuple[float | None, object]:
    best, where = None, None
    for slack, witness in outcomes:
        if slack is not None and (best is None or slack < best):
            best, where = slack, witness
    return best, where


def check_superadditivity(ctx: GraphContext) -> Outcome:
    results, violations = [], []
    for p in ctx.p_grid:
        audit = audit_superadditivity(ctx.table(p), ctx.tol)
        witness = {"p": p, "S": mask_to_vertices(audit.worst_pair[0]), "T": mask_to_vertices(audit.worst_pair[1])}
        results.append((audit.worst_slack, witness))
        if audit.first_violation:
            s, t = audit.first_violation
            w = ctx.table_values[p]
            slack = float(w[s | t] - w[s] - w[t])
            rec = precise.reverify_superadditivity(ctx.g, p, s, t, slack)
            violations.append(_violation(ctx, "superadditivity", slack,
                                         {"p": p, "S": mask_to_vertices(s), "T": mask_to_vertices(t)}, rec))
    return Outcome(*_fold(results), violations)


def _core_check(ctx: GraphContext, name: str, payoff: str, vector: Callable[[float], np.ndarray]) -> Outcome:
    results, violations = [], []
    for p in ctx.p_grid:
        t = ctx.table(p)
        cert = check_core(t, vector(p), ctx.tol)
        if -cert.efficiency_gap < cert.worst_slack:
            slack, mask = -cert.efficiency_gap, (1 << ctx.g.n) - 1
        else:
            slack, mask = cert.worst_slack, cert.worst_coalition
        witness = {"p": p, "coalition": mask_to_vertices(mask)}
        results.append((slack, witness))
        if slack < -ctx.tol:
            rec = precise.reverify_core(ctx.g, p, payoff, mask, slack)
            violations.append(_violation(ctx, name, slack, witness, rec))
    return Outcome(*_fold(results), violations)


def check_vertex_core(ctx: GraphContext) -> Outcome:
    return _core_check(ctx, "vertex-core", "vertex_energy", lambda p: ctx.profiles[p].per_vertex)


def check_shapley_core(ctx: GraphContext) -> Outcome:
    return _core_check(ctx, "shapley-core", "shapley", lambda p: shapley_exact(ctx.table(p)))


def check_p2_shapley_degree(ctx: GraphContext) -> Outcome:
    if ctx.g.n == 0:
        return Outcome(None)
    phi = shapley_exact(ctx.table(2.0))
    deg = np.array(ctx.g.degrees, dtype=float)
    k = int(np.argmax(np.abs(phi - deg)))
    slack = -float(abs(phi[k] - deg[k]))
    witness = {"vertex": k, "shapley": float(phi[k]), "degree": int(deg[k])}
    violations = []
    if slack < -ctx.tol:
        rec = precise.reverify_p2_degree(ctx.g, k, slack)
        violations.append(_violation(ctx, "p2-shapley-degree", slack, witness, rec))
    return Outcome(slack, witness, violations)


def check_marginal_contribution(ctx: GraphContext) -> Outcome:
    results, violations = [], []
    for p in ctx.p_grid:
        audit = marginal_contribution_audit(ctx.g, p, ctx.tol)
        if audit.worst_pair is None:
            continue
        s, i = audit.worst_pair
        witness = {"p": p, "S": mask_to_vertices(s), "player": i}
        results.append((audit.worst_slack, witness))
        if audit.status == FAIL:
            rec = precise.reverify_marginal(ctx.g, p, s, i, audit.worst_slack)
            violations.append(_violation(ctx, "marginal-contribution", audit.worst_slack, witness, rec))
    return Outcome(*_fold(results), violations)


def _bound_check(bound_id: BoundId) -> Callable[[GraphContext], Outcome]:
    def run(ctx: GraphContext) -> Outcome:
        results, violations = [], []
        for r in ctx.bound_reports:
            if r.bound_id is not bound_id or r.slack is None:
                continue
            witness = {"params": r.params, "witness": r.witness}
            results.append((r.slack, witness))
            if r.status == FAIL:
                rec = precise.reverify_bound(ctx.g, bound_id.value, r.params, r.witness, r.slack)
                violations.append(_violation(ctx, bound_id.value, r.slack, witness, rec))
        return Outcome(*_fold(results), violations)

    run.__name__ = f"check_{bound_id.name.lower()}"
    return run


@dataclass(frozen=True)
class CheckSpec:
    name: str
    kind: str
    run: Callable[[GraphContext], Outcome] | None


CHECKS: dict[str, CheckSpec] = {
    c.name: c
    for c in [
        CheckSpec("superadditivity", GUARANTEED, check_superadditivity),
        CheckSpec("vertex-core", GUARANTEED, check_vertex_core),
        CheckSpec("subgraph-inequality", GUARANTEED, _bound_check(BoundId.SUBGRAPH_INEQUALITY)),
        CheckSpec("edge-cut", GUARANTEED, _bound_check(BoundId.EDGE_CUT)),
        CheckSpec("degree-bound", GUARANTEED, _bound_check(BoundId.DEGREE_BOUND)),
        CheckSpec("adjacent-pair", GUARANTEED, _bound_check(BoundId.ADJACENT_PAIR)),
        CheckSpec("vertex-holder", GUARANTEED, _bound_check(BoundId.VERTEX_HOLDER)),
        CheckSpec("schatten-monotonicity", GUARANTEED, _bound_check(BoundId.SCHATTEN_MONOTONICITY)),
        CheckSpec("normalized-monotonicity", GUARANTEED, _bound_check(BoundId.NORMALIZED_MONOTONICITY)),
        CheckSpec("edge-count-bound", GUARANTEED, _bound_check(BoundId.EDGE_COUNT_BOUND)),
        CheckSpec("bipartite-bound", GUARANTEED, _bound_check(BoundId.BIPARTITE_BOUND)),
        CheckSpec("bipartite-split", GUARANTEED, _bound_check(BoundId.BIPARTITE_SPLIT)),
        CheckSpec("p2-shapley-degree", GUARANTEED, check_p2_shapley_degree),
        CheckSpec("marginal-contribution", GUARANTEED, check_marginal_contribution),
        CheckSpec("shapley-core", EVIDENCE, check_shapley_core),
        # aggregated per vertex count, not per graph
        CheckSpec("tree-extremal", EVIDENCE, None),
    ]
}

THEOREM_CHECKS = (
    "superadditivity", "vertex-core", "subgraph-inequality", "degree-bound",
    "adjacent-pair", "vertex-holder", "schatten-monotonicity",
)


@dataclass
class GraphRecord:
    index: int
    graph6: str
    n: int
    m: int
    outcomes: dict[str, Outcome]
    p_energies: dict[float, float] | None = None
    max_degree: int = 0


def _scan_chunk(cls: str, n: int, start: int, stop: int, checks: Sequence[str],
                p_grid: Sequence[float], tol: float) -> list[GraphRecord]:
    graphs: Iterable[Graph]
    if cls == GRAPHS:
        graphs = (graph_from_index(n, i) for i in range(start, stop))
    else:
        graphs = (tree_from_index(n, i) for i in range(start, stop))
    per_graph = [c for c in checks if CHECKS[c].run is not None]
    want_tree = "tree-extremal" in checks
    out = []
    for offset, g in enumerate(graphs):
        ctx = GraphContext(g, p_grid, tol)
        outcomes = {c: CHECKS[c].run(ctx) for c in per_graph}
        energies = {p: ctx.profiles[p].total for p in ctx.p_grid} if want_tree else None
        out.append(GraphRecord(start + offset, encode_graph6(g), g.n, g.m, outcomes, energies, g.max_degree))
    return out


@dataclass
class SweepResult:
    scope: dict
    counts: dict
    worst_slack: dict
    counterexamples: list
    dismissed: list
    kinds: dict
    partial: bool = False
    tree_extremal: list = field(default_factory=list)
    rows: list = field(default_factory=list, repr=False)

    @property
    def guaranteed_failures(self) -> list:
        return [v for v in self.counterexamples if self.kinds[v["check"]] == GUARANTEED]

    @property
    def evidence_findings(self) -> list:
        return [v for v in self.counterexamples if self.kinds[v["check"]] == EVIDENCE]

    def exit_code(self) -> int:
        if self.guaranteed_failures:
            return 1
        if self.evidence_findings:
            return 3
        return 0

    def as_dict(self) -> dict:
        return {
            "scope": self.scope,
            "partial": self.partial,
            "counts": self.counts,
            "kinds": self.kinds,
            "worst_slack": self.worst_slack,
            "counterexamples": self.counterexamples,
            "dismissed_as_roundoff": self.dismissed,
            "tree_extremal": self.tree_extremal,
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["graph6", "n", "m", "check_id", "worst_slack", "witness"])
        writer.writerows(self.rows)
        return buf.getvalue()


def validate_sweep(max_n: int, cls: str, checks: Sequence[str], p_grid: Sequence[float]) -> None:
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {sorted(CHECKS)}")
    if not checks:
        raise ValueError("no checks selected")
    for p in p_grid:
        if not float(p) >= 1:
            raise ValueError(f"p values must be >= 1, got {p}")
    if cls == GRAPHS:
        cap = MAX_SWEEP_GRAPHS_SHAPLEY_N if "shapley-core" in checks else MAX_SWEEP_GRAPHS_N
        if "tree-extremal" in checks:
            raise ValueError("tree-extremal requires --class trees")
    elif cls == TREES:
        cap = MAX_SWEEP_TREES_N
    else:
        raise ValueError(f"unknown class {cls!r}")
    if max_n > cap:
        raise SizeCapError(f"{cls} sweep with checks {list(checks)} supports max_n <= {cap}, got {max_n}")
    if max_n < 1:
        raise ValueError("max_n must be >= 1")


def _fmt_witness(w) -> str:
    return json.dumps(w, sort_keys=True, separators=(",", ":"))


def _tree_extremal(n: int, records: list[GraphRecord], p_grid: Sequence[float], tol: float):
    """Compare each tree's p-energy with the star and path of the same order."""
    entries, violations = [], []
    if n < 4:
        for p in p_grid:
            entries.append({"n": n, "p": p, "status": "skipped", "reason": "star and path coincide for n < 4"})
        return entries, violations
    for p in p_grid:
        vals = np.array([r.p_energies[p] for r in records])
        is_star = np.array([r.max_degree == n - 1 for r in records])
        is_path = np.array([r.max_degree <= 2 for r in records])
        star_val = float(vals[is_star][0])
        path_val = float(vals[is_path][0])
        if p <= 2:
            low_val, low_mask, low_name = star_val, is_star, "star"
            high_val, high_mask, high_name = path_val, is_path, "path"
        else:
            low_val, low_mask, low_name = path_val, is_path, "path"
            high_val, high_mask, high_name = star_val, is_star, "star"
        lower_gap = vals[~low_mask] - low_val
        upper_gap = high_val - vals[~high_mask]
        k_low = int(np.argmin(lower_gap))
        k_high = int(np.argmin(upper_gap))
        low_idx = np.nonzero(~low_mask)[0][k_low]
        high_idx = np.nonzero(~high_mask)[0][k_high]
        entry = {
            "n": n,
            "p": p,
            "minimizer": low_name,
            "maximizer": high_name,
            "min_energy": float(vals.min()),
            "max_energy": float(vals.max()),
            "star_energy": star_val,
            "path_energy": path_val,
            "lower_margin": float(lower_gap[k_low]),
            "lower_margin_tree": records[low_idx].graph6,
            "upper_margin": float(upper_gap[k_high]),
            "upper_margin_tree": records[high_idx].graph6,
        }
        entry["status"] = "pass" if min(entry["lower_margin"], entry["upper_margin"]) >= -tol else "fail"
        entries.append(entry)
        for margin, idx, extreme_val, sign in (
            (entry["lower_margin"], low_idx, low_name, 1),
            (entry["upper_margin"], high_idx, high_name, -1),
        ):
            if margin < -tol:
                tree = parse_graph6(records[idx].graph6)
                ref = star(n) if extreme_val == "star" else path(n)
                exact = sign * (precise.precise_p_energy(tree, p) - precise.precise_p_energy(ref, p))
                rec = precise._record("tree-extremal", margin, exact)
                violations.append({
                    "check": "tree-extremal",
                    "graph6": records[idx].graph6,
                    "n": n,
                    "m": n - 1,
                    "slack": margin,
                    "witness": {"p": p, "compared_with": extreme_val},
                    "reverification": rec.as_dict(),
                    "survived": rec.survived,
                })
    return entries, violations


def run_sweep(max_n: int, cls: str = GRAPHS, checks: Sequence[str] = THEOREM_CHECKS,
              p_grid: Sequence[float] = (1.0, 2.0, 3.0), jobs: int = 1, min_n: int = 1,
              tol: float | None = None, progress: Callable[[str], None] | None = None) -> SweepResult:
    """Scan every labeled graph (or tree) with ``min_n <= n <= max_n``.

    Work is partitioned by enumeration-index ranges and merged in index
    order, so the result does not depend on ``jobs``. On ``KeyboardInterrupt``
    the completed prefix is returned with ``partial=True``.
    """
    tol = tol_core() if tol is None else tol
    checks = list(dict.fromkeys(checks))
    p_grid = [float(p) for p in p_grid]
    validate_sweep(max_n, cls, checks, p_grid)
    kinds = {c: CHECKS[c].kind for c in checks}
    worst: dict[str, dict] = {}
    counterexamples, dismissed, tree_entries, rows = [], [], [], []
    by_n: dict[int, int] = {}
    checks_run = 0
    flagged = 0
    partial = False

    def consume(records: list[GraphRecord]) -> None:
        nonlocal checks_run, flagged
        for rec in records:
            by_n[rec.n] = by_n.get(rec.n, 0) + 1
            for name, out in rec.outcomes.items():
                checks_run += 1
                if out.slack is not None:
                    rows.append([rec.graph6, rec.n, rec.m, name, repr(out.slack), _fmt_witness(out.witness)])
                    if name not in worst or out.slack < worst[name]["slack"]:
                        worst[name] = {"slack": out.slack, "graph6": rec.graph6, "witness": out.witness}
                for v in out.violations:
                    flagged += 1
                    (counterexamples if v["survived"] else dismissed).append(v)

    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for n in range(min_n, max_n + 1):
            total = count_labeled_graphs(n) if cls == GRAPHS else count_labeled_trees(n)
            bounds = [(lo, min(lo + CHUNK, total)) for lo in range(0, total, CHUNK)]
            if progress:
                progress(f"n={n}: {total} {cls}")
            args = (cls, n)
            if executor is None:
                results = (_scan_chunk(*args, lo, hi, checks, p_grid, tol) for lo, hi in bounds)
            else:
                results = executor.map(_scan_chunk, *zip(*[(cls, n, lo, hi, checks, p_grid, tol) for lo, hi in bounds]))
            n_records: list[GraphRecord] = []
            for chunk in results:
                consume(chunk)
                if "tree-extremal" in checks:
                    n_records.extend(chunk)
            if "tree-extremal" in checks:
                entries, violations = _tree_extremal(n, n_records, p_grid, tol)
                tree_entries.extend(entries)
                for e in entries:
                    checks_run += 1
                    if "lower_margin" in e:
                        slack = min(e["lower_margin"], e["upper_margin"])
                        rows.append([e["lower_margin_tree"] if e["lower_margin"] <= e["upper_margin"]
                                     else e["upper_margin_tree"], n, n - 1, "tree-extremal", repr(slack),
                                     _fmt_witness({"p": e["p"], "minimizer": e["minimizer"],
                                                   "maximizer": e["maximizer"]})])
                        if "tree-extremal" not in worst or slack < worst["tree-extremal"]["slack"]:
                            worst["tree-extremal"] = {"slack": slack, "graph6": None,
                                                      "witness": {"n": n, "p": e["p"]}}
                for v in violations:
                    flagged += 1
                    (counterexamples if v["survived"] else dismissed).append(v)
    except KeyboardInterrupt:
        partial = True
        log.warning("interrupted; flushing partial results")
    finally:
        if executor is not None:
            executor.shutdown(wait=not partial, cancel_futures=True)

    counts = {
        "graphs_scanned": sum(by_n.values()),
        "graphs_by_n": {str(k): v for k, v in sorted(by_n.items())},
        "checks_run": checks_run,
        "violations_flagged": flagged,
        "violations_surviving": len(counterexamples),
        "guaranteed_violations_surviving": sum(1 for v in counterexamples if kinds[v["check"]] == GUARANTEED),
        "evidence_violations_surviving": sum(1 for v in counterexamples if kinds[v["check"]] == EVIDENCE),
    }
    scope = {"class": cls, "min_n": min_n, "max_n": max_n, "p_grid": p_grid, "checks": checks}
    return SweepResult(scope, counts, worst, counterexamples, dismissed, kinds, partial, tree_entries, rows)
