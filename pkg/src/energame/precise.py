"""Extended-precision recomputation used to confirm or dismiss violations.

A float64 violation only counts if it survives recomputation here, with an
eigensolver independent of LAPACK running at ``DPS`` decimal digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .graph import Graph, induced, mask_to_vertices
from .tolerances import TOL_REVERIFY

DPS = 40
MAX_PRECISE_TABLE_N = 10


def _mp_adjacency(g: Graph) -> mpmath.matrix:
    a = mpmath.zeros(g.n, g.n)
    for i, j in g.edges:
        a[i, j] = a[j, i] = 1
    return a


def _eigsy(g: Graph):
    if g.n == 0:
        return [], None
    evals, evecs = mpmath.eigsy(_mp_adjacency(g))
    return [evals[k] for k in range(g.n)], evecs


def _abs_pow(x, p):
    x = abs(x)
    return x**p if x != 0 else mpmath.mpf(0)


def precise_p_energy(g: Graph, p: float, dps: int = DPS):
    if g.m == 0:
        return mpmath.mpf(0)
    with mpmath.workdps(dps):
        vals, _ = _eigsy(g)
        return mpmath.fsum(_abs_pow(v, mpmath.mpf(p)) for v in vals)


def precise_coalition_value(g: Graph, mask: int, p: float, dps: int = DPS):
    return precise_p_energy(induced(g, mask), p, dps)


def precise_vertex_energies(g: Graph, p: float, dps: int = DPS) -> list:
    if g.m == 0:
        return [mpmath.mpf(0)] * g.n
    with mpmath.workdps(dps):
        vals, vecs = _eigsy(g)
        pw = [_abs_pow(v, mpmath.mpf(p)) for v in vals]
        return [mpmath.fsum(vecs[i, k] ** 2 * pw[k] for k in range(g.n)) for i in range(g.n)]


def precise_table(g: Graph, p: float, dps: int = DPS) -> list:
    if g.n > MAX_PRECISE_TABLE_N:
        raise ValueError(f"extended-precision tables support n <= {MAX_PRECISE_TABLE_N}")
    return [precise_coalition_value(g, mask, p, dps) for mask in range(1 << g.n)]


def precise_shapley(g: Graph, p: float, dps: int = DPS) -> list:
    n = g.n
    table = precise_table(g, p, dps)
    with mpmath.workdps(dps):
        weights = [mpmath.mpf(math.factorial(k) * math.factorial(n - k - 1)) / math.factorial(n)
                   for k in range(n)]
        phi = []
        for i in range(n):
            bit = 1 << i
            terms = [weights[bin(s).count("1")] * (table[s | bit] - table[s])
                     for s in range(1 << n) if not s & bit]
            phi.append(mpmath.fsum(terms))
    return phi


@dataclass(frozen=True)
class Reverification:
    check: str
    float_slack: float
    precise_slack: float
    survived: bool
    dps: int = DPS

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "float_slack": self.float_slack,
            "precise_slack": self.precise_slack,
            "survived": self.survived,
            "dps": self.dps,
            "threshold": -TOL_REVERIFY,
        }


def _record(check: str, float_slack: float, precise) -> Reverification:
    value = float(precise)
    return Reverification(check, float(float_slack), value, value < -TOL_REVERIFY)


def reverify_core(g: Graph, p: float, payoff: str, mask: int, float_slack: float) -> Reverification:
    """Recompute ``x(S) - w(S)`` for ``payoff`` in {"vertex_energy", "shapley"}."""
    if payoff == "vertex_energy":
        x = precise_vertex_energies(g, p)
    elif payoff == "shapley":
        x = precise_shapley(g, p)
    else:
        raise ValueError(f"unknown payoff {payoff!r}")
    with mpmath.workdps(DPS):
        full = (1 << g.n) - 1
        if mask == full:
            # efficiency: a gap is a violation in either direction
            slack = -abs(mpmath.fsum(x) - precise_coalition_value(g, full, p))
        else:
            slack = mpmath.fsum(x[i] for i in mask_to_vertices(mask)) - precise_coalition_value(g, mask, p)
    return _record(f"{payoff}-core", float_slack, slack)


def reverify_superadditivity(g: Graph, p: float, s: int, t: int, float_slack: float) -> Reverification:
    with mpmath.workdps(DPS):
        slack = (precise_coalition_value(g, s | t, p) - precise_coalition_value(g, s, p)
                 - precise_coalition_value(g, t, p))
    return _record("superadditivity", float_slack, slack)


def _mp_pow(x, p):
    return mpmath.power(x, mpmath.mpf(p))


def reverify_bound(g: Graph, bound_id: str, params: dict, witness: dict | None,
                   float_slack: float) -> Reverification:
    """Recompute one bound's slack at ``DPS`` digits, oriented as in the float report."""
    p = params.get("p", 1.0)
    with mpmath.workdps(DPS):
        if bound_id == "subgraph-inequality":
            coalition = witness["coalition"]
            e = precise_vertex_energies(g, p)
            mask = sum(1 << v for v in coalition)
            slack = mpmath.fsum(e[v] for v in coalition) - precise_coalition_value(g, mask, p)
        elif bound_id == "edge-cut":
            side = sum(1 << v for v in witness["side"])
            rest = ((1 << g.n) - 1) ^ side
            slack = (precise_p_energy(g, 1) - precise_coalition_value(g, side, 1)
                     - precise_coalition_value(g, rest, 1))
        elif bound_id in ("schatten-monotonicity", "normalized-monotonicity"):
            q = params["q"]
            ep, eq = precise_p_energy(g, p), precise_p_energy(g, q)
            if bound_id == "schatten-monotonicity":
                slack = _mp_pow(ep, 1 / mpmath.mpf(p)) - _mp_pow(eq, 1 / mpmath.mpf(q))
            else:
                n = mpmath.mpf(g.n)
                slack = _mp_pow(eq / n, 1 / mpmath.mpf(q)) - _mp_pow(ep / n, 1 / mpmath.mpf(p))
        elif bound_id in ("edge-count-bound", "bipartite-bound"):
            m = mpmath.mpf(g.m)
            half = mpmath.mpf(p) / 2
            term = _mp_pow(2 * m, half) if bound_id == "edge-count-bound" else 2 * _mp_pow(m, half)
            ep = precise_p_energy(g, p)
            slack = ep - term if p <= 2 else term - ep
        elif bound_id == "bipartite-split":
            e = precise_vertex_energies(g, p)
            left, right = witness["parts"]
            slack = -abs(mpmath.fsum(e[v] for v in left) - mpmath.fsum(e[v] for v in right))
        elif bound_id == "vertex-holder":
            v, r, s = witness["vertex"], params["r"], params["s"]
            slack = (_mp_pow(precise_vertex_energies(g, s)[v], mpmath.mpf(r) / s)
                     - precise_vertex_energies(g, r)[v])
        elif bound_id == "degree-bound":
            v = witness["vertex"]
            slack = precise_vertex_energies(g, 1)[v] - mpmath.mpf(g.degrees[v]) / g.max_degree
        elif bound_id == "adjacent-pair":
            i, j = witness["edge"]
            e = precise_vertex_energies(g, 1)
            slack = e[i] + e[j] - 2
        elif bound_id == "path-ordering":
            e = precise_vertex_energies(g, 1)
            slack = e[witness["upper"]] - e[witness["lower"]]
        else:
            raise ValueError(f"unknown bound {bound_id!r}")
    return _record(bound_id, float_slack, slack)


def reverify_p2_degree(g: Graph, vertex: int, float_slack: float) -> Reverification:
    phi = precise_shapley(g, 2)
    with mpmath.workdps(DPS):
        slack = -abs(phi[vertex] - g.degrees[vertex])
    return _record("p2-shapley-degree", float_slack, slack)


def reverify_marginal(g: Graph, p: float, s: int, i: int, float_slack: float) -> Reverification:
    with mpmath.workdps(DPS):
        lhs = precise_coalition_value(g, s, p) - precise_coalition_value(g, s & ~(1 << i), p)
        local = bin(s & ((1 << i) - 1)).count("1")
        rhs = precise_vertex_energies(induced(g, s), p)[local]
        slack = lhs - rhs
    return _record("marginal-contribution", float_slack, slack)
