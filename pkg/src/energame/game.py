"""The (p-)energy game: coalition tables, Shapley values, core and audits.

Coalitions are bitmasks; ``values[mask]`` is the p-energy of the subgraph
induced by ``mask``.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .graph import Graph, SizeCapError, induced, mask_to_vertices
from .spectral import abs_pow, induced_eigenvalues, p_energy, vertex_energies
from .tolerances import tol_core

log = logging.getLogger(__name__)

MAX_TABLE_N = 20
WARN_TABLE_N = 16
MAX_SHAPLEY_N = 20
MAX_SUPERADDITIVITY_N = 16
MAX_CONVEXITY_N = 13
MAX_EXHAUSTIVE_PERMUTATION_N = 8

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


def _require(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise SizeCapError(f"{what} supports n <= {cap}, got n={n}")


@lru_cache(maxsize=32)
def popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc[1 << i: 1 << (i + 1)] = pc[: 1 << i] + 1
    return pc


@lru_cache(maxsize=32)
def masks_by_size(n: int) -> tuple[np.ndarray, ...]:
    pc = popcounts(n)
    return tuple(np.nonzero(pc == k)[0] for k in range(n + 1))


def subset_sums(x: np.ndarray) -> np.ndarray:
    """``out[mask] = sum(x[i] for i in mask)`` for every mask."""
    out = np.zeros(1, dtype=float)
    for xi in np.asarray(x, dtype=float):
        out = np.concatenate([out, out + xi])
    return out


@dataclass(frozen=True)
class CoalitionTable:
    n: int
    p: float
    values: np.ndarray

    @property
    def grand(self) -> float:
        return float(self.values[-1])

    def value(self, vertices: Sequence[int]) -> float:
        mask = 0
        for v in vertices:
            mask |= 1 << v
        return float(self.values[mask])


def coalition_values(g: Graph, p_grid: Sequence[float]) -> np.ndarray:
    """Array of shape ``(len(p_grid), 2**n)`` with the p-energy of every induced subgraph.

    Eigenvalues are computed once per coalition and shared across ``p_grid``.
    """
    _require(g.n, MAX_TABLE_N, "coalition tables")
    if g.n > WARN_TABLE_N:
        warnings.warn(f"building a 2^{g.n}-entry coalition table; this is slow", stacklevel=2)
    ps = [float(p) for p in p_grid]
    for p in ps:
        if not p >= 1:
            raise ValueError(f"Schatten exponent must be >= 1, got {p}")
    adj = g.adjacency()
    out = np.zeros((len(ps), 1 << g.n))
    for k, masks in enumerate(masks_by_size(g.n)):
        if k < 2:
            continue
        # bound peak memory for n near the cap
        step = max(1, 2_000_000 // (k * k))
        for lo in range(0, len(masks), step):
            chunk = masks[lo: lo + step]
            vals = induced_eigenvalues(adj, chunk, k)
            for row, p in enumerate(ps):
                out[row, chunk] = abs_pow(vals, p).sum(axis=1)
    return out


def build_table(g: Graph, p: float = 1.0) -> CoalitionTable:
    """Characteristic function of the p-energy game on ``g``."""
    return CoalitionTable(g.n, float(p), coalition_values(g, [p])[0])


def build_tables(g: Graph, p_grid: Sequence[float]) -> dict[float, CoalitionTable]:
    vals = coalition_values(g, p_grid)
    return {float(p): CoalitionTable(g.n, float(p), vals[k]) for k, p in enumerate(p_grid)}


# -- Shapley ----------------------------------------------------------------

def shapley_weights(n: int) -> np.ndarray:
    """``|S|! (n-|S|-1)! / n!`` indexed by ``|S|``."""
    nf = math.factorial(n)
    return np.array([math.factorial(k) * math.factorial(n - k - 1) / nf for k in range(n)])


def shapley_exact(t: CoalitionTable) -> np.ndarray:
    """Shapley value by direct summation over coalitions not containing each player."""
    n = t.n
    _require(n, MAX_SHAPLEY_N, "exact Shapley")
    if n == 0:
        return np.zeros(0)
    weights = shapley_weights(n)
    pc = popcounts(n)
    masks = np.arange(1 << n)
    phi = np.zeros(n)
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        phi[i] = np.dot(weights[pc[without]], t.values[without | bit] - t.values[without])
    return phi


@dataclass(frozen=True)
class MonteCarloShapley:
    values: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int
    exhaustive: bool


def _fisher_yates(n: int, count: int, bitgen: np.random.PCG64) -> np.ndarray:
    # Each permutation consumes n-1 consecutive raw outputs, so permutation s
    # depends only on (seed, s). Index j in 0..i is the high 32 bits of a raw
    # draw times (i+1), shifted down 32 bits.
    perms = np.tile(np.arange(n), (count, 1))
    if n < 2 or count == 0:
        return perms
    raw = bitgen.random_raw(count * (n - 1)).reshape(count, n - 1)
    rows = np.arange(count)
    for col, i in enumerate(range(n - 1, 0, -1)):
        j = (((raw[:, col] >> np.uint64(32)) * np.uint64(i + 1)) >> np.uint64(32)).astype(np.intp)
        a = perms[rows, i].copy()
        perms[rows, i] = perms[rows, j]
        perms[rows, j] = a
    return perms


def _marginals(values: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Per-player marginal contributions, shape ``(len(perms), n)``."""
    bits = np.left_shift(1, perms)
    after = np.bitwise_or.accumulate(bits, axis=1)
    before = after - bits
    contrib = values[after] - values[before]
    out = np.empty_like(contrib)
    np.put_along_axis(out, perms, contrib, axis=1)
    return out


def shapley_monte_carlo(t: CoalitionTable, samples: int, seed: int = 0,
                        chunk: int = 50_000) -> MonteCarloShapley:
    """Permutation-sampling Shapley estimate with per-player standard errors.

    Permutations are drawn by Fisher-Yates from numpy's PCG64 raw output
    stream seeded with ``seed``. ``samples=0`` averages over all ``n!``
    permutations instead (exact, ``n <= 8``).
    """
    n = t.n
    if samples < 0:
        raise ValueError("samples must be >= 0")
    if samples == 0:
        _require(n, MAX_EXHAUSTIVE_PERMUTATION_N, "exhaustive permutation mode")
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
        marg = _marginals(t.values, perms)
        return MonteCarloShapley(marg.mean(axis=0), np.zeros(n), len(perms), seed, True)

    bitgen = np.random.PCG64(seed)
    count = 0
    shift = None
    # Shifted running sums; each chunk is reduced along axis 0 with the
    # accumulator as its first row, so additions happen in sample order and
    # the result does not depend on ``chunk``.
    acc = np.zeros((2, n))
    while count < samples:
        k = min(chunk, samples - count)
        marg = _marginals(t.values, _fisher_yates(n, k, bitgen))
        if shift is None:
            shift = marg[0].copy()
        d = marg - shift
        acc[0] = np.add.reduce(np.vstack([acc[0], d]), axis=0)
        acc[1] = np.add.reduce(np.vstack([acc[1], d * d]), axis=0)
        count += k
    mean = shift + acc[0] / samples
    if samples > 1:
        var = np.maximum(acc[1] - acc[0] ** 2 / samples, 0.0) / (samples - 1)
        stderr = np.sqrt(var / samples)
    else:
        stderr = np.full(n, np.nan)
    return MonteCarloShapley(mean, stderr, samples, seed, False)


# -- imputations and the core -----------------------------------------------

@dataclass(frozen=True)
class CoreCertificate:
    is_member: bool
    worst_slack: float
    worst_coalition: int
    efficiency_gap: float


def core_slacks(t: CoalitionTable, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (t.n,):
        raise ValueError(f"payoff vector must have length {t.n}")
    return subset_sums(x) - t.values


def check_core(t: CoalitionTable, x, tol: float | None = None) -> CoreCertificate:
    """Exhaustive core test of payoff ``x``.

    ``worst_slack`` is the minimum of ``x(S) - w(S)`` over nonempty proper
    coalitions (over the empty one when there are none).
    """
    tol = tol_core() if tol is None else tol
    slacks = core_slacks(t, x)
    gap = float(abs(slacks[-1]))
    proper = slacks[1:-1]
    if len(proper):
        k = int(np.argmin(proper))
        worst, where = float(proper[k]), k + 1
    else:
        worst, where = float(slacks[0]), 0
    return CoreCertificate(bool(worst >= -tol and gap <= tol), worst, where, gap)


@dataclass(frozen=True)
class ImputationCheck:
    is_imputation: bool
    efficiency_gap: float
    worst_individual_slack: float
    worst_player: int | None


def check_imputation(t: CoalitionTable, x, tol: float | None = None) -> ImputationCheck:
    tol = tol_core() if tol is None else tol
    x = np.asarray(x, dtype=float)
    if x.shape != (t.n,):
        raise ValueError(f"payoff vector must have length {t.n}")
    gap = float(abs(x.sum() - t.grand))
    if t.n == 0:
        return ImputationCheck(gap <= tol, gap, 0.0, None)
    singles = t.values[1 << np.arange(t.n)]
    slack = x - singles
    k = int(np.argmin(slack))
    ok = bool(slack[k] >= -tol and gap <= tol)
    return ImputationCheck(ok, gap, float(slack[k]), k)


# -- audits -----------------------------------------------------------------

@dataclass(frozen=True)
class AuditResult:
    name: str
    status: str
    worst_slack: float | None = None
    worst_pair: tuple[int, int] | None = None
    first_violation: tuple[int, int] | None = None
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.status != FAIL


def skipped(name: str, reason: str) -> AuditResult:
    return AuditResult(name, SKIPPED, reason=reason)


def _disjoint_pair_chunks(n: int, chunk: int = 1 << 20):
    # Every disjoint (S, T) corresponds to a base-3 code: digit 1 puts the
    # player in S, digit 2 in T.
    total = 3**n
    pow3 = 3 ** np.arange(n, dtype=np.int64)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        digits = (codes[:, None] // pow3) % 3
        weights = np.int64(1) << np.arange(n, dtype=np.int64)
        s = ((digits == 1) * weights).sum(axis=1)
        t = ((digits == 2) * weights).sum(axis=1)
        yield s, t


def audit_superadditivity(t: CoalitionTable, tol: float | None = None) -> AuditResult:
    """Check ``w(S|T) >= w(S) + w(T)`` for all disjoint ``S, T`` (3^n pairs)."""
    tol = tol_core() if tol is None else tol
    _require(t.n, MAX_SUPERADDITIVITY_N, "superadditivity audit")
    w = t.values
    worst, worst_pair, first = math.inf, None, None
    for s, u in _disjoint_pair_chunks(t.n):
        slack = w[s | u] - w[s] - w[u]
        k = int(np.argmin(slack))
        if slack[k] < worst:
            worst, worst_pair = float(slack[k]), (int(s[k]), int(u[k]))
        if first is None:
            bad = np.nonzero(slack < -tol)[0]
            if len(bad):
                first = (int(s[bad[0]]), int(u[bad[0]]))
    return AuditResult("superadditivity", FAIL if first else PASS, worst, worst_pair, first)


def audit_convexity(t: CoalitionTable, tol: float | None = None) -> AuditResult:
    """Check ``w(S|T) + w(S&T) >= w(S) + w(T)`` over all ordered pairs (4^n)."""
    tol = tol_core() if tol is None else tol
    _require(t.n, MAX_CONVEXITY_N, "convexity audit")
    w = t.values
    size = 1 << t.n
    tmask = np.arange(size)
    rows = max(1, (1 << 20) // size)
    worst, worst_pair, first = math.inf, None, None
    for lo in range(0, size, rows):
        s = np.arange(lo, min(lo + rows, size))[:, None]
        slack = w[s | tmask] + w[s & tmask] - w[s] - w[tmask]
        k = int(np.argmin(slack))
        r, c = divmod(k, size)
        if slack[r, c] < worst:
            worst, worst_pair = float(slack[r, c]), (int(s[r, 0]), c)
        if first is None:
            bad = np.argwhere(slack < -tol)
            if len(bad):
                first = (int(s[bad[0][0], 0]), int(bad[0][1]))
    return AuditResult("convexity", FAIL if first else PASS, worst, worst_pair, first)


def marginal_contribution_sides(g: Graph, p: float, s: int, i: int) -> tuple[float, float]:
    """``(w(S) - w(S - i), E_p of i inside I(S))``."""
    if not s >> i & 1:
        raise ValueError(f"player {i} is not in coalition {mask_to_vertices(s)}")
    sub = induced(g, s)
    lhs = p_energy(sub, p) - p_energy(induced(g, s & ~(1 << i)), p)
    local = bin(s & ((1 << i) - 1)).count("1")
    rhs = float(vertex_energies(sub, p).per_vertex[local])
    return lhs, rhs


def marginal_contribution_check(g: Graph, p: float, s: int, i: int, tol: float | None = None) -> bool:
    tol = tol_core() if tol is None else tol
    lhs, rhs = marginal_contribution_sides(g, p, s, i)
    return lhs >= rhs - tol


def marginal_contribution_audit(g: Graph, p: float, tol: float | None = None) -> AuditResult:
    """``marginal_contribution_check`` over every coalition and member at once.

    Slack is ``w(S) - w(S - i) - E_p(i in I(S))``; witness is ``(S, i)``.
    """
    tol = tol_core() if tol is None else tol
    _require(g.n, MAX_TABLE_N, "marginal-contribution audit")
    w = coalition_values(g, [p])[0]
    adj = g.adjacency()
    worst, witness, first = math.inf, None, None
    for k, masks in enumerate(masks_by_size(g.n)):
        if k == 0 or len(masks) == 0:
            continue
        if k == 1:
            local = np.zeros((len(masks), 1))
        else:
            bits = (masks[:, None] >> np.arange(g.n)) & 1
            idx = np.nonzero(bits)[1].reshape(len(masks), k)
            vals, vecs = np.linalg.eigh(adj[idx[:, :, None], idx[:, None, :]])
            local = np.einsum("bik,bk->bi", vecs**2, abs_pow(vals, p))
        members = np.nonzero((masks[:, None] >> np.arange(g.n)) & 1)[1].reshape(len(masks), k)
        slack = w[masks][:, None] - w[masks[:, None] & ~(1 << members)] - local
        r, c = np.unravel_index(int(np.argmin(slack)), slack.shape)
        if slack[r, c] < worst:
            worst, witness = float(slack[r, c]), (int(masks[r]), int(members[r, c]))
        if first is None:
            bad = np.argwhere(slack < -tol)
            if len(bad):
                first = (int(masks[bad[0][0]]), int(members[bad[0][0], bad[0][1]]))
    if witness is None:
        return skipped("marginal-contribution", "empty graph")
    return AuditResult("marginal-contribution", FAIL if first else PASS, worst, witness, first)


@dataclass(frozen=True)
class PlayerClasses:
    null: tuple[bool, ...]
    symmetry_classes: tuple[tuple[int, ...], ...]


def null_and_symmetry_classify(g: Graph) -> PlayerClasses:
    """Null players are isolated vertices; symmetric players share open neighborhoods."""
    groups: dict[int, list[int]] = {}
    for v, nb in enumerate(g.neighbor_masks):
        groups.setdefault(nb, []).append(v)
    classes = tuple(sorted(tuple(vs) for vs in groups.values()))
    return PlayerClasses(tuple(d == 0 for d in g.degrees), classes)


# -- full solution ----------------------------------------------------------

@dataclass
class GameSolution:
    p: float
    table: CoalitionTable
    shapley: np.ndarray
    shapley_stderr: np.ndarray | None
    shapley_method: str
    vertex_energy_payoff: np.ndarray
    superadditivity: AuditResult
    convexity: AuditResult
    shapley_core: CoreCertificate
    vertex_energy_core: CoreCertificate
    extras: dict = field(default_factory=dict)


EXACT_SHAPLEY_REPORT_N = 12


def solve_game(g: Graph, p: float = 1.0, *, samples: int = 20_000, seed: int = 0,
               table: CoalitionTable | None = None) -> GameSolution:
    """Shapley value, vertex-energy payoff, audits and core certificates for one game."""
    t = table if table is not None else build_table(g, p)
    if g.n <= EXACT_SHAPLEY_REPORT_N:
        phi, err, method = shapley_exact(t), None, "exact"
    else:
        mc = shapley_monte_carlo(t, samples, seed)
        phi, err, method = mc.values, mc.stderr, f"monte-carlo(samples={samples}, seed={seed})"
    e = vertex_energies(g, p).per_vertex
    try:
        sup = audit_superadditivity(t)
    except SizeCapError as exc:
        sup = skipped("superadditivity", str(exc))
    try:
        conv = audit_convexity(t)
    except SizeCapError as exc:
        conv = skipped("convexity", str(exc))
    return GameSolution(
        p=float(p),
        table=t,
        shapley=phi,
        shapley_stderr=err,
        shapley_method=method,
        vertex_energy_payoff=e,
        superadditivity=sup,
        convexity=conv,
        shapley_core=check_core(t, phi),
        vertex_energy_core=check_core(t, e),
    )


def core_inequalities(t: CoalitionTable, names: Sequence[str] | None = None) -> list[str]:
    """Human-readable list of the inequalities defining the core."""
    names = list(names) if names else [f"x{i + 1}" for i in range(t.n)]
    lines = []
    for mask in range(1, 1 << t.n):
        lhs = " + ".join(names[i] for i in mask_to_vertices(mask))
        op = "=" if mask == (1 << t.n) - 1 else ">="
        lines.append(f"{lhs} {op} {t.values[mask]:.10g}")
    return lines
