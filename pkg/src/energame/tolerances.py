"""Fixed tolerance policy shared by every numerical comparison in the package.

Adjacency matrices here are tiny 0/1 matrices, so these are loose for n <= 24.
``ENERGAME_TOL`` overrides the core tolerance for experiments.
"""

from __future__ import annotations

import os

TOL_EIG_PER_VERTEX = 1e-10
TOL_SUM = 1e-8
TOL_SYM = 1e-9
TOL_CORE_DEFAULT = 1e-8
# Violations must survive recomputation at this tolerance to count.
TOL_REVERIFY = 1e-10


def tol_eig(n: int) -> float:
    return TOL_EIG_PER_VERTEX * max(n, 1)


def tol_core() -> float:
    raw = os.environ.get("ENERGAME_TOL")
    if not raw:
        return TOL_CORE_DEFAULT
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"ENERGAME_TOL must be a float, got {raw!r}") from exc
    if not value >= 0:
        raise ValueError(f"ENERGAME_TOL must be non-negative, got {raw!r}")
    return value


def as_dict() -> dict[str, float]:
    return {
        "tol_eig_per_vertex": TOL_EIG_PER_VERTEX,
        "tol_sum": TOL_SUM,
        "tol_sym": TOL_SYM,
        "tol_core": tol_core(),
        "tol_reverify": TOL_REVERIFY,
    }
