"""Adjacency spectra and the energies built from them.

Every quantity here is a function of ``U f(D) U^T`` for ``f = |.|^p``, so the
choice of eigenbasis inside a degenerate eigenspace does not matter.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .tolerances import TOL_SUM, TOL_SYM, tol_eig

log = logging.getLogger(__name__)

MAX_SPECTRAL_N = 62


class EigenError(RuntimeError):
    """The symmetric eigensolver failed to converge."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with an orthonormal eigenbasis (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.T


@dataclass(frozen=True)
class EnergyProfile:
    p: float
    per_vertex: np.ndarray
    total: float
    clamped: tuple[int, ...] = ()


def _check_p(p: float, minimum: float = 1.0) -> float:
    p = float(p)
    if not p >= minimum:
        raise ValueError(f"Schatten exponent must be >= {minimum:g}, got {p}")
    return p


def eig_symmetric(g: Graph) -> Spectrum:
    """Dense symmetric eigendecomposition of the adjacency matrix of ``g``."""
    if g.n > MAX_SPECTRAL_N:
        raise ValueError(f"spectral code supports n <= {MAX_SPECTRAL_N}, got {g.n}")
    if g.n == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)))
    try:
        vals, vecs = np.linalg.eigh(g.adjacency())
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge for {g}") from exc
    order = np.argsort(-vals, kind="stable")
    return Spectrum(vals[order], vecs[:, order])


def eigenvalues(g: Graph) -> np.ndarray:
    """Descending eigenvalues only (cheaper than :func:`eig_symmetric`)."""
    if g.n == 0:
        return np.zeros(0)
    try:
        vals = np.linalg.eigvalsh(g.adjacency())
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge for {g}") from exc
    return vals[::-1].copy()


def spectrum_residuals(g: Graph, spec: Spectrum) -> dict[str, float]:
    """Residuals backing the Spectrum invariants (eigen-equation, orthonormality, trace)."""
    a = g.adjacency()
    u = spec.eigenvectors
    if g.n == 0:
        return {"eigen": 0.0, "orthonormal": 0.0, "trace": 0.0}
    eig_res = np.abs(a @ u - u * spec.eigenvalues).max()
    ortho_res = np.abs(u.T @ u - np.eye(g.n)).max()
    return {
        "eigen": float(eig_res / max(1.0, np.abs(a).sum(axis=1).max())),
        "orthonormal": float(ortho_res),
        "trace": float(abs(spec.eigenvalues.sum())),
    }


def abs_pow(vals: np.ndarray, p: float, zero_tol: float = 0.0) -> np.ndarray:
    """``|lambda|**p`` elementwise; for ``p == 0`` this is the support indicator."""
    a = np.abs(vals)
    if p == 0:
        return (a > zero_tol).astype(float)
    return a**p


def matrix_abs_pow(spec: Spectrum, p: float) -> np.ndarray:
    """``U diag(|lambda|^p) U^T``, symmetrized.

    At ``p = 0`` eigenvalues with ``|lambda| <= tol_eig`` are treated as exact
    zeros, giving the projector onto the range of ``A``.
    """
    p = _check_p(p, minimum=0.0)
    u = spec.eigenvectors
    m = (u * abs_pow(spec.eigenvalues, p, tol_eig(spec.n))) @ u.T
    asym = np.abs(m - m.T).max() if spec.n else 0.0
    if asym > TOL_SYM:
        log.warning("|A|^%g asymmetric by %.3g before symmetrizing", p, asym)
    return (m + m.T) / 2


def energy(g: Graph) -> float:
    """Graph energy: the sum of absolute adjacency eigenvalues."""
    return float(np.abs(eigenvalues(g)).sum())


def energy_trace_path(g: Graph) -> float:
    """Energy as ``trace(U |D| U^T)``; independent of the eigenvalue-sum path."""
    return float(np.trace(matrix_abs_pow(eig_symmetric(g), 1.0)))


def p_energy(g: Graph, p: float) -> float:
    p = _check_p(p)
    return float(abs_pow(eigenvalues(g), p).sum())


def profile_from_spectrum(spec: Spectrum, p: float) -> EnergyProfile:
    p = _check_p(p)
    diag = np.diag(matrix_abs_pow(spec, p)).copy()
    low = np.nonzero(diag < 0)[0]
    flagged = tuple(int(i) for i in low if diag[i] < -TOL_SUM)
    if flagged:
        log.warning("vertex energies below -tol_sum at %s (p=%g); clamped", flagged, p)
    diag[low] = 0.0
    return EnergyProfile(p, diag, float(diag.sum()), flagged)


def vertex_energies(g: Graph, p: float = 1.0) -> EnergyProfile:
    """Diagonal of ``|A|^p``: the per-vertex share of the p-energy."""
    return profile_from_spectrum(eig_symmetric(g), p)


def vertex_energy_profiles(g: Graph, p_grid) -> dict[float, EnergyProfile]:
    spec = eig_symmetric(g)
    return {float(p): profile_from_spectrum(spec, p) for p in p_grid}


def induced_eigenvalues(adj: np.ndarray, masks: np.ndarray, k: int) -> np.ndarray:
    """Eigenvalues of the induced submatrices for masks that all have popcount ``k``.

    Returns an array of shape ``(len(masks), k)``.
    """
    n = adj.shape[0]
    if k == 0 or len(masks) == 0:
        return np.zeros((len(masks), k))
    bits = (masks[:, None] >> np.arange(n)) & 1
    idx = np.nonzero(bits)[1].reshape(len(masks), k)
    sub = adj[idx[:, :, None], idx[:, None, :]]
    try:
        return np.linalg.eigvalsh(sub)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge on induced submatrices of size {k}") from exc
