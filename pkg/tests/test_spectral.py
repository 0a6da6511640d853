import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energame.bounds import is_bipartite
from energame.graph import Graph, complete, complete_bipartite, cycle, enumerate_labeled_graphs, path, star
from energame.spectral import (
    abs_pow,
    eig_symmetric,
    eigenvalues,
    energy,
    energy_trace_path,
    matrix_abs_pow,
    p_energy,
    spectrum_residuals,
    vertex_energies,
    vertex_energy_profiles,
)
from energame.tolerances import TOL_SUM, tol_eig

from conftest import SQRT2, random_graph

GRID = (1.0, 1.5, 2.0, 3.0)


def test_k2_spectrum():
    assert np.allclose(eig_symmetric(complete(2)).eigenvalues, [1, -1])


@pytest.mark.parametrize("n", range(2, 11))
def test_star_spectrum(n):
    vals = eigenvalues(star(n))
    r = math.sqrt(n - 1)
    assert vals[0] == pytest.approx(r) and vals[-1] == pytest.approx(-r)
    assert np.allclose(vals[1:-1], 0, atol=1e-12)


def test_c4_spectrum():
    assert np.allclose(eig_symmetric(cycle(4)).eigenvalues, [2, 0, 0, -2], atol=1e-12)


def test_spectrum_invariants(rng):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(1, 15)))
        spec = eig_symmetric(g)
        res = spectrum_residuals(g, spec)
        assert res["eigen"] <= tol_eig(g.n) * max(1, g.max_degree)
        assert res["orthonormal"] <= tol_eig(g.n)
        assert res["trace"] <= tol_eig(g.n) * g.n
        assert np.all(np.diff(spec.eigenvalues) <= 0)
        assert np.allclose(spec.reconstruct(), g.adjacency(), atol=1e-10)


def test_deterministic():
    g = cycle(7)
    a, b = eig_symmetric(g), eig_symmetric(g)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_matrix_abs_pow_p2_is_a_squared(rng):
    g = random_graph(rng, 9)
    a = g.adjacency().astype(float)
    assert np.allclose(matrix_abs_pow(eig_symmetric(g), 2), a @ a, atol=TOL_SUM)


def test_matrix_abs_pow_p0_nonsingular_is_identity():
    # K2 and C6 have no zero eigenvalue
    for g in (complete(2), cycle(6)):
        assert np.allclose(matrix_abs_pow(eig_symmetric(g), 0), np.eye(g.n), atol=1e-10)


def test_matrix_abs_pow_k2_closed_form():
    m = matrix_abs_pow(eig_symmetric(complete(2)), 1)
    assert np.allclose(m, np.eye(2), atol=1e-12)
    assert energy(complete(2)) == pytest.approx(2)


def test_matrix_abs_pow_symmetric_psd(rng):
    g = random_graph(rng, 10)
    for p in (0.5, 1, 1.7, 3):
        m = matrix_abs_pow(eig_symmetric(g), p)
        assert np.array_equal(m, m.T)
        assert np.linalg.eigvalsh(m).min() >= -1e-10


def test_matrix_abs_pow_rejects_negative_p():
    with pytest.raises(ValueError):
        matrix_abs_pow(eig_symmetric(path(3)), -1)


def test_abs_pow_zero_exponent_support():
    assert np.array_equal(abs_pow(np.array([2.0, 0.0, -1.0]), 0), [1.0, 0.0, 1.0])


def test_p3_energy_and_vertex_energies():
    assert energy(path(3)) == pytest.approx(2 * SQRT2, abs=1e-12)
    prof = vertex_energies(path(3))
    assert np.allclose(prof.per_vertex, [1 / SQRT2, SQRT2, 1 / SQRT2], atol=1e-12)
    assert prof.total == pytest.approx(2 * SQRT2)


@pytest.mark.parametrize("n", range(2, 12))
def test_star_energies(n):
    r = math.sqrt(n - 1)
    assert energy(star(n)) == pytest.approx(2 * r)
    e = vertex_energies(star(n)).per_vertex
    assert e[0] == pytest.approx(r)
    assert np.allclose(e[1:], 1 / r)


def test_empty_graph_energy():
    g = Graph.from_edges(4, [])
    assert energy(g) == 0
    assert np.array_equal(vertex_energies(g).per_vertex, np.zeros(4))
    assert energy(Graph.from_edges(0, [])) == 0


def test_p2_vertex_energy_is_degree(rng):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(1, 12)))
        assert np.allclose(vertex_energies(g, 2).per_vertex, g.degrees, atol=TOL_SUM)
        assert p_energy(g, 2) == pytest.approx(2 * g.m, abs=TOL_SUM)


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 4])
def test_complete_graph_p_energy(n, p):
    assert p_energy(complete(n), p) == pytest.approx((n - 1) ** p + (n - 1), abs=1e-9)


def test_p1_coincides_with_energy(rng):
    g = random_graph(rng, 8)
    assert p_energy(g, 1) == pytest.approx(energy(g), abs=1e-12)


def test_p_below_one_rejected():
    for fn in (p_energy, vertex_energies):
        with pytest.raises(ValueError):
            fn(path(3), 0.5)


def test_efficiency_all_graphs_n4():
    for g in enumerate_labeled_graphs(4):
        for p, prof in vertex_energy_profiles(g, GRID).items():
            assert prof.total == pytest.approx(p_energy(g, p), abs=TOL_SUM)
            assert prof.per_vertex.min() >= 0


def test_dual_path(rng):
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(1, 14)))
        assert energy(g) == pytest.approx(energy_trace_path(g), abs=1e-9)


def test_component_additivity(rng):
    g1, g2 = random_graph(rng, 5), random_graph(rng, 6)
    u = g1.disjoint_union(g2)
    assert energy(u) == pytest.approx(energy(g1) + energy(g2), abs=TOL_SUM)
    joined = np.concatenate([vertex_energies(g1).per_vertex, vertex_energies(g2).per_vertex])
    assert np.allclose(vertex_energies(u).per_vertex, joined, atol=TOL_SUM)


@given(st.integers(1, 9), st.integers(0, 2**32 - 1), st.sampled_from(GRID))
@settings(max_examples=60, deadline=None)
def test_permutation_equivariance(n, seed, p):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    perm = rng.permutation(n)
    e = vertex_energies(g, p).per_vertex
    e_perm = vertex_energies(g.relabel(perm), p).per_vertex
    assert np.allclose(e_perm[perm], e, atol=TOL_SUM)


@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_schatten_and_normalized_monotonicity(n, seed):
    g = random_graph(np.random.default_rng(seed), n)
    if g.m == 0:
        return
    tot = {p: p_energy(g, p) for p in GRID}
    for p in GRID:
        for q in GRID:
            if p < q:
                assert tot[p] ** (1 / p) >= tot[q] ** (1 / q) - 1e-9
                assert (tot[p] / n) ** (1 / p) <= (tot[q] / n) ** (1 / q) + 1e-9


@pytest.mark.parametrize("g", [star(6), cycle(6), path(7), complete_bipartite(2, 4)])
@pytest.mark.parametrize("p", GRID)
def test_bipartite_split(g, p):
    left, right = is_bipartite(g)
    e = vertex_energies(g, p).per_vertex
    assert e[list(left)].sum() == pytest.approx(e[list(right)].sum(), abs=TOL_SUM)


def test_negative_roundoff_is_clamped(monkeypatch, caplog):
    import energame.spectral as spectral

    monkeypatch.setattr(spectral, "matrix_abs_pow", lambda spec, p: np.diag([-1e-12, -1e-6, 1.0]))
    prof = spectral.profile_from_spectrum(eig_symmetric(path(3)), 1)
    assert np.array_equal(prof.per_vertex, [0.0, 0.0, 1.0])
    # only the entry below -tol_sum is flagged
    assert prof.clamped == (1,)
    assert "clamped" in caplog.text


def test_no_asymmetry_warning_on_normal_input(rng, caplog):
    matrix_abs_pow(eig_symmetric(random_graph(rng, 12)), 1.5)
    assert "asymmetric" not in caplog.text
