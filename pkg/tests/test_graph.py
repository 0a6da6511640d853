import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energame.graph import (
    Graph,
    GraphFormatError,
    SizeCapError,
    complete,
    complete_bipartite,
    count_labeled_graphs,
    count_labeled_trees,
    cycle,
    encode_graph6,
    enumerate_labeled_graphs,
    enumerate_labeled_trees,
    format_edge_list,
    from_generator_spec,
    graph_from_index,
    induced,
    mask_from_vertices,
    mask_to_vertices,
    parse_edge_list,
    parse_graph6,
    path,
    prufer_decode,
    star,
)

from conftest import random_graph


def oracle_graph6(n: int, edges) -> str:
    """Independent encoder: build the bit string literally, then cut it into 6-bit groups."""
    edge_set = {tuple(sorted(e)) for e in edges}
    bits = "".join("1" if (i, j) in edge_set else "0" for j in range(n) for i in range(j))
    bits += "0" * (-len(bits) % 6)
    return chr(n + 63) + "".join(chr(int(bits[k:k + 6], 2) + 63) for k in range(0, len(bits), 6))


@st.composite
def graphs(draw, max_n=9):
    n = draw(st.integers(0, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


# -- induced subgraphs -------------------------------------------------------

def test_induced_p3_ends_has_no_edges():
    h = induced(path(3), 0b101)
    assert h.n == 2 and h.m == 0
    assert h.labels == (0, 2)


def test_induced_full_mask_is_identity():
    g = cycle(5)
    assert induced(g, g.full_mask) == g


def test_induced_k4_triangle():
    assert induced(complete(4), 0b0111) == complete(3)


def test_induced_empty_mask():
    h = induced(complete(4), 0)
    assert h.n == 0 and h.m == 0


def test_induced_relabels_in_ascending_order():
    g = Graph.from_edges(5, [(1, 4), (2, 4), (0, 3)])
    h = induced(g, mask_from_vertices([1, 2, 4]))
    assert h.labels == (1, 2, 4)
    assert h.edges == frozenset({(0, 2), (1, 2)})


def test_mask_bits_above_n_rejected():
    with pytest.raises(ValueError):
        induced(path(3), 0b1000)


def test_mask_roundtrip():
    assert mask_to_vertices(mask_from_vertices([0, 3, 5])) == [0, 3, 5]


# -- generators --------------------------------------------------------------

def test_generators():
    assert path(4).sorted_edges() == [(0, 1), (1, 2), (2, 3)]
    assert star(4).degrees == (3, 1, 1, 1)
    assert cycle(4).m == 4 and set(cycle(4).degrees) == {2}
    assert complete(5).m == 10
    kb = complete_bipartite(2, 3)
    assert kb.m == 6 and kb.degrees == (3, 3, 2, 2, 2)


@pytest.mark.parametrize("spec,n,m", [("path:6", 6, 5), ("star:5", 5, 4), ("cycle:4", 4, 4),
                                      ("complete:4", 4, 6), ("kbip:2,3", 5, 6)])
def test_generator_specs(spec, n, m):
    g = from_generator_spec(spec)
    assert (g.n, g.m) == (n, m)


@pytest.mark.parametrize("spec", ["path", "blob:3", "path:x", "kbip:2"])
def test_bad_generator_specs(spec):
    with pytest.raises(ValueError):
        from_generator_spec(spec)


# -- edge lists ----------------------------------------------------------------

def test_edge_list_p3():
    assert parse_edge_list("3\n0 1\n1 2") == path(3)


def test_edge_list_edgeless():
    g = parse_edge_list("2\n")
    assert g.n == 2 and g.m == 0


def test_edge_list_dedup():
    g = parse_edge_list("3\n0 1\n1 0")
    assert g.edges == frozenset({(0, 1)})


def test_edge_list_whitespace_and_crlf():
    assert parse_edge_list("  3 \r\n\r\n 0   1\r\n1\t2\r\n") == path(3)


@pytest.mark.parametrize("text,line,fragment", [
    ("3\n0 1\n2 2\n", 3, "self-loop"),
    ("3\n0 1\n1 3\n", 3, "out of range"),
    ("3\n0 1\n\n-1 2\n", 4, "out of range"),
    ("3\n0 x\n", 2, "malformed"),
    ("x\n", 1, "malformed"),
    ("3\n0 1 2\n", 2, "expected"),
])
def test_edge_list_errors_name_the_line(text, line, fragment):
    with pytest.raises(GraphFormatError) as err:
        parse_edge_list(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)
    assert fragment in str(err.value)


def test_edge_list_roundtrip(rng):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(0, 10)))
        assert parse_edge_list(format_edge_list(g)) == g


# -- graph6 ----------------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [("A_", complete(2)), ("A?", Graph.from_edges(2, [])),
                                           ("Bg", path(3))])
def test_graph6_examples(text, expected):
    assert parse_graph6(text) == expected
    assert encode_graph6(expected) == text


def test_graph6_small_known():
    assert encode_graph6(Graph.from_edges(0, [])) == "?"
    assert encode_graph6(Graph.from_edges(1, [])) == "@"
    assert encode_graph6(complete(4)) == "C~"


def test_graph6_matches_independent_oracle_all_n_le_5():
    for n in range(6):
        for g in enumerate_labeled_graphs(n):
            text = encode_graph6(g)
            assert text == oracle_graph6(n, g.edges)
            assert parse_graph6(text) == g


def test_graph6_random_corpus_roundtrip(rng):
    lines = []
    for _ in range(1000):
        n = int(rng.integers(0, 63))
        lines.append(oracle_graph6(n, random_graph(rng, n, rng.random()).edges))
    for line in lines:
        assert encode_graph6(parse_graph6(line)) == line


def test_graph6_header_and_newline():
    assert parse_graph6(">>graph6<<Bg\n") == path(3)


@pytest.mark.parametrize("bad", ["", "B", "Bgg", "B!", "Bh", "~"])
def test_graph6_rejects(bad):
    with pytest.raises(GraphFormatError):
        parse_graph6(bad)


def test_graph6_size_cap():
    with pytest.raises(SizeCapError):
        encode_graph6(Graph.from_edges(63, []))


@given(graphs(max_n=20))
@settings(max_examples=200, deadline=None)
def test_graph6_roundtrip_property(g):
    assert parse_graph6(encode_graph6(g)) == g
    assert encode_graph6(g) == oracle_graph6(g.n, g.edges)


# -- enumeration -------------------------------------------------------------

@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 8), (4, 64), (5, 1024), (6, 32768)])
def test_labeled_graph_counts(n, count):
    assert count_labeled_graphs(n) == count


def test_enumeration_is_distinct_and_complete():
    seen = {g.edges for g in enumerate_labeled_graphs(4)}
    assert len(seen) == 64


def test_enumeration_slices_agree():
    full = list(enumerate_labeled_graphs(5))
    assert list(enumerate_labeled_graphs(5, 100, 200)) == full[100:200]
    assert graph_from_index(5, 777) == full[777]


def test_enumeration_cap():
    with pytest.raises(SizeCapError):
        list(enumerate_labeled_graphs(8, 0, 1))


@pytest.mark.parametrize("n", range(1, 8))
def test_cayley_counts(n):
    trees = list(enumerate_labeled_trees(n))
    assert len(trees) == count_labeled_trees(n) == (1 if n <= 2 else n ** (n - 2))
    assert all(t.m == n - 1 and t.is_connected() for t in trees)
    assert len({t.edges for t in trees}) == len(trees)


def test_trees_n5_stars_and_paths():
    trees = list(enumerate_labeled_trees(5))
    stars = [t for t in trees if t.max_degree == 4]
    paths = [t for t in trees if t.max_degree <= 2]
    assert len(stars) == 5
    assert len(paths) == math.factorial(5) // 2


def test_prufer_known():
    # sequence (3, 3) on 4 vertices: leaves 0, 1 and 2 all hang off 3
    assert prufer_decode([3, 3], 4) == star(4).relabel([3, 0, 1, 2])


# -- properties -----------------------------------------------------------------

@given(graphs(), st.data())
@settings(max_examples=100, deadline=None)
def test_relabel_preserves_degree_multiset(g, data):
    perm = data.draw(st.permutations(range(g.n)))
    h = g.relabel(perm)
    assert sorted(h.degrees) == sorted(g.degrees)
    for i in range(g.n):
        assert h.degrees[perm[i]] == g.degrees[i]


@given(graphs(max_n=8), st.data())
@settings(max_examples=100, deadline=None)
def test_induced_keeps_exactly_inner_edges(g, data):
    mask = data.draw(st.integers(0, (1 << g.n) - 1)) if g.n else 0
    h = induced(g, mask)
    back = {(h.labels[i], h.labels[j]) for i, j in h.edges}
    inside = {(i, j) for i, j in g.edges if mask >> i & 1 and mask >> j & 1}
    assert back == inside


def test_adjacency_roundtrip(rng):
    g = random_graph(rng, 7)
    a = g.adjacency()
    assert np.array_equal(a, a.T) and a.trace() == 0
    assert Graph.from_adjacency(a) == g


def test_components():
    g = path(3).disjoint_union(complete(2)).disjoint_union(Graph.from_edges(1, []))
    assert g.components() == [[0, 1, 2], [3, 4], [5]]
    assert not g.is_connected()
    assert list(itertools.chain.from_iterable(g.components())) == list(range(6))
