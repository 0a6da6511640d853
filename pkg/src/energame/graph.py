"""Simple undirected labeled graphs, coalition bitmasks, formats and enumeration.

Vertices are the dense integers ``0..n-1``. A coalition (vertex subset) is an
``int`` bitmask with bit ``i`` standing for vertex ``i``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

MAX_MASK_VERTICES = 24
MAX_GRAPH6_VERTICES = 62
MAX_ENUM_GRAPHS_N = 7
MAX_ENUM_TREES_N = 8


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or graph6 input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SizeCapError(ValueError):
    """Raised when a request exceeds a documented size ceiling."""


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..n-1``.

    ``labels`` maps each vertex back to a label in some parent graph (set by
    :func:`induced`); it does not take part in equality.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge {(i, j)} not normalized or out of range for n={self.n}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.n)))
        elif len(self.labels) != self.n:
            raise ValueError("labels must have one entry per vertex")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        normed = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            normed.add(_norm_edge(int(i), int(j)))
        return cls(n, frozenset(normed))

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "Graph":
        adj = np.asarray(adj)
        n = adj.shape[0]
        if adj.shape != (n, n) or not np.array_equal(adj, adj.T):
            raise ValueError("adjacency matrix must be square and symmetric")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency matrix has a nonzero diagonal")
        iu, ju = np.nonzero(np.triu(adj, 1))
        return cls(n, frozenset(zip(iu.tolist(), ju.tolist())))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        nb = [0] * self.n
        for i, j in self.edges:
            nb[i] |= 1 << j
            nb[j] |= 1 << i
        return tuple(nb)

    def neighbors(self, v: int) -> list[int]:
        return mask_to_vertices(self.neighbor_masks[v])

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n))
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = 1.0
        return adj

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def relabel(self, perm: Iterable[int]) -> "Graph":
        """Return the graph with vertex ``i`` renamed to ``perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of 0..n-1")
        return Graph.from_edges(self.n, ((perm[i], perm[j]) for i, j in self.edges))

    def disjoint_union(self, other: "Graph") -> "Graph":
        shift = self.n
        edges = list(self.edges) + [(i + shift, j + shift) for i, j in other.edges]
        return Graph.from_edges(self.n + other.n, edges)

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for start in range(self.n):
            if seen[start]:
                continue
            seen[start] = True
            comp, queue = [], deque([start])
            while queue:
                v = queue.popleft()
                comp.append(v)
                for u in self.neighbors(v):
                    if not seen[u]:
                        seen[u] = True
                        queue.append(u)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def to_graph6(self) -> str:
        return encode_graph6(self)

    def __str__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, graph6={encode_graph6(self) if self.n <= MAX_GRAPH6_VERTICES else '?'})"


# -- coalitions -------------------------------------------------------------

def check_mask(n: int, mask: int) -> None:
    if n > MAX_MASK_VERTICES:
        raise SizeCapError(f"coalition bitmasks support n <= {MAX_MASK_VERTICES}, got n={n}")
    if mask < 0 or mask >> n:
        raise ValueError(f"mask {mask:#x} has bits outside 0..{n - 1}")


def mask_from_vertices(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def mask_to_vertices(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def induced(g: Graph, mask: int) -> Graph:
    """Induced subgraph on ``mask``, relabeled ``0..k-1`` in ascending order.

    The result's ``labels`` give the original vertex of each new vertex.
    """
    if mask < 0 or mask >> g.n:
        raise ValueError(f"mask {mask:#x} has bits outside 0..{g.n - 1}")
    keep = mask_to_vertices(mask)
    index = {v: k for k, v in enumerate(keep)}
    edges = frozenset(
        (index[i], index[j]) for i, j in g.edges if i in index and j in index
    )
    return Graph(len(keep), edges, tuple(g.labels[v] for v in keep))


# -- generators -------------------------------------------------------------

def _require_positive(**sizes: int) -> None:
    for name, value in sizes.items():
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")


def path(n: int) -> Graph:
    _require_positive(n=n)
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def star(n: int) -> Graph:
    """Star on ``n`` vertices with center 0."""
    _require_positive(n=n)
    return Graph.from_edges(n, ((0, i) for i in range(1, n)))


def cycle(n: int) -> Graph:
    _require_positive(n=n)
    if n < 3:
        raise ValueError("a simple cycle needs n >= 3")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def complete(n: int) -> Graph:
    _require_positive(n=n)
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b}: parts ``0..a-1`` and ``a..a+b-1``."""
    _require_positive(a=a, b=b)
    return Graph.from_edges(a + b, ((i, a + j) for i in range(a) for j in range(b)))


def empty(n: int) -> Graph:
    return Graph(n, frozenset())


GENERATORS = {
    "path": path,
    "star": star,
    "cycle": cycle,
    "complete": complete,
    "kbip": complete_bipartite,
    "empty": empty,
}


def from_generator_spec(text: str) -> Graph:
    """Build a graph from strings like ``"path:6"`` or ``"kbip:2,3"``."""
    name, sep, args = text.partition(":")
    if not sep or name not in GENERATORS:
        raise GraphFormatError(f"unknown generator spec {text!r}; expected one of {sorted(GENERATORS)}")
    try:
        params = [int(a) for a in args.split(",")]
    except ValueError:
        raise GraphFormatError(f"bad generator arguments in {text!r}") from None
    try:
        return GENERATORS[name](*params)
    except (TypeError, ValueError) as exc:
        raise GraphFormatError(f"{text!r}: {exc}") from None


# -- edge-list format -------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    """Parse ``"n\\n"`` followed by ``"i j"`` lines. Duplicate edges collapse."""
    lines = text.replace("\r\n", "\n").split("\n")
    n = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        if n is None:
            if len(tokens) != 1:
                raise GraphFormatError("expected vertex count on the first line", lineno)
            try:
                n = int(tokens[0])
            except ValueError:
                raise GraphFormatError(f"malformed integer {tokens[0]!r}", lineno) from None
            if n < 0:
                raise GraphFormatError("vertex count must be non-negative", lineno)
            continue
        if len(tokens) != 2:
            raise GraphFormatError(f"expected 'i j', got {raw.strip()!r}", lineno)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"malformed integer in {raw.strip()!r}", lineno) from None
        for v in (i, j):
            if not 0 <= v < n:
                raise GraphFormatError(f"vertex {v} out of range 0..{n - 1}", lineno)
        if i == j:
            raise GraphFormatError(f"self-loop at vertex {i}", lineno)
        edges.add(_norm_edge(i, j))
    if n is None:
        raise GraphFormatError("empty input: missing vertex count", 1)
    return Graph(n, frozenset(edges))


def format_edge_list(g: Graph) -> str:
    return "\n".join([str(g.n)] + [f"{i} {j}" for i, j in g.sorted_edges()]) + "\n"


# -- graph6 -----------------------------------------------------------------

def _upper_pairs(n: int) -> list[tuple[int, int]]:
    # column-major order of the strict upper triangle: (0,1),(0,2),(1,2),(0,3),...
    return [(i, j) for j in range(1, n) for i in range(j)]


def encode_graph6(g: Graph) -> str:
    if g.n > MAX_GRAPH6_VERTICES:
        raise SizeCapError(f"graph6 encoding supports n <= {MAX_GRAPH6_VERTICES}")
    pairs = _upper_pairs(g.n)
    nbytes = -(-len(pairs) // 6)
    out = [chr(g.n + 63)]
    for b in range(nbytes):
        group = 0
        for k in range(6):
            idx = 6 * b + k
            bit = idx < len(pairs) and pairs[idx] in g.edges
            group = (group << 1) | int(bit)
        out.append(chr(group + 63))
    return "".join(out)


def parse_graph6(line: str) -> Graph:
    text = line.strip()
    if text.startswith(">>graph6<<"):
        text = text[len(">>graph6<<"):]
    if not text:
        raise GraphFormatError("empty graph6 string")
    for pos, ch in enumerate(text):
        if not 63 <= ord(ch) <= 126:
            raise GraphFormatError(f"character {ch!r} at position {pos} outside 63..126")
    n = ord(text[0]) - 63
    if n > MAX_GRAPH6_VERTICES:
        raise GraphFormatError(f"bad size byte {text[0]!r}: only n <= {MAX_GRAPH6_VERTICES} supported")
    pairs = _upper_pairs(n)
    nbytes = -(-len(pairs) // 6)
    body = text[1:]
    if len(body) < nbytes:
        raise GraphFormatError(f"truncated bit field: need {nbytes} bytes for n={n}, got {len(body)}")
    if len(body) > nbytes:
        raise GraphFormatError(f"trailing data: need {nbytes} bytes for n={n}, got {len(body)}")
    edges = set()
    for idx in range(nbytes * 6):
        group = ord(body[idx // 6]) - 63
        bit = (group >> (5 - idx % 6)) & 1
        if not bit:
            continue
        if idx >= len(pairs):
            raise GraphFormatError("nonzero padding bits")
        edges.add(pairs[idx])
    return Graph(n, frozenset(edges))


# -- enumeration ------------------------------------------------------------

def graph_from_index(n: int, index: int) -> Graph:
    """Labeled graph whose edge set is bit ``k`` of ``index`` <-> k-th graph6 pair."""
    pairs = _upper_pairs(n)
    if not 0 <= index < 1 << len(pairs):
        raise ValueError(f"index {index} out of range for n={n}")
    return Graph(n, frozenset(p for k, p in enumerate(pairs) if index >> k & 1))


def count_labeled_graphs(n: int) -> int:
    return 1 << (n * (n - 1) // 2)


def enumerate_labeled_graphs(n: int, start: int = 0, stop: int | None = None) -> Iterator[Graph]:
    """All labeled graphs on ``n`` vertices in ascending edge-bitmask order.

    ``start``/``stop`` select an index range so parallel sweeps can partition
    the enumeration without sharing a stream.
    """
    if n > MAX_ENUM_GRAPHS_N:
        raise SizeCapError(f"labeled-graph enumeration supports n <= {MAX_ENUM_GRAPHS_N}, got {n}")
    if n < 0:
        raise ValueError("n must be non-negative")
    total = count_labeled_graphs(n)
    stop = total if stop is None else min(stop, total)
    for index in range(start, stop):
        yield graph_from_index(n, index)


def prufer_decode(seq: Iterable[int], n: int) -> Graph:
    seq = list(seq)
    if n == 1:
        return Graph(1, frozenset())
    if len(seq) != n - 2:
        raise ValueError("Prufer sequence must have length n-2")
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = next(u for u in range(n) if degree[u] == 1)
        edges.append((leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = (x for x in range(n) if degree[x] == 1)
    edges.append((u, w))
    return Graph.from_edges(n, edges)


def count_labeled_trees(n: int) -> int:
    return 1 if n <= 2 else n ** (n - 2)


def tree_from_index(n: int, index: int) -> Graph:
    """The ``index``-th labeled tree: its Prufer sequence is ``index`` in base ``n``."""
    total = count_labeled_trees(n)
    if not 0 <= index < total:
        raise ValueError(f"index {index} out of range for n={n}")
    if n <= 2:
        return prufer_decode([], n)
    seq = []
    for _ in range(n - 2):
        index, digit = divmod(index, n)
        seq.append(digit)
    return prufer_decode(reversed(seq), n)


def enumerate_labeled_trees(n: int) -> Iterator[Graph]:
    """All ``n**(n-2)`` labeled trees, in lexicographic Prufer-sequence order."""
    if n > MAX_ENUM_TREES_N:
        raise SizeCapError(f"labeled-tree enumeration supports n <= {MAX_ENUM_TREES_N}, got {n}")
    if n < 1:
        raise ValueError("trees need n >= 1")
    if n <= 2:
        yield prufer_decode([], n)
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        yield prufer_decode(seq, n)
