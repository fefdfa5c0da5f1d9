"""Hidden target graphs and vertex-set (bitset) utilities.

Vertices are 0-indexed everywhere in the library; the plain-text file
format is 1-indexed and conversion happens only in ``read_graph`` /
``write_graph``.  Vertex sets are Python ints used as bitsets (bit v set
means vertex v is in the set), which keeps membership tests, unions and
the transcript hex encoding cheap.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .errors import ParameterError

Edge = tuple[int, int]


def bitset(members: Iterable[int]) -> int:
    """Pack an iterable of vertex ids into a bitset."""
    q = 0
    for v in members:
        q |= 1 << int(v)
    return q


def bits(q: int) -> Iterator[int]:
    """Iterate the vertex ids present in a bitset, ascending."""
    while q:
        low = q & -q
        yield low.bit_length() - 1
        q ^= low


def bitset_to_array(q: int, n: int) -> np.ndarray:
    """Bitset -> boolean membership vector of length n."""
    out = np.zeros(n, dtype=bool)
    for v in bits(q):
        out[v] = True
    return out


def array_to_bitset(row: np.ndarray) -> int:
    return bitset(int(v) for v in np.nonzero(row)[0])


def full_set(n: int) -> int:
    return (1 << n) - 1


def normalize_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ParameterError(f"self-loop {u} is not allowed")
    return (u, v) if u < v else (v, u)


class HiddenGraph:
    """The target simple graph, known only to the oracle side.

    Immutable after construction and safe to share across concurrent
    sessions.
    """

    def __init__(self, n: int, edges: Iterable[Edge]):
        if n <= 0:
            raise ParameterError("vertex count must be positive")
        self.n = n
        es = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u},{v}) outside [0,{n})")
            es.add(normalize_edge(u, v))
        self.edges: frozenset[Edge] = frozenset(es)
        self.m = len(self.edges)
        # per-edge masks for single-query answering
        self._edge_masks = [(1 << u) | (1 << v) for u, v in self.edges]
        # endpoint arrays for batched answering
        if self.m:
            arr = np.array(sorted(self.edges), dtype=np.int64)
            self._eu, self._ev = arr[:, 0], arr[:, 1]
        else:
            self._eu = self._ev = np.zeros(0, dtype=np.int64)
        self._adj = [0] * n
        for u, v in self.edges:
            self._adj[u] |= 1 << v
            self._adj[v] |= 1 << u

    # -- basic views -------------------------------------------------

    def degree(self, v: int) -> int:
        return self._adj[v].bit_count()

    def degrees(self) -> np.ndarray:
        return np.array([self._adj[v].bit_count() for v in range(self.n)])

    def adjacency_bits(self, v: int) -> int:
        return self._adj[v]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        if self.m:
            a[self._eu, self._ev] = True
            a[self._ev, self._eu] = True
        return a

    def has_edge(self, u: int, v: int) -> bool:
        return normalize_edge(u, v) in self.edges

    def neighbours(self, s: int) -> int:
        """Neighbour set of the vertex set s: vertices outside s adjacent
        to something inside s."""
        out = 0
        for v in bits(s):
            out |= self._adj[v]
        return out & ~s

    def positive_degree_vertices(self) -> list[int]:
        return [v for v in range(self.n) if self._adj[v]]

    # -- oracle primitives (see oracle.OracleSession for accounting) --

    def answer_bits(self, q: int) -> bool:
        """True iff some edge has both endpoints in the query bitset."""
        for mask in self._edge_masks:
            if q & mask == mask:
                return True
        return False

    def answer_pairwise_scan(self, q: int) -> bool:
        """Independent cross-check: scan all vertex pairs inside q against
        the adjacency structure instead of iterating edges."""
        inside = list(bits(q))
        for i, u in enumerate(inside):
            au = self._adj[u]
            for v in inside[i + 1:]:
                if (au >> v) & 1:
                    return True
        return False

    def answer_batch(self, rows: np.ndarray) -> np.ndarray:
        """Answer a (t, n) boolean query matrix in one vectorized pass."""
        if rows.shape[1] != self.n:
            raise ParameterError("query matrix width != n")
        if not self.m:
            return np.zeros(rows.shape[0], dtype=bool)
        return (rows[:, self._eu] & rows[:, self._ev]).any(axis=1)

    def __eq__(self, other):
        return (isinstance(other, HiddenGraph)
                and self.n == other.n and self.edges == other.edges)

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"HiddenGraph(n={self.n}, m={self.m})"


# -- plain-text graph files (1-indexed on disk) ----------------------

def write_graph(g: HiddenGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in sorted(g.edges):
            fh.write(f"{u + 1} {v + 1}\n")


def read_graph(path) -> HiddenGraph:
    edges = []
    header = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                if len(parts) != 2:
                    raise ParameterError(f"bad header line: {line!r}")
                header = (int(parts[0]), int(parts[1]))
                continue
            u, v = int(parts[0]), int(parts[1])
            if not (1 <= u < v):
                raise ParameterError(f"edge lines must satisfy 1 <= u < v: {line!r}")
            edges.append((u - 1, v - 1))
    if header is None:
        raise ParameterError("empty graph file")
    n, m = header
    if len(edges) != m:
        raise ParameterError(f"header claims {m} edges, file has {len(edges)}")
    return HiddenGraph(n, edges)
