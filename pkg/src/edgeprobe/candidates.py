"""The learner's working hypothesis: a shrinking set of candidate pairs."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .graphs import Edge


def pairs_within_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All within-row vertex pairs of a boolean (t, n) matrix.

    Returns index arrays (uu, vv) with one entry per (row, unordered pair)
    occurrence.  Vectorized by grouping rows of equal popcount, so the cost
    is O(total pairs), not O(t * n^2).
    """
    qidx, vidx = np.nonzero(rows)
    if qidx.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    sizes = np.bincount(qidx, minlength=rows.shape[0])
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    out_u, out_v = [], []
    for s in np.unique(sizes):
        if s < 2:
            continue
        which = np.nonzero(sizes == s)[0]
        starts = offsets[which]
        block = vidx[starts[:, None] + np.arange(s)]
        iu, iv = np.triu_indices(int(s), k=1)
        out_u.append(block[:, iu].ravel())
        out_v.append(block[:, iv].ravel())
    if not out_u:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(out_u), np.concatenate(out_v)


def cooccurrence(rows: np.ndarray, chunk_bytes: int = 1 << 24) -> np.ndarray:
    """(n, n) boolean matrix of pairs co-present in at least one row,
    computed on bit-packed columns (cheap when rows are dense relative to
    the domain)."""
    t, n = rows.shape
    words = np.packbits(rows.T, axis=1)  # (n, ceil(t/8)) uint8
    out = np.zeros((n, n), dtype=bool)
    step = max(1, chunk_bytes // max(1, n * words.shape[1]))
    for s in range(0, n, step):
        blk = words[s:s + step]
        out[s:s + step] = (blk[:, None, :] & words[None, :, :]).any(axis=2)
    return out


class CandidateEdgeSet:
    """Symmetric boolean relation over [n] x [n] minus the diagonal.

    Starts from all binom(n,2) pairs and only ever shrinks.  The degree
    index is recomputed lazily after mutations, so it is always consistent
    with the surviving pairs when read.
    """

    def __init__(self, n: int, present: np.ndarray):
        self.n = n
        self.present = present
        self._degrees: np.ndarray | None = None

    @classmethod
    def all_pairs(cls, n: int) -> "CandidateEdgeSet":
        if n < 1:
            raise ParameterError("n must be positive")
        present = np.ones((n, n), dtype=bool)
        np.fill_diagonal(present, False)
        return cls(n, present)

    @classmethod
    def from_edges(cls, n: int, edges) -> "CandidateEdgeSet":
        present = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            present[u, v] = present[v, u] = True
        return cls(n, present)

    # -- mutation ------------------------------------------------------

    def eliminate_pairs(self, uu: np.ndarray, vv: np.ndarray) -> None:
        self.present[uu, vv] = False
        self.present[vv, uu] = False
        self._degrees = None

    def eliminate_within(self, rows: np.ndarray) -> None:
        """Drop every pair co-present in any row of a boolean (t, n) matrix.

        Two strategies with the same result: explicit pair enumeration
        (cost ~ sum of |row|^2, good for sparse rows) or bit-packed
        co-occurrence (cost ~ n^2 t / 8, good for dense rows over small
        domains); the cheaper one is picked per call.
        """
        if rows.shape[0] == 0:
            return
        sizes = rows.sum(axis=1, dtype=np.int64)
        pair_cost = int((sizes * (sizes - 1) // 2).sum())
        packed_cost = self.n * self.n * (rows.shape[0] // 8 + 1) // 16
        if pair_cost <= packed_cost:
            uu, vv = pairs_within_rows(rows)
            if uu.size:
                self.eliminate_pairs(uu, vv)
        else:
            self.present &= ~cooccurrence(rows)
            self._degrees = None

    def remove_pair(self, u: int, v: int) -> None:
        self.present[u, v] = self.present[v, u] = False
        self._degrees = None

    def keep_only(self, edges) -> None:
        kept = np.zeros_like(self.present)
        for u, v in edges:
            kept[u, v] = kept[v, u] = True
        self.present = self.present & kept
        self._degrees = None

    # -- views ------------------------------------------------------------

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = self.present.sum(axis=1).astype(np.int64)
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self.degrees()[v])

    def has_pair(self, u: int, v: int) -> bool:
        return bool(self.present[u, v])

    def neighbours_mask(self, v: int) -> np.ndarray:
        return self.present[v]

    def edge_count(self) -> int:
        return int(self.present.sum()) // 2

    def edges(self) -> frozenset[Edge]:
        uu, vv = np.nonzero(np.triu(self.present, k=1))
        return frozenset((int(u), int(v)) for u, v in zip(uu, vv))

    def contains_all(self, edges) -> bool:
        return all(self.present[u, v] for u, v in edges)

    def copy(self) -> "CandidateEdgeSet":
        return CandidateEdgeSet(self.n, self.present.copy())
