"""Partition-based algorithms for large vertex counts: learn the graph
over a random balanced partition of the vertices (the "set graph"), then
decode the actual endpoints inside each cell pair.

The Monte Carlo variant decodes endpoints with plain binary-index
queries; the Las Vegas variant decodes with the one-or code, whose
answers are trustworthy unconditionally (empty / one vertex / ERROR), so
every run either returns exactly the target or routes to the
deterministic fallback.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

from .config import DEFAULTS, Constants
from .detcodes import build_one_or_code
from .deterministic import fallback_or_adaptive
from .elimination import LearnResult, elimination_schedule_size, run_elimination
from .errors import ParameterError
from .graphs import Edge
from .oracle import OracleSession
from .randomness import SeedPair, derive_stream


def partition_vertices(n: int, u: int, seed: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Uniformly random balanced partition of [n] into u cells.

    Returns (cell_of, cells); cell sizes differ by at most one.
    """
    if not (1 <= u <= n):
        raise ParameterError("need 1 <= u <= n")
    key = np.array([seed & (2**64 - 1), derive_stream("partition", u)],
                   dtype=np.uint64)
    perm = Generator(Philox(key=key)).permutation(n)
    cell_of = np.empty(n, dtype=np.int64)
    cell_of[perm] = np.arange(n) % u
    cells = [np.nonzero(cell_of == c)[0] for c in range(u)]
    return cell_of, cells


def _set_graph_round(session: OracleSession, m: int, u: int,
                     cell_of: np.ndarray, delta: float, seed: SeedPair):
    """Elimination over the cell universe, lifted through cell unions."""
    p = 1.0 / (2 * m)
    t = elimination_schedule_size(u, m, float(m), p, delta)
    cand = run_elimination(session, p, t, seed, domain_size=u, cell_of=cell_of)
    return cand, t


def _index_bit_rows(host_row: np.ndarray, members: np.ndarray,
                    n: int) -> np.ndarray:
    """Presence query then one query per bit of the local index: row b
    adds the members whose local index has bit b set."""
    bits_needed = max(int(members.size - 1).bit_length(), 0)
    rows = np.repeat(host_row[None, :], 1 + bits_needed, axis=0)
    rows[0, members] = True
    for b in range(bits_needed):
        sel = members[(np.arange(members.size) >> b) & 1 == 1]
        rows[1 + b, sel] = True
    return rows


def two_round_large_n(session: OracleSession, m: int, w: int | None = None,
                      u: int | None = None, delta: float | None = None,
                      seed: int = 0) -> LearnResult:
    """Monte Carlo: learn the set graph in one round over u cells
    (default u = w^3), then decode each surviving cell pair's endpoints
    deterministically with binary-index queries in the second round."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    n = session.target.n
    if u is None:
        if w is None or w <= m:
            raise ParameterError("need w > m (or an explicit cell count u)")
        u = w ** 3
    u = min(u, n)
    delta = 1.0 / u if delta is None else delta
    base = SeedPair(seed).child("two-round-large-n")

    cell_of, cells = partition_vertices(n, u, derive_stream("cells", seed))
    cand, t1 = _set_graph_round(session, m, u, cell_of, delta, base.child("set"))
    survivors = sorted(cand.edges())
    ok = True
    if len(survivors) > m:
        ok = False  # more set edges than target edges: partition collision
        survivors = survivors[: 4 * m]

    handle = session.open_round()
    per_pair = []
    for i, j in survivors:
        rows_i = _index_bit_rows(_cell_row(cells[j], n), cells[i], n)
        rows_j = _index_bit_rows(_cell_row(cells[i], n), cells[j], n)
        per_pair.append((rows_i.shape[0], rows_j.shape[0]))
        handle.submit_batch(rows_i)
        handle.submit_batch(rows_j)
    answers = handle.close()

    edges: set[Edge] = set()
    pos = 0
    for (i, j), (ti, tj) in zip(survivors, per_pair):
        ai = answers[pos:pos + ti]; pos += ti
        aj = answers[pos:pos + tj]; pos += tj
        x = _decode_index(ai, cells[i])
        y = _decode_index(aj, cells[j])
        if x is None and y is None:
            continue  # leftover false set pair
        if x is None or y is None:
            ok = False
            continue
        edges.add((x, y) if x < y else (y, x))
    if len(edges) > m:
        ok = False
    return LearnResult(edges=frozenset(edges), ok=ok,
                       meta={"u": u, "t_set": t1, "set_edges": len(survivors)})


def _cell_row(members: np.ndarray, n: int) -> np.ndarray:
    row = np.zeros(n, dtype=bool)
    row[members] = True
    return row


def _decode_index(answers: np.ndarray, members: np.ndarray) -> int | None:
    """Binary-index decode: None when the presence query said NO, else the
    member whose local index the answer bits spell (None when out of
    range, which signals a collision)."""
    if not answers[0]:
        return None
    idx = 0
    for b, a in enumerate(answers[1:]):
        if a:
            idx |= 1 << b
    if idx >= members.size:
        return None
    return int(members[idx])


def three_round_lv_large_n(session: OracleSession, m: int,
                           delta: float | None = None, seed: int = 0,
                           strict_consistency: bool = False,
                           constants: Constants = DEFAULTS) -> LearnResult:
    """Las Vegas: partition into u = 2 m^4 (2m-1) cells, learn the set
    graph, decode endpoints with the one-or code, and on any detected
    anomaly run the deterministic fallback as the final round.

    Detections: more surviving set pairs than m (an in-cell edge saturates
    its cell), any one-or ERROR (two or more endpoints on one side), and,
    in strict mode, two set pairs decoding one cell to different vertices.
    The output equals the target on every run.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    n = session.target.n
    u = min(2 * m ** 4 * (2 * m - 1), n)
    delta = 1.0 / u if delta is None else delta
    base = SeedPair(seed).child("lv-large-n")
    detections: list[str] = []

    cell_of, cells = partition_vertices(n, u, derive_stream("cells", seed))
    cand, t1 = _set_graph_round(session, m, u, cell_of, delta, base.child("set"))
    survivors = sorted(cand.edges())

    if len(survivors) > m:
        detections.append("set-edge-count")
        fb = fallback_or_adaptive(session, m, constants)
        return LearnResult(edges=fb.edges, ok=True,
                           meta={"u": u, "fallback": True,
                                 "detections": detections,
                                 "fallback_kind": fb.meta.get("kind")})

    max_cell = max((c.size for c in cells), default=1)
    code = build_one_or_code(max(int(max_cell), 1))
    support = code.support_matrix()

    handle = session.open_round()
    for i, j in survivors:
        for host, probed in ((j, i), (i, j)):
            members = cells[probed]
            block = np.repeat(_cell_row(cells[host], n)[None, :],
                              code.n_queries, axis=0)
            block[:, members] = support[:, : members.size]
            handle.submit_batch(block)
    answers = handle.close()

    edges: set[Edge] = set()
    decoded_by_cell: dict[int, int] = {}
    failed = False
    pos = 0
    for i, j in survivors:
        got = {}
        for host, probed in ((j, i), (i, j)):
            ans = answers[pos:pos + code.n_queries]; pos += code.n_queries
            kind, local = code.decode(tuple(bool(a) for a in ans))
            if kind == "error":
                detections.append("one-or-error")
                failed = True
            got[probed] = (kind, local)
        if failed:
            break
        (ki, xi), (kj, xj) = got[i], got[j]
        if ki == "empty" and kj == "empty":
            continue  # false set pair, eliminated deterministically
        if ki == "empty" or kj == "empty":
            detections.append("one-sided-decode")
            failed = True
            break
        x, y = int(cells[i][xi]), int(cells[j][xj])
        for cell_id, vert in ((i, x), (j, y)):
            prev = decoded_by_cell.setdefault(cell_id, vert)
            if prev != vert:
                detections.append("cell-decode-disagreement")
                if strict_consistency:
                    failed = True
        if failed:
            break
        edges.add((x, y) if x < y else (y, x))

    if failed:
        fb = fallback_or_adaptive(session, m, constants)
        return LearnResult(edges=fb.edges, ok=True,
                           meta={"u": u, "fallback": True,
                                 "detections": detections,
                                 "fallback_kind": fb.meta.get("kind")})
    return LearnResult(edges=frozenset(edges), ok=True,
                       meta={"u": u, "fallback": False, "t_set": t1,
                             "detections": detections,
                             "set_edges": len(survivors)})
