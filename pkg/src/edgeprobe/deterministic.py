"""Deterministic reconstruction algorithms: the two-round algorithm over
a covering-verified family, the five-round partition/loop-learning
pipeline, the one-round pair-cover fallback, and the adaptive exhaustive
baseline used when no fallback family is feasible."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .candidates import CandidateEdgeSet
from .config import DEFAULTS, Constants
from .detcodes import (DisjunctMatrix, PairCoverFamily, QueryFamily,
                       build_disjunct_matrix, build_pair_cover_family,
                       build_partition_matrix)
from .elimination import LearnResult, pair_query_round
from .errors import ContractViolation, InfeasibleError, ParameterError
from .graphs import bitset
from .oracle import OracleSession, ask_single


def two_round_deterministic(session: OracleSession,
                            family: QueryFamily) -> LearnResult:
    """Round 1 asks the whole verified family and eliminates co-present
    pairs on NO answers; at most 2m pairs survive.  Round 2 confirms each
    survivor, so the output is exact for every target with at most m
    edges."""
    if not family.verified:
        raise ParameterError("family must be covering-verified")
    n = session.target.n
    if n != family.n:
        raise ParameterError("family was built for a different n")
    handle = session.open_round()
    handle.submit_batch(family.rows)
    answers = handle.close()
    cand = CandidateEdgeSet.all_pairs(n)
    no = ~answers
    if no.any():
        cand.eliminate_within(family.rows[no])
    survivors = sorted(cand.edges())
    if len(survivors) > 2 * family.m:
        raise ContractViolation(
            f"{len(survivors)} survivors exceed 2m; family contract broken")
    confirm = pair_query_round(session, survivors)
    edges = frozenset(e for e, a in zip(survivors, confirm) if a)
    return LearnResult(edges=edges, ok=True,
                       meta={"survivors": len(survivors), "t": family.t})


# -- five-round deterministic pipeline -----------------------------------


@lru_cache(maxsize=32)
def _partition_matrix_cached(n: int, m: int):
    return build_partition_matrix(n, m)


@lru_cache(maxsize=32)
def _disjunct_cached(n_cols: int, d: int):
    return build_disjunct_matrix(n_cols, d)


def five_round_deterministic(session: OracleSession, m: int) -> LearnResult:
    """Deterministic end-to-end reconstruction in exactly five rounds.

    1. probe every (row, cell) of the partition matrix and pick a row
       whose cells all answered NO (no edge inside a cell);
    2. probe every cell pair to find the set edges;
    3. for each set edge and each side, ask the disjunct-matrix tests
       restricted to that side (union'd with the opposite cell);
    4. confirm each decoded endpoint candidate individually;
    5. confirm each cross pair of surviving endpoints.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    n = session.target.n
    pm = _partition_matrix_cached(n, m)
    w, t = pm.w, pm.t

    # round 1: all w*t cell queries, row-major
    handle = session.open_round()
    rows_cells = []
    for r in range(t):
        cells = pm.row_cells(r)
        rows_cells.append(cells)
        block = np.zeros((w, n), dtype=bool)
        for j, members in enumerate(cells):
            block[j, members] = True
        handle.submit_batch(block)
    a1 = handle.close()
    chosen = None
    for r in range(t):
        if not a1[r * w:(r + 1) * w].any():
            chosen = r
            break
    if chosen is None:
        raise ContractViolation("no edge-separating row; matrix contract broken")
    cells = rows_cells[chosen]
    cell_rows = np.zeros((w, n), dtype=bool)
    for j, members in enumerate(cells):
        cell_rows[j, members] = True

    # round 2: all cell-pair queries
    pairs = [(i, j) for i in range(w) for j in range(i + 1, w)]
    handle = session.open_round()
    block = np.zeros((len(pairs), n), dtype=bool)
    for idx, (i, j) in enumerate(pairs):
        block[idx] = cell_rows[i] | cell_rows[j]
    handle.submit_batch(block)
    a2 = handle.close()
    set_edges = [pairs[idx] for idx in range(len(pairs)) if a2[idx]]
    if len(set_edges) > m:
        raise ContractViolation("more set edges than target edges")

    # round 3: disjunct tests per set edge, both directions
    max_cell = max((len(c) for c in cells), default=1)
    dm = _disjunct_cached(max(max_cell, 1), min(m, max(max_cell, 1)))
    sides = []  # (host cell, probed cell)
    for i, j in set_edges:
        sides.append((i, j))
        sides.append((j, i))
    handle = session.open_round()
    for host, probed in sides:
        members = cells[probed]
        block = np.repeat(cell_rows[host][None, :], dm.t, axis=0)
        if members.size:  # host and probed cells are disjoint
            block[:, members] = dm.rows[:, : members.size]
        handle.submit_batch(block)
    a3 = handle.close()
    candidates: dict[tuple[int, int], np.ndarray] = {}
    for idx, (host, probed) in enumerate(sides):
        ans = a3[idx * dm.t:(idx + 1) * dm.t]
        members = cells[probed]
        keep = dm.decode(ans)[: members.size]
        candidates[(host, probed)] = members[keep]

    # round 4: confirm each candidate endpoint against its host cell
    handle = session.open_round()
    confirm_keys = []
    for (host, probed), verts in candidates.items():
        for v in verts:
            row = cell_rows[host].copy()
            row[v] = True
            handle.submit_batch(row[None, :])
            confirm_keys.append(((host, probed), int(v)))
    a4 = handle.close()
    confirmed: dict[tuple[int, int], list[int]] = {k: [] for k in candidates}
    for ((key, v), a) in zip(confirm_keys, a4):
        if a:
            confirmed[key].append(v)

    # round 5: cross pairs of confirmed endpoints
    cross: list[tuple[int, int]] = []
    for i, j in set_edges:
        for u in confirmed[(j, i)]:     # endpoints inside cell i
            for v in confirmed[(i, j)]:  # endpoints inside cell j
                cross.append((u, v) if u < v else (v, u))
    cross = sorted(set(cross))
    a5 = pair_query_round(session, cross)
    edges = frozenset(e for e, a in zip(cross, a5) if a)

    counts = {
        "round1": w * t, "round2": len(pairs),
        "round3": 2 * len(set_edges) * dm.t,
        "round4": len(confirm_keys), "round5": len(cross),
        "w": w, "t_partition": t, "t_disjunct": dm.t,
        "set_edges": len(set_edges), "chosen_row": chosen,
    }
    return LearnResult(edges=edges, ok=True, meta=counts)


# -- non-adaptive fallback and the adaptive baseline ----------------------


@lru_cache(maxsize=32)
def _pair_cover_cached(n: int, m: int, bit_budget: int) -> PairCoverFamily:
    return build_pair_cover_family(n, m, bit_budget)


def nonadaptive_fallback(session: OracleSession, m: int,
                         constants: Constants = DEFAULTS) -> LearnResult:
    """One round over the verified pair-cover family: every non-edge pair
    is struck by some NO answer, so the survivors are exactly the edges.

    Raises InfeasibleError when the family would exceed the bit budget;
    callers then switch to the adaptive exhaustive baseline.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    n = session.target.n
    fam = _pair_cover_cached(n, m, constants.fallback_bit_budget)
    handle = session.open_round()
    handle.submit_batch(fam.rows)
    answers = handle.close()
    cand = CandidateEdgeSet.all_pairs(n)
    no = ~answers
    if no.any():
        cand.eliminate_within(fam.rows[no])
    return LearnResult(edges=cand.edges(), ok=True,
                       meta={"t": fam.t, "kind": "pair-cover"})


def fallback_or_adaptive(session: OracleSession, m: int,
                         constants: Constants = DEFAULTS) -> LearnResult:
    """Non-adaptive fallback when its family fits the budget, otherwise
    the always-correct adaptive baseline (deviation reported in meta)."""
    try:
        return nonadaptive_fallback(session, m, constants)
    except InfeasibleError:
        edges = adaptive_exhaustive_learn(session)
        return LearnResult(edges=edges, ok=True,
                           meta={"kind": "adaptive-baseline"})


def adaptive_exhaustive_learn(session: OracleSession) -> frozenset:
    """Exact reconstruction with no prior bound on m: sweep the vertices,
    and for each one learn its back-neighbours by group-testing splits
    inside colour classes of the already-known graph.

    Uses one-query rounds, so it is correct in any session mode at the
    price of many rounds; this is the last-resort baseline.
    """
    n = session.target.n
    adj: list[set[int]] = [set() for _ in range(n)]
    colors: list[int] = [0] * n
    edges: list[tuple[int, int]] = []
    for v in range(1, n):
        # greedy colouring of the known prefix graph keeps classes
        # independent, so a query inside class + {v} sees only v's edges
        classes: dict[int, list[int]] = {}
        for u in range(v):
            classes.setdefault(colors[u], []).append(u)
        for members in classes.values():
            found = _find_neighbors_split(session, v, members)
            for u in found:
                adj[u].add(v)
                adj[v].add(u)
                edges.append((u, v))
        used = {colors[u] for u in adj[v]}
        colors[v] = next(c for c in range(n) if c not in used)
    return frozenset(edges)


def _find_neighbors_split(session: OracleSession, v: int,
                          members: list[int]) -> list[int]:
    """All neighbours of v inside an independent member list, by binary
    splitting (one query per split, log-many per neighbour)."""
    out: list[int] = []
    stack = [members]
    vbit = 1 << v
    while stack:
        group = stack.pop()
        if not group:
            continue
        if not ask_single(session, bitset(group) | vbit):
            continue
        if len(group) == 1:
            out.append(group[0])
            continue
        half = len(group) // 2
        stack.append(group[:half])
        stack.append(group[half:])
    return out
