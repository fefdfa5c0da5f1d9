"""The one-round pair-elimination primitive and the algorithms built
directly on it (non-adaptive Monte Carlo, two-round Las Vegas).

One elimination round asks t p-random queries; every pair of vertices
co-present in a query answered NO is struck from the candidate set.
True edges can never be struck (a query containing both endpoints
answers YES), which is the unconditional soundness all callers rely on.
The repetition count t(n, m, r, p, delta) makes the converse hold with
probability 1 - delta for every pair whose joint neighbourhood is at
most r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .candidates import CandidateEdgeSet
from .errors import DetectedFailure, ParameterError
from .graphs import Edge
from .oracle import OracleSession, ask_single
from .randomness import PRandomSchedule, SeedPair
from .structure import Threshold

CHUNK = 8192


@dataclass(frozen=True)
class EliminationParams:
    """Validated parameter set of one elimination round."""

    n: int
    m: int
    p: float
    r: Threshold
    delta: float
    t: int

    @classmethod
    def derive(cls, n: int, m: int, p: float, r: Threshold,
               delta: float) -> "EliminationParams":
        t = elimination_schedule_size(n, m, r.as_float(), p, delta)
        return cls(n=n, m=m, p=p, r=r, delta=delta, t=t)


def elimination_schedule_size(n: int, m: int, r: float, p: float,
                              delta: float) -> int:
    """t = ceil((2 ln n + ln(1/delta)) / (p^2 (1 - r p - m p^2)))."""
    if not (0 < p <= 1):
        raise ParameterError(f"p={p} outside (0,1]")
    if not (0 < delta < 1):
        raise ParameterError("delta must lie in (0,1)")
    rate = p * p * (1.0 - r * p - m * p * p)
    if rate <= 0:
        raise ParameterError(
            f"invalid elimination rate: 1 - rp - mp^2 <= 0 for p={p}, r={r}, m={m}")
    return math.ceil((2.0 * math.log(n) + math.log(1.0 / delta)) / rate)


def run_elimination(session: OracleSession, p: float, t: int, seed: SeedPair,
                    domain_size: int | None = None,
                    cell_of: np.ndarray | None = None,
                    candidate: CandidateEdgeSet | None = None,
                    chunk: int = CHUNK) -> CandidateEdgeSet:
    """Ask exactly t p-random queries in one round and strike co-present
    pairs on NO answers.

    With ``cell_of`` given, draws live over a domain of cells and each
    submitted query is the union of the drawn cells (the candidate is
    then over cells, not vertices).  Queries are regenerated from the
    seed after the round closes, so no query matrix is retained.
    """
    n = session.target.n
    dom = domain_size if domain_size is not None else n
    if cell_of is not None and cell_of.shape != (n,):
        raise ParameterError("cell_of must map every vertex to a cell")
    sched = PRandomSchedule(p, t, dom, seed)

    handle = session.open_round()
    for start in range(0, t, chunk):
        c = min(chunk, t - start)
        block = sched.draw_block(start, c)
        rows = block[:, cell_of] if cell_of is not None else block
        handle.submit_batch(rows)
    answers = handle.close()

    cand = candidate if candidate is not None else CandidateEdgeSet.all_pairs(dom)
    # accumulate NO rows so the strike strategy sees large batches
    buffer: list[np.ndarray] = []
    buffered = 0
    flush_cells = 1 << 26  # bool entries (~64 MB) buffered before striking
    for start in range(0, t, chunk):
        c = min(chunk, t - start)
        no = ~answers[start:start + c]
        if not no.any():
            continue
        block = sched.draw_block(start, c)
        rows = block[no]
        buffer.append(rows)
        buffered += rows.shape[0] * dom
        if buffered >= flush_cells:
            cand.eliminate_within(np.concatenate(buffer))
            buffer, buffered = [], 0
    if buffer:
        cand.eliminate_within(np.concatenate(buffer))
    return cand


def elimination_round(session: OracleSession, params: EliminationParams,
                      seed: SeedPair) -> CandidateEdgeSet:
    """Figure-style first round: every true edge survives; on the success
    event (prob >= 1 - delta) every surviving non-edge has joint
    neighbourhood larger than r."""
    return run_elimination(session, params.p, params.t, seed,
                           domain_size=params.n)


def pair_query_round(session: OracleSession, pairs: list[Edge]) -> np.ndarray:
    """One round asking a 2-element query per pair; returns the answers.

    A pair query answers YES exactly when the pair is an edge.
    """
    n = session.target.n
    handle = session.open_round()
    if pairs:
        rows = np.zeros((len(pairs), n), dtype=bool)
        idx = np.arange(len(pairs))
        arr = np.asarray(pairs, dtype=np.int64)
        rows[idx, arr[:, 0]] = True
        rows[idx, arr[:, 1]] = True
        handle.submit_batch(rows)
    return handle.close()


@dataclass
class LearnResult:
    """Outcome of one algorithm run.

    ``ok`` is False when a checkable bound was violated (a detected
    Monte Carlo failure); the edges then still carry the best hypothesis.
    """

    edges: frozenset[Edge]
    ok: bool = True
    meta: dict = field(default_factory=dict)


def handle_zero_m(session: OracleSession) -> LearnResult:
    """Degenerate m = 0 path: one query on V decides."""
    from .graphs import full_set
    saw_edge = ask_single(session, full_set(session.target.n))
    return LearnResult(edges=frozenset(), ok=not saw_edge,
                       meta={"degenerate": "m=0"})


def non_adaptive_params(n: int, m: int, delta: float) -> EliminationParams:
    """p = 1/(2m), r = m; valid for every m >= 1."""
    return EliminationParams.derive(n, m, 1.0 / (2 * m),
                                    Threshold.of(m, m, 0), delta)


def non_adaptive_mc(session: OracleSession, m: int, delta: float | None = None,
                    seed: int = 0) -> LearnResult:
    """One-round Monte Carlo reconstruction for targets with at most m
    edges; exact with probability at least 1 - delta."""
    if m < 0:
        raise ParameterError("m must be >= 0")
    if m == 0:
        return handle_zero_m(session)
    n = session.target.n
    delta = 1.0 / n if delta is None else delta
    params = non_adaptive_params(n, m, delta)
    cand = elimination_round(session, params,
                             SeedPair(seed).child("non-adaptive-mc", 0))
    return LearnResult(edges=cand.edges(), ok=True,
                       meta={"t": params.t, "p": params.p})


def las_vegas_two_round(session: OracleSession, m: int,
                        delta: float | None = None, seed: int = 0,
                        survivor_slack: int = 2) -> LearnResult:
    """Round 1 as non_adaptive_mc, round 2 confirms every surviving pair
    with a 2-element query.  The output always equals the true edge set;
    if the survivor count exceeds 2m + slack the run restarts with a
    fresh stream (geometric, expected O(1) restarts)."""
    if m < 0:
        raise ParameterError("m must be >= 0")
    if m == 0:
        return handle_zero_m(session)
    n = session.target.n
    delta = 1.0 / n if delta is None else delta
    params = non_adaptive_params(n, m, delta)
    cap = 2 * m + survivor_slack
    restarts = 0
    while True:
        cand = elimination_round(
            session, params, SeedPair(seed).child("lv-two-round", restarts))
        survivors = sorted(cand.edges())
        if len(survivors) <= cap:
            answers = pair_query_round(session, survivors)
            edges = frozenset(e for e, a in zip(survivors, answers) if a)
            return LearnResult(edges=edges, ok=True,
                               meta={"restarts": restarts, "t": params.t,
                                     "round2": len(survivors)})
        restarts += 1
        if restarts > 64:
            raise DetectedFailure("two-round Las Vegas failed to converge")
