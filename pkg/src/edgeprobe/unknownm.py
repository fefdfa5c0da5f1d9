"""End-to-end reconstruction when the edge count is unknown: estimate the
half-crossing probability, split the vertices by candidate degree, learn
the heavy vertices' edges via per-vertex probes, verify, and fall back to
the deterministic learner on any inconsistency.  The output equals the
target on every run."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .candidates import CandidateEdgeSet
from .config import DEFAULTS, Constants
from .deterministic import fallback_or_adaptive
from .elimination import LearnResult, pair_query_round, run_elimination
from .errors import ParameterError
from .estimate import (SweepReport, estimate_degree_batch, k_estimate,
                       ladder, log_star)
from .oracle import OracleSession
from .randomness import PRandomSchedule, SeedPair


@dataclass
class SplitResult:
    h: CandidateEdgeSet
    v1: list[int]
    v2: list[int]
    threshold: int
    t: int


def split(session: OracleSession, p_prime: float, seed: SeedPair,
          constants: Constants = DEFAULTS) -> SplitResult:
    """One round of ceil(c_split (1/p')^2 ln n) p'-random queries;
    eliminates co-present pairs on NO answers and splits the vertices at
    candidate degree 3/p'.

    Edges are never eliminated; with a probe in [p*/8, p*] the hypothesis
    restricted to the low-degree side is exact w.h.p.
    """
    n = session.target.n
    inv = 1.0 / p_prime
    t = math.ceil(constants.c_split * inv * inv * math.log(n))
    h = run_elimination(session, p_prime, t, seed)
    # deg >= 3/p' compared exactly: floats convert to rationals losslessly
    cutoff = 3 / Fraction(p_prime)
    degs = h.degrees()
    v1 = [v for v in range(n) if degs[v] >= cutoff]
    v1_set = set(v1)
    v2 = [v for v in range(n) if v not in v1_set]
    return SplitResult(h=h, v1=v1, v2=v2, threshold=math.ceil(cutoff), t=t)


def find_edges(session: OracleSession, h: CandidateEdgeSet,
               probes: dict[int, float], seed: SeedPair,
               constants: Constants = DEFAULTS) -> int:
    """One round; for each heavy vertex u, ceil(c_find (1/p'_u) ln n)
    queries Q + {u} strike the pairs {u, v} for every v co-present in a NO
    answer.  True edges of u are never struck.  Returns the query count."""
    n = session.target.n
    handle = session.open_round()
    scheds: dict[int, tuple[PRandomSchedule, slice]] = {}
    for u, p_u in sorted(probes.items()):
        t_u = math.ceil(constants.c_find * (1.0 / p_u) * math.log(n))
        sched = PRandomSchedule(p_u, t_u, n, seed.child("find", u))
        start = handle.n_queries
        for s in range(0, t_u, 16384):
            c = min(16384, t_u - s)
            rows = sched.draw_block(s, c)
            rows[:, u] = True
            handle.submit_batch(rows)
        scheds[u] = (sched, slice(start, start + t_u))
    answers = handle.close()
    for u, (sched, sl) in scheds.items():
        hit = np.zeros(n, dtype=bool)
        t_u = sched.t
        for s in range(0, t_u, 16384):
            c = min(16384, t_u - s)
            no = ~answers[sl][s:s + c]
            if no.any():
                hit |= sched.draw_block(s, c)[no].any(axis=0)
        hit[u] = False
        gone = np.nonzero(hit)[0]
        if gone.size:
            h.eliminate_pairs(np.full(gone.size, u, dtype=np.int64), gone)
    return int(answers.size)


def pipeline_unknown_m(session: OracleSession, mode="log-star", seed: int = 0,
                       constants: Constants = DEFAULTS,
                       verify_cap: int = 1 << 16) -> LearnResult:
    """Las Vegas reconstruction with no edge-count input.

    Phases (one round each unless noted): budget-ladder estimation of the
    half-crossing probability (up to k rounds; the first all-V query
    detects the empty graph), the degree split, a batched degree-estimate
    ladder for the heavy side (up to k rounds), per-vertex edge cleanup,
    then pair-query verification of every surviving candidate.  Any
    verification miss routes to the deterministic fallback, so the output
    is exact on every run.
    """
    n = session.target.n
    if mode == "log-star":
        k = max(log_star(n), 1)
    else:
        kind, k = mode
        if kind != "k" or k < 1:
            raise ParameterError("mode must be 'log-star' or ('k', k>=1)")
    base = SeedPair(seed).child("unknown-m")
    meta: dict = {"mode": mode, "k": k}

    report, attempts = k_estimate(session, k, base.child("est"), constants)
    meta["estimate_rounds"] = len(attempts)
    if report.certain_empty:
        meta["short_circuit"] = "empty"
        return LearnResult(edges=frozenset(), ok=True, meta=meta)
    if report.kind == "probe":
        p_prime = report.p_prime
    else:  # ladder exhausted without a selection: deepest level, flagged
        p_prime = 2.0 ** (-(len(report.levels)))
        meta["estimate_forced"] = True
    meta["p_prime"] = p_prime

    sp = split(session, p_prime, base.child("split"), constants)
    meta["v1"] = len(sp.v1)

    probes: dict[int, float] = {}
    degree_rounds = 0
    if sp.v1:
        pending = list(sp.v1)
        for j, M in enumerate(ladder(n, k)):
            if not pending:
                break
            reports = estimate_degree_batch(session, pending, M,
                                            base.child("degree", j), constants)
            degree_rounds += 1
            still = []
            for u, rep in reports.items():
                if rep.kind == "probe":
                    probes[u] = rep.p_prime
                else:
                    still.append(u)
            pending = still
        for u in pending:  # ladder exhausted: deepest-probe fallback
            probes[u] = 2.0 ** (-len(ladder(n, k)))
            meta.setdefault("degree_forced", []).append(u)
    meta["degree_rounds"] = degree_rounds

    if probes:
        find_edges(session, sp.h, probes, base.child("find"), constants)

    survivors = sorted(sp.h.edges())
    meta["survivors"] = len(survivors)
    if len(survivors) > verify_cap:
        meta["fallback"] = "oversized-hypothesis"
        fb = fallback_or_adaptive(session, max(1, len(survivors)), constants)
        return LearnResult(edges=fb.edges, ok=True, meta=meta)

    answers = pair_query_round(session, survivors)
    confirmed = [e for e, a in zip(survivors, answers) if a]
    if len(confirmed) == len(survivors):
        meta["fallback"] = None
        return LearnResult(edges=frozenset(confirmed), ok=True, meta=meta)

    # some candidate failed confirmation: the split/cleanup success event
    # missed, so recover deterministically (every true edge was confirmed,
    # so the confirmed count bounds m from above and below)
    meta["fallback"] = "verification-miss"
    m_exact = max(1, len(confirmed))
    fb = fallback_or_adaptive(session, m_exact, constants)
    meta["fallback_kind"] = fb.meta.get("kind")
    return LearnResult(edges=fb.edges, ok=True, meta=meta)
