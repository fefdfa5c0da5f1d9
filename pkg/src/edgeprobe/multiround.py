"""Known-m multi-round algorithms: independent-set neighbour learning,
the two-round reconstruction with p ~ m^(-2/3), and the three-round
reconstruction that inserts a degree-estimation round.

Both algorithms share the pattern: an elimination round leaves the true
edges plus (on failure events) pairs whose endpoints have large joint
degree; the surviving structure is split into high-degree stars E_W,
cleaned by noiseless neighbour learning inside independent sets, and a
small residue U confirmed pair by pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .candidates import CandidateEdgeSet
from .config import DEFAULTS, Constants
from .elimination import (EliminationParams, LearnResult, elimination_round,
                          handle_zero_m, pair_query_round)
from .errors import DetectedFailure, ParameterError
from .graphs import bits
from .oracle import OracleSession, RoundHandle
from .randomness import PRandomSchedule, SeedPair
from .structure import StructureView, Threshold, classify_structure


def neighbor_learning_size(m: int, n: int, delta: float) -> int:
    """t = ceil(4 m (ln n + ln(1/delta))) for learning inside an
    independent set."""
    return math.ceil(4 * m * (math.log(n) + math.log(1.0 / delta)))


def neighbor_learning_p(m: int) -> float:
    # p = 1/m; the degenerate m=1 uses 1/2 so removal stays possible
    return 0.5 if m == 1 else 1.0 / m


def _submit_schedule(handle: RoundHandle, sched: PRandomSchedule, n: int,
                     extra_vertex: int | None = None,
                     chunk: int = 16384) -> slice:
    """Submit a whole schedule (optionally with one vertex added to every
    query) into the open round; returns the answer slice."""
    start = handle.n_queries
    for s in range(0, sched.t, chunk):
        c = min(chunk, sched.t - s)
        rows = sched.draw_rows(s, c, n)
        if extra_vertex is not None:
            rows[:, extra_vertex] = True
        handle.submit_batch(rows)
    return slice(start, start + sched.t)


def _apply_neighbor_answers(sched: PRandomSchedule, answers: np.ndarray,
                            chunk: int = 16384) -> np.ndarray:
    """Positions of the schedule domain hit by at least one NO query
    (these are certified non-neighbours)."""
    removed = np.zeros(sched.size, dtype=bool)
    for s in range(0, sched.t, chunk):
        c = min(chunk, sched.t - s)
        no = ~answers[s:s + c]
        if no.any():
            removed |= sched.draw_block(s, c)[no].any(axis=0)
    return removed


def learn_neighbors_in_independent_set(session: OracleSession, v: int,
                                       independent, m: int, delta: float,
                                       seed: SeedPair) -> frozenset[int]:
    """Learn the neighbours of v inside an independent set.

    Asks t = ceil(4m(ln n + ln(1/delta))) queries Q + {v} with Q a
    (1/m)-random subset of the independent set.  The returned set always
    contains every true neighbour; with probability at least 1 - delta it
    contains nothing else.
    """
    if isinstance(independent, (int, np.integer)):
        members = np.fromiter(bits(int(independent)), dtype=np.int64)
    else:
        members = np.asarray(sorted(int(x) for x in independent), dtype=np.int64)
    if members.size == 0:
        return frozenset()
    if v in members:
        raise ParameterError("v must lie outside the independent set")
    n = session.target.n
    sched = PRandomSchedule(neighbor_learning_p(m),
                            neighbor_learning_size(m, n, delta),
                            members, seed)
    handle = session.open_round()
    _submit_schedule(handle, sched, n, extra_vertex=v)
    answers = handle.close()
    removed = _apply_neighbor_answers(sched, answers)
    return frozenset(int(x) for x in members[~removed])


# -- two-round algorithm ------------------------------------------------


@dataclass(frozen=True)
class RoundOneParams:
    elimination: EliminationParams
    r: Threshold
    clamped: bool


def two_round_params(n: int, m: int, delta: float) -> RoundOneParams:
    """p = m^(-2/3) with r = 1/(2p); for m < 64 the raw p violates
    1 - rp - mp^2 > 0, so p is clamped to 1/(2 sqrt(m)) (and r = sqrt(m)),
    which the round reports."""
    # m^(-2/3) <= 1/(2 sqrt m) iff m^(1/6) >= 2 iff m >= 64 (exact in ints)
    if m >= 64:
        p = m ** (-2.0 / 3.0)
        r, clamped = Threshold.of(m, Fraction(1, 2), Fraction(2, 3)), False
    else:
        p = 1.0 / (2.0 * math.sqrt(m))
        r, clamped = Threshold.of(m, 1, Fraction(1, 2)), True
    return RoundOneParams(EliminationParams.derive(n, m, p, r, delta), r, clamped)


def three_round_params(n: int, m: int, delta: float) -> RoundOneParams:
    """p = 1/(16 sqrt(m)), r = 8 sqrt(m); valid for every m >= 1."""
    p = 1.0 / (16.0 * math.sqrt(m))
    r = Threshold.of(m, 8, Fraction(1, 2))
    return RoundOneParams(EliminationParams.derive(n, m, p, r, delta), r, False)


def _capped_structure(view: StructureView, m: int, r: Threshold):
    """Bound check; on violation return truncation caps so the run can
    still finish (flagged) without an unbounded second round."""
    try:
        view.check_bounds(m, r)
        return True, view.W, view.U
    except DetectedFailure:
        w_cap = 2 * (1 + math.floor(r.inverse_times(8 * m, 0).as_float()))
        u_cap = 2 * (m + 1 + math.floor(r.inverse_times(8 * m * m, 0).as_float()))
        return False, view.W[:w_cap], view.U[:u_cap]


def two_round_mc(session: OracleSession, m: int, delta: float | None = None,
                 seed: int = 0, constants: Constants = DEFAULTS) -> LearnResult:
    """Two rounds: elimination, then batched neighbour learning for every
    high-degree vertex plus one confirmation query per residual pair."""
    if m < 0:
        raise ParameterError("m must be >= 0")
    if m == 0:
        return handle_zero_m(session)
    n = session.target.n
    delta = 1.0 / n if delta is None else delta
    base = SeedPair(seed).child("two-round-mc")
    par = two_round_params(n, m, delta)

    h = elimination_round(session, par.elimination, base.child("elim"))
    view = classify_structure(h, par.r)
    ok, w_list, u_pairs = _capped_structure(view, m, par.r)

    handle = session.open_round()
    nbr_slices: dict[int, tuple[PRandomSchedule, slice]] = {}
    for w in w_list:
        members = view.I[w]
        if members.size == 0:
            continue
        sched = PRandomSchedule(neighbor_learning_p(m),
                                neighbor_learning_size(m, n, delta),
                                members, base.child("nbr", w))
        nbr_slices[w] = (sched, _submit_schedule(handle, sched, n, extra_vertex=w))
    u_start = handle.n_queries
    if u_pairs:
        rows = np.zeros((len(u_pairs), n), dtype=bool)
        arr = np.asarray(u_pairs, dtype=np.int64)
        idx = np.arange(len(u_pairs))
        rows[idx, arr[:, 0]] = True
        rows[idx, arr[:, 1]] = True
        handle.submit_batch(rows)
    answers = handle.close()

    for w, (sched, sl) in nbr_slices.items():
        removed = _apply_neighbor_answers(sched, answers[sl])
        gone = sched.members[removed]
        if gone.size:
            h.eliminate_pairs(np.full(gone.size, w, dtype=np.int64), gone)
    u_answers = answers[u_start:u_start + len(u_pairs)]
    for (u, v), a in zip(u_pairs, u_answers):
        if not a:
            h.remove_pair(u, v)
    if not ok:  # truncated pairs were never confirmed: drop claims on them
        for (u, v) in view.U[len(u_pairs):]:
            h.remove_pair(u, v)

    return LearnResult(edges=h.edges(), ok=ok,
                       meta={"t": par.elimination.t, "p": par.elimination.p,
                             "clamped": par.clamped, "W": len(view.W),
                             "U": len(view.U)})


# -- three-round algorithm ---------------------------------------------


def _degree_levels(m: int, i_size: int) -> int:
    """Largest probe level j with 2^j <= 16 * min(m, |I_w|)."""
    cap = 16 * max(1, min(m, i_size))
    return cap.bit_length() - 1


def three_round_mc(session: OracleSession, m: int, delta: float | None = None,
                   seed: int = 0, constants: Constants = DEFAULTS) -> LearnResult:
    """Three rounds: elimination with p = 1/(16 sqrt m); a doubling sweep
    that estimates each high-degree vertex's neighbour count inside its
    independent set (plus the residual pair confirmations); then neighbour
    learning sized by those estimates."""
    if m < 0:
        raise ParameterError("m must be >= 0")
    if m == 0:
        return handle_zero_m(session)
    n = session.target.n
    delta = 1.0 / n if delta is None else delta
    base = SeedPair(seed).child("three-round-mc")
    par = three_round_params(n, m, delta)

    h = elimination_round(session, par.elimination, base.child("elim"))
    view = classify_structure(h, par.r)
    ok, w_list, u_pairs = _capped_structure(view, m, par.r)

    # round 2: degree-probe sweeps (all levels, all w) and the U pairs
    t_lev = math.ceil(constants.c_degree3 * math.log(n))
    handle = session.open_round()
    sweeps: dict[int, list[tuple[PRandomSchedule, slice]]] = {}
    for w in w_list:
        members = view.I[w]
        if members.size == 0:
            continue
        levels = []
        for j in range(_degree_levels(m, int(members.size)) + 1):
            sched = PRandomSchedule(2.0 ** (-j), t_lev, members,
                                    base.child("deg", w, j))
            levels.append((sched, _submit_schedule(handle, sched, n, extra_vertex=w)))
        sweeps[w] = levels
    u_start = handle.n_queries
    if u_pairs:
        rows = np.zeros((len(u_pairs), n), dtype=bool)
        arr = np.asarray(u_pairs, dtype=np.int64)
        idx = np.arange(len(u_pairs))
        rows[idx, arr[:, 0]] = True
        rows[idx, arr[:, 1]] = True
        handle.submit_batch(rows)
    answers = handle.close()

    estimates: dict[int, int] = {}
    for w, levels in sweeps.items():
        j_star = None
        for j, (sched, sl) in enumerate(levels):
            no_rate = float((~answers[sl]).mean())
            if no_rate > 1.0 / math.e:
                j_star = j
                break
        if j_star is None:
            j_star = len(levels) - 1
        d_hat = 2 ** j_star
        if d_hat > 32 * min(m, int(view.I[w].size)):
            ok = False  # estimate overflow: restartable failure
        estimates[w] = j_star
    u_answers = answers[u_start:u_start + len(u_pairs)]

    # round 3: neighbour learning sized by the estimates
    handle = session.open_round()
    nbr: dict[int, tuple[PRandomSchedule, slice]] = {}
    for w, j_star in estimates.items():
        members = view.I[w]
        p_w = 2.0 ** (-(j_star + 1))
        t_w = math.ceil(constants.c_neighbors3 * 2 ** (j_star + 1) * math.log(n))
        sched = PRandomSchedule(p_w, t_w, members, base.child("nbr", w))
        nbr[w] = (sched, _submit_schedule(handle, sched, n, extra_vertex=w))
    answers3 = handle.close()

    for w, (sched, sl) in nbr.items():
        removed = _apply_neighbor_answers(sched, answers3[sl])
        gone = sched.members[removed]
        if gone.size:
            h.eliminate_pairs(np.full(gone.size, w, dtype=np.int64), gone)
    for (u, v), a in zip(u_pairs, u_answers):
        if not a:
            h.remove_pair(u, v)
    if not ok:
        for (u, v) in view.U[len(u_pairs):]:
            h.remove_pair(u, v)

    return LearnResult(edges=h.edges(), ok=ok,
                       meta={"t": par.elimination.t, "p": par.elimination.p,
                             "W": len(view.W), "U": len(view.U),
                             "estimates": {w: 2 ** j for w, j in estimates.items()}})


# -- Las Vegas wrappers ---------------------------------------------------


def las_vegas_confirmed(session: OracleSession, m: int, inner,
                        delta: float | None = None, seed: int = 0,
                        constants: Constants = DEFAULTS,
                        max_restarts: int = 64) -> LearnResult:
    """Las Vegas upgrade of a Monte Carlo learner: one extra round confirms
    every reported edge with a pair query, and detected failures restart
    with a fresh stream.

    The inner learners only ever delete pairs on NO certificates, so their
    hypothesis always contains the true edge set; pruning unconfirmed pairs
    therefore leaves exactly the true edges.
    """
    restarts = 0
    while True:
        res = inner(session, m, delta=delta, seed=derive_restart(seed, restarts),
                    constants=constants)
        if res.ok:
            survivors = sorted(res.edges)
            ans = pair_query_round(session, survivors)
            edges = frozenset(e for e, a in zip(survivors, ans) if a)
            meta = dict(res.meta)
            meta["restarts"] = restarts
            return LearnResult(edges=edges, ok=True, meta=meta)
        restarts += 1
        if restarts > max_restarts:
            raise DetectedFailure("Las Vegas wrapper failed to converge")


def derive_restart(seed: int, attempt: int) -> int:
    from .randomness import derive_stream
    return seed if attempt == 0 else derive_stream("restart", seed, attempt)


def lv_three_round(session: OracleSession, m: int, delta: float | None = None,
                   seed: int = 0, constants: Constants = DEFAULTS) -> LearnResult:
    """Three-round Las Vegas variant of the two-round learner."""
    return las_vegas_confirmed(session, m, two_round_mc, delta, seed, constants)


def lv_four_round(session: OracleSession, m: int, delta: float | None = None,
                  seed: int = 0, constants: Constants = DEFAULTS) -> LearnResult:
    """Four-round Las Vegas variant of the three-round learner."""
    return las_vegas_confirmed(session, m, three_round_mc, delta, seed, constants)
