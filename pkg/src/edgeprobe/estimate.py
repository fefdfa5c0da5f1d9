"""Probe-level sweeps that bracket the half-NO-rate probability (and its
per-vertex analogue) without knowing the edge count.

One sweep asks c*ln(n) queries at every probability level 2^-i within
its budget, all in a single round; the first level whose empirical
NO-rate clears the threshold (1/2 for the global curve, 1/e for the
augmented one) yields the probe p' = half that level.  A sweep that
selects no level escalates: the quantity being bracketed exceeds its
budget M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS, Constants
from .errors import ParameterError
from .oracle import OracleSession, RoundHandle
from .randomness import PRandomSchedule, SeedPair


def log2_clamped(x: float) -> float:
    """Base-2 log clamped below at 2 so iterated squares stay >= 4."""
    return max(math.log2(x), 2.0)


def iterated_log2(n: int, j: int) -> float:
    """log^[j] n with the same clamp; log^[0] n = n."""
    v = float(n)
    for _ in range(j):
        v = log2_clamped(v)
    return v


def log_star(n: int) -> int:
    """Least j with log^[j] n <= 2."""
    j, v = 0, float(n)
    while v > 2.0:
        v = math.log2(v)
        j += 1
    return j


def ladder(n: int, k: int) -> list[float]:
    """Budgets M_j = (log^[j] n)^2 for j = k-1 down to 0 (M_0 = n^2)."""
    return [iterated_log2(n, j) ** 2 for j in range(k - 1, -1, -1)]


@dataclass
class LevelStats:
    p: float
    t: int
    no_count: int


@dataclass
class SweepReport:
    """Outcome of one probe-level sweep (one round's worth of queries)."""

    kind: str                      # "probe" or "escalate"
    p_prime: float | None
    chosen_level: int | None
    levels: list[LevelStats] = field(default_factory=list)
    queries: int = 0

    @property
    def certain_empty(self) -> bool:
        """A NO at probability level 1 is a query on all of V answering NO,
        which proves the graph has no edges."""
        return bool(self.levels) and self.levels[0].p == 1.0 \
            and self.levels[0].no_count > 0


def _estimate_levels(m_budget: float) -> int:
    """Largest i with 4^i <= 32 * M (i.e. 2^i <= 2^2.5 sqrt(M))."""
    i = 0
    while 4 ** (i + 1) <= 32 * m_budget:
        i += 1
    return i


def _degree_levels(m_budget: float) -> int:
    """Largest i with 2^i <= 16 * M."""
    i = 0
    while 2 ** (i + 1) <= 16 * m_budget:
        i += 1
    return i


def submit_sweep(handle: RoundHandle, n: int, max_level: int, t: int,
                 seed: SeedPair, extra_vertex: int | None = None
                 ) -> list[tuple[PRandomSchedule, slice]]:
    scheds = []
    for i in range(max_level + 1):
        sched = PRandomSchedule(2.0 ** (-i), t, n, seed.child("level", i))
        start = handle.n_queries
        for s in range(0, t, 16384):
            c = min(16384, t - s)
            rows = sched.draw_block(s, c)
            if extra_vertex is not None:
                rows[:, extra_vertex] = True
            handle.submit_batch(rows)
        scheds.append((sched, slice(start, start + t)))
    return scheds


def resolve_sweep(scheds, answers: np.ndarray, threshold_num: int,
                  threshold_den: int) -> SweepReport:
    """Pick the first level whose NO-count strictly exceeds t*num/den
    (exact integer comparison; ties never select)."""
    levels = []
    chosen = None
    for i, (sched, sl) in enumerate(scheds):
        no_count = int((~answers[sl]).sum())
        levels.append(LevelStats(p=sched.p, t=sched.t, no_count=no_count))
        if chosen is None and no_count * threshold_den > sched.t * threshold_num:
            chosen = i
    total = sum(lv.t for lv in levels)
    if chosen is None:
        return SweepReport(kind="escalate", p_prime=None, chosen_level=None,
                           levels=levels, queries=total)
    return SweepReport(kind="probe", p_prime=2.0 ** (-(chosen + 1)),
                       chosen_level=chosen, levels=levels, queries=total)


def _e_threshold(t: int) -> tuple[int, int]:
    """Integer pair (num, den) with num/den = floor(t/e)/t so that
    no_count/t > 1/e iff no_count > num * t / den; exact for integers."""
    return math.floor(t / math.e), t


def estimate(session: OracleSession, M: float, seed: SeedPair,
             constants: Constants = DEFAULTS) -> SweepReport:
    """One-round sweep for the half-crossing probability; either returns a
    probe p' in [p*/8, p*] (w.h.p.) or reports that the edge count exceeds
    M."""
    n = session.target.n
    if not (1 <= M <= n * n):
        raise ParameterError("budget M must lie in [1, n^2]")
    t = math.ceil(constants.c_estimate * math.log(n))
    handle = session.open_round()
    scheds = submit_sweep(handle, n, _estimate_levels(M), t, seed)
    answers = handle.close()
    return resolve_sweep(scheds, answers, 1, 2)


def k_estimate(session: OracleSession, k: int, seed: SeedPair,
               constants: Constants = DEFAULTS) -> tuple[SweepReport, list[SweepReport]]:
    """At most k rounds of estimate over the shrinking-budget ladder; the
    last budget n^2 always yields a probe."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    n = session.target.n
    reports = []
    for j, M in enumerate(ladder(n, k)):
        rep = estimate(session, M, seed.child("estimate", j), constants)
        reports.append(rep)
        if rep.kind == "probe" or rep.certain_empty:
            return rep, reports
    return reports[-1], reports


def estimate_degree(session: OracleSession, u: int, M: float, seed: SeedPair,
                    constants: Constants = DEFAULTS) -> SweepReport:
    """One-round sweep of queries Q + {u} against the 1/e threshold;
    returns a probe p'_u with 1/p'_u in [d_u, 31 d_u] (w.h.p.) or reports
    that u's degree exceeds M."""
    n = session.target.n
    if not (1 <= M <= n * n):
        raise ParameterError("budget M must lie in [1, n^2]")
    t = math.ceil(constants.c_degree * math.log(n))
    handle = session.open_round()
    scheds = submit_sweep(handle, n, _degree_levels(M), t, seed,
                          extra_vertex=u)
    answers = handle.close()
    return resolve_sweep(scheds, answers, *_e_threshold(t))


def estimate_degree_batch(session: OracleSession, vertices: list[int],
                          M: float, seed: SeedPair,
                          constants: Constants = DEFAULTS) -> dict[int, SweepReport]:
    """Level sweeps for many vertices sharing one round (the pipeline's
    batched escalation step)."""
    n = session.target.n
    t = math.ceil(constants.c_degree * math.log(n))
    max_level = _degree_levels(M)
    handle = session.open_round()
    all_scheds = {u: submit_sweep(handle, n, max_level, t,
                                  seed.child("deg", u), extra_vertex=u)
                  for u in vertices}
    answers = handle.close()
    return {u: resolve_sweep(scheds, answers, *_e_threshold(t))
            for u, scheds in all_scheds.items()}


def k_estimate_degree(session: OracleSession, u: int, k: int, seed: SeedPair,
                      constants: Constants = DEFAULTS
                      ) -> tuple[SweepReport, list[SweepReport]]:
    """Degree analogue of k_estimate; the final n^2 budget always probes."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    n = session.target.n
    reports = []
    for j, M in enumerate(ladder(n, k)):
        rep = estimate_degree(session, u, M, seed.child("kdeg", j), constants)
        reports.append(rep)
        if rep.kind == "probe":
            return rep, reports
    return reports[-1], reports
