"""Experiment orchestration: algorithm registry, per-trial runs, stats
aggregation with Wilson intervals, and CSV/TSV persistence."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .config import DEFAULTS, Constants
from .deterministic import (adaptive_exhaustive_learn, five_round_deterministic,
                            nonadaptive_fallback)
from .elimination import (LearnResult, las_vegas_two_round, non_adaptive_mc,
                          pair_query_round)
from .errors import ParameterError
from .generators import InstanceSpec, generate
from .graphs import HiddenGraph
from .largen import three_round_lv_large_n, two_round_large_n
from .multiround import (lv_four_round, lv_three_round, three_round_mc,
                         two_round_mc)
from .oracle import OracleSession
from .randomness import derive_stream
from .unknownm import pipeline_unknown_m


def brute_force_learn(session: OracleSession) -> LearnResult:
    """Reference baseline: one round with a query per vertex pair."""
    n = session.target.n
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    answers = pair_query_round(session, pairs)
    return LearnResult(edges=frozenset(p for p, a in zip(pairs, answers) if a))


def _run_brute(session, m, seed, delta, constants):
    return brute_force_learn(session)


def _run_non_adaptive(session, m, seed, delta, constants):
    return non_adaptive_mc(session, m, delta=delta, seed=seed)


def _run_lv_two(session, m, seed, delta, constants):
    return las_vegas_two_round(session, m, delta=delta, seed=seed,
                               survivor_slack=constants.lv2_survivor_slack)


def _run_two_round(session, m, seed, delta, constants):
    return two_round_mc(session, m, delta=delta, seed=seed, constants=constants)


def _run_three_round(session, m, seed, delta, constants):
    return three_round_mc(session, m, delta=delta, seed=seed, constants=constants)


def _run_lv_three(session, m, seed, delta, constants):
    return lv_three_round(session, m, delta=delta, seed=seed, constants=constants)


def _run_lv_four(session, m, seed, delta, constants):
    return lv_four_round(session, m, delta=delta, seed=seed, constants=constants)


def _run_two_large(session, m, seed, delta, constants):
    return two_round_large_n(session, m, u=2 * m ** 4 * (2 * m - 1),
                             delta=delta, seed=seed)


def _run_lv_large(session, m, seed, delta, constants):
    return three_round_lv_large_n(session, m, delta=delta, seed=seed,
                                  constants=constants)


def _run_five_round(session, m, seed, delta, constants):
    return five_round_deterministic(session, m)


def _run_fallback(session, m, seed, delta, constants):
    return nonadaptive_fallback(session, m, constants)


def _run_adaptive(session, m, seed, delta, constants):
    return LearnResult(edges=adaptive_exhaustive_learn(session))


def _run_unknown_log_star(session, m, seed, delta, constants):
    return pipeline_unknown_m(session, mode="log-star", seed=seed,
                              constants=constants)


def _make_unknown_k(k):
    def run(session, m, seed, delta, constants):
        return pipeline_unknown_m(session, mode=("k", k), seed=seed,
                                  constants=constants)
    return run


ALGORITHMS = {
    "brute-force": _run_brute,
    "non-adaptive-mc": _run_non_adaptive,
    "lv-two-round": _run_lv_two,
    "two-round-mc": _run_two_round,
    "three-round-mc": _run_three_round,
    "lv-three-round": _run_lv_three,
    "lv-four-round": _run_lv_four,
    "two-round-large-n": _run_two_large,
    "three-round-lv-large-n": _run_lv_large,
    "five-round-deterministic": _run_five_round,
    "nonadaptive-fallback": _run_fallback,
    "adaptive-baseline": _run_adaptive,
    "unknown-m-log-star": _run_unknown_log_star,
    "unknown-m-2-rounds": _make_unknown_k(2),
    "unknown-m-3-rounds": _make_unknown_k(3),
}

NEEDS_M = {a for a in ALGORITHMS
           if a not in ("brute-force", "adaptive-baseline",
                        "unknown-m-log-star", "unknown-m-2-rounds",
                        "unknown-m-3-rounds")}

ADAPTIVE_MODE = {"adaptive-baseline"}


@dataclass(frozen=True)
class ExperimentPlan:
    algorithm: str
    instance: InstanceSpec
    trials: int = 1
    m: int | None = None            # edge bound passed to the algorithm
    delta: float | None = None
    master_seed: int = 0
    fresh_instance_per_trial: bool = True
    record_transcripts: bool = False
    constants: Constants = DEFAULTS

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")


@dataclass
class TrialRow:
    trial: int
    seed: int
    success: bool
    queries: int
    rounds: int
    restarts: int
    wall_ms: float


@dataclass
class RunStats:
    plan: ExperimentPlan
    rows: list[TrialRow]
    transcripts: list = field(default_factory=list)

    @property
    def successes(self) -> int:
        return sum(r.success for r in self.rows)

    def success_rate(self) -> float:
        return self.successes / len(self.rows)

    def wilson_interval(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.successes, len(self.rows), z)

    def query_stats(self) -> dict:
        qs = np.array([r.queries for r in self.rows], dtype=float)
        return {"min": float(qs.min()), "mean": float(qs.mean()),
                "max": float(qs.max())}

    def scaling_ratio(self, n: int, m: int) -> float:
        """mean queries / (m log2 n), the information-theoretic yardstick."""
        denom = max(m, 1) * math.log2(max(n, 2))
        return self.query_stats()["mean"] / denom


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        raise ParameterError("no trials")
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def trial_seed(master: int, trial: int) -> int:
    """Stable per-trial seed: extending a run never changes earlier trials."""
    return derive_stream("trial", master, trial)


def run_trial(plan: ExperimentPlan, trial: int) -> tuple[TrialRow, object]:
    seed = trial_seed(plan.master_seed, trial)
    inst = plan.instance
    if plan.fresh_instance_per_trial:
        inst = InstanceSpec(generator=inst.generator, n=inst.n,
                            seed=derive_stream("instance", seed),
                            params=inst.params)
    target = generate(inst)
    mode = "adaptive" if plan.algorithm in ADAPTIVE_MODE else "rounds"
    session = OracleSession(target, mode=mode,
                            record=plan.record_transcripts)
    m_arg = plan.m if plan.m is not None else target.m
    t0 = time.perf_counter()
    result = ALGORITHMS[plan.algorithm](session, m_arg, seed, plan.delta,
                                        plan.constants)
    wall_ms = (time.perf_counter() - t0) * 1e3
    session.audit()
    row = TrialRow(
        trial=trial, seed=seed,
        success=bool(result.edges == target.edges),
        queries=session.query_count, rounds=session.current_round,
        restarts=int(result.meta.get("restarts",
                                     1 if result.meta.get("fallback") else 0)),
        wall_ms=wall_ms)
    transcript = (session.transcript(plan.algorithm, seed)
                  if plan.record_transcripts else None)
    return row, transcript


def run(plan: ExperimentPlan, parallelism: int = 1) -> RunStats:
    """Execute every trial of the plan; trials are independent and the
    output is a pure function of (plan, master seed) regardless of the
    parallelism degree."""
    rows: list[TrialRow] = []
    transcripts = []
    if parallelism <= 1:
        for t in range(plan.trials):
            row, tr = run_trial(plan, t)
            rows.append(row)
            transcripts.append(tr)
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for row, tr in pool.map(run_trial, [plan] * plan.trials,
                                    range(plan.trials), chunksize=4):
                rows.append(row)
                transcripts.append(tr)
    rows.sort(key=lambda r: r.trial)
    return RunStats(plan=plan, rows=rows,
                    transcripts=[t for t in transcripts if t is not None])


# -- persistence -----------------------------------------------------------

TRIAL_FIELDS = ["trial", "seed", "success", "queries", "rounds",
                "restarts", "wall_ms"]


def write_trials_csv(stats: RunStats, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_FIELDS)
        for r in stats.rows:
            w.writerow([r.trial, r.seed, int(r.success), r.queries,
                        r.rounds, r.restarts, f"{r.wall_ms:.3f}"])


def read_trials_csv(path) -> list[TrialRow]:
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(TrialRow(
                trial=int(rec["trial"]), seed=int(rec["seed"]),
                success=bool(int(rec["success"])), queries=int(rec["queries"]),
                rounds=int(rec["rounds"]), restarts=int(rec["restarts"]),
                wall_ms=float(rec["wall_ms"])))
    return out


def aggregate_row(stats: RunStats, n: int, m: int) -> dict:
    lo, hi = stats.wilson_interval()
    qs = stats.query_stats()
    return {
        "algorithm": stats.plan.algorithm, "n": n, "m": m,
        "trials": len(stats.rows), "successes": stats.successes,
        "success_rate": stats.success_rate(),
        "wilson_low": lo, "wilson_high": hi,
        "queries_min": qs["min"], "queries_mean": qs["mean"],
        "queries_max": qs["max"],
        "rounds_max": max(r.rounds for r in stats.rows),
        "restarts_total": sum(r.restarts for r in stats.rows),
        "ratio_m_log2n": stats.scaling_ratio(n, m),
    }


def write_aggregate_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ParameterError("no aggregate rows")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for r in rows:
            w.writerow(r)


def write_series_tsv(points: list[tuple[float, float]], path) -> None:
    """Two-column TSV consumable by external plotters."""
    with open(path, "w") as fh:
        for x, y in points:
            fh.write(f"{x}\t{y}\n")


def recompute_aggregate(rows: list[TrialRow]) -> dict:
    """Aggregates are a pure function of the per-trial rows (used by the
    recompute-and-compare test)."""
    succ = sum(r.success for r in rows)
    qs = np.array([r.queries for r in rows], dtype=float)
    lo, hi = wilson_interval(succ, len(rows))
    return {"trials": len(rows), "successes": succ,
            "success_rate": succ / len(rows), "wilson_low": lo,
            "wilson_high": hi, "queries_min": float(qs.min()),
            "queries_mean": float(qs.mean()), "queries_max": float(qs.max()),
            "rounds_max": max(r.rounds for r in rows),
            "restarts_total": sum(r.restarts for r in rows)}
