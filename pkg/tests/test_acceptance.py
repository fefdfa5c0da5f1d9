"""Acceptance gate: one test per criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -v -s``).

Every tolerance is pinned here.  Statistical gates use fixed master
seeds, so the whole suite is deterministic.
"""

import itertools
import math

import numpy as np
import pytest

from edgeprobe.candidates import CandidateEdgeSet
from edgeprobe.config import DEFAULTS
from edgeprobe.curves import ExactNoRateCurve, bisect_root, p_star, star_no_rate
from edgeprobe.detcodes import build_one_or_code, decode_one_or, find_verified_family
from edgeprobe.deterministic import five_round_deterministic, two_round_deterministic
from edgeprobe.elimination import (EliminationParams, elimination_round,
                                   non_adaptive_mc, non_adaptive_params)
from edgeprobe.errors import ParameterError
from edgeprobe.estimate import estimate, estimate_degree, log_star
from edgeprobe.experiments import wilson_interval
from edgeprobe.generators import erdos_renyi_m, planted_star
from edgeprobe.graphs import HiddenGraph
from edgeprobe.largen import three_round_lv_large_n
from edgeprobe.multiround import three_round_mc, two_round_mc
from edgeprobe.oracle import OracleSession
from edgeprobe.randomness import SeedPair, derive_stream
from edgeprobe.structure import Threshold
from edgeprobe.unknownm import pipeline_unknown_m

pytestmark = pytest.mark.acceptance


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE C{criterion:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def audit(session: OracleSession) -> None:
    """Criterion 14 identity, asserted on every run of criteria 3-13."""
    session.audit()


def wilson_margin(successes: int, trials: int) -> float:
    lo, hi = wilson_interval(successes, trials)
    return (hi - lo) / 2


# -- C1: oracle exactness -------------------------------------------------

def _subset_matrix(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.uint32)
    return (masks[:, None] >> np.arange(n)[None, :]) & 1 == 1


def test_c01_oracle_exactness():
    rng = np.random.default_rng(derive_stream("c1"))
    mismatches = 0
    checked = 0
    for i in range(500):
        n = int(rng.integers(1, 13))
        total = n * (n - 1) // 2
        m = int(rng.integers(0, total + 1)) if total else 0
        g = erdos_renyi_m(n, m, seed=i)
        rows = _subset_matrix(n)
        fast = g.answer_batch(rows)
        # independent route: full pairwise scan via the adjacency matrix
        adj = g.adjacency_matrix()
        scan = np.einsum("qi,ij,qj->q", rows, adj, rows) > 0
        mismatches += int((fast != scan).sum())
        checked += rows.shape[0]
        # tie the scalar production oracle to the batched one on a sample
        for q in rng.integers(0, 1 << n, size=8):
            q = int(q)
            row = np.array([(q >> v) & 1 == 1 for v in range(n)])
            assert g.answer_bits(q) == g.answer_batch(row[None, :])[0]
    report(1, mismatches == 0,
           f"{checked} subset queries over 500 instances, "
           f"{mismatches} mismatches (tolerance 0)")


# -- C2: elimination soundness -------------------------------------------

def test_c02_soundness_invariant():
    rng = np.random.default_rng(derive_stream("c2"))
    violations = 0
    trials = 10_000
    for i in range(trials):
        if i % 5 == 0:  # general cell: arbitrary m, nondyadic p
            n = int(rng.choice([8, 16, 32, 64, 128]))
            m = int(rng.integers(1, min(11, n // 2)))
        else:           # fast cell: powers of two
            n = int(rng.choice([16, 32, 64, 128, 256, 512]))
            m = int(rng.choice([1, 2, 4, 8, 16, 32]))
            m = min(m, n // 4) or 1
        g = erdos_renyi_m(n, m, seed=derive_stream("c2g", i))
        delta = float(rng.choice([0.3, 0.5, 0.7, 0.9]))
        p = 1.0 / (int(rng.choice([2, 4])) * m)
        r = int(rng.choice([max(m // 2, 1), m]))
        params = EliminationParams.derive(n, m, p, Threshold.of(m, r, 0), delta)
        s = OracleSession(g)
        cand = elimination_round(s, params, SeedPair(i, 2))
        if not cand.contains_all(g.edges):
            violations += 1
        assert s.query_count == params.t
    report(2, violations == 0,
           f"{trials} elimination rounds, {violations} soundness violations "
           f"(tolerance 0)")


# -- C3: non-adaptive Monte Carlo ------------------------------------------

def test_c03_non_adaptive_mc():
    n, delta, trials = 128, 0.1, 200
    ok = True
    details = []
    for m in (2, 4, 8):
        t_closed = non_adaptive_params(n, m, delta).t
        hits = 0
        for i in range(trials):
            g = erdos_renyi_m(n, m, seed=derive_stream("c3", m, i))
            s = OracleSession(g)
            res = non_adaptive_mc(s, m, delta=delta, seed=i)
            audit(s)
            assert s.query_count == t_closed  # exact closed form
            assert s.current_round == 1
            hits += res.edges == g.edges
        rate = hits / trials
        bar = 0.9 - wilson_margin(hits, trials)
        ok &= rate >= bar
        details.append(f"m={m}: rate={rate:.3f} (bar {bar:.3f}, t={t_closed})")
    report(3, ok, "; ".join(details))


# -- C4: two-round Monte Carlo ---------------------------------------------

def test_c04_two_round_mc():
    n, trials = 512, 200
    ok = True
    details = []
    ratios = {}
    for m in (4, 8, 16, 27):
        hits = 0
        queries = []
        for i in range(trials):
            g = erdos_renyi_m(n, m, seed=derive_stream("c4", m, i))
            s = OracleSession(g)
            res = two_round_mc(s, m, seed=i)
            audit(s)
            assert s.current_round == 2
            hits += res.edges == g.edges
            queries.append(s.query_count)
        rate = hits / trials
        bar = 0.95 - wilson_margin(hits, trials)
        ok &= rate >= bar
        ratios[m] = np.mean(queries) / (m ** (4 / 3) * math.log2(n))
        details.append(f"m={m}: rate={rate:.3f} (bar {bar:.3f})")
    band = max(ratios.values()) / min(ratios.values())
    ok &= band <= 4.0
    details.append("ratios q/(m^{4/3} lg n): "
                   + ", ".join(f"{m}:{r:.1f}" for m, r in ratios.items())
                   + f"; band x{band:.2f} (tolerance x4)")
    report(4, ok, "; ".join(details))


# -- C5: three-round Monte Carlo --------------------------------------------

def test_c05_three_round_mc():
    n, trials = 256, 200
    ok = True
    details = []
    per_run_ratio = []
    mean_ratios = {}
    for m in (4, 16, 64):
        hits = 0
        queries = []
        for i in range(trials):
            g = erdos_renyi_m(n, m, seed=derive_stream("c5", m, i))
            s = OracleSession(g)
            res = three_round_mc(s, m, seed=i)
            audit(s)
            assert s.current_round == 3
            hits += res.edges == g.edges
            queries.append(s.query_count)
        rate = hits / trials
        bar = 0.95 - wilson_margin(hits, trials)
        ok &= rate >= bar
        form = m * math.log2(n) + m ** 1.5
        per_run_ratio += [q / form for q in queries]
        mean_ratios[m] = np.mean(queries) / form
        details.append(f"m={m}: rate={rate:.3f} (bar {bar:.3f})")
    c_fit = max(per_run_ratio)
    ok &= all(r <= c_fit + 1e-9 for r in per_run_ratio)
    band = max(mean_ratios.values()) / min(mean_ratios.values())
    ok &= band <= 4.0
    details.append(f"fitted C={c_fit:.0f} vs m lg n + m^1.5; "
                   f"mean-ratio band x{band:.2f}")
    report(5, ok, "; ".join(details))


# -- C6: large-n Las Vegas ----------------------------------------------------

def test_c06_large_n_las_vegas():
    n, m, trials = 2048, 2, 500
    wrong = fallbacks = 0
    for i in range(trials):
        g = erdos_renyi_m(n, m, seed=derive_stream("c6", i))
        s = OracleSession(g)
        res = three_round_lv_large_n(s, m, seed=i)
        audit(s)
        wrong += res.edges != g.edges
        if res.meta["fallback"]:
            fallbacks += 1
        else:
            assert s.current_round <= 3
    ok = wrong == 0 and fallbacks / trials <= 0.05
    report(6, ok, f"{trials} trials: {wrong} wrong outputs (tolerance 0), "
                  f"fallback rate {fallbacks / trials:.3f} (tolerance 0.05)")


# -- C7: exact curve properties ------------------------------------------------

def test_c07_curve_properties():
    rng = np.random.default_rng(derive_stream("c7"))
    grid = np.linspace(0.02, 0.98, 25)
    violations = 0
    for i in range(200):
        n = int(rng.integers(3, 15))
        total = n * (n - 1) // 2
        m = int(rng.integers(1, total + 1))
        g = erdos_renyi_m(n, m, seed=derive_stream("c7g", i))
        curve = ExactNoRateCurve.of_graph(g)
        vals = np.array([curve(p) for p in grid])
        # Eq-style bounds and strict monotone decrease
        if not ((1 - g.m * grid ** 2 - 1e-12 <= vals).all()
                and (vals <= 1 - grid ** 2 + 1e-12).all()):
            violations += 1
        if not (np.diff(vals) < 0).all():
            violations += 1
        # super-multiplicativity N(kp) < N(p)^k
        for k in (2, 3):
            ps = grid[grid * k <= 1.0]
            if not all(curve(k * p) < curve(p) ** k + 1e-15 for p in ps):
                violations += 1
        ps_val = p_star(curve)
        if not (1 / math.sqrt(2 * g.m) - 1e-9 <= ps_val
                <= 1 / math.sqrt(2) + 1e-9):
            violations += 1
    report(7, violations == 0,
           f"200 exact curves (n<=14): {violations} violations (tolerance 0)")


# -- C8: estimate window --------------------------------------------------------

def test_c08_estimate_window():
    n, trials = 1024, 300
    ok = True
    details = []
    for d in (4, 16, 64):
        g = planted_star(n, d)
        ps = bisect_root(lambda p: star_no_rate(d, p), 0.5)
        hits = 0
        for i in range(trials):
            s = OracleSession(g)
            rep = estimate(s, n * n, SeedPair(derive_stream("c8", d, i)))
            audit(s)
            if rep.kind == "probe" and ps / 8 - 1e-12 <= rep.p_prime <= ps + 1e-12:
                hits += 1
        rate = hits / trials
        ok &= rate >= 0.95
        details.append(f"d={d}: in-window {rate:.3f} (bar 0.95, p*={ps:.4f})")
    report(8, ok, "; ".join(details))


# -- C9: degree-estimate window ---------------------------------------------------

def test_c09_estimate_degree_window():
    n, trials = 1024, 300
    ok = True
    details = []
    for d in (4, 16, 64):
        g = planted_star(n, d)
        hits = 0
        for i in range(trials):
            s = OracleSession(g)
            rep = estimate_degree(s, 0, n, SeedPair(derive_stream("c9", d, i)))
            audit(s)
            if rep.kind == "probe":
                inv = 1.0 / rep.p_prime
                hits += d <= inv <= 31 * d
        rate = hits / trials
        ok &= rate >= 0.95
        details.append(f"d={d}: 1/p' in [d,31d] {rate:.3f} (bar 0.95)")
    report(9, ok, "; ".join(details))


# -- C10: unknown-m pipelines -----------------------------------------------------

def test_c10_unknown_m_pipeline():
    n, trials = 1024, 200
    budget = log_star(n) + 3
    assert budget == 7
    ok = True
    details = []
    ratios = []
    for m in (4, 16, 64):
        wrong = fallbacks = 0
        queries = []
        for i in range(trials):
            g = erdos_renyi_m(n, m, seed=derive_stream("c10", m, i))
            s = OracleSession(g)
            res = pipeline_unknown_m(s, mode="log-star", seed=i)
            audit(s)
            wrong += res.edges != g.edges
            if res.meta["fallback"] is not None:
                fallbacks += 1
            else:
                assert s.current_round <= budget
            queries.append(s.query_count)
        ok &= wrong == 0 and fallbacks / trials <= 0.05
        ratios.append(np.mean(queries) / (m * math.log2(n)))
        details.append(f"m={m}: wrong={wrong}, fallback={fallbacks / trials:.3f}")
    c_fit = max(ratios)
    details.append("fitted C vs m lg n: "
                   + ", ".join(f"{r:.0f}" for r in ratios)
                   + f" (C={c_fit:.0f})")
    report(10, ok, "; ".join(details))


# -- C11: one-or detector ----------------------------------------------------------

def test_c11_one_or_detector():
    n = 64
    code = build_one_or_code(n)
    errors = 0
    # minimal size
    if math.comb(2 * code.t, code.t) < n or \
       (code.t > 1 and math.comb(2 * (code.t - 1), code.t - 1) >= n):
        errors += 1
    if decode_one_or((False,) * code.n_queries, code) != ("empty", None):
        errors += 1
    for j in range(n):
        answers = tuple(r in code.assignments[j]
                        for r in range(code.n_queries))
        if decode_one_or(answers, code) != ("vertex", j):
            errors += 1
    for a, b in itertools.combinations(range(n), 2):
        union = set(code.assignments[a]) | set(code.assignments[b])
        answers = tuple(r in union for r in range(code.n_queries))
        if decode_one_or(answers, code) != ("error", None):
            errors += 1
    report(11, errors == 0,
           f"n=64: 64 singletons + {math.comb(64, 2)} pairs + empty decoded, "
           f"{errors} errors (tolerance 0), 2t={code.n_queries}")


# -- C12: two-round deterministic ----------------------------------------------------

def test_c12_two_round_deterministic():
    fam = find_verified_family(8, 1)
    failures = 0
    for edges in itertools.combinations(range(8), 2):
        g = HiddenGraph(8, [edges])
        s = OracleSession(g)
        res = two_round_deterministic(s, fam)
        audit(s)
        failures += res.edges != g.edges or s.current_round != 2
    s = OracleSession(HiddenGraph(8, []))
    res = two_round_deterministic(s, fam)
    failures += res.edges != frozenset() or s.current_round != 2
    report(12, failures == 0,
           f"verified family (n=8, m=1, t={fam.t}, seed={fam.seed}): "
           f"28 single-edge targets + empty, {failures} failures")


# -- C13: five-round deterministic ----------------------------------------------------

def test_c13_five_round_deterministic():
    failures = 0
    runs = 0
    for n in (64, 128):
        for m in (1, 3):
            for i in range(25):
                g = erdos_renyi_m(n, m, seed=derive_stream("c13", n, m, i))
                s1 = OracleSession(g, record=True)
                res = five_round_deterministic(s1, m)
                audit(s1)
                runs += 1
                if res.edges != g.edges or s1.current_round != 5:
                    failures += 1
                    continue
                # closed-form per-round counts (criterion 14 hook)
                meta = res.meta
                if s1.round_lengths() != [meta["round1"], meta["round2"],
                                          meta["round3"], meta["round4"],
                                          meta["round5"]]:
                    failures += 1
                # bit-identical transcripts across repeated runs
                s2 = OracleSession(g, record=True)
                five_round_deterministic(s2, m)
                if s1.transcript("5r", 0).records != s2.transcript("5r", 0).records:
                    failures += 1
    report(13, failures == 0,
           f"{runs} runs over n in {{64,128}}, m in {{1,3}}: "
           f"{failures} failures (tolerance 0)")


# -- C14: query accounting --------------------------------------------------------------

def test_c14_query_accounting():
    # the per-run identity is asserted by audit() throughout C3-C13; here
    # the closed-form predictions are checked once more per algorithm
    checks = []
    n, m, delta = 128, 4, 0.1
    g = erdos_renyi_m(n, m, seed=1)
    s = OracleSession(g)
    non_adaptive_mc(s, m, delta=delta, seed=0)
    t = non_adaptive_params(n, m, delta).t
    checks.append(s.query_count == t == s.rounds[0].n_queries)

    s = OracleSession(g)
    res = two_round_mc(s, m, seed=0)
    checks.append(s.rounds[0].n_queries == res.meta["t"])
    checks.append(s.query_count == sum(s.round_lengths()))

    s = OracleSession(g)
    res = three_round_mc(s, m, seed=0)
    checks.append(s.rounds[0].n_queries == res.meta["t"])

    s = OracleSession(g)
    res = five_round_deterministic(s, m)
    checks.append(s.round_lengths() == [res.meta["round1"], res.meta["round2"],
                                        res.meta["round3"], res.meta["round4"],
                                        res.meta["round5"]])
    ok = all(checks)
    report(14, ok, f"closed-form count checks: {checks}")
