"""Command-line interface.

Verbs:
  learn       run one algorithm against a graph file
  experiment  execute a plan file (trials, stats, CSV outputs)
  generate    write a graph produced by an instance spec file
  construct   build and cache a deterministic artifact
  verify      re-verify a cached artifact's property

Plan and spec files are flat key-value text: one `key = value` per line,
`#` comments allowed; generator parameters use the `gen-` prefix.  Exit
codes: 0 success, 2 parameter/configuration error, 3 detected
algorithm-contract violation.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import DEFAULTS
from .detcodes import (build_disjunct_matrix, build_one_or_code,
                       build_pair_cover_family, build_partition_matrix,
                       find_verified_family, load_matrix, pairwise_agreements,
                       save_matrix, sample_two_round_family, verify_covering,
                       QueryFamily)
from .errors import (ContractViolation, DetectedFailure, EdgeProbeError,
                     InfeasibleError, ParameterError)
from .experiments import (ALGORITHMS, ExperimentPlan, aggregate_row, run,
                          write_aggregate_csv, write_series_tsv,
                          write_trials_csv)
from .generators import GENERATORS, InstanceSpec, generate
from .graphs import read_graph, write_graph
from .oracle import OracleSession
from .unknownm import pipeline_unknown_m


def parse_kv_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"bad plan line (need key = value): {line!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
    return out


def _as_bool(s: str) -> bool:
    return s.lower() in ("1", "true", "yes", "on")


def _gen_params(kv: dict) -> dict:
    params = {}
    for k, v in kv.items():
        if k.startswith("gen-"):
            name = k[4:].replace("-", "_")
            try:
                params[name] = int(v)
            except ValueError:
                params[name] = v
    return params


def _instance_from_kv(kv: dict) -> InstanceSpec:
    gen = kv.get("generator")
    if gen is None:
        raise ParameterError("spec needs a 'generator' key")
    if gen != "from-file" and gen not in GENERATORS:
        raise ParameterError(f"unknown generator {gen!r}")
    return InstanceSpec(generator=gen, n=int(kv.get("n", 0)),
                        seed=int(kv.get("seed", 0)), params=_gen_params(kv))


def cmd_learn(args) -> int:
    g = read_graph(args.graph)
    record = args.transcript is not None
    if args.alg == "unknown-m-k":
        if args.rounds is None:
            raise ParameterError("--rounds is required for unknown-m-k")
        session = OracleSession(g, record=record)
        res = pipeline_unknown_m(session, mode=("k", args.rounds),
                                 seed=args.seed)
    else:
        if args.alg not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {args.alg!r}; "
                                 f"one of {sorted(ALGORITHMS)} or unknown-m-k")
        mode = "adaptive" if args.alg == "adaptive-baseline" else "rounds"
        session = OracleSession(g, mode=mode, record=record)
        m_arg = args.m if args.m is not None else g.m
        res = ALGORITHMS[args.alg](session, m_arg, args.seed, args.delta,
                                   DEFAULTS)
    session.audit()
    print(f"{g.n} {len(res.edges)}")
    for u, v in sorted(res.edges):
        print(f"{u + 1} {v + 1}")
    print(f"# queries={session.query_count} rounds={session.current_round} "
          f"ok={int(res.ok)} exact={int(res.edges == g.edges)}",
          file=sys.stderr)
    if args.transcript:
        session.transcript(args.alg, args.seed).write(args.transcript)
    return 0


def cmd_experiment(args) -> int:
    kv = parse_kv_file(args.plan)
    inst = _instance_from_kv(kv)
    plan = ExperimentPlan(
        algorithm=kv.get("algorithm", "brute-force"),
        instance=inst,
        trials=int(kv.get("trials", 1)),
        m=int(kv["alg-m"]) if "alg-m" in kv else None,
        delta=float(kv["delta"]) if "delta" in kv else None,
        master_seed=int(kv.get("seed", 0)),
        fresh_instance_per_trial=_as_bool(kv.get("fresh-instance", "true")),
        record_transcripts=_as_bool(kv.get("record-transcripts", "false")))
    stats = run(plan, parallelism=args.parallelism)
    n = inst.n
    m_for_ratio = plan.m if plan.m is not None else int(kv.get("gen-m", 1))
    agg = aggregate_row(stats, n, m_for_ratio)
    if "trials-csv" in kv:
        write_trials_csv(stats, kv["trials-csv"])
    if "aggregate-csv" in kv:
        write_aggregate_csv([agg], kv["aggregate-csv"])
    if "series-tsv" in kv:
        pts = [(r.trial, r.queries) for r in stats.rows]
        write_series_tsv(pts, kv["series-tsv"])
    print(f"algorithm={agg['algorithm']} trials={agg['trials']} "
          f"success_rate={agg['success_rate']:.4f} "
          f"wilson=[{agg['wilson_low']:.4f},{agg['wilson_high']:.4f}] "
          f"queries_mean={agg['queries_mean']:.1f} "
          f"rounds_max={agg['rounds_max']}")
    return 0


def cmd_generate(args) -> int:
    kv = parse_kv_file(args.spec)
    g = generate(_instance_from_kv(kv))
    write_graph(g, args.out)
    print(f"wrote n={g.n} m={g.m} to {args.out}")
    return 0


def cmd_construct(args) -> int:
    if args.kind == "two-round-family":
        fam = find_verified_family(args.n, args.m)
        save_matrix(args.out, "two-round-family", args.n, args.m, 0,
                    fam.t, fam.seed, fam.rows)
        print(f"verified family t={fam.t} seed={fam.seed} -> {args.out}")
    elif args.kind == "one-or":
        code = build_one_or_code(args.n)
        save_matrix(args.out, "one-or", args.n, 0, 0, code.n_queries, None,
                    code.support_matrix())
        print(f"one-or code 2t={code.n_queries} -> {args.out}")
    elif args.kind == "partition":
        pm = build_partition_matrix(args.n, args.m)
        save_matrix(args.out, "partition", args.n, args.m, pm.w, pm.t,
                    None, pm.entries)
        print(f"partition matrix t={pm.t} w={pm.w} "
              f"max_agreement={pm.max_agreement} -> {args.out}")
    elif args.kind == "disjunct":
        dm = build_disjunct_matrix(args.n, args.m)
        save_matrix(args.out, "disjunct", args.n, args.m, 0, dm.t, None,
                    dm.rows)
        print(f"disjunct matrix t={dm.t} d={args.m} -> {args.out}")
    elif args.kind == "pair-cover":
        fam = build_pair_cover_family(args.n, args.m)
        save_matrix(args.out, "pair-cover", args.n, args.m, 0, fam.t, None,
                    fam.rows)
        print(f"pair-cover family t={fam.t} -> {args.out}")
    else:
        raise ParameterError(f"unknown construct kind {args.kind!r}")
    return 0


def cmd_verify(args) -> int:
    meta, arr = load_matrix(args.file)
    kind = meta["kind"]
    n, m, t = int(meta["n"]), int(meta["m"]), int(meta["t"])
    if kind == "partition":
        agree = pairwise_agreements(arr)
        ok = agree * 2 * m <= t
        print(f"partition: max agreement {agree}, bound {t // (2 * m)}")
    elif kind == "disjunct":
        weights = arr.sum(axis=0)
        inter = np.zeros((n, n), dtype=np.int64)
        cols = arr.astype(np.int64)
        inter = cols.T @ cols
        np.fill_diagonal(inter, 0)
        ok = bool(weights.min() > m * inter.max())
        print(f"disjunct: min weight {weights.min()}, "
              f"d*max intersection {m * inter.max()}")
    elif kind == "two-round-family":
        fam = QueryFamily(n=n, m=m, rows=arr.astype(bool))
        ok, counterexample = verify_covering(fam)
        if not ok:
            print(f"counterexample: {counterexample}")
    elif kind == "one-or":
        colsum = arr.sum(axis=0)
        ok = bool((colsum == t // 2).all()) and \
            len({tuple(np.nonzero(arr[:, j])[0]) for j in range(n)}) == n
        print(f"one-or: balanced={bool((colsum == t // 2).all())}")
    elif kind == "pair-cover":
        from .detcodes import PairCoverFamily, verify_pair_cover_exhaustive
        fam = PairCoverFamily(n=n, m=m, rows=arr.astype(bool), verified=False)
        ok = verify_pair_cover_exhaustive(fam)
    else:
        raise ParameterError(f"no verifier for kind {kind!r}")
    print(f"verify {args.file}: {'OK' if ok else 'FAILED'}")
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edgeprobe",
                                 description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("learn", help="run one algorithm against a graph file")
    p.add_argument("--alg", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--transcript", default=None)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("experiment", help="execute a plan file")
    p.add_argument("--plan", required=True)
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("generate", help="write a graph from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("construct", help="build and cache an artifact")
    p.add_argument("--kind", required=True,
                   choices=["two-round-family", "one-or", "partition",
                            "disjunct", "pair-cover"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1,
                   help="edge bound (or disjunctness order for 'disjunct')")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("verify", help="re-verify a cached artifact")
    p.add_argument("file")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParameterError, InfeasibleError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ContractViolation, DetectedFailure) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
