"""Edge-detecting oracle sessions: round structure, counting, transcripts.

A session answers subset queries against one ``HiddenGraph``.  In
round-structured mode all queries of a round are submitted before any
answer is revealed; a closed round is immutable.  The fully-adaptive
mode (one implicit round per query) exists for the exhaustive baselines
and debugging only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, ParameterError
from .graphs import HiddenGraph, array_to_bitset, bitset_to_array, full_set


def answer_query(target: HiddenGraph, q: int) -> bool:
    """True iff some edge of the target has both endpoints in q.

    Empty and singleton queries are legal and answer False.
    """
    if q < 0 or q >> target.n:
        raise ParameterError("query contains vertices outside [n]")
    return target.answer_bits(q)


@dataclass
class RoundLog:
    index: int
    n_queries: int
    answers: np.ndarray
    queries: list[int] | None = None  # populated only when recording


class RoundHandle:
    """One open round.  Submit queries, then close to reveal answers."""

    def __init__(self, session: "OracleSession", index: int):
        self._session = session
        self.index = index
        self._closed = False
        self._answer_chunks: list[np.ndarray] = []
        self._queries: list[int] | None = [] if session.record else None
        self.n_queries = 0

    def submit(self, q: int) -> None:
        self._check_open()
        if q < 0 or q >> self._session.target.n:
            raise ParameterError("query contains vertices outside [n]")
        ans = self._session.target.answer_bits(q)
        self._answer_chunks.append(np.array([ans], dtype=bool))
        if self._queries is not None:
            self._queries.append(q)
        self.n_queries += 1
        self._session.query_count += 1

    def submit_batch(self, rows: np.ndarray) -> None:
        """Submit a (t, n) boolean query matrix in one call."""
        self._check_open()
        rows = np.asarray(rows, dtype=bool)
        if rows.ndim != 2:
            raise ParameterError("batch must be a 2-d boolean matrix")
        self._answer_chunks.append(self._session.target.answer_batch(rows))
        if self._queries is not None:
            self._queries.extend(array_to_bitset(r) for r in rows)
        self.n_queries += rows.shape[0]
        self._session.query_count += rows.shape[0]

    def close(self) -> np.ndarray:
        self._check_open()
        self._closed = True
        answers = (np.concatenate(self._answer_chunks)
                   if self._answer_chunks else np.zeros(0, dtype=bool))
        self._answer_chunks = [answers]
        self._session._finish_round(self, answers)
        return answers

    @property
    def answers(self) -> np.ndarray:
        if not self._closed:
            raise ContractViolation("answers are revealed only by close()")
        return self._answer_chunks[0]

    def _check_open(self):
        if self._closed:
            raise ContractViolation("round is already closed")


class OracleSession:
    """Query/round accounting wrapper around one hidden graph.

    Single-owner and single-threaded; run concurrent trials with one
    session each.
    """

    def __init__(self, target: HiddenGraph, mode: str = "rounds",
                 record: bool = False):
        if mode not in ("rounds", "adaptive"):
            raise ParameterError(f"unknown session mode {mode!r}")
        self.target = target
        self.mode = mode
        self.record = record
        self.query_count = 0
        self.current_round = 0
        self.rounds: list[RoundLog] = []
        self._open: RoundHandle | None = None

    # -- round-structured interface -----------------------------------

    def open_round(self) -> RoundHandle:
        if self._open is not None:
            raise ContractViolation("a round is already open")
        self._open = RoundHandle(self, self.current_round)
        return self._open

    def _finish_round(self, handle: RoundHandle, answers: np.ndarray) -> None:
        if handle is not self._open:
            raise ContractViolation("closing a stale round handle")
        self.rounds.append(RoundLog(
            index=handle.index, n_queries=handle.n_queries, answers=answers,
            queries=handle._queries))
        self.current_round += 1
        self._open = None

    # -- fully-adaptive interface ---------------------------------------

    def ask(self, q: int) -> bool:
        """One query, answered immediately (fully-adaptive mode only)."""
        if self.mode != "adaptive":
            raise ContractViolation(
                "ask() needs a fully-adaptive session; use rounds")
        h = self.open_round()
        h.submit(q)
        return bool(h.close()[0])

    # -- bookkeeping ------------------------------------------------------

    def round_lengths(self) -> list[int]:
        return [r.n_queries for r in self.rounds]

    def audit(self) -> None:
        """Check the accounting identity: total count == sum of rounds."""
        total = sum(r.n_queries for r in self.rounds)
        if self._open is not None:
            total += self._open.n_queries
        if total != self.query_count:
            raise ContractViolation(
                f"query_count {self.query_count} != transcript total {total}")

    def transcript(self, algorithm: str, seed: int) -> "Transcript":
        if not self.record:
            raise ParameterError("session was not recording query payloads")
        records = []
        for r in self.rounds:
            for q, a in zip(r.queries, r.answers):
                records.append((r.index, q, bool(a)))
        return Transcript(algorithm=algorithm, seed=seed,
                          n=self.target.n, m=self.target.m, records=records)


@dataclass
class Transcript:
    """Replayable record of every query and answer of one run."""

    algorithm: str
    seed: int
    n: int
    m: int
    records: list[tuple[int, int, bool]] = field(default_factory=list)

    def replay_matches(self, target: HiddenGraph) -> bool:
        """True iff replaying every query reproduces the recorded answers
        bit-exactly."""
        return all(target.answer_bits(q) == a for _, q, a in self.records)

    def round_count(self) -> int:
        return 1 + max((r for r, _, _ in self.records), default=-1)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# alg={self.algorithm} seed={self.seed} "
                     f"n={self.n} m={self.m}\n")
            for rnd, q, a in self.records:
                fh.write(f"{rnd}\t{q:x}\t{1 if a else 0}\n")

    @classmethod
    def read(cls, path) -> "Transcript":
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("# "):
                raise ParameterError("missing transcript header")
            meta = dict(kv.split("=", 1) for kv in header[2:].split())
            records = []
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rnd, qhex, a = line.split("\t")
                records.append((int(rnd), int(qhex, 16), a == "1"))
        return cls(algorithm=meta["alg"], seed=int(meta["seed"]),
                   n=int(meta["n"]), m=int(meta["m"]), records=records)


def ask_single(session: OracleSession, q: int) -> bool:
    """One-query round against a round-structured session."""
    h = session.open_round()
    h.submit(q)
    return bool(h.close()[0])


def detect_empty(session: OracleSession) -> bool:
    """Single query on V; False answer proves the target has no edges."""
    return not ask_single(session, full_set(session.target.n))


# function-style aliases matching the operation names
def open_round(session: OracleSession) -> RoundHandle:
    return session.open_round()


def submit(handle: RoundHandle, q: int) -> None:
    handle.submit(q)


def close_round(handle: RoundHandle) -> np.ndarray:
    return handle.close()
