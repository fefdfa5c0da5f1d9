"""Deterministic combinatorial constructions: the balanced one-or code,
polynomial-evaluation (Reed-Solomon style) partition and disjunct
matrices, the sampled two-round covering family with its exhaustive
verifier, and the pair-cover family behind the non-adaptive fallback.

All matrix artifacts carry a ``verified`` flag that is set only after an
exact check of the property contract (pairwise agreement or covering),
and can be persisted with a content hash so expensive verification runs
once.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ContractViolation, InfeasibleError, ParameterError
from .graphs import bitset
from .randomness import PRandomSchedule, SeedPair

# -- small number theory / polynomial codes ---------------------------


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    for f in range(2, int(math.isqrt(q)) + 1):
        if q % f == 0:
            return False
    return True


def next_prime(q: int) -> int:
    q = max(q, 2)
    while not is_prime(q):
        q += 1
    return q


def rs_codewords(n_cols: int, q: int, k: int) -> np.ndarray:
    """(q, n_cols) evaluation table over Z_q: column j holds the values of
    the degree-(k-1) polynomial whose coefficients are the base-q digits
    of j, at the points 0..q-1.  Distinct columns agree in at most k-1
    rows (a nonzero polynomial of degree < k has < k roots)."""
    if n_cols > q ** k:
        raise ParameterError(f"q^k = {q**k} cannot index {n_cols} columns")
    cols = np.arange(n_cols, dtype=np.int64)
    digits = np.empty((k, n_cols), dtype=np.int64)
    rem = cols.copy()
    for i in range(k):
        digits[i] = rem % q
        rem //= q
    xs = np.arange(q, dtype=np.int64)
    vals = np.zeros((q, n_cols), dtype=np.int64)
    for i in range(k - 1, -1, -1):  # Horner over the evaluation points
        vals = (vals * xs[:, None] + digits[i][None, :]) % q
    return vals


def pairwise_agreements(table: np.ndarray) -> int:
    """Maximum number of coordinates in which two distinct columns of the
    table are equal (exhaustive, exact)."""
    t, n = table.shape
    if n < 2:
        return 0
    best = 0
    # row-at-a-time accumulation keeps memory at n^2 int16
    acc = np.zeros((n, n), dtype=np.int32)
    for r in range(t):
        row = table[r]
        acc += row[:, None] == row[None, :]
    np.fill_diagonal(acc, 0)
    best = int(acc.max())
    return best


# -- one-or code ------------------------------------------------------


def _unrank_subset(rank: int, t: int, universe: int) -> tuple[int, ...]:
    """rank-th t-subset of range(universe) in lexicographic order."""
    out = []
    x = 0
    need = t
    while need:
        c = math.comb(universe - x - 1, need - 1)
        if rank < c:
            out.append(x)
            need -= 1
        else:
            rank -= c
        x += 1
    return tuple(out)


@dataclass(frozen=True)
class OneOrCode:
    """2t queries in which every element appears in exactly t, with all
    appearance patterns distinct.  Answer weight 0 means an empty loop
    set, a weight-t pattern matching an assignment names the single
    element, and anything else proves two or more loops."""

    n: int
    t: int
    assignments: tuple[tuple[int, ...], ...]
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index",
                           {a: i for i, a in enumerate(self.assignments)})

    @property
    def n_queries(self) -> int:
        return 2 * self.t

    def support_matrix(self) -> np.ndarray:
        """(2t, n) boolean: row r marks the elements whose assignment
        contains query r."""
        mat = np.zeros((2 * self.t, self.n), dtype=bool)
        for j, rows in enumerate(self.assignments):
            for r in rows:
                mat[r, j] = True
        return mat

    def decode(self, answers) -> tuple[str, int | None]:
        """-> ("empty", None) | ("vertex", element index) | ("error", None)."""
        vec = tuple(i for i, a in enumerate(answers) if a)
        if len(answers) != 2 * self.t:
            raise ParameterError("answer vector length != 2t")
        if not vec:
            return ("empty", None)
        if len(vec) != self.t:
            return ("error", None)
        hit = self._index.get(vec)
        return ("vertex", hit) if hit is not None else ("error", None)


def build_one_or_code(n: int) -> OneOrCode:
    """Minimal t with binom(2t, t) >= n; assignments are the first n
    t-subsets of [2t] in lexicographic order."""
    if n < 1:
        raise ParameterError("n must be positive")
    t = 1
    while math.comb(2 * t, t) < n:
        t += 1
    assignments = tuple(_unrank_subset(r, t, 2 * t) for r in range(n))
    return OneOrCode(n=n, t=t, assignments=assignments)


def decode_one_or(answers, code: OneOrCode):
    return code.decode(answers)


# -- partition matrix (bounded pairwise column agreement) ---------------


@dataclass(frozen=True)
class PartitionMatrix:
    """t x n matrix over the alphabet [w]; any two columns agree in at
    most t/(2m) entries, verified exhaustively at build time."""

    n: int
    m: int
    w: int
    t: int
    entries: np.ndarray  # (t, n) int64, values in [0, w)
    verified: bool = False
    max_agreement: int = 0

    def row_cells(self, row: int) -> list[np.ndarray]:
        vals = self.entries[row]
        return [np.nonzero(vals == c)[0] for c in range(self.w)]


def build_partition_matrix(n: int, m: int) -> PartitionMatrix:
    """Polynomial-evaluation construction: columns are codewords over a
    prime alphabet q with k-1 <= q/(2m) agreements; the cheapest (k, q) in
    round-1 + round-2 query cost is chosen and the agreement bound is then
    checked exhaustively over all column pairs."""
    if n < 2 or m < 1:
        raise ParameterError("need n >= 2, m >= 1")
    best = None
    for k in range(1, 5):
        q = next_prime(max(2 * m * (k - 1) + 1, math.ceil(n ** (1.0 / k))))
        while q ** k < n:
            q = next_prime(q + 1)
        t = 1 if k == 1 else q
        cost = q * t + q * (q - 1) // 2
        if best is None or cost < best[3]:
            best = (k, q, t, cost)
    k, q, t, _ = best
    table = rs_codewords(n, q, k)[:t]
    agree = pairwise_agreements(table) if n >= 2 else 0
    cap = t // (2 * m)
    if agree > cap:
        # retry with more rows / larger alphabet before giving up
        q2 = next_prime(2 * m * (k if k > 1 else 1) + q)
        table = rs_codewords(n, q2, max(k, 2))
        t, q = table.shape[0], q2
        agree = pairwise_agreements(table)
        if agree > t // (2 * m):
            raise ContractViolation(
                f"partition matrix agreement {agree} > t/(2m) at n={n}, m={m}")
    return PartitionMatrix(n=n, m=m, w=q, t=t, entries=table,
                           verified=True, max_agreement=agree)


# -- disjunct matrix (one-round exact loop decoding) --------------------


@dataclass(frozen=True)
class DisjunctMatrix:
    """Boolean test matrix; when verified, for every column j and every d
    other columns some row contains j and none of the others, so up to d
    positives decode exactly in one round."""

    n: int
    d: int
    rows: np.ndarray  # (t, n) bool
    verified: bool = False

    @property
    def t(self) -> int:
        return self.rows.shape[0]

    def decode(self, answers: np.ndarray) -> np.ndarray:
        """Definite-defectives decoding: keep columns all of whose tests
        answered YES.  Exact whenever #positives <= d."""
        answers = np.asarray(answers, dtype=bool)
        return ~((self.rows & ~answers[:, None]).any(axis=0))


def build_disjunct_matrix(n: int, d: int) -> DisjunctMatrix:
    """Concatenated polynomial-code construction: one block of q rows per
    evaluation point, d(k-1)+1 points; column weight exceeds d times the
    maximum pairwise intersection, which certifies d-disjunctness."""
    if n < 1 or d < 1:
        raise ParameterError("need n >= 1, d >= 1")
    best = None
    for k in (1, 2, 3):
        q = next_prime(max(d * (k - 1) + 1, math.ceil(n ** (1.0 / k))))
        while q ** k < n:
            q = next_prime(q + 1)
        s = d * (k - 1) + 1
        if best is None or s * q < best[2] * best[1]:
            best = (k, q, s)
    k, q, s = best
    table = rs_codewords(n, q, k)[:s]  # s evaluation points suffice
    rows = np.zeros((s * q, n), dtype=bool)
    for x in range(s):
        rows[x * q + table[x], np.arange(n)] = True
    # certificate: weight s per column, pairwise intersections <= k-1 < s/d
    inter = pairwise_agreements(table) if n >= 2 else 0
    if not (s > d * inter):
        raise ContractViolation("disjunct certificate failed")
    return DisjunctMatrix(n=n, d=d, rows=rows, verified=True)


def verify_disjunct_exhaustive(mat: DisjunctMatrix,
                               guard: int = 2_000_000) -> bool:
    """Direct check of d-disjunctness over all (column, d-subset) pairs;
    refuses beyond the guard."""
    n, d = mat.n, mat.d
    work = n * math.comb(max(n - 1, 0), d)
    if work > guard:
        raise InfeasibleError(f"{work} column/subset checks exceed the guard")
    masks = [bitset(np.nonzero(mat.rows[:, j])[0]) for j in range(n)]
    for j in range(n):
        others = [x for x in range(n) if x != j]
        for sub in combinations(others, d):
            union = 0
            for x in sub:
                union |= masks[x]
            if masks[j] & ~union == 0:
                return False
    return True


# -- sampled two-round covering family ----------------------------------


@dataclass
class QueryFamily:
    """Candidate query set for the two-round deterministic algorithm.

    When verified, for every graph G with exactly m edges and every m-set
    E' of non-edges of G, some family query answers NO on G while fully
    containing a pair of E'.
    """

    n: int
    m: int
    rows: np.ndarray  # (t, n) bool
    provenance: str = "sampled"
    seed: int | None = None
    verified: bool = False

    @property
    def t(self) -> int:
        return self.rows.shape[0]

    def query_bitsets(self) -> list[int]:
        return [bitset(np.nonzero(r)[0]) for r in self.rows]


def sample_two_round_family(n: int, m: int, t: int, seed: int,
                            p: float | None = None) -> QueryFamily:
    """t queries, each vertex included independently with probability p
    (default 1/m).  The m = 1 default degenerates to all-of-V queries and
    is flagged through provenance; callers wanting a verifiable family
    pass an explicit p."""
    if t < 1:
        raise ParameterError("t must be >= 1")
    p_eff = 1.0 / m if p is None else p
    sched = PRandomSchedule(p_eff, t, n, SeedPair(seed, 0))
    rows = sched.draw_block(0, t)
    prov = "sampled" if p_eff < 1.0 else "sampled-degenerate-p1"
    return QueryFamily(n=n, m=m, rows=rows, provenance=prov, seed=seed)


def verify_covering(family: QueryFamily,
                    guard: int = 20_000_000) -> tuple[bool, tuple | None]:
    """Exhaustive covering check over every (graph with m edges, m-set of
    its non-edges); returns the first counterexample when it fails.

    The inner quantifier reduces to counting: the property fails for some
    E' iff at least m non-edges of G appear in no NO-answering query.
    """
    n, m = family.n, family.m
    pairs = list(combinations(range(n), 2))
    npairs = len(pairs)
    work = math.comb(npairs, m) * npairs
    if work > guard:
        raise InfeasibleError(
            f"covering verification would enumerate ~{work} combinations")
    # per-pair bitmask of the queries containing both endpoints
    cover = []
    for (u, v) in pairs:
        cover.append(bitset(np.nonzero(family.rows[:, u] & family.rows[:, v])[0]))
    all_queries = (1 << family.t) - 1
    for g_idx in combinations(range(npairs), m):
        yes = 0
        for i in g_idx:
            yes |= cover[i]
        no_mask = all_queries & ~yes
        uncovered = []
        g_set = set(g_idx)
        for i in range(npairs):
            if i in g_set:
                continue
            if cover[i] & no_mask == 0:
                uncovered.append(pairs[i])
                if len(uncovered) == m:
                    return False, (tuple(pairs[i] for i in g_idx),
                                   tuple(uncovered))
    return True, None


def find_verified_family(n: int, m: int, t: int | None = None,
                         p: float | None = None, max_seeds: int = 64,
                         c_covering: float = 40.0) -> QueryFamily:
    """Seeded search for a covering-verified family; the successful seed
    stays recorded on the artifact."""
    if t is None:
        t = math.ceil(c_covering * m * m * math.log(n))
    if p is None:
        p = 0.5 if m == 1 else 1.0 / m
    for seed in range(max_seeds):
        fam = sample_two_round_family(n, m, t, seed, p=p)
        ok, _ = verify_covering(fam)
        if ok:
            fam.verified = True
            return fam
    raise InfeasibleError(
        f"no covering family found in {max_seeds} seeds at n={n}, m={m}, t={t}")


# -- pair-cover family (non-adaptive fallback) ---------------------------


@dataclass(frozen=True)
class PairCoverFamily:
    """Query family such that every non-edge pair of every graph with at
    most m edges lands fully inside some NO-answering query, so one round
    plus elimination reconstructs exactly.

    Certificate: columns are polynomial codewords with pairwise agreement
    at most k-1; a pair {u,v} together with the at most 2m positive-degree
    other vertices rules out at most 4m(k-1) of the evaluation points,
    and one block of queries per surviving point contains {u,v} and none
    of them.
    """

    n: int
    m: int
    rows: np.ndarray
    verified: bool = False

    @property
    def t(self) -> int:
        return self.rows.shape[0]


def pair_cover_size(n: int, m: int) -> tuple[int, int, int]:
    """(points s, alphabet q, total rows) of the construction."""
    k = 2
    q = next_prime(max(4 * m * (k - 1) + 1, math.ceil(math.sqrt(n))))
    while q * q < n:
        q = next_prime(q + 1)
    s = 4 * m * (k - 1) + 1
    return s, q, s * (q + q * (q - 1) // 2)


def build_pair_cover_family(n: int, m: int,
                            bit_budget: int = 2**28) -> PairCoverFamily:
    if n < 2 or m < 1:
        raise ParameterError("need n >= 2, m >= 1")
    s, q, t = pair_cover_size(n, m)
    if t * n > bit_budget:
        raise InfeasibleError(
            f"pair-cover family of {t} rows on n={n} exceeds the budget")
    table = rs_codewords(n, q, 2)[:s]
    if pairwise_agreements(table) > 1:
        raise ContractViolation("pair-cover certificate failed")
    rows = np.zeros((t, n), dtype=bool)
    r = 0
    cols = np.arange(n)
    for x in range(s):
        vals = table[x]
        for y in range(q):  # singleton value classes
            rows[r, cols[vals == y]] = True
            r += 1
        for y1 in range(q):  # two-value classes
            for y2 in range(y1 + 1, q):
                rows[r, cols[(vals == y1) | (vals == y2)]] = True
                r += 1
    assert r == t
    return PairCoverFamily(n=n, m=m, rows=rows, verified=True)


def verify_pair_cover_exhaustive(fam: PairCoverFamily,
                                 guard: int = 20_000_000) -> bool:
    """Direct check: for every pair and every blocker set of size <= 2m,
    some query contains the pair and avoids the blockers."""
    n, m = fam.n, fam.m
    work = math.comb(n, 2) * sum(math.comb(n - 2, j) for j in range(2 * m + 1))
    if work > guard:
        raise InfeasibleError("exhaustive pair-cover check exceeds the guard")
    row_bits = [bitset(np.nonzero(r)[0]) for r in fam.rows]
    for u, v in combinations(range(n), 2):
        containing = [b for b in row_bits
                      if (b >> u) & 1 and (b >> v) & 1]
        others = [x for x in range(n) if x not in (u, v)]
        for j in range(2 * m + 1):
            for blockers in combinations(others, j):
                w_mask = bitset(blockers)
                if not any(b & w_mask == 0 for b in containing):
                    return False
    return True


# -- artifact cache ------------------------------------------------------


def _pack_matrix(arr: np.ndarray) -> bytes:
    if arr.dtype == bool:
        return np.packbits(arr.reshape(-1)).tobytes()
    return arr.astype("<i8").tobytes()


def save_matrix(path, kind: str, n: int, m: int, w: int, t: int,
                seed: int | None, arr: np.ndarray) -> str:
    payload = _pack_matrix(arr)
    digest = hashlib.blake2b(payload, digest_size=16).hexdigest()
    dtype = "bool" if arr.dtype == bool else "int"
    header = (f"{kind} n={n} m={m} w={w} t={t} "
              f"seed={'none' if seed is None else seed} "
              f"dtype={dtype} hash={digest}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(payload)
    return digest


def load_matrix(path) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        header = fh.readline().decode().strip().split()
        meta = {"kind": header[0]}
        for kv in header[1:]:
            k, v = kv.split("=", 1)
            meta[k] = v
        payload = fh.read()
    digest = hashlib.blake2b(payload, digest_size=16).hexdigest()
    if digest != meta["hash"]:
        raise ContractViolation(f"cache file {path} fails its content hash")
    t, n = int(meta["t"]), int(meta["n"])
    if meta["dtype"] == "bool":
        arr = np.unpackbits(np.frombuffer(payload, dtype=np.uint8),
                            count=t * n).astype(bool).reshape(t, n)
    else:
        arr = np.frombuffer(payload, dtype="<i8").reshape(t, n).copy()
    return meta, arr
