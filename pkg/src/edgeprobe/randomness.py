"""Seeded randomness: counter-based p-random query generation.

All randomized algorithms draw their queries through ``PRandomSchedule``,
which is keyed by a (value, stream) seed pair and backed by the Philox
counter-based generator.  Any single query of a schedule is reproducible
in O(1) by advancing the counter, without replaying the stream; this is
what makes transcripts and failure post-mortems cheap.

Per-vertex Bernoulli sampling uses two code paths:

* ``p == 2**-k`` (the common case in this package): k bit-planes are
  sliced out of the word stream, one generator word per 64/k vertices,
  and inclusion is the AND of the k bits (exactly probability 2**-k);
* otherwise one word per vertex is compared against a 53-bit fixed-point
  threshold, so the realized inclusion probability is within 2**-53 of p.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .errors import ParameterError
from .graphs import bitset

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


def derive_stream(*parts) -> int:
    """Deterministic 64-bit stream id from a tuple of labels/ints.

    Used for 'one stream per round per algorithm phase' and to split a
    master seed into per-trial seeds (adding trials never perturbs
    earlier ones).
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class SeedPair:
    """Key of one random stream: user seed value plus a derived stream id."""
    value: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.value <= _MASK64 and 0 <= self.stream <= _MASK64):
            raise ParameterError("seed components must fit in 64 bits")

    def child(self, *parts) -> "SeedPair":
        return SeedPair(self.value, derive_stream(self.stream, *parts))


def _dyadic_exponent(p: float) -> int | None:
    """k such that p == 2**-k exactly (1 <= k <= 32), else None."""
    mant, exp = math.frexp(p)
    if mant == 0.5 and 1 <= 1 - exp <= 32:
        return 1 - exp
    return None


class PRandomSchedule:
    """t repeated p-random draws over a fixed domain of vertices.

    ``domain`` is either an int n (the full vertex set [n]) or an
    explicit sequence of vertex ids.  Draws are pure functions of
    (seed, index), hence safe for concurrent use.
    """

    def __init__(self, p: float, t: int, domain, seed: SeedPair):
        if not (0.0 < p <= 1.0):
            raise ParameterError(f"p={p} outside (0,1]")
        if t < 1:
            raise ParameterError("repetition count must be >= 1")
        if isinstance(domain, (int, np.integer)):
            if domain < 1:
                raise ParameterError("domain must be nonempty")
            self.members = None  # identity: positions are vertex ids
            self.size = int(domain)
        else:
            mem = np.asarray(list(domain), dtype=np.int64)
            if mem.size == 0:
                raise ParameterError("domain must be nonempty")
            self.members = mem
            self.size = int(mem.size)
        self.p = float(p)
        self.t = int(t)
        self.seed = seed
        self._k = _dyadic_exponent(self.p)
        if self.p == 1.0:
            words = 0
        elif self._k is not None:
            words = -(-(self.size * self._k) // 64)
        else:
            self._threshold = round(self.p * (1 << 53))
            if self._threshold < 1:
                raise ParameterError("p too small for the 53-bit threshold")
            words = self.size
        # one Philox counter block yields 4 words; pad the per-query word
        # budget to a block multiple so every query starts block-aligned
        self._words_per_query = -(-words // 4) * 4

    # -- raw word access ----------------------------------------------

    def _words(self, start_word: int, count: int) -> np.ndarray:
        key = np.array([self.seed.value, self.seed.stream], dtype=_U64)
        counter = np.array([start_word // 4, 0, 0, 0], dtype=_U64)
        bg = Philox(counter=counter, key=key)
        return Generator(bg).integers(0, 1 << 64, size=count, dtype=_U64)

    # -- drawing --------------------------------------------------------

    def draw_block(self, start: int, count: int) -> np.ndarray:
        """Inclusion matrix (count, size) for draw indices [start, start+count),
        0-based, over domain *positions*."""
        if not (0 <= start and start + count <= self.t):
            raise ParameterError("draw index range outside [0, t)")
        if self.p == 1.0:
            return np.ones((count, self.size), dtype=bool)
        w = self._words_per_query
        words = self._words(start * w, count * w).reshape(count, w)
        if self._k is not None:
            k = self._k
            u8 = words.view(np.uint8)
            bits_ = np.unpackbits(u8, axis=1, bitorder="little")
            planes = bits_[:, : self.size * k].reshape(count, self.size, k)
            return planes.all(axis=2)
        return (words[:, : self.size] >> np.uint64(11)) < _U64(self._threshold)

    def draw_rows(self, start: int, count: int, n: int) -> np.ndarray:
        """Like draw_block but scattered onto full-width (count, n) rows."""
        block = self.draw_block(start, count)
        if self.members is None:
            if self.size != n:
                out = np.zeros((count, n), dtype=bool)
                out[:, : self.size] = block
                return out
            return block
        out = np.zeros((count, n), dtype=bool)
        out[:, self.members] = block
        return out

    def positions_to_vertices(self, position_mask: np.ndarray) -> np.ndarray:
        if self.members is None:
            return np.nonzero(position_mask)[0]
        return self.members[np.nonzero(position_mask)[0]]


def draw_p_random(schedule: PRandomSchedule, index: int) -> int:
    """The index-th query of the schedule (1-based), as a vertex bitset."""
    if not (1 <= index <= schedule.t):
        raise ParameterError(f"index {index} outside [1, {schedule.t}]")
    row = schedule.draw_block(index - 1, 1)[0]
    verts = schedule.positions_to_vertices(row)
    return bitset(int(v) for v in verts)


def repetitions(n: int, delta: float, rate: float) -> int:
    """Trials needed to drive an n^2-way union bound below delta when each
    trial independently succeeds with probability ``rate``.

    Uses the conservative linear form (2 ln n + ln(1/delta)) / rate, which
    dominates the exact -ln(1-rate) denominator; a certain trial costs 1.
    """
    if rate <= 0:
        raise ParameterError("per-trial success rate must be positive")
    if not (0 < delta < 1):
        raise ParameterError("delta must lie in (0,1)")
    if n < 1:
        raise ParameterError("n must be positive")
    budget = 2.0 * math.log(n) + math.log(1.0 / delta)
    if rate >= 1.0:
        return 1
    exact = math.ceil(budget / -math.log1p(-rate))
    linear = math.ceil(budget / rate)
    return max(1, exact, linear)
