"""Instance generators: standard families plus the adversarial families
used as stress instances (a star-with-planted-legs family and a planted
star over a random support)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from .errors import ParameterError
from .graphs import HiddenGraph, read_graph
from .randomness import derive_stream


def _rng(seed: int, label: str) -> Generator:
    key = np.array([seed & (2**64 - 1), derive_stream("gen", label)],
                   dtype=np.uint64)
    return Generator(Philox(key=key))


def _unrank_pair(k: int, n: int) -> tuple[int, int]:
    """k-th pair (u, v), u < v, in row-major order over the upper triangle."""
    u, start = 0, 0
    lo, hi = 0, n - 2
    while lo < hi:  # binary search for the row
        mid = (lo + hi) // 2
        row_start = mid * (2 * n - mid - 1) // 2
        if row_start + (n - 1 - mid) > k:
            hi = mid
        else:
            lo = mid + 1
    u = lo
    start = u * (2 * n - u - 1) // 2
    return u, u + 1 + (k - start)


def erdos_renyi_m(n: int, m: int, seed: int = 0) -> HiddenGraph:
    """Uniformly random simple graph with exactly m edges."""
    total = n * (n - 1) // 2
    if m > total:
        raise ParameterError(f"m={m} exceeds binom({n},2)={total}")
    rng = _rng(seed, "erdos-renyi-m")
    chosen: set[int] = set()
    while len(chosen) < m:
        k = int(rng.integers(0, total))
        chosen.add(k)
    return HiddenGraph(n, (_unrank_pair(k, n) for k in chosen))


def planted_star(n: int, d: int, center: int = 0, seed: int | None = None) -> HiddenGraph:
    """Star with d leaves; leaves are the first d non-center vertices, or a
    random d-subset when a seed is given."""
    if d > n - 1:
        raise ParameterError("star degree exceeds n-1")
    others = [v for v in range(n) if v != center]
    if seed is None:
        leaves = others[:d]
    else:
        leaves = _rng(seed, "planted-star").choice(others, size=d, replace=False)
    return HiddenGraph(n, ((center, int(v)) for v in leaves))


def double_star(n: int, d1: int, d2: int, bridge: bool = True) -> HiddenGraph:
    """Two adjacent centers (0 and 1) with d1 and d2 disjoint leaves."""
    if 2 + d1 + d2 > n:
        raise ParameterError("double star does not fit in n vertices")
    edges = [(0, 1)] if bridge else []
    edges += [(0, 2 + i) for i in range(d1)]
    edges += [(1, 2 + d1 + i) for i in range(d2)]
    return HiddenGraph(n, edges)


def matching(n: int, k: int) -> HiddenGraph:
    """Perfect matching on the first 2k vertices."""
    if 2 * k > n:
        raise ParameterError("matching does not fit in n vertices")
    return HiddenGraph(n, ((2 * i, 2 * i + 1) for i in range(k)))


def lower_bound_lbnamc(n: int, m: int, i: int, legs) -> HiddenGraph:
    """Adversarial family for the one-round lower bound: all edges are
    incident to vertex i, half inside the fixed block [m/2], half planted
    on the given legs outside it."""
    if m % 2 or m < 2:
        raise ParameterError("this family needs even m >= 2")
    half = m // 2
    if not (0 <= i < half):
        raise ParameterError(f"i must lie in the fixed block [0,{half})")
    legs = sorted(int(j) for j in legs)
    if len(legs) != half or len(set(legs)) != half:
        raise ParameterError(f"need exactly {half} distinct legs")
    if any(not (half <= j < n) for j in legs):
        raise ParameterError("legs must avoid the fixed block")
    edges = [(i, j) for j in range(half) if j != i]
    edges += [(i, j) for j in legs]
    return HiddenGraph(n, edges)


def lower_bound_lvlbtr(n: int, m: int, seed: int = 0) -> HiddenGraph:
    """Planted-star distribution of the two-round Las Vegas lower bound:
    a star on a random centre v_t of the fixed block, over the rest of the
    block, s fresh random vertices and d extra (possibly repeated) ones."""
    if m < 2:
        raise ParameterError("this family needs m >= 2")
    r = m // 2
    if n <= m:
        raise ParameterError("n must exceed m")
    rng = _rng(seed, "lvlbtr")
    d = max(0, math.floor((m ** (2 / 3) * math.log2(max(m, 2)) ** (1 / 3))
                          / (2 ** 10 * math.log2(max(n, 4)) ** (1 / 3))))
    s = r - d
    t = int(rng.integers(0, r))
    outside = np.arange(r, n)
    u_set = rng.choice(outside, size=s, replace=False)
    rest = np.setdiff1d(outside, u_set, assume_unique=False)
    w_set = rng.choice(rest, size=d, replace=True) if d else np.zeros(0, int)
    edges = [(t, j) for j in range(r) if j != t]
    edges += [(t, int(u)) for u in u_set]
    edges += [(t, int(w)) for w in w_set]
    return HiddenGraph(n, set((min(a, b), max(a, b)) for a, b in edges))


GENERATORS = {
    "erdos-renyi-m": erdos_renyi_m,
    "planted-star": planted_star,
    "double-star": double_star,
    "matching": matching,
    "lower-bound-LBNAMC": lower_bound_lbnamc,
    "lower-bound-LVLBTR": lower_bound_lvlbtr,
}


@dataclass(frozen=True)
class InstanceSpec:
    """Declarative description of one target instance."""

    generator: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def realize(self) -> HiddenGraph:
        return generate(self)


def generate(spec: InstanceSpec) -> HiddenGraph:
    if spec.generator == "from-file":
        return read_graph(spec.params["path"])
    if spec.generator not in GENERATORS:
        raise ParameterError(f"unknown generator {spec.generator!r}")
    fn = GENERATORS[spec.generator]
    kwargs = dict(spec.params)
    if spec.generator in ("erdos-renyi-m", "lower-bound-LVLBTR"):
        kwargs.setdefault("seed", spec.seed)
    elif spec.generator == "planted-star" and "seed" not in kwargs:
        pass  # deterministic leaf choice unless a seed is requested
    return fn(n=spec.n, **kwargs)
