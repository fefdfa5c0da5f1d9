"""Exact NO-rate curves (test oracles for the unknown-m procedures).

N(p) is the probability that a p-random query answers NO; the augmented
curve N_u(p) conditions on vertex u being added to every query.  Both are
computed exactly: by complete subset enumeration for small n, or by
closed forms for stars and matchings at any size.  p* solves N(p*) = 1/2
and p_u solves N_u(p_u) = 1/e, by bisection to 1e-12.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InfeasibleError, ParameterError
from .graphs import HiddenGraph

ENUM_GUARD = 22  # complete enumeration up to 2^22 subsets


def _edge_free_counts(n: int, edge_masks: list[int],
                      forbidden: int = 0) -> np.ndarray:
    """c_k = number of k-subsets of [n] that contain no edge and avoid the
    forbidden vertex mask (exhaustive over all 2^n subsets)."""
    if n > ENUM_GUARD:
        raise InfeasibleError(f"subset enumeration refused for n={n}")
    masks = np.arange(1 << n, dtype=np.uint32)
    dead = np.zeros(masks.size, dtype=bool)
    if forbidden:
        dead |= (masks & np.uint32(forbidden)) != 0
    for me in edge_masks:
        me = np.uint32(me)
        dead |= (masks & me) == me
    alive = masks[~dead]
    sizes = np.bitwise_count(alive)
    return np.bincount(sizes, minlength=n + 1).astype(np.float64)


class ExactNoRateCurve:
    """Exact N(p) (and N_u(p)) for one graph via its edge-free subset
    counts; usable as the independent oracle in the estimate tests."""

    def __init__(self, counts: np.ndarray, universe: int):
        self.counts = counts
        self.universe = universe

    @classmethod
    def of_graph(cls, g: HiddenGraph) -> "ExactNoRateCurve":
        masks = [(1 << u) | (1 << v) for u, v in g.edges]
        return cls(_edge_free_counts(g.n, masks), g.n)

    @classmethod
    def of_graph_augmented(cls, g: HiddenGraph, u: int) -> "ExactNoRateCurve":
        """Curve of queries Q + {u}: subsets of V-{u} that are edge-free
        and avoid u's neighbourhood."""
        keep = [(a, b) for a, b in g.edges if u not in (a, b)]
        # relabel V - {u} onto [n-1]
        order = [v for v in range(g.n) if v != u]
        pos = {v: i for i, v in enumerate(order)}
        masks = [(1 << pos[a]) | (1 << pos[b]) for a, b in keep]
        nbr_mask = 0
        for v in range(g.n):
            if v != u and g.has_edge(u, v):
                nbr_mask |= 1 << pos[v]
        return cls(_edge_free_counts(g.n - 1, masks, forbidden=nbr_mask),
                   g.n - 1)

    def __call__(self, p: float) -> float:
        if not (0.0 <= p <= 1.0):
            raise ParameterError("p outside [0,1]")
        n = self.universe
        ks = np.arange(n + 1, dtype=np.float64)
        terms = self.counts * np.power(p, ks) * np.power(1.0 - p, n - ks)
        return float(terms.sum())


def star_no_rate(d: int, p: float) -> float:
    """N(p) of a star with d leaves: NO unless the centre and a leaf are
    both drawn."""
    return 1.0 - p * (1.0 - (1.0 - p) ** d)


def star_center_augmented_no_rate(d: int, p: float) -> float:
    """N_u(p) for the star centre: every leaf must be missing."""
    return (1.0 - p) ** d


def matching_no_rate(k: int, p: float) -> float:
    return (1.0 - p * p) ** k


def bisect_root(fn, target: float, tol: float = 1e-12) -> float:
    """Solve fn(p) = target for a strictly decreasing fn on [0, 1]."""
    lo, hi = 0.0, 1.0
    flo, fhi = fn(lo), fn(hi)
    if not (flo >= target >= fhi):
        raise ParameterError("target outside the curve's range")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if fn(mid) >= target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def p_star(curve) -> float:
    """The query probability where the NO-rate crosses one half."""
    return bisect_root(curve, 0.5)


def p_u(curve) -> float:
    """The augmented-query probability where the NO-rate crosses 1/e."""
    return bisect_root(curve, 1.0 / math.e)
