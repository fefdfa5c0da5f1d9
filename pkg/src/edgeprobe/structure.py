"""Candidate-graph structure used between rounds: exact degree thresholds,
the set W of high-degree vertices, the per-vertex independent sets I_w,
their star edges E_W, and the residual pair set U."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .candidates import CandidateEdgeSet
from .errors import DetectedFailure, ParameterError
from .graphs import Edge


@dataclass(frozen=True)
class Threshold:
    """Exact comparator for the quantity coef * m**(num/den).

    Degree cutoffs like r/2 or r/8 are irrational for some parameter
    choices (r = sqrt(m), r = m^(2/3)/2); comparing integer degrees by
    cross-powering keeps every comparison exact and tie-stable.
    """

    m: int
    coef: Fraction
    power: Fraction

    def __post_init__(self):
        if self.m < 1 or self.coef < 0:
            raise ParameterError("threshold needs m >= 1 and coef >= 0")

    @classmethod
    def of(cls, m: int, coef, power=0) -> "Threshold":
        return cls(m, Fraction(coef), Fraction(power))

    def cmp(self, x) -> int:
        """Sign of (x - value)."""
        x = Fraction(x)
        if self.coef == 0:
            return (x > 0) - (x < 0)
        if x <= 0:
            return -1
        lhs = (x / self.coef) ** self.power.denominator
        rhs = Fraction(self.m) ** self.power.numerator
        return (lhs > rhs) - (lhs < rhs)

    def lt(self, x) -> bool:
        """value < x"""
        return self.cmp(x) > 0

    def ge(self, x) -> bool:
        """value >= x"""
        return self.cmp(x) <= 0

    def scaled(self, factor) -> "Threshold":
        return Threshold(self.m, self.coef * Fraction(factor), self.power)

    def inverse_times(self, coef, power) -> "Threshold":
        """Threshold for (coef * m**power) / value."""
        return Threshold(self.m, Fraction(coef) / self.coef,
                         Fraction(power) - self.power)

    def as_float(self) -> float:
        return float(self.coef) * self.m ** float(self.power)


@dataclass
class StructureView:
    """Output of classify_structure for one candidate graph."""

    W: list[int]
    I: dict[int, np.ndarray]        # w -> sorted vertex ids of I_w
    E_W: frozenset[Edge]
    U: list[Edge]

    def check_bounds(self, m: int, r: Threshold) -> None:
        """Facts bound check: |W| <= 8m/r and |U| <= m + 8m^2/r.

        Violations mean the elimination round's success event failed.
        """
        w_cap = r.inverse_times(8 * m, 0)       # 8m / r
        if w_cap.lt(len(self.W)):
            raise DetectedFailure(
                f"|W|={len(self.W)} exceeds 8m/r={w_cap.as_float():.3g}")
        u_cap = r.inverse_times(8 * m * m, 0)   # 8m^2 / r
        if u_cap.lt(len(self.U) - m):
            raise DetectedFailure(
                f"|U|={len(self.U)} exceeds m + 8m^2/r"
                f"={m + u_cap.as_float():.3g}")


def classify_structure(h: CandidateEdgeSet, r: Threshold) -> StructureView:
    """Split the surviving pairs of h by the degree threshold r.

    W holds the vertices of degree > r/2.  For each w in W, I_w holds the
    neighbours u of w with degree <= r/8 whose common neighbourhood with w
    contains only vertices of degree > r+1 (all degrees in h); each I_w is
    independent in h.  E_W collects the (w, u) star pairs and U is the
    rest of the surviving pairs.
    """
    degs = h.degrees()
    max_d = int(degs.max()) if degs.size else 0
    # exact threshold verdicts per integer degree value
    gt_half = np.array([r.scaled(Fraction(1, 2)).lt(d) for d in range(max_d + 1)])
    le_eighth = np.array([not r.scaled(Fraction(1, 8)).lt(d) for d in range(max_d + 1)])
    gt_r_plus1 = np.array([d >= 1 and r.lt(d - 1) for d in range(max_d + 1)])

    w_list = [int(v) for v in np.nonzero(gt_half[degs])[0]]
    low_enough = le_eighth[degs]
    not_high = ~gt_r_plus1[degs]

    I: dict[int, np.ndarray] = {}
    ew_pairs: set[Edge] = set()
    for w in w_list:
        nbrs = h.neighbours_mask(w)
        cand = np.nonzero(nbrs & low_enough)[0]
        if cand.size:
            # u qualifies unless some common neighbour with w has degree <= r+1
            common_bad = (h.present[cand] & nbrs[None, :] & not_high[None, :]).any(axis=1)
            members = cand[~common_bad]
        else:
            members = cand
        I[w] = members.astype(np.int64)
        for u in members:
            u = int(u)
            ew_pairs.add((w, u) if w < u else (u, w))

    e_w = frozenset(ew_pairs)
    u_pairs = sorted(h.edges() - e_w)
    return StructureView(W=w_list, I=I, E_W=e_w, U=u_pairs)
