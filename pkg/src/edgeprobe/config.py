"""Central block of tuning constants.

Every Theta(log n) repetition count in the randomized procedures is
``ceil(c * ln n)`` (or ``c * (ln n + ln(1/delta))`` where a failure budget
enters) with ``c`` a named constant below.  Defaults were calibrated by
running the acceptance suite and keeping roughly a 2x margin over the
smallest passing value; they are deliberately conservative rather than
tight.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Constants:
    # queries per probe level in the no-rate sweep (threshold 1/2)
    c_estimate: float = 6.0
    # queries per probe level in the augmented-vertex sweep (threshold 1/e)
    c_degree: float = 6.0
    # degree-split round: ceil(c_split * (1/p')^2 * ln n) queries
    c_split: float = 8.0
    # per-vertex edge cleanup: ceil(c_find * (1/p'_u) * ln n) queries
    c_find: float = 10.0
    # three-round algorithm, per-level degree probes inside I_w
    c_degree3: float = 6.0
    # three-round algorithm, neighbour learning sized by the degree estimate
    c_neighbors3: float = 10.0
    # sampled two-round covering family: t = ceil(c * m^2 * ln n)
    c_covering: float = 40.0
    # survivor cap before the two-round Las Vegas wrapper restarts
    lv2_survivor_slack: int = 2
    # cap on rows*columns (bits) when building the pair-cover fallback family
    fallback_bit_budget: int = 2**28

    def with_(self, **kw) -> "Constants":
        return replace(self, **kw)


DEFAULTS = Constants()
