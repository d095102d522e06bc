"""Fortz-Thorup congestion cost.

Each arc pays a convex piecewise-linear function of its load whose slope
climbs 1, 3, 10, 70, 500, 5000 as utilization crosses 1/3, 2/3, 9/10, 1
and 11/10. Network cost is the sum over arcs. Dividing by the cost of
routing every demand on min-hop paths at slope 1 gives the normalized cost,
which is at least 1 whenever there is demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .network import DemandMatrix, NetworkError, Topology, UnroutableDemand, WeightVector
from .routing import INF, FlowSolution, Router, demand_to, destinations

BREAKPOINTS = (Fraction(1, 3), Fraction(2, 3), Fraction(9, 10), Fraction(1), Fraction(11, 10))
SLOPES = (1, 3, 10, 70, 500, 5000)


def _intercepts() -> tuple[Fraction, ...]:
    # continuity: s_i * u_i - b_i == s_{i-1} * u_i - b_{i-1}
    out = [Fraction(0)]
    for u, lo, hi in zip(BREAKPOINTS, SLOPES, SLOPES[1:]):
        out.append(out[-1] + (hi - lo) * u)
    return tuple(out)


# Phi_a(l) = max_i (SLOPE_i * l - INTERCEPT_i * c)
_SLOPE = np.array(SLOPES, dtype=np.float64)
_INTERCEPT = np.array([float(b) for b in _intercepts()], dtype=np.float64)
_BAND = np.array([float(u) for u in BREAKPOINTS], dtype=np.float64)

LINEAR = "linear"
STEP = "step"


class ZeroUncap(NetworkError):
    """Normalization requested for an all-zero demand matrix."""


def arc_cost(load: float, capacity: float, mode: str = LINEAR) -> float:
    """Congestion cost of one arc.

    ``mode="step"`` reads the band values literally (cost 1 below 1/3
    utilization, 3 up to 2/3, ...) instead of as slopes; it exists only for
    sensitivity studies.
    """
    if mode == STEP:
        return float(SLOPES[int(np.searchsorted(_BAND, load / capacity, side="right"))])
    best = 0.0
    for s, b in zip(_SLOPE, _INTERCEPT):
        v = float(s) * load - float(b) * capacity
        if v > best:
            best = v
    return best


@njit(cache=True)
def _arc_costs(load, cap, slope, intercept):
    out = np.empty(load.shape[0])
    for a in range(load.shape[0]):
        best = 0.0
        for i in range(slope.shape[0]):
            v = slope[i] * load[a] - intercept[i] * cap[a]
            if v > best:
                best = v
        out[a] = best
    return out


@njit(cache=True)
def _ordered_sum(x):
    acc = 0.0
    for v in x:
        acc += v
    return acc


def arc_costs(load: np.ndarray, capacity: np.ndarray, mode: str = LINEAR) -> np.ndarray:
    load = np.asarray(load, dtype=np.float64)
    capacity = np.asarray(capacity, dtype=np.float64)
    if mode == STEP:
        return np.asarray(SLOPES, dtype=np.float64)[np.searchsorted(_BAND, load / capacity, side="right")]
    return _arc_costs(load, capacity, _SLOPE, _INTERCEPT)


@dataclass(frozen=True)
class UncapCost:
    value: float


@dataclass(frozen=True)
class CostReport:
    phi: float
    per_arc: np.ndarray
    max_utilization: float
    phi_normalized: float | None = None


def network_cost(fs: FlowSolution, topo: Topology, mode: str = LINEAR) -> CostReport:
    caps = topo.capacities
    per_arc = arc_costs(fs.total, caps, mode)
    util = float(np.max(fs.total / caps)) if topo.arc_count else 0.0
    return CostReport(float(_ordered_sum(per_arc)), per_arc, util)


def uncap_cost(topo: Topology, dm: DemandMatrix) -> UncapCost:
    """Sum of demand times min-hop distance; routing at slope 1 costs this."""
    router = Router(topo)
    ones = np.ones(topo.arc_count, dtype=np.int64)
    hops = {}
    for t in destinations(dm):
        hops[int(t)] = router.distances(ones, int(t))
    total = 0.0
    for (s, t), d in dm.entries.items():
        h = hops[t][s]
        if h == INF:
            raise UnroutableDemand(s, t)
        total += d * float(h)
    return UncapCost(total)


FLOOR_NOISE = 1e-9


class BelowFloor(ArithmeticError):
    pass


def raw_ratio(phi: float, uncap: UncapCost) -> float:
    if not uncap.value > 0:
        raise ZeroUncap("normalization needs positive demand")
    return phi / uncap.value


def normalized_cost(phi: float, uncap: UncapCost) -> float:
    """``phi / uncap``, which is at least 1 for any routing.

    The two sums accumulate in different orders, so a ratio that is exactly 1
    in real arithmetic can land a few ulps under it. Such values are snapped
    to 1.0; anything further below signals a routing or cost bug.
    """
    r = raw_ratio(phi, uncap)
    if r < 1.0:
        if r < 1.0 - FLOOR_NOISE:
            raise BelowFloor(f"normalized cost {r!r} is below the uncapacitated bound")
        return 1.0
    return r


class CostEvaluator:
    """Normalized cost of weight vectors on one fixed (topology, demands).

    ``uncap`` overrides the normalizer, so costs on two related topologies
    can share one denominator.
    """

    def __init__(self, topo: Topology, dm: DemandMatrix, mode: str = LINEAR, uncap: UncapCost | None = None):
        self.topo = topo
        self.dm = dm
        self.mode = mode
        self.router = Router(topo)
        self.demand_to = demand_to(dm)
        self.dests = destinations(dm)
        self.uncap = uncap_cost(topo, dm) if uncap is None else uncap

    def loads(self, w: WeightVector | np.ndarray) -> np.ndarray:
        if self.dests.size == 0:
            return np.zeros(self.topo.arc_count)
        return self.router.total(w, self.demand_to, self.dests)

    def phi(self, w) -> float:
        return float(_ordered_sum(arc_costs(self.loads(w), self.topo.capacities, self.mode)))

    def __call__(self, w) -> float:
        return normalized_cost(self.phi(w), self.uncap)

    def report(self, w) -> CostReport:
        load = self.loads(w)
        caps = self.topo.capacities
        per_arc = arc_costs(load, caps, self.mode)
        phi = float(_ordered_sum(per_arc))
        norm = normalized_cost(phi, self.uncap) if self.uncap.value > 0 else None
        util = float(np.max(load / caps)) if self.topo.arc_count else 0.0
        return CostReport(phi, per_arc, util, norm)
