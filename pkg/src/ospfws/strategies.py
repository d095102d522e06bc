"""Weight setting under a single critical link failure.

Scenario: the base topology is the failure state. The normal state adds a
link between the node pair exchanging the most traffic, so failing that link
hurts the most.

Strategies, all returning weights for the normal-state topology:

* ``OH``: optimize the normal state alone, then re-score on the failure state.
* ``FT``: optimize the mean of the normal- and failure-state costs.
* ``SS``: optimize the failure state alone, keep those weights, then try every
  weight in ``[1, w_max]`` on the added link (both directions share it) and
  keep the cheapest normal-state cost.
* ``UNIT``, ``INVCAP``, ``RANDOM``: fixed weightings for reference.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .cost import LINEAR, CostEvaluator
from .network import (
    DemandMatrix,
    Link,
    NetworkError,
    Topology,
    UnroutableDemand,
    WeightVector,
    add_link,
    check_connectivity,
    fail_link,
    serialize_demands,
    serialize_topology,
)
from .tabu import SearchTrace, TabuParams, optimize, random_initial

DEFAULT_W_MAX = 20


class Strategy(str, Enum):
    OH = "OH"
    FT = "FT"
    SS = "SS"
    UNIT = "UNIT"
    INVCAP = "INVCAP"
    RANDOM = "RANDOM"

    def __str__(self) -> str:
        return self.value


BASELINES = (Strategy.UNIT, Strategy.INVCAP, Strategy.RANDOM)


class EmptyDemand(NetworkError):
    pass


class PairAlreadyLinked(NetworkError):
    pass


class ScenarioMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PairedEvaluation:
    phi_norm: float
    phi_fail: float
    phi_avg: float


@dataclass(frozen=True)
class FailureScenario:
    t_norm: Topology
    t_fail: Topology
    failed_link: Link
    added_arcs: tuple[int, ...]
    dm: DemandMatrix
    surviving: tuple[int, ...]  # t_fail arc i is t_norm arc surviving[i]
    mode: str = LINEAR

    @cached_property
    def key(self) -> str:
        h = hashlib.sha256()
        for part in (serialize_topology(self.t_norm), serialize_demands(self.dm), str(self.failed_link), self.mode):
            h.update(part.encode())
            h.update(b"\0")
        return h.hexdigest()[:16]

    @cached_property
    def eval_norm(self) -> CostEvaluator:
        return CostEvaluator(self.t_norm, self.dm, self.mode)

    @cached_property
    def eval_fail(self) -> CostEvaluator:
        # normalized by the normal state's min-hop cost, so both states share
        # one yardstick and an unused added link leaves the cost unchanged
        return CostEvaluator(self.t_fail, self.dm, self.mode, uncap=self.eval_norm.uncap)

    @cached_property
    def _surviving(self) -> np.ndarray:
        return np.array(self.surviving, dtype=np.int64)

    def restrict(self, w: WeightVector) -> WeightVector:
        """Weights of the surviving arcs, in failure-state arc order."""
        return WeightVector(tuple(w.weights[i] for i in self.surviving), w.w_max)

    def evaluate(self, w: WeightVector) -> PairedEvaluation:
        w.check_for(self.t_norm)
        arr = np.array(w.weights, dtype=np.int64)
        phi_norm = self.eval_norm(arr)
        phi_fail = self.eval_fail(arr[self._surviving])
        return PairedEvaluation(phi_norm, phi_fail, (phi_norm + phi_fail) / 2)


def select_critical_pair(dm: DemandMatrix) -> Link:
    """Unordered pair with the largest D(u,v) + D(v,u); ties go to the smallest pair."""
    totals: dict[Link, float] = {}
    for (s, t), d in dm.entries.items():
        link = Link(s, t)
        totals[link] = totals.get(link, 0.0) + d
    if not totals:
        raise EmptyDemand("demand matrix has no positive entry")
    return min(totals, key=lambda link: (-totals[link], link.u, link.v))


def _require_routable(topo: Topology, dm: DemandMatrix) -> None:
    bad = check_connectivity(topo, dm)
    if bad:
        raise UnroutableDemand(*bad[0])


def build_scenario(base: Topology, dm: DemandMatrix, capacity: float | None = None,
                   mode: str = LINEAR) -> FailureScenario:
    """Normal state = ``base`` plus a link across the critical pair.

    ``capacity`` defaults to the largest capacity already in ``base``.
    """
    link = select_critical_pair(dm)
    if base.arcs_between(link.u, link.v):
        raise PairAlreadyLinked(f"critical pair {link} is already linked in the base topology")
    if capacity is None:
        if not base.arcs:
            raise NetworkError("base topology has no arcs; give the added link's capacity explicitly")
        capacity = max(a.capacity for a in base.arcs)
    t_norm, added = add_link(base, link.u, link.v, capacity)
    _require_routable(base, dm)
    _require_routable(t_norm, dm)
    return FailureScenario(t_norm, base, link, added, dm, tuple(range(base.arc_count)), mode)


def failure_scenario(t_norm: Topology, dm: DemandMatrix, link: Link, mode: str = LINEAR) -> FailureScenario:
    """Scenario for an arbitrary link of an existing normal-state topology."""
    t_fail, kept = fail_link(t_norm, link)
    _require_routable(t_norm, dm)
    _require_routable(t_fail, dm)
    added = tuple(t_norm.arcs_between(link.u, link.v))
    return FailureScenario(t_norm, t_fail, link, added, dm, kept, mode)


def evaluate_pair(sc: FailureScenario, w: WeightVector) -> PairedEvaluation:
    return sc.evaluate(w)


@dataclass(frozen=True)
class StrategyResult:
    strategy: Strategy
    weights: WeightVector | None
    cost_norm: float
    cost_fail: float
    trace: SearchTrace | None = field(default=None, repr=False)
    budget: TabuParams | None = None
    seed: int | None = None
    scenario_key: str = ""
    sweep_weight: int | None = None  # SS: chosen weight of the added link

    @property
    def objective(self) -> float:
        """The quantity the strategy's search minimized."""
        if self.strategy is Strategy.FT:
            return (self.cost_norm + self.cost_fail) / 2
        if self.strategy is Strategy.SS:
            return self.cost_fail
        return self.cost_norm


def _result(sc: FailureScenario, strategy: Strategy, w: WeightVector, **kw) -> StrategyResult:
    pe = sc.evaluate(w)
    return StrategyResult(strategy, w, pe.phi_norm, pe.phi_fail, scenario_key=sc.key, **kw)


def run_oh(sc: FailureScenario, params: TabuParams, w_max: int = DEFAULT_W_MAX) -> StrategyResult:
    initial = random_initial(sc.t_norm, w_max, params.seed)
    res = optimize(sc.eval_norm, initial, params)
    return _result(sc, Strategy.OH, res.best, trace=res.trace, budget=params, seed=params.seed)


def run_ft(sc: FailureScenario, params: TabuParams, w_max: int = DEFAULT_W_MAX) -> StrategyResult:
    initial = random_initial(sc.t_norm, w_max, params.seed)
    res = optimize(lambda w: sc.evaluate(w).phi_avg, initial, params)
    return _result(sc, Strategy.FT, res.best, trace=res.trace, budget=params, seed=params.seed)


def lift_weights(sc: FailureScenario, fail_weights: WeightVector, added_weight: int) -> WeightVector:
    """Normal-state weights: surviving arcs keep ``fail_weights``, the added arcs get ``added_weight``."""
    fail_weights.check_for(sc.t_fail)
    ws = [added_weight] * sc.t_norm.arc_count
    for j, i in enumerate(sc.surviving):
        ws[i] = fail_weights[j]
    return WeightVector(tuple(ws), fail_weights.w_max)


def sweep_added_link(sc: FailureScenario, fail_weights: WeightVector) -> list[tuple[int, PairedEvaluation]]:
    """Evaluate every shared weight of the added link on top of ``fail_weights``."""
    return [(x, sc.evaluate(lift_weights(sc, fail_weights, x))) for x in range(1, fail_weights.w_max + 1)]


def run_ss(sc: FailureScenario, params: TabuParams, w_max: int = DEFAULT_W_MAX) -> StrategyResult:
    initial = random_initial(sc.t_fail, w_max, params.seed)
    res = optimize(sc.eval_fail, initial, params)
    sweep = sweep_added_link(sc, res.best)
    x, pe = min(sweep, key=lambda item: (item[1].phi_norm, item[0]))
    return StrategyResult(Strategy.SS, lift_weights(sc, res.best, x), pe.phi_norm, pe.phi_fail,
                          trace=res.trace, budget=params, seed=params.seed, scenario_key=sc.key,
                          sweep_weight=x)


def baseline_weights(topo: Topology, kind: Strategy | str, w_max: int = DEFAULT_W_MAX,
                     seed: int = 0) -> WeightVector:
    kind = Strategy(kind)
    if kind is Strategy.UNIT:
        return WeightVector((1,) * topo.arc_count, w_max)
    if kind is Strategy.INVCAP:
        c_max = max((a.capacity for a in topo.arcs), default=1.0)
        ws = (min(w_max, max(1, round(c_max / a.capacity))) for a in topo.arcs)
        return WeightVector(tuple(ws), w_max)
    if kind is Strategy.RANDOM:
        return random_initial(topo, w_max, seed)
    raise ValueError(f"{kind} is not a baseline weighting")


def run_baseline(sc: FailureScenario, kind: Strategy | str, w_max: int = DEFAULT_W_MAX,
                 seed: int = 0) -> StrategyResult:
    kind = Strategy(kind)
    return _result(sc, kind, baseline_weights(sc.t_norm, kind, w_max, seed), seed=seed)


def run_strategy(sc: FailureScenario, strategy: Strategy | str, params: TabuParams,
                 w_max: int = DEFAULT_W_MAX) -> StrategyResult:
    strategy = Strategy(strategy)
    if strategy in BASELINES:
        return run_baseline(sc, strategy, w_max, params.seed)
    return {Strategy.OH: run_oh, Strategy.FT: run_ft, Strategy.SS: run_ss}[strategy](sc, params, w_max)


@dataclass(frozen=True)
class DeltaReport:
    """OH cost minus challenger cost; positive means the challenger did better."""

    delta_norm: float
    delta_fail: float
    delta: float


def delta_report(oh: StrategyResult, challenger: StrategyResult) -> DeltaReport:
    if oh.scenario_key != challenger.scenario_key:
        raise ScenarioMismatch(f"results come from scenarios {oh.scenario_key!r} and {challenger.scenario_key!r}")
    dn = oh.cost_norm - challenger.cost_norm
    df = oh.cost_fail - challenger.cost_fail
    return DeltaReport(dn, df, dn + df)
