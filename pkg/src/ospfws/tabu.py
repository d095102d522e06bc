"""Tabu Search over integer weight vectors.

A move reassigns one arc's weight to a different value in ``[1, w_max]``.
Each iteration samples a handful of random moves and takes the cheapest
admissible one, even when it is worse than the current solution. A move is
admissible when its arc was not changed within the last ``tenure``
iterations, or when it beats the best cost seen so far (aspiration).
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .network import NetworkError, Topology, WeightVector

log = logging.getLogger(__name__)

Evaluator = Callable[[WeightVector], float]


class SearchError(RuntimeError):
    """The evaluator rejected the starting point of a search."""

    def __init__(self, weights: WeightVector, cause: Exception):
        super().__init__(f"cannot evaluate initial weights: {cause}")
        self.weights = weights


@dataclass(frozen=True)
class TabuParams:
    max_iterations: int = 2000
    stall_limit: int = 500
    tenure: int | None = None  # None: round(sqrt(arc count))
    neighborhood_samples: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.stall_limit < 1 or self.neighborhood_samples < 1:
            raise ValueError("stall_limit and neighborhood_samples must be positive")
        if self.tenure is not None:
            if self.tenure < 1:
                raise ValueError("tenure must be positive")
            if self.max_iterations and self.tenure >= self.max_iterations:
                raise ValueError("tenure must be smaller than max_iterations")

    def tenure_for(self, arc_count: int) -> int:
        if self.tenure is not None:
            return self.tenure
        return max(1, round(math.sqrt(arc_count)))

    def with_seed(self, seed: int) -> TabuParams:
        return replace(self, seed=seed)


@dataclass(frozen=True)
class Move:
    arc: int
    old: int
    new: int


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    cost: float  # cost of the current solution after this iteration
    best: float


@dataclass(frozen=True)
class SearchTrace:
    initial_cost: float
    records: tuple[TraceRecord, ...] = ()
    evaluations: int = 0

    def best_costs(self) -> list[float]:
        return [self.initial_cost] + [r.best for r in self.records]


@dataclass(frozen=True)
class TabuResult:
    best: WeightVector
    best_cost: float
    trace: SearchTrace = field(repr=False)


def random_initial(topo: Topology, w_max: int, seed: int) -> WeightVector:
    if w_max < 1:
        raise ValueError("w_max must be >= 1")
    rng = np.random.default_rng(seed)
    return WeightVector(tuple(int(x) for x in rng.integers(1, w_max + 1, size=topo.arc_count)), w_max)


def _sample_move(rng: random.Random, current: WeightVector) -> Move:
    arc = rng.randrange(len(current))
    old = current[arc]
    new = rng.randrange(1, current.w_max)
    if new >= old:
        new += 1
    return Move(arc, old, new)


def optimize(evaluate: Evaluator, initial: WeightVector, params: TabuParams) -> TabuResult:
    """Run Tabu Search from ``initial``; deterministic in ``params.seed``.

    Candidates whose evaluation raises a :class:`NetworkError` are dropped.
    Among admissible candidates the lowest cost wins, ties going to the
    lower arc index and then the lower new weight.
    """
    try:
        current_cost = evaluate(initial)
    except NetworkError as exc:
        raise SearchError(initial, exc) from exc

    start_cost = current_cost
    rng = random.Random(params.seed)
    tenure = params.tenure_for(len(initial))
    current = best = initial
    best_cost = current_cost
    tabu_until: dict[int, int] = {}
    records = []
    evaluations = 1
    stall = 0
    movable = len(initial) > 0 and initial.w_max > 1

    for it in range(1, params.max_iterations + 1 if movable else 1):
        chosen = None
        for _ in range(params.neighborhood_samples):
            mv = _sample_move(rng, current)
            cand = current.replace(mv.arc, mv.new)
            try:
                cost = evaluate(cand)
            except NetworkError:
                log.debug("dropping unevaluable candidate %s", mv)
                continue
            finally:
                evaluations += 1
            if tabu_until.get(mv.arc, 0) >= it and not cost < best_cost:
                continue
            key = (cost, mv.arc, mv.new)
            if chosen is None or key < chosen[0]:
                chosen = (key, cand)

        if chosen is not None:
            (current_cost, arc, _), current = chosen
            tabu_until[arc] = it + tenure
        if current_cost < best_cost:
            best, best_cost = current, current_cost
            stall = 0
        else:
            stall += 1
        records.append(TraceRecord(it, current_cost, best_cost))
        if stall >= params.stall_limit:
            break

    trace = SearchTrace(start_cost, tuple(records), evaluations)
    return TabuResult(best, best_cost, trace)
