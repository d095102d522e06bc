"""Brute-force ground truth for small instances.

Nothing here shares code with the Dijkstra/ECMP routing kernel except the
cost evaluator used to score enumerated weight vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .cost import CostEvaluator
from .network import DemandMatrix, Topology, UnroutableDemand, WeightVector
from .strategies import FailureScenario

DEFAULT_CEILING = 10**7
MAX_ENUM_NODES = 12


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_cost: float
    best_weights: WeightVector
    evaluated_count: int


def _enumerate(arc_count: int, w_max: int, score, ceiling: int) -> OracleResult:
    total = w_max**arc_count
    if total > ceiling:
        raise TooLarge(f"{w_max}^{arc_count} = {total} weight vectors exceeds the ceiling of {ceiling}")
    best = None
    count = 0
    # product() yields in lexicographic order, so strict < keeps the smallest tie
    for ws in itertools.product(range(1, w_max + 1), repeat=arc_count):
        w = WeightVector(ws, w_max)
        cost = score(w)
        count += 1
        if best is None or cost < best[0]:
            best = (cost, w)
    return OracleResult(best[0], best[1], count)


def brute_force_single(topo: Topology, dm: DemandMatrix, w_max: int,
                       ceiling: int = DEFAULT_CEILING) -> OracleResult:
    """Global minimum of the normalized cost over all of ``[1, w_max]^|A|``."""
    return _enumerate(topo.arc_count, w_max, CostEvaluator(topo, dm), ceiling)


def brute_force_paired(sc: FailureScenario, w_max: int, ceiling: int = DEFAULT_CEILING) -> OracleResult:
    """Global minimum of the normal/failure average over normal-state weights."""
    return _enumerate(sc.t_norm.arc_count, w_max, lambda w: sc.evaluate(w).phi_avg, ceiling)


def _shortest_paths(topo: Topology, w: WeightVector, src: int, dst: int) -> list[list[int]]:
    """Every minimum-weight simple path src -> dst, as arc-index lists."""
    out_arcs: list[list[int]] = [[] for _ in range(topo.node_count)]
    for i, a in enumerate(topo.arcs):
        out_arcs[a.src].append(i)
    best = [None]
    found: list[list[int]] = []
    on_path = [False] * topo.node_count

    def dfs(u: int, length: int, path: list[int]):
        if best[0] is not None and length > best[0]:
            return
        if u == dst:
            if best[0] is None or length < best[0]:
                best[0] = length
                found.clear()
            found.append(list(path))
            return
        on_path[u] = True
        for i in out_arcs[u]:
            v = topo.arcs[i].dst
            if not on_path[v]:
                path.append(i)
                dfs(v, length + w[i], path)
                path.pop()
        on_path[u] = False

    dfs(src, 0, [])
    return found


def enumerate_pair_flows(topo: Topology, w: WeightVector, src: int, dst: int, demand: float) -> list[float]:
    """Per-arc loads of one demand, split evenly at every branching node.

    Shortest paths are found by exhaustive DFS; at each node the flow is
    divided among the distinct next arcs that continue some shortest path.
    Paths that share a prefix ending at node x continue along every shortest
    next hop of x, so splitting per prefix group equals pooling at x.
    """
    if topo.node_count > MAX_ENUM_NODES:
        raise TooLarge(f"path enumeration limited to {MAX_ENUM_NODES} nodes")
    load = [0.0] * topo.arc_count
    if demand == 0 or src == dst:
        return load
    paths = _shortest_paths(topo, w, src, dst)
    if not paths:
        raise UnroutableDemand(src, dst)

    def push(prefix_len: int, members: list[list[int]], amount: float):
        # members: shortest paths sharing the same first prefix_len arcs
        nexts: dict[int, list[list[int]]] = {}
        for p in members:
            if prefix_len < len(p):
                nexts.setdefault(p[prefix_len], []).append(p)
        if not nexts:
            return
        share = amount / len(nexts)
        for arc, group in sorted(nexts.items()):
            load[arc] += share
            push(prefix_len + 1, group, share)

    push(0, paths, demand)
    return load
