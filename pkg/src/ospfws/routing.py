"""OSPF routing: reverse Dijkstra per destination and even ECMP splitting.

Loads are aggregated per destination rather than per source/destination
pair. Under even splitting the split fractions at a node depend only on
the destination, so both are the same flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .network import DemandMatrix, Topology, UnroutableDemand, WeightVector

INF = np.iinfo(np.int64).max


@njit(cache=True)
def _workspace(n, m):
    return (np.empty(n, dtype=np.int64), np.empty(n, dtype=np.int64), np.empty(n, dtype=np.bool_),
            np.empty(m + 1, dtype=np.int64), np.empty(m + 1, dtype=np.int64), np.empty(n))


@njit(cache=True)
def _reverse_dijkstra(dest, n, arc_src, in_ptr, in_arc, w, ws):
    """Distances to ``dest`` and the settle order (non-decreasing distance).

    Binary heap keyed on (dist, node) with lazy deletion; at most one push
    per arc plus the root.
    """
    dist, order, done, hkey, hnode, _ = ws
    dist[:] = INF
    done[:] = False
    size = 1
    hkey[0] = 0
    hnode[0] = dest
    dist[dest] = 0
    settled = 0
    while size > 0:
        d = hkey[0]
        v = hnode[0]
        size -= 1
        if size > 0:
            # sift the last entry down from the root
            kd = hkey[size]
            kn = hnode[size]
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and (hkey[c + 1] < hkey[c] or (hkey[c + 1] == hkey[c] and hnode[c + 1] < hnode[c])):
                    c += 1
                if hkey[c] < kd or (hkey[c] == kd and hnode[c] < kn):
                    hkey[i] = hkey[c]
                    hnode[i] = hnode[c]
                    i = c
                else:
                    break
            hkey[i] = kd
            hnode[i] = kn
        if done[v]:
            continue
        done[v] = True
        order[settled] = v
        settled += 1
        for k in range(in_ptr[v], in_ptr[v + 1]):
            a = in_arc[k]
            u = arc_src[a]
            nd = d + w[a]
            if nd < dist[u]:
                dist[u] = nd
                # sift up
                i = size
                size += 1
                while i > 0:
                    p = (i - 1) // 2
                    if hkey[p] > nd or (hkey[p] == nd and hnode[p] > u):
                        hkey[i] = hkey[p]
                        hnode[i] = hnode[p]
                        i = p
                    else:
                        break
                hkey[i] = nd
                hnode[i] = u
    return settled


@njit(cache=True)
def _spread(dest, settled, arc_dst, out_ptr, out_arc, w, inject, load, ws):
    """Push each node's flow toward ``dest`` down the shortest-path DAG.

    Adds into ``load`` and returns the first node with positive injected
    demand that cannot reach ``dest`` (or -1).
    """
    dist, order, _, _, _, flow = ws
    for u in range(inject.shape[0]):
        if inject[u] > 0 and dist[u] == INF:
            return u
    flow[:] = inject
    for idx in range(settled - 1, 0, -1):
        u = order[idx]
        f = flow[u]
        if f == 0.0:
            continue
        du = dist[u]
        count = 0
        for k in range(out_ptr[u], out_ptr[u + 1]):
            a = out_arc[k]
            dv = dist[arc_dst[a]]
            if dv != INF and du == w[a] + dv:
                count += 1
        share = f / count
        for k in range(out_ptr[u], out_ptr[u + 1]):
            a = out_arc[k]
            v = arc_dst[a]
            dv = dist[v]
            if dv != INF and du == w[a] + dv:
                load[a] += share
                flow[v] += share
    return -1


@njit(cache=True)
def _total_loads(n, arc_src, arc_dst, in_ptr, in_arc, out_ptr, out_arc, w, demand_to, dests):
    ws = _workspace(n, arc_src.shape[0])
    load = np.zeros(arc_src.shape[0])
    for t in dests:
        settled = _reverse_dijkstra(t, n, arc_src, in_ptr, in_arc, w, ws)
        bad = _spread(t, settled, arc_dst, out_ptr, out_arc, w, demand_to[t], load, ws)
        if bad >= 0:
            return load, bad, t
    return load, -1, -1


@njit(cache=True)
def _partial_loads(n, arc_src, arc_dst, in_ptr, in_arc, out_ptr, out_arc, w, demand_to, dests):
    ws = _workspace(n, arc_src.shape[0])
    partial = np.zeros((dests.shape[0], arc_src.shape[0]))
    for i in range(dests.shape[0]):
        t = dests[i]
        settled = _reverse_dijkstra(t, n, arc_src, in_ptr, in_arc, w, ws)
        bad = _spread(t, settled, arc_dst, out_ptr, out_arc, w, demand_to[t], partial[i], ws)
        if bad >= 0:
            return partial, bad, t
    return partial, -1, -1


class Router:
    """CSR adjacency for one topology, reused across many weight vectors."""

    def __init__(self, topo: Topology):
        self.topo = topo
        n, m = topo.node_count, topo.arc_count
        self.n = n
        self.arc_src = np.array([a.src for a in topo.arcs], dtype=np.int64)
        self.arc_dst = np.array([a.dst for a in topo.arcs], dtype=np.int64)
        self.in_ptr, self.in_arc = _csr(self.arc_dst, n, m)
        self.out_ptr, self.out_arc = _csr(self.arc_src, n, m)

    def weights(self, w: WeightVector | np.ndarray) -> np.ndarray:
        if isinstance(w, WeightVector):
            w.check_for(self.topo)
            return np.array(w.weights, dtype=np.int64)
        return np.asarray(w, dtype=np.int64)

    def distances(self, w, dest: int) -> np.ndarray:
        ws = _workspace(self.n, len(self.arc_src))
        _reverse_dijkstra(dest, self.n, self.arc_src, self.in_ptr, self.in_arc, self.weights(w), ws)
        return ws[0].copy()

    # demand_to[t, s] is the demand from s to t (the transposed matrix)
    def total(self, w, demand_to: np.ndarray, dests: np.ndarray) -> np.ndarray:
        load, bad, t = _total_loads(self.n, self.arc_src, self.arc_dst, self.in_ptr, self.in_arc,
                                    self.out_ptr, self.out_arc, self.weights(w), demand_to, dests)
        if bad >= 0:
            raise UnroutableDemand(int(bad), int(t))
        return load

    def partial(self, w, demand_to: np.ndarray, dests: np.ndarray) -> np.ndarray:
        part, bad, t = _partial_loads(self.n, self.arc_src, self.arc_dst, self.in_ptr, self.in_arc,
                                      self.out_ptr, self.out_arc, self.weights(w), demand_to, dests)
        if bad >= 0:
            raise UnroutableDemand(int(bad), int(t))
        return part


def _csr(key: np.ndarray, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    arcs = np.argsort(key, kind="stable").astype(np.int64)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(key, minlength=n), out=ptr[1:])
    return ptr, arcs


def demand_to(dm: DemandMatrix) -> np.ndarray:
    """Row ``t`` holds every node's demand toward ``t``."""
    return np.ascontiguousarray(dm.matrix.T)


def destinations(dm: DemandMatrix) -> np.ndarray:
    """Destinations with inbound demand, ascending."""
    return np.array(sorted({t for _, t in dm.entries}), dtype=np.int64)


@dataclass(frozen=True)
class DistanceVector:
    dest: int
    dist: tuple[float, ...]  # ints, math.inf when unreachable

    def __getitem__(self, u: int) -> float:
        return self.dist[u]


@dataclass(frozen=True)
class FlowSolution:
    dests: tuple[int, ...]
    partial: np.ndarray  # row i holds the loads toward dests[i]
    total: np.ndarray

    @cached_property
    def by_dest(self) -> dict[int, np.ndarray]:
        return {t: self.partial[i] for i, t in enumerate(self.dests)}


def distances_to(topo: Topology, w: WeightVector, dest: int) -> DistanceVector:
    dist = Router(topo).distances(w, dest)
    return DistanceVector(dest, tuple(math.inf if d == INF else int(d) for d in dist))


def shortest_path_arcs(topo: Topology, w: WeightVector, dv: DistanceVector) -> set[int]:
    out = set()
    for i, a in enumerate(topo.arcs):
        du, dv_ = dv.dist[a.src], dv.dist[a.dst]
        if du != math.inf and du == w[i] + dv_:
            out.add(i)
    return out


def partial_loads(topo: Topology, w: WeightVector, dm: DemandMatrix, dest: int) -> np.ndarray:
    """Per-arc load of all traffic headed to ``dest``."""
    part = Router(topo).partial(w, demand_to(dm), np.array([dest], dtype=np.int64))
    return part[0]


def total_loads(topo: Topology, w: WeightVector, dm: DemandMatrix) -> FlowSolution:
    dests = destinations(dm)
    router = Router(topo)
    if dests.size == 0:
        return FlowSolution((), np.zeros((0, topo.arc_count)), np.zeros(topo.arc_count))
    partial = router.partial(w, demand_to(dm), dests)
    total = np.zeros(topo.arc_count)
    for row in partial:
        total += row
    return FlowSolution(tuple(int(t) for t in dests), partial, total)
