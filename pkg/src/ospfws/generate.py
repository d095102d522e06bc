"""Seeded benchmark-shaped instances.

Topologies are built from symmetric links (two opposite arcs with one
capacity) and are always connected. Demand matrices sit on a multiplicative
ladder: the matrix at scale index ``k`` is a fixed base matrix times
``scale_base ** k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .network import Arc, DemandMatrix, NetworkError, Topology, WeightVector
from .routing import Router, demand_to, destinations


class Family(str, Enum):
    RANDOM = "random"
    WAXMAN = "waxman"
    HIER2 = "hier2"


class Unconnectable(NetworkError):
    pass


@dataclass(frozen=True)
class GenSpec:
    family: Family
    node_count: int
    target_arc_count: int | None = None
    edge_probability: float | None = None
    waxman_alpha: float = 0.4
    waxman_beta: float = 0.2
    capacity_levels: tuple[float, ...] = (200.0, 1000.0)
    seed: int = 0
    max_retries: int = 100

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "capacity_levels", tuple(float(c) for c in self.capacity_levels))
        if self.node_count < 2:
            raise ValueError("need at least two nodes")
        if not 0 < self.waxman_alpha <= 1 or not 0 < self.waxman_beta <= 1:
            raise ValueError("waxman_alpha and waxman_beta must lie in (0, 1]")
        if self.edge_probability is not None and not 0 <= self.edge_probability <= 1:
            raise ValueError("edge_probability must lie in [0, 1]")
        if not self.capacity_levels or min(self.capacity_levels) <= 0:
            raise ValueError("capacity levels must be positive")


# (family, nodes, target arcs), shaped after the classic Fortz-Thorup test set
PRESETS: dict[str, tuple[Family, int, int]] = {
    "h50": (Family.HIER2, 50, 148),
    "h100": (Family.HIER2, 100, 360),
    "r50": (Family.RANDOM, 50, 228),
    "r100": (Family.RANDOM, 100, 503),
    "w50": (Family.WAXMAN, 50, 169),
    "w100": (Family.WAXMAN, 100, 476),
}


def preset(name: str, seed: int = 0, **overrides) -> GenSpec:
    family, n, arcs = PRESETS[name]
    return GenSpec(family, n, target_arc_count=arcs, seed=seed, **overrides)


def _components(n: int, links: set[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in links:
        parent[find(u)] = find(v)
    groups: dict[int, list[int]] = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


def _connect(rng: np.random.Generator, nodes: list[int], links: set[tuple[int, int]]) -> None:
    """Join the components spanned by ``nodes`` with one random link each."""
    index = {x: i for i, x in enumerate(nodes)}
    local = {(index[u], index[v]) for u, v in links if u in index and v in index}
    comps = [[nodes[i] for i in c] for c in _components(len(nodes), local)]
    for prev, comp in zip(comps, comps[1:]):
        u = prev[int(rng.integers(len(prev)))]
        v = comp[int(rng.integers(len(comp)))]
        links.add((min(u, v), max(u, v)))


def _random_links(rng: np.random.Generator, nodes: list[int], p: float) -> set[tuple[int, int]]:
    links = set()
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            if rng.random() < p:
                links.add((min(u, v), max(u, v)))
    return links


def _target_links(spec: GenSpec) -> float | None:
    return None if spec.target_arc_count is None else spec.target_arc_count / 2


def _gen_random(spec: GenSpec, rng: np.random.Generator) -> set[tuple[int, int]]:
    n = spec.node_count
    p = spec.edge_probability
    if p is None:
        p = min(1.0, _target_links(spec) / math.comb(n, 2)) if spec.target_arc_count else 0.1
    links = _random_links(rng, list(range(n)), p)
    _connect(rng, list(range(n)), links)
    return links


def _gen_waxman(spec: GenSpec, rng: np.random.Generator) -> set[tuple[int, int]]:
    n = spec.node_count
    for _ in range(spec.max_retries):
        pos = rng.random((n, 2))
        d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
        iu = np.triu_indices(n, 1)
        span = d[iu].max()
        raw = np.exp(-d[iu] / (spec.waxman_beta * span))
        alpha = spec.waxman_alpha
        if spec.target_arc_count is not None:
            alpha = min(1.0, _target_links(spec) / raw.sum())
        keep = rng.random(raw.shape[0]) < alpha * raw
        links = {(int(u), int(v)) for u, v, k in zip(*iu, keep) if k}
        if len(_components(n, links)) == 1:
            return links
    raise Unconnectable(f"no connected Waxman graph after {spec.max_retries} attempts")


def _gen_hier2(spec: GenSpec, rng: np.random.Generator) -> set[tuple[int, int]]:
    n = spec.node_count
    core_size = max(2, n // 10)
    core = list(range(core_size))
    stubs = [[c] for c in core]  # each stub hangs off one core node
    for x in range(core_size, n):
        stubs[(x - core_size) % core_size].append(x)
    p_core = 0.5
    stub_pairs = sum(math.comb(len(s), 2) for s in stubs)
    if spec.edge_probability is not None:
        p_stub = spec.edge_probability
    elif spec.target_arc_count is not None:
        want = _target_links(spec) - p_core * math.comb(core_size, 2)
        p_stub = min(1.0, max(0.0, want / stub_pairs)) if stub_pairs else 0.0
    else:
        p_stub = 0.2
    links = _random_links(rng, core, p_core)
    _connect(rng, core, links)
    for s in stubs:
        stub_links = _random_links(rng, s, p_stub)
        _connect(rng, s, stub_links)
        links |= stub_links
    return links


def gen_topology(spec: GenSpec) -> Topology:
    rng = np.random.default_rng(spec.seed)
    links = {Family.RANDOM: _gen_random, Family.WAXMAN: _gen_waxman, Family.HIER2: _gen_hier2}[spec.family](spec, rng)
    arcs = []
    for u, v in sorted(links):
        cap = spec.capacity_levels[int(rng.integers(len(spec.capacity_levels)))]
        arcs += [Arc(u, v, cap), Arc(v, u, cap)]
    return Topology(spec.node_count, tuple(arcs))


@dataclass(frozen=True)
class DemandSpec:
    base_seed: int = 0
    scale_index: int = 0
    scale_base: float = math.sqrt(2)
    density: float = 1.0
    base_level: float = 1.0  # multiplies the uniform(0, 1) base draws

    def __post_init__(self):
        if not self.scale_base > 1:
            raise ValueError("scale_base must exceed 1")
        if not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")

    def at(self, k: int) -> DemandSpec:
        return replace(self, scale_index=k)


def base_demands(n: int, spec: DemandSpec) -> np.ndarray:
    """Unscaled demand matrix; depends only on ``n`` and ``spec.base_seed``."""
    rng = np.random.default_rng(spec.base_seed)
    pairs = [(s, t) for s in range(n) for t in range(n) if s != t]
    values = rng.random(len(pairs))
    order = rng.permutation(len(pairs))
    chosen = order[: round(spec.density * len(pairs))]
    base = np.zeros((n, n))
    for i in chosen:
        s, t = pairs[i]
        base[s, t] = values[i] * spec.base_level
    return base


def ladder(base: np.ndarray, scale_base: float, k: int) -> np.ndarray:
    """``base`` scaled ``k`` times by ``scale_base``, one multiplication per rung.

    Stepping rather than computing ``scale_base ** k`` makes rung ``k + 1``
    equal rung ``k`` times ``scale_base`` bit for bit.
    """
    out = base.copy()
    for _ in range(abs(k)):
        out = out * scale_base if k > 0 else out / scale_base
    return out


def gen_demands(topo: Topology, spec: DemandSpec) -> DemandMatrix:
    n = topo.node_count
    d = ladder(base_demands(n, spec), spec.scale_base, spec.scale_index)
    return DemandMatrix(n, {(s, t): float(d[s, t]) for s in range(n) for t in range(n) if d[s, t] > 0})


def unit_weight_utilization(topo: Topology, dm: DemandMatrix) -> float:
    """Maximum arc utilization when every weight is 1 (min-hop ECMP)."""
    if not dm.entries:
        return 0.0
    load = Router(topo).total(WeightVector((1,) * topo.arc_count, 1), demand_to(dm), destinations(dm))
    return float(np.max(load / topo.capacities))


def calibrate(topo: Topology, spec: DemandSpec, target_utilization: float) -> DemandSpec:
    """Rescale ``base_level`` so unit weights hit ``target_utilization`` at ``spec.scale_index``.

    Loads are linear in demand, so one probe suffices.
    """
    probe = unit_weight_utilization(topo, gen_demands(topo, spec))
    if probe == 0:
        raise ValueError("demand probe routed no traffic")
    return replace(spec, base_level=spec.base_level * target_utilization / probe)
