"""Immutable network model: topologies, links, demand matrices, weights.

Text formats (``#`` starts a comment, fields are whitespace separated)::

    nodes 4
    arc 0 1 1000
    arc 1 0 1000

    demand 0 2 7.5

    weight 0 3
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np


class NetworkError(ValueError):
    """Base class for malformed or inconsistent network input."""


class ParseError(NetworkError):
    pass


class NodeOutOfRange(NetworkError):
    pass


class DuplicateArc(NetworkError):
    pass


class SelfLoop(NetworkError):
    pass


class SelfDemand(NetworkError):
    pass


class UnknownLink(NetworkError):
    pass


class UnroutableDemand(NetworkError):
    """Positive demand between ``src`` and ``dst`` has no directed path."""

    def __init__(self, src: int, dst: int):
        super().__init__(f"demand {src}->{dst} has no directed path")
        self.src = src
        self.dst = dst


@dataclass(frozen=True)
class Arc:
    src: int
    dst: int
    capacity: float

    def __post_init__(self):
        if self.src == self.dst:
            raise SelfLoop(f"self-loop at node {self.src}")
        if not self.capacity > 0 or not math.isfinite(self.capacity):
            raise NetworkError(f"arc {self.src}->{self.dst}: capacity must be positive, got {self.capacity}")


@dataclass(frozen=True, order=True)
class Link:
    """Unordered node pair naming every arc between ``u`` and ``v``.

    The endpoints are stored sorted so ``Link(2, 0) == Link(0, 2)``.
    """

    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise SelfLoop(f"link {{{self.u},{self.v}}} joins a node to itself")
        if self.u > self.v:
            lo, hi = self.v, self.u
            object.__setattr__(self, "u", lo)
            object.__setattr__(self, "v", hi)

    def __str__(self) -> str:
        return f"{{{self.u},{self.v}}}"


@dataclass(frozen=True)
class Topology:
    """Directed capacitated graph. An arc's index is its position in ``arcs``."""

    node_count: int
    arcs: tuple[Arc, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if self.node_count < 0:
            raise NetworkError("node count must be non-negative")
        seen = set()
        for a in self.arcs:
            for x in (a.src, a.dst):
                if not 0 <= x < self.node_count:
                    raise NodeOutOfRange(f"node {x} not in [0, {self.node_count})")
            if (a.src, a.dst) in seen:
                raise DuplicateArc(f"duplicate arc {a.src}->{a.dst}")
            seen.add((a.src, a.dst))

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    @cached_property
    def arc_index(self) -> dict[tuple[int, int], int]:
        return {(a.src, a.dst): i for i, a in enumerate(self.arcs)}

    @cached_property
    def capacities(self) -> np.ndarray:
        caps = np.array([a.capacity for a in self.arcs], dtype=np.float64)
        caps.flags.writeable = False
        return caps

    def arcs_between(self, u: int, v: int) -> list[int]:
        """Indices of the arcs u->v and v->u that exist, in index order."""
        return sorted(i for i in (self.arc_index.get((u, v)), self.arc_index.get((v, u))) if i is not None)

    def links(self) -> list[Link]:
        return sorted({Link(a.src, a.dst) for a in self.arcs})


@dataclass(frozen=True)
class DemandMatrix:
    """Traffic demand per ordered node pair; absent pairs carry zero."""

    node_count: int
    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (s, t), d in dict(self.entries).items():
            for x in (s, t):
                if not 0 <= x < self.node_count:
                    raise NodeOutOfRange(f"node {x} not in [0, {self.node_count})")
            if s == t:
                raise SelfDemand(f"demand from node {s} to itself")
            if not d >= 0 or not math.isfinite(d):
                raise NetworkError(f"demand {s}->{t} must be a non-negative real, got {d}")
            if d > 0:
                clean[(s, t)] = float(d)
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def __getitem__(self, pair: tuple[int, int]) -> float:
        return self.entries.get(pair, 0.0)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.node_count, self.node_count), dtype=np.float64)
        for (s, t), d in self.entries.items():
            m[s, t] = d
        m.flags.writeable = False
        return m

    @property
    def total(self) -> float:
        return sum(self.entries.values())

    def scaled(self, factor: float) -> DemandMatrix:
        return DemandMatrix(self.node_count, {k: d * factor for k, d in self.entries.items()})


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[int, ...]
    w_max: int

    def __post_init__(self):
        ws = tuple(int(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if self.w_max < 1:
            raise NetworkError(f"w_max must be >= 1, got {self.w_max}")
        for i, w in enumerate(ws):
            if not 1 <= w <= self.w_max:
                raise NetworkError(f"weight {w} of arc {i} outside [1, {self.w_max}]")

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> int:
        return self.weights[i]

    def replace(self, arc: int, weight: int) -> WeightVector:
        ws = list(self.weights)
        ws[arc] = weight
        return WeightVector(tuple(ws), self.w_max)

    def check_for(self, topo: Topology) -> None:
        if len(self.weights) != topo.arc_count:
            raise NetworkError(f"{len(self.weights)} weights for {topo.arc_count} arcs")


# -- parsing / serialization -------------------------------------------------


def _lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split("#", 1)[0].split()
        if fields:
            yield lineno, fields


def _number(tok: str, lineno: int, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: expected {kind.__name__}, got {tok!r}") from None


def _fmt(x: float) -> str:
    s = f"{x:.9g}"
    return s if float(s) == x else repr(float(x))


def parse_topology(text: str) -> Topology:
    node_count = None
    arcs = []
    for lineno, f in _lines(text):
        if node_count is None:
            if f[0] != "nodes" or len(f) != 2:
                raise ParseError(f"line {lineno}: expected 'nodes <N>' first")
            node_count = _number(f[1], lineno, int)
            continue
        if f[0] != "arc" or len(f) != 4:
            raise ParseError(f"line {lineno}: expected 'arc <src> <dst> <capacity>'")
        src, dst = _number(f[1], lineno, int), _number(f[2], lineno, int)
        cap = _number(f[3], lineno)
        if not 0 <= src < node_count or not 0 <= dst < node_count:
            raise NodeOutOfRange(f"line {lineno}: node index out of range [0, {node_count})")
        if not cap > 0:
            raise NetworkError(f"line {lineno}: capacity must be positive")
        arcs.append(Arc(src, dst, cap))
    if node_count is None:
        raise ParseError("missing 'nodes <N>' line")
    return Topology(node_count, tuple(arcs))


def serialize_topology(topo: Topology) -> str:
    out = [f"nodes {topo.node_count}"]
    out += [f"arc {a.src} {a.dst} {_fmt(a.capacity)}" for a in topo.arcs]
    return "\n".join(out) + "\n"


def parse_demands(text: str, topo: Topology) -> DemandMatrix:
    entries: dict[tuple[int, int], float] = {}
    for lineno, f in _lines(text):
        if f[0] != "demand" or len(f) != 4:
            raise ParseError(f"line {lineno}: expected 'demand <src> <dst> <value>'")
        s, t = _number(f[1], lineno, int), _number(f[2], lineno, int)
        d = _number(f[3], lineno)
        if not 0 <= s < topo.node_count or not 0 <= t < topo.node_count:
            raise NodeOutOfRange(f"line {lineno}: node index out of range [0, {topo.node_count})")
        if s == t:
            raise SelfDemand(f"line {lineno}: demand from node {s} to itself")
        if d < 0:
            raise NetworkError(f"line {lineno}: negative demand")
        entries[(s, t)] = entries.get((s, t), 0.0) + d
    return DemandMatrix(topo.node_count, entries)


def serialize_demands(dm: DemandMatrix) -> str:
    return "".join(f"demand {s} {t} {_fmt(d)}\n" for (s, t), d in dm.entries.items())


def parse_weights(text: str, topo: Topology, w_max: int) -> WeightVector:
    ws: list[int | None] = [None] * topo.arc_count
    for lineno, f in _lines(text):
        if f[0] != "weight" or len(f) != 3:
            raise ParseError(f"line {lineno}: expected 'weight <arc_index> <w>'")
        i, w = _number(f[1], lineno, int), _number(f[2], lineno, int)
        if not 0 <= i < topo.arc_count:
            raise ParseError(f"line {lineno}: arc index {i} out of range")
        ws[i] = w
    missing = [i for i, w in enumerate(ws) if w is None]
    if missing:
        raise ParseError(f"no weight given for arcs {missing}")
    return WeightVector(tuple(ws), w_max)


def serialize_weights(w: WeightVector) -> str:
    return "".join(f"weight {i} {x}\n" for i, x in enumerate(w.weights))


# -- topology surgery --------------------------------------------------------


def fail_link(topo: Topology, link: Link) -> tuple[Topology, tuple[int, ...]]:
    """Remove every arc between the link's endpoints.

    Returns the new topology and, for each surviving arc, its index in
    ``topo`` (new index -> old index).
    """
    doomed = set(topo.arcs_between(link.u, link.v))
    if not doomed:
        raise UnknownLink(f"no arcs between {link.u} and {link.v}")
    kept = tuple(i for i in range(topo.arc_count) if i not in doomed)
    return Topology(topo.node_count, tuple(topo.arcs[i] for i in kept)), kept


def add_link(topo: Topology, u: int, v: int, capacity: float) -> tuple[Topology, tuple[int, int]]:
    """Append arcs u->v and v->u; returns the new topology and their indices."""
    if u == v:
        raise SelfLoop(f"self-loop at node {u}")
    if topo.arcs_between(u, v):
        raise DuplicateArc(f"nodes {u} and {v} are already linked")
    m = topo.arc_count
    arcs = topo.arcs + (Arc(u, v, capacity), Arc(v, u, capacity))
    return Topology(topo.node_count, arcs), (m, m + 1)


def _reachers(topo: Topology, dest: int) -> set[int]:
    into: list[list[int]] = [[] for _ in range(topo.node_count)]
    for a in topo.arcs:
        into[a.dst].append(a.src)
    seen = {dest}
    queue = deque([dest])
    while queue:
        v = queue.popleft()
        for u in into[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def check_connectivity(topo: Topology, dm: DemandMatrix) -> list[tuple[int, int]]:
    """Demand pairs with positive demand but no directed path, sorted."""
    bad = []
    by_dest: dict[int, list[int]] = {}
    for s, t in dm.entries:
        by_dest.setdefault(t, []).append(s)
    for t, sources in sorted(by_dest.items()):
        ok = _reachers(topo, t)
        bad += [(s, t) for s in sources if s not in ok]
    return sorted(bad)
