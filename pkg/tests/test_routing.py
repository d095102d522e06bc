from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import CHAIN, DIAMOND, TRIANGLE, TRIANGLE_W, random_demands, random_symmetric, random_weights, topo, unit
from ospfws.network import DemandMatrix, UnroutableDemand, WeightVector
from ospfws.oracle import enumerate_pair_flows
from ospfws.routing import Router, demand_to, destinations, distances_to, partial_loads, shortest_path_arcs, total_loads


def conservation_residual(t, dm, dest, load) -> float:
    """Largest |outflow - inflow - injected| over nodes for one destination."""
    net = np.zeros(t.node_count)
    for i, a in enumerate(t.arcs):
        net[a.src] += load[i]
        net[a.dst] -= load[i]
    want = np.zeros(t.node_count)
    for (s, d), v in dm.entries.items():
        if d == dest:
            want[s] += v
            want[d] -= v
    return float(np.max(np.abs(net - want)))


def oracle_loads(t, w, dm) -> np.ndarray:
    out = np.zeros(t.arc_count)
    for (s, d), v in dm.entries.items():
        out += enumerate_pair_flows(t, w, s, d, v)
    return out


def test_chain_distances():
    t = topo(3, CHAIN)
    assert distances_to(t, unit(t), 2).dist == (2, 1, 0)


def test_triangle_tie_distance():
    t = topo(3, TRIANGLE)
    dv = distances_to(t, WeightVector(TRIANGLE_W, 20), 2)
    assert dv.dist[0] == 2


def test_unreachable_is_infinite():
    t = topo(3, [(0, 1)])
    assert distances_to(t, unit(t), 1).dist == (1, 0, math.inf)


def test_shortest_path_arcs():
    chain = topo(3, CHAIN)
    assert shortest_path_arcs(chain, unit(chain), distances_to(chain, unit(chain), 2)) == {0, 1}
    tri = topo(3, TRIANGLE)
    w = WeightVector(TRIANGLE_W, 20)
    assert shortest_path_arcs(tri, w, distances_to(tri, w, 2)) == {0, 1, 2}
    w = WeightVector((1, 5, 1), 20)  # direct arc now longer than the detour
    assert shortest_path_arcs(tri, w, distances_to(tri, w, 2)) == {0, 2}


def test_partial_loads_examples():
    tri = topo(3, TRIANGLE)
    load = partial_loads(tri, WeightVector(TRIANGLE_W, 20), DemandMatrix(3, {(0, 2): 10.0}), 2)
    assert list(load) == [5.0, 5.0, 5.0]
    chain = topo(3, CHAIN)
    assert list(partial_loads(chain, unit(chain), DemandMatrix(3, {(0, 2): 7.0}), 2)) == [7.0, 7.0]
    dia = topo(4, DIAMOND)
    assert list(partial_loads(dia, unit(dia), DemandMatrix(4, {(0, 3): 8.0}), 3)) == [4.0, 4.0, 4.0, 4.0]


def test_total_equals_single_partial():
    dia = topo(4, DIAMOND)
    dm = DemandMatrix(4, {(0, 3): 8.0})
    fs = total_loads(dia, unit(dia), dm)
    assert np.array_equal(fs.total, partial_loads(dia, unit(dia), dm, 3))
    assert list(fs.by_dest) == [3]


def test_disjoint_destinations_add():
    t = topo(4, [(0, 1), (2, 3)])
    dm = DemandMatrix(4, {(0, 1): 2.0, (2, 3): 5.0})
    fs = total_loads(t, unit(t), dm)
    assert list(fs.total) == [2.0, 5.0]
    assert list(fs.by_dest[1]) == [2.0, 0.0] and list(fs.by_dest[3]) == [0.0, 5.0]


def test_unroutable_demand_raises():
    t = topo(3, CHAIN)
    with pytest.raises(UnroutableDemand) as e:
        total_loads(t, unit(t), DemandMatrix(3, {(2, 0): 1.0}))
    assert (e.value.src, e.value.dst) == (2, 0)


def test_reconverging_split_pools_at_merge_node():
    # 0 splits to 1 and 2; both reach 3, which splits again to 4 and 5 before 6
    t = topo(7, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)])
    fs = total_loads(t, unit(t), DemandMatrix(7, {(0, 6): 12.0}))
    assert list(fs.total) == [6.0, 6.0, 6.0, 6.0, 6.0, 6.0, 6.0, 6.0]


def test_uneven_ecmp_split():
    # 0 has three equal next hops; one of them then has two
    t = topo(6, [(0, 1), (0, 2), (0, 3), (1, 5), (2, 5), (3, 4), (3, 5), (4, 5)])
    w = unit(t)
    fs = total_loads(t, w, DemandMatrix(6, {(0, 5): 9.0}))
    assert list(fs.total) == [3.0, 3.0, 3.0, 3.0, 3.0, 0.0, 3.0, 0.0]


def test_router_kernel_matches_public_api():
    rng = np.random.default_rng(7)
    t = random_symmetric(rng, 9, 0.3)
    dm = random_demands(rng, 9)
    w = random_weights(rng, t, 4)
    r = Router(t)
    assert np.array_equal(r.total(w, demand_to(dm), destinations(dm)), total_loads(t, w, dm).total)


def test_total_loads_is_sum_of_partials():
    rng = np.random.default_rng(3)
    t = random_symmetric(rng, 8, 0.3)
    dm = random_demands(rng, 8)
    w = random_weights(rng, t, 3)
    fs = total_loads(t, w, dm)
    acc = np.zeros(t.arc_count)
    for d in fs.dests:
        acc = acc + partial_loads(t, w, dm, int(d))
    assert np.array_equal(acc, fs.total)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10), st.floats(0, 0.6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_matches_path_enumeration_oracle(n, p, w_max, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, p)
    dm = random_demands(rng, n)
    w = random_weights(rng, t, w_max)
    got = total_loads(t, w, dm).total
    want = oracle_loads(t, w, dm)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.floats(0, 0.6), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_flow_conservation(n, p, w_max, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, p)
    dm = random_demands(rng, n)
    w = random_weights(rng, t, w_max)
    fs = total_loads(t, w, dm)
    for d, load in fs.by_dest.items():
        assert conservation_residual(t, dm, d, load) <= 1e-9 * max(1.0, dm.total)
    assert (fs.total >= 0).all()


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_loads_only_on_shortest_path_arcs(n, w_max, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, 0.3)
    dm = random_demands(rng, n)
    w = random_weights(rng, t, w_max)
    fs = total_loads(t, w, dm)
    for d, load in fs.by_dest.items():
        on_dag = shortest_path_arcs(t, w, distances_to(t, w, d))
        assert all(i in on_dag for i in np.flatnonzero(load))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.floats(0.01, 100), st.integers(0, 2**32 - 1))
def test_loads_scale_linearly_with_demand(n, factor, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, 0.3)
    dm = random_demands(rng, n)
    w = random_weights(rng, t, 5)
    a = total_loads(t, w, dm).total * factor
    b = total_loads(t, w, dm.scaled(factor)).total
    assert np.allclose(a, b, rtol=1e-12, atol=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_distances_match_bellman_ford(n, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, 0.3)
    w = random_weights(rng, t, 20)
    for dest in range(n):
        dist = [math.inf] * n
        dist[dest] = 0
        for _ in range(n):
            for i, a in enumerate(t.arcs):
                dist[a.src] = min(dist[a.src], w[i] + dist[a.dst])
        assert distances_to(t, w, dest).dist == tuple(dist)
