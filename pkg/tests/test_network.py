from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_demands, random_symmetric, topo
from ospfws.network import (
    Arc,
    DemandMatrix,
    DuplicateArc,
    Link,
    NodeOutOfRange,
    ParseError,
    SelfDemand,
    SelfLoop,
    Topology,
    UnknownLink,
    WeightVector,
    add_link,
    check_connectivity,
    fail_link,
    parse_demands,
    parse_topology,
    parse_weights,
    serialize_demands,
    serialize_topology,
    serialize_weights,
)


def test_parse_topology_basic():
    t = parse_topology("nodes 3\narc 0 1 100\narc 1 0 100")
    assert t.node_count == 3
    assert t.arc_count == 2
    assert t.arcs[0] == Arc(0, 1, 100.0)


def test_parse_topology_no_arcs():
    t = parse_topology("nodes 2")
    assert (t.node_count, t.arc_count) == (2, 0)


def test_parse_topology_out_of_range():
    with pytest.raises(NodeOutOfRange):
        parse_topology("nodes 3\narc 0 5 100")


def test_parse_topology_comments_and_blank_lines():
    t = parse_topology("# a comment\n\nnodes 2\n  arc 0 1 5  # trailing\n")
    assert t.arcs == (Arc(0, 1, 5.0),)


@pytest.mark.parametrize("text", ["arc 0 1 1", "nodes x", "nodes 2\narc 0 1", "nodes 2\nfoo 1 2 3",
                                  "nodes 2\nnodes 3", "nodes 2\narc 0 1 -4"])
def test_parse_topology_malformed(text):
    with pytest.raises((ParseError, ValueError)):
        parse_topology(text)


def test_topology_rejects_duplicate_and_self_loop():
    with pytest.raises(DuplicateArc):
        parse_topology("nodes 2\narc 0 1 1\narc 0 1 2")
    with pytest.raises(SelfLoop):
        Topology(2, (Arc(1, 1, 1.0),))


def test_arc_rejects_bad_capacity():
    for cap in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            Arc(0, 1, cap)


def test_parse_demands_single_entry():
    t = topo(3, [(0, 1), (1, 2)])
    dm = parse_demands("demand 0 2 7.5", t)
    assert dm[0, 2] == 7.5
    m = dm.matrix
    assert m.sum() == 7.5 and m[0, 2] == 7.5


def test_parse_demands_empty():
    t = topo(3, [(0, 1)])
    dm = parse_demands("", t)
    assert dm.total == 0 and not dm.entries
    assert not dm.matrix.any()


def test_parse_demands_self_demand():
    with pytest.raises(SelfDemand):
        parse_demands("demand 1 1 3", topo(3, [(0, 1)]))


def test_parse_demands_out_of_range():
    with pytest.raises(NodeOutOfRange):
        parse_demands("demand 0 7 1", topo(3, [(0, 1)]))


def test_fail_link_removes_both_directions():
    t = topo(4, [(1, 2), (2, 1), (1, 3)])
    out, kept = fail_link(t, Link(1, 2))
    assert [(a.src, a.dst) for a in out.arcs] == [(1, 3)]
    assert kept == (2,)


def test_fail_link_unknown():
    with pytest.raises(UnknownLink):
        fail_link(topo(4, [(1, 2), (2, 1)]), Link(0, 3))


def test_fail_link_twice():
    out, _ = fail_link(topo(3, [(1, 2), (2, 1), (0, 1)]), Link(1, 2))
    with pytest.raises(UnknownLink):
        fail_link(out, Link(2, 1))


def test_add_link_appends():
    t = topo(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
    out, idx = add_link(t, 0, 2, 100.0)
    assert idx == (4, 5)
    assert out.arcs[:4] == t.arcs
    assert out.arcs[4] == Arc(0, 2, 100.0) and out.arcs[5] == Arc(2, 0, 100.0)


def test_add_link_errors():
    t = topo(3, [(0, 1), (1, 0)])
    with pytest.raises(DuplicateArc):
        add_link(t, 1, 0, 5.0)
    with pytest.raises(SelfLoop):
        add_link(t, 1, 1, 5.0)


def test_check_connectivity():
    chain = topo(3, [(0, 1), (1, 2)])
    assert check_connectivity(chain, DemandMatrix(3, {(0, 2): 1.0})) == []
    assert check_connectivity(chain, DemandMatrix(3, {(2, 0): 1.0})) == [(2, 0)]
    assert check_connectivity(chain, DemandMatrix(3, {})) == []


def test_link_normalizes_order():
    assert Link(3, 1) == Link(1, 3)
    assert str(Link(3, 1)) == "{1,3}"
    with pytest.raises(SelfLoop):
        Link(2, 2)


def test_demand_matrix_drops_zeros_and_rejects_negative():
    dm = DemandMatrix(3, {(0, 1): 0.0, (1, 2): 2.0})
    assert list(dm.entries) == [(1, 2)]
    with pytest.raises(ValueError):
        DemandMatrix(3, {(0, 1): -1.0})


def test_weight_vector_bounds():
    with pytest.raises(ValueError):
        WeightVector((1, 0), 3)
    with pytest.raises(ValueError):
        WeightVector((1, 4), 3)
    w = WeightVector((1, 2), 3)
    assert w.replace(0, 3).weights == (3, 2)
    with pytest.raises(ValueError):
        w.check_for(topo(2, [(0, 1)]))


def test_parse_weights_round_trip():
    t = topo(3, [(0, 1), (1, 2), (2, 0)])
    w = WeightVector((3, 1, 20), 20)
    assert parse_weights(serialize_weights(w), t, 20) == w
    with pytest.raises(ParseError):
        parse_weights("weight 0 1\nweight 1 1", t, 20)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_round_trip_topology_and_demands(n, p, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, p, caps=(0.1, 1 / 3, 7.25, 1e6))
    assert parse_topology(serialize_topology(t)) == t
    dm = random_demands(rng, n)
    assert parse_demands(serialize_demands(dm), t) == dm


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_fail_then_add_restores_link_set(n, seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(rng, n, 0.4)
    link = t.links()[int(rng.integers(len(t.links())))]
    cap = t.arcs[t.arcs_between(link.u, link.v)[0]].capacity
    failed, kept = fail_link(t, link)
    assert failed.arc_count == t.arc_count - 2
    assert [t.arcs[i] for i in kept] == list(failed.arcs)
    back, _ = add_link(failed, link.u, link.v, cap)
    assert set(back.links()) == set(t.links())
