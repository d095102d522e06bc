from __future__ import annotations

import numpy as np
import pytest

from instances import random_demands, random_symmetric, random_weights, tiny_scenario, topo
from ospfws.cost import CostEvaluator, uncap_cost
from ospfws.network import DemandMatrix, Link, UnroutableDemand, WeightVector
from ospfws.strategies import (
    EmptyDemand,
    PairAlreadyLinked,
    ScenarioMismatch,
    Strategy,
    StrategyResult,
    baseline_weights,
    build_scenario,
    delta_report,
    evaluate_pair,
    failure_scenario,
    lift_weights,
    run_ft,
    run_oh,
    run_ss,
    run_strategy,
    select_critical_pair,
    sweep_added_link,
)
from ospfws.tabu import TabuParams, random_initial

QUICK = TabuParams(max_iterations=150, stall_limit=40)


def ring4():
    return topo(4, [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3)])


def injected(strategy, norm, fail, key=""):
    return StrategyResult(Strategy(strategy), None, norm, fail, scenario_key=key)


def generated_scenario(seed: int, n: int = 10):
    rng = np.random.default_rng(seed)
    while True:
        t = random_symmetric(rng, n, 0.25)
        dm = random_demands(rng, n, scale=float(rng.uniform(5, 40)))
        try:
            return build_scenario(t, dm)
        except PairAlreadyLinked:
            continue


def test_select_critical_pair():
    assert select_critical_pair(DemandMatrix(4, {(0, 1): 5.0, (2, 3): 9.0})) == Link(2, 3)
    assert select_critical_pair(DemandMatrix(4, {(0, 1): 4.0, (1, 0): 6.0, (2, 3): 9.0})) == Link(0, 1)
    assert select_critical_pair(DemandMatrix(4, {(0, 1): 9.0, (2, 3): 9.0})) == Link(0, 1)
    with pytest.raises(EmptyDemand):
        select_critical_pair(DemandMatrix(4, {}))


def test_build_scenario_ring_chord():
    base = ring4()
    sc = build_scenario(base, DemandMatrix(4, {(0, 2): 10.0, (1, 3): 2.0}))
    assert sc.failed_link == Link(0, 2)
    assert sc.t_fail == base
    assert sc.t_norm.arcs[:8] == base.arcs
    assert [(a.src, a.dst) for a in sc.t_norm.arcs[8:]] == [(0, 2), (2, 0)]
    assert sc.added_arcs == (8, 9)
    assert sc.t_norm.arcs[8].capacity == 100.0


def test_build_scenario_errors():
    with pytest.raises(EmptyDemand):
        build_scenario(ring4(), DemandMatrix(4, {}))
    with pytest.raises(PairAlreadyLinked):
        build_scenario(ring4(), DemandMatrix(4, {(0, 1): 5.0}))
    one_way = topo(3, [(0, 1), (1, 2)])
    with pytest.raises(UnroutableDemand):
        build_scenario(one_way, DemandMatrix(3, {(0, 2): 5.0, (2, 1): 1.0}))


def test_build_scenario_explicit_capacity():
    sc = build_scenario(ring4(), DemandMatrix(4, {(0, 2): 10.0}), capacity=7.0)
    assert {sc.t_norm.arcs[i].capacity for i in sc.added_arcs} == {7.0}


def test_failure_scenario_from_normal_state():
    sc = build_scenario(ring4(), DemandMatrix(4, {(0, 2): 10.0}))
    again = failure_scenario(sc.t_norm, sc.dm, Link(0, 2))
    assert again.t_fail == sc.t_fail and again.surviving == sc.surviving


def test_evaluate_pair_average():
    sc = tiny_scenario()
    rng = np.random.default_rng(0)
    for _ in range(20):
        pe = evaluate_pair(sc, random_weights(rng, sc.t_norm, 20))
        assert pe.phi_avg == (pe.phi_norm + pe.phi_fail) / 2


def test_evaluate_pair_unused_added_link():
    # chain 0-1-2 plus chord {0,2}; a weight of 20 on the chord loses to the 2-hop detour
    base = topo(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
    sc = build_scenario(base, DemandMatrix(3, {(0, 2): 30.0, (2, 0): 10.0}))
    pe = sc.evaluate(WeightVector((1, 1, 1, 1, 20, 20), 20))
    assert pe.phi_norm == pe.phi_fail == pe.phi_avg


def test_ft_objective_is_state_average():
    r = injected("FT", 1.31326, 1.33621)
    assert r.objective == pytest.approx(1.324735, abs=1e-12)
    assert injected("FT", 2.0, 4.0).objective == 3.0


def test_delta_report_table_rows():
    d = delta_report(injected("OH", 1.985, 5.711), injected("FT", 2.096, 2.315))
    assert (round(d.delta_norm, 3), round(d.delta_fail, 3), round(d.delta, 3)) == (-0.111, 3.396, 3.285)
    d = delta_report(injected("OH", 1.985, 5.711), injected("SS", 1.986, 2.010))
    assert (round(d.delta_norm, 3), round(d.delta_fail, 3), round(d.delta, 3)) == (-0.001, 3.701, 3.700)


def test_delta_self_comparison_and_mismatch():
    oh = injected("OH", 1.5, 2.5, key="a")
    d = delta_report(oh, oh)
    assert (d.delta_norm, d.delta_fail, d.delta) == (0, 0, 0)
    with pytest.raises(ScenarioMismatch):
        delta_report(oh, injected("FT", 1.0, 1.0, key="b"))


def test_baselines():
    t = topo(4, [(0, 1, 100), (1, 2, 50), (2, 3, 25)])
    assert baseline_weights(t, "UNIT").weights == (1, 1, 1)
    assert baseline_weights(t, "INVCAP", 20).weights == (1, 2, 4)
    assert baseline_weights(topo(3, [(0, 1, 100), (1, 2, 1)]), "INVCAP", 20).weights == (1, 20)
    r = baseline_weights(t, "RANDOM", 20, seed=3)
    assert r == baseline_weights(t, "RANDOM", 20, seed=3)
    with pytest.raises(ValueError):
        baseline_weights(t, "OH")


def test_run_baselines_on_scenario():
    sc = tiny_scenario()
    for kind in ("UNIT", "INVCAP", "RANDOM"):
        res = run_strategy(sc, kind, QUICK)
        pe = sc.evaluate(res.weights)
        assert (res.cost_norm, res.cost_fail) == (pe.phi_norm, pe.phi_fail)


def test_degenerate_single_route_landscape():
    # with w_max = 1 every strategy sees a single routing in each state
    sc = tiny_scenario()
    oh = [run_oh(sc, QUICK.with_seed(s), 1) for s in range(5)]
    ft = [run_ft(sc, QUICK.with_seed(s), 1) for s in range(5)]
    assert len({(r.cost_norm, r.cost_fail) for r in oh + ft}) == 1


def test_zero_iteration_oh_scores_random_initial():
    sc = tiny_scenario()
    res = run_oh(sc, TabuParams(max_iterations=0, seed=4), 3)
    assert res.weights == random_initial(sc.t_norm, 3, 4)


def test_oh_reports_its_weights_in_both_states():
    sc = generated_scenario(1)
    res = run_oh(sc, QUICK)
    assert res.cost_norm == CostEvaluator(sc.t_norm, sc.dm)(res.weights)
    shared = uncap_cost(sc.t_norm, sc.dm)
    assert res.cost_fail == CostEvaluator(sc.t_fail, sc.dm, uncap=shared)(sc.restrict(res.weights))
    assert res.trace.best_costs()[-1] == res.cost_norm


def test_ft_reports_average_of_its_best():
    sc = generated_scenario(2)
    res = run_ft(sc, QUICK)
    assert (res.cost_norm + res.cost_fail) / 2 == res.trace.best_costs()[-1]


def test_ss_sweep_and_failure_cost():
    sc = generated_scenario(3)
    res = run_ss(sc, QUICK, 20)
    fail_w = sc.restrict(res.weights)
    assert res.cost_fail == res.trace.best_costs()[-1]
    assert res.cost_fail == CostEvaluator(sc.t_fail, sc.dm, uncap=uncap_cost(sc.t_norm, sc.dm))(fail_w)
    assert {res.weights[i] for i in sc.added_arcs} == {res.sweep_weight}
    sweep = sweep_added_link(sc, fail_w)
    assert [x for x, _ in sweep] == list(range(1, 21))
    assert all(pe.phi_fail == res.cost_fail for _, pe in sweep)
    assert res.cost_norm == min(pe.phi_norm for _, pe in sweep)


def test_ss_singleton_sweep():
    sc = tiny_scenario()
    res = run_ss(sc, QUICK, 1)
    assert res.sweep_weight == 1
    assert res.cost_norm == sc.evaluate(WeightVector((1,) * 7, 1)).phi_norm


def test_lift_weights():
    sc = tiny_scenario()
    w = lift_weights(sc, WeightVector((1, 2, 3, 1, 2), 3), 3)
    assert w.weights == (1, 2, 3, 1, 2, 3, 3)
    assert sc.restrict(w).weights == (1, 2, 3, 1, 2)


def test_results_are_seed_deterministic():
    sc = generated_scenario(4)
    for fn in (run_oh, run_ft, run_ss):
        a, b = fn(sc, QUICK.with_seed(11)), fn(sc, QUICK.with_seed(11))
        assert a == b


def test_failure_state_shares_normal_state_normalizer():
    sc = generated_scenario(5)
    w = random_weights(np.random.default_rng(0), sc.t_norm, 20)
    pe = sc.evaluate(w)
    own = CostEvaluator(sc.t_fail, sc.dm)(sc.restrict(w))
    assert pe.phi_fail >= own >= 1.0
    assert pe.phi_fail * uncap_cost(sc.t_norm, sc.dm).value == pytest.approx(own * uncap_cost(sc.t_fail, sc.dm).value)
