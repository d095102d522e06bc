"""Command line entry point: ``ospfws {gen,optimize,evaluate,compare,table,trace}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .cost import LINEAR, STEP, CostEvaluator, uncap_cost
from .experiment import ExperimentConfig, free_demand_spec, read_manifest, report_from_json, report_to_json, run_experiment, write_manifest
from .generate import PRESETS, DemandSpec, Family, GenSpec, calibrate, gen_demands, gen_topology, preset
from .network import parse_demands, parse_topology, parse_weights, serialize_demands, serialize_topology, serialize_weights
from .report import FIXED3, SIG6, Comparison, TableFormat, emit_table, emit_trace
from .strategies import DEFAULT_W_MAX, Strategy, build_scenario, run_strategy
from .tabu import TabuParams

def _scales(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.rsplit("-", 1)
            out += range(int(lo), int(hi) + 1)
        else:
            out.append(int(part))
    return tuple(out)


def _params(args) -> TabuParams:
    return TabuParams(max_iterations=args.iterations, stall_limit=args.stall, tenure=args.tenure,
                      neighborhood_samples=args.samples, seed=args.seed)


def _search_flags(p: argparse.ArgumentParser) -> None:
    d = TabuParams()
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wmax", type=int, default=DEFAULT_W_MAX)
    p.add_argument("--iterations", type=int, default=d.max_iterations)
    p.add_argument("--stall", type=int, default=d.stall_limit)
    p.add_argument("--tenure", type=int, default=None, help="default: round(sqrt(arc count))")
    p.add_argument("--samples", type=int, default=d.neighborhood_samples, help="candidate moves per iteration")
    p.add_argument("--capacity", type=float, default=None, help="capacity of the added link (default: max in base)")
    p.add_argument("--step-cost", action="store_true", help="read the cost bands as step values")


def _gen_spec(args) -> GenSpec:
    if args.preset:
        return preset(args.preset, seed=args.seed)
    return GenSpec(Family(args.family), args.nodes, target_arc_count=args.arcs, seed=args.seed)


def cmd_gen(args) -> int:
    spec = _gen_spec(args)
    topo = gen_topology(spec)
    dspec = DemandSpec(base_seed=args.demand_seed, scale_index=args.scale, density=args.density)
    dspec = free_demand_spec(topo, dspec)
    if dspec.base_seed != args.demand_seed:
        print(f"demand seed {args.demand_seed} puts the critical pair on an existing link; using {dspec.base_seed}")
    if args.target_util is not None:
        dspec = calibrate(topo, dspec, args.target_util)
    dm = gen_demands(topo, dspec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "topology.txt").write_text(serialize_topology(topo))
    (out / "demands.txt").write_text(serialize_demands(dm))
    print(f"{topo.node_count} nodes, {topo.arc_count} arcs, {len(dm.entries)} demands -> {out}")
    return 0


def cmd_optimize(args) -> int:
    topo = parse_topology(Path(args.topology).read_text())
    dm = parse_demands(Path(args.demands).read_text(), topo)
    sc = build_scenario(topo, dm, args.capacity, STEP if args.step_cost else LINEAR)
    res = run_strategy(sc, args.strategy, _params(args), args.wmax)
    print(f"strategy={res.strategy} failed_link={sc.failed_link} cost_norm={res.cost_norm!r} "
          f"cost_fail={res.cost_fail!r}" + (f" sweep_weight={res.sweep_weight}" if res.sweep_weight else ""))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "topology_norm.txt").write_text(serialize_topology(sc.t_norm))
        (out / "topology_fail.txt").write_text(serialize_topology(sc.t_fail))
        (out / "weights_norm.txt").write_text(serialize_weights(res.weights))
        (out / "weights_fail.txt").write_text(serialize_weights(sc.restrict(res.weights)))
    return 0


def cmd_evaluate(args) -> int:
    topo = parse_topology(Path(args.topology).read_text())
    dm = parse_demands(Path(args.demands).read_text(), topo)
    w = parse_weights(Path(args.weights).read_text(), topo, args.wmax)
    mode = STEP if args.step_cost else LINEAR
    uncap = uncap_cost(parse_topology(Path(args.normalize_by).read_text()), dm) if args.normalize_by else None
    rep = CostEvaluator(topo, dm, mode, uncap).report(w)
    print(f"phi={rep.phi!r} phi_normalized={rep.phi_normalized!r} max_utilization={rep.max_utilization!r}")
    return 0


def _config(args) -> ExperimentConfig:
    if args.manifest:
        return read_manifest(Path(args.manifest).read_text())
    strategies = tuple(Strategy(s.strip().upper()) for s in args.strategy.split(","))
    common = dict(strategies=strategies, scales=_scales(args.scales), params=_params(args), w_max=args.wmax,
                  seed=args.seed, deltas=Strategy.OH in strategies, capacity=args.capacity,
                  mode=STEP if args.step_cost else LINEAR, parallelism=args.jobs,
                  demand=DemandSpec(base_seed=args.demand_seed, density=args.density))
    if args.topology:
        return ExperimentConfig(topology_file=args.topology, demand_file=args.demands, **common)
    gen = preset(args.preset, seed=args.gen_seed) if args.preset else GenSpec(
        Family(args.family), args.nodes, target_arc_count=args.arcs, seed=args.gen_seed)
    return ExperimentConfig(gen=gen, target_utilization=args.target_util, **common)


def write_outputs(report, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text(write_manifest(report.config))
    (out / "report.json").write_text(report_to_json(report))
    strategies = set(report.config.strategies)
    wanted = [(Comparison.FT_VS_OH, {Strategy.FT, Strategy.OH}), (Comparison.SS_VS_OH, {Strategy.SS, Strategy.OH}),
              (Comparison.FT_VS_SS, {Strategy.FT, Strategy.SS})]
    for comp, needs in wanted:
        if needs <= strategies:
            name = comp.value.lower()
            (out / f"{name}.csv").write_text(emit_table(report, TableFormat.CSV, comp))
            (out / f"{name}.md").write_text(emit_table(report, TableFormat.MARKDOWN, comp))
    traces = out / "traces"
    traces.mkdir(exist_ok=True)
    for (k, s), res in sorted(report.results.items()):
        if res.trace is not None:
            (traces / f"D{k}_{s.value}.csv").write_text(emit_trace(report, k, s))


def cmd_compare(args) -> int:
    cfg = _config(args)
    report = run_experiment(cfg)
    if args.out:
        write_outputs(report, Path(args.out))
    for (k, s), res in sorted(report.results.items()):
        print(f"D{k} {s.value:6s} norm={res.cost_norm:.5f} fail={res.cost_fail:.5f} "
              f"({report.elapsed[(k, s)]:.1f}s)")
    for (k, s), err in sorted(report.errors.items()):
        print(f"D{k} {s.value:6s} FAILED {err}")
    return 1 if report.errors else 0


def cmd_table(args) -> int:
    report = report_from_json(Path(args.report).read_text())
    sys.stdout.write(emit_table(report, args.format, args.comparison, SIG6 if args.sig6 else FIXED3))
    return 0


def cmd_trace(args) -> int:
    report = report_from_json(Path(args.report).read_text())
    sys.stdout.write(emit_trace(report, args.scale, args.strategy.upper()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ospfws", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def instance_flags(p):
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--family", choices=[f.value for f in Family], default="random")
        p.add_argument("--nodes", type=int, default=20)
        p.add_argument("--arcs", type=int, default=None, help="target arc count")
        p.add_argument("--demand-seed", type=int, default=0)
        p.add_argument("--density", type=float, default=1.0)
        p.add_argument("--target-util", type=float, default=None,
                       help="calibrate demands to this max utilization under unit weights")

    p = sub.add_parser("gen", help="generate a topology and demand file")
    instance_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("optimize", help="run one strategy on a base topology")
    p.add_argument("--topology", required=True)
    p.add_argument("--demands", required=True)
    p.add_argument("--strategy", default="OH", type=str.upper, choices=[s.value for s in Strategy])
    p.add_argument("--out", help="directory for both states' topologies and weights")
    _search_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="cost of given weights on one topology")
    p.add_argument("--topology", required=True)
    p.add_argument("--demands", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--normalize-by", metavar="TOPOLOGY",
                   help="take the min-hop normalizer from this topology (the normal state, for failure costs)")
    p.add_argument("--wmax", type=int, default=DEFAULT_W_MAX)
    p.add_argument("--step-cost", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run strategies across demand scales")
    instance_flags(p)
    p.add_argument("--gen-seed", type=int, default=0, help="topology generator seed")
    p.add_argument("--topology")
    p.add_argument("--demands")
    p.add_argument("--manifest", help="re-run exactly the experiment described by a manifest")
    p.add_argument("--strategy", default="OH,FT,SS", help="comma separated")
    p.add_argument("--scales", default="8-12")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    _search_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("table", help="print a comparison table from a saved report")
    p.add_argument("--report", required=True)
    p.add_argument("--comparison", default="FT_VS_OH", type=str.upper, choices=[c.value for c in Comparison])
    p.add_argument("--format", default="csv", choices=[f.value for f in TableFormat])
    p.add_argument("--sig6", action="store_true", help="six significant digits instead of three decimals")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("trace", help="print a search trace from a saved report")
    p.add_argument("--report", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--strategy", required=True)
    p.set_defaults(func=cmd_trace)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
