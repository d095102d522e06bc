"""Strategy comparisons across a demand ladder, with reproducible manifests."""

from __future__ import annotations

import json
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numba
import numpy as np

from . import __version__
from .cost import LINEAR
from .generate import DemandSpec, Family, GenSpec, calibrate, gen_demands, gen_topology, ladder
from .network import (
    DemandMatrix,
    Topology,
    WeightVector,
    parse_demands,
    parse_topology,
)
from .strategies import (
    DeltaReport,
    FailureScenario,
    PairAlreadyLinked,
    Strategy,
    StrategyResult,
    build_scenario,
    delta_report,
    run_strategy,
    select_critical_pair,
)
from .tabu import SearchTrace, TabuParams, TraceRecord

log = logging.getLogger(__name__)

DEMAND_SEED_TRIES = 100


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run. The instance comes from ``gen`` or from the two files.

    With files, the demand file is the base matrix and scale ``k`` multiplies
    it by ``demand.scale_base`` ``k`` times. With ``gen``, ``target_utilization``
    (if set) calibrates demands so unit weights reach that maximum
    utilization at the lowest scale.
    """

    strategies: tuple[Strategy, ...] = (Strategy.OH, Strategy.FT, Strategy.SS)
    scales: tuple[int, ...] = (8, 9, 10, 11, 12)
    params: TabuParams = TabuParams()
    w_max: int = 20
    seed: int = 0
    deltas: bool = True
    gen: GenSpec | None = None
    demand: DemandSpec = DemandSpec()
    target_utilization: float | None = None
    topology_file: str | None = None
    demand_file: str | None = None
    capacity: float | None = None
    mode: str = LINEAR
    parallelism: int = 1

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        object.__setattr__(self, "scales", tuple(int(k) for k in self.scales))
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if self.deltas and Strategy.OH not in self.strategies:
            raise ConfigError("delta columns need the OH strategy")
        if (self.gen is None) == (self.topology_file is None):
            raise ConfigError("give exactly one instance source: a generator spec or a topology file")
        if self.topology_file is not None and self.demand_file is None:
            raise ConfigError("a topology file needs a demand file")
        if not self.scales:
            raise ConfigError("at least one demand scale is required")


@dataclass(frozen=True)
class ScenarioInfo:
    failed_link: tuple[int, int]
    added_arcs: tuple[int, ...]
    key: str
    demand_seed: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig | None = None  # None for reports assembled by hand
    results: dict[tuple[int, Strategy], StrategyResult] = field(default_factory=dict)
    deltas: dict[tuple[int, Strategy], DeltaReport] = field(default_factory=dict)
    elapsed: dict[tuple[int, Strategy], float] = field(default_factory=dict)
    errors: dict[tuple[int, Strategy], str] = field(default_factory=dict)
    scenarios: dict[int, ScenarioInfo] = field(default_factory=dict)

    def compute_deltas(self) -> None:
        self.deltas = {}
        for (k, s), res in sorted(self.results.items()):
            oh = self.results.get((k, Strategy.OH))
            if oh is not None and s is not Strategy.OH:
                self.deltas[(k, s)] = delta_report(oh, res)

    @property
    def scales(self) -> list[int]:
        return sorted({k for k, _ in self.results} | {k for k, _ in self.errors})


# -- instance construction -----------------------------------------------------


def free_demand_spec(topo: Topology, spec: DemandSpec) -> DemandSpec:
    """First demand seed from ``spec.base_seed`` on whose critical pair is not yet linked."""
    for bump in range(DEMAND_SEED_TRIES):
        trial = replace(spec, base_seed=spec.base_seed + bump)
        link = select_critical_pair(gen_demands(topo, trial.at(0)))
        if not topo.arcs_between(link.u, link.v):
            return trial
    raise PairAlreadyLinked("every tried demand seed puts the critical pair on an existing link")


def load_instance(cfg: ExperimentConfig) -> tuple[Topology, DemandSpec | DemandMatrix, int]:
    """Base topology, the demand source and the demand seed actually used."""
    if cfg.gen is not None:
        topo = gen_topology(cfg.gen)
        spec = free_demand_spec(topo, cfg.demand)
        if cfg.target_utilization is not None:
            spec = calibrate(topo, spec.at(min(cfg.scales)), cfg.target_utilization)
        return topo, spec, spec.base_seed
    topo = parse_topology(Path(cfg.topology_file).read_text())
    dm = parse_demands(Path(cfg.demand_file).read_text(), topo)
    return topo, dm, -1


def demands_at(topo: Topology, source: DemandSpec | DemandMatrix, k: int, scale_base: float) -> DemandMatrix:
    if isinstance(source, DemandSpec):
        return gen_demands(topo, source.at(k))
    m = ladder(source.matrix, scale_base, k)
    return DemandMatrix(source.node_count, {st: float(m[st]) for st in source.entries})


def scenarios_for(cfg: ExperimentConfig) -> dict[int, FailureScenario]:
    topo, source, _ = load_instance(cfg)
    return {k: build_scenario(topo, demands_at(topo, source, k, cfg.demand.scale_base), cfg.capacity, cfg.mode)
            for k in cfg.scales}


def _run_job(job: tuple[FailureScenario, Strategy, TabuParams, int]):
    sc, strategy, params, w_max = job
    t0 = time.perf_counter()
    try:
        res = run_strategy(sc, strategy, params, w_max)
    except Exception as exc:  # recorded per job, never fatal to the whole run
        return None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0
    return res, None, time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    topo, source, demand_seed = load_instance(cfg)
    report = ExperimentReport(cfg)
    params = cfg.params.with_seed(cfg.seed)
    keys, jobs = [], []
    for k in cfg.scales:
        dm = demands_at(topo, source, k, cfg.demand.scale_base)
        try:
            sc = build_scenario(topo, dm, cfg.capacity, cfg.mode)
        except Exception as exc:
            for s in cfg.strategies:
                report.errors[(k, s)] = f"{type(exc).__name__}: {exc}"
            continue
        report.scenarios[k] = ScenarioInfo((sc.failed_link.u, sc.failed_link.v), sc.added_arcs, sc.key, demand_seed)
        for s in cfg.strategies:
            keys.append((k, s))
            jobs.append((sc, s, params, cfg.w_max))

    if cfg.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            outcomes = list(pool.map(_run_job, jobs))
    else:
        outcomes = [_run_job(j) for j in jobs]

    for key, (res, err, secs) in zip(keys, outcomes):
        report.elapsed[key] = secs
        if err is not None:
            log.warning("scale %s strategy %s failed: %s", key[0], key[1], err)
            report.errors[key] = err
        else:
            report.results[key] = res
    if cfg.deltas:
        report.compute_deltas()
    return report


# -- JSON persistence ------------------------------------------------------------


def _trace_to_json(tr: SearchTrace | None):
    if tr is None:
        return None
    return {"initial_cost": tr.initial_cost, "evaluations": tr.evaluations,
            "records": [[r.iteration, r.cost, r.best] for r in tr.records]}


def _trace_from_json(d) -> SearchTrace | None:
    if d is None:
        return None
    return SearchTrace(d["initial_cost"], tuple(TraceRecord(int(i), c, b) for i, c, b in d["records"]),
                       d["evaluations"])


def _result_to_json(r: StrategyResult) -> dict:
    return {
        "strategy": r.strategy.value,
        "weights": list(r.weights.weights) if r.weights else None,
        "w_max": r.weights.w_max if r.weights else None,
        "cost_norm": r.cost_norm,
        "cost_fail": r.cost_fail,
        "trace": _trace_to_json(r.trace),
        "budget": asdict(r.budget) if r.budget else None,
        "seed": r.seed,
        "scenario_key": r.scenario_key,
        "sweep_weight": r.sweep_weight,
    }


def _result_from_json(d: dict) -> StrategyResult:
    w = WeightVector(tuple(d["weights"]), d["w_max"]) if d["weights"] is not None else None
    return StrategyResult(Strategy(d["strategy"]), w, d["cost_norm"], d["cost_fail"], _trace_from_json(d["trace"]),
                          TabuParams(**d["budget"]) if d["budget"] else None, d["seed"], d["scenario_key"],
                          d["sweep_weight"])


def report_to_json(report: ExperimentReport) -> str:
    def rows(mapping, conv):
        return [{"scale": k, "strategy": s.value, **conv(v)} for (k, s), v in sorted(mapping.items())]

    doc = {
        "manifest": write_manifest(report.config) if report.config else None,
        "scenarios": {str(k): asdict(v) for k, v in sorted(report.scenarios.items())},
        "results": rows(report.results, _result_to_json),
        "deltas": rows(report.deltas, asdict),
        "elapsed": rows(report.elapsed, lambda v: {"seconds": v}),
        "errors": rows(report.errors, lambda v: {"error": v}),
    }
    return json.dumps(doc, indent=1)


def report_from_json(text: str) -> ExperimentReport:
    doc = json.loads(text)
    rep = ExperimentReport(read_manifest(doc["manifest"]) if doc["manifest"] else None)
    for row in doc["results"]:
        rep.results[(row["scale"], Strategy(row["strategy"]))] = _result_from_json(row)
    for row in doc["deltas"]:
        rep.deltas[(row["scale"], Strategy(row["strategy"]))] = DeltaReport(row["delta_norm"], row["delta_fail"],
                                                                            row["delta"])
    for row in doc["elapsed"]:
        rep.elapsed[(row["scale"], Strategy(row["strategy"]))] = row["seconds"]
    for row in doc["errors"]:
        rep.errors[(row["scale"], Strategy(row["strategy"]))] = row["error"]
    for k, v in doc["scenarios"].items():
        rep.scenarios[int(k)] = ScenarioInfo(tuple(v["failed_link"]), tuple(v["added_arcs"]), v["key"],
                                             v["demand_seed"])
    return rep


# -- manifest ----------------------------------------------------------------------


def _opt(x) -> str:
    return "auto" if x is None else repr(x) if isinstance(x, float) else str(x)


def _unopt(s: str, kind):
    return None if s == "auto" else kind(s)


def write_manifest(cfg: ExperimentConfig) -> str:
    """Line-oriented ``key=value`` text from which :func:`read_manifest` rebuilds ``cfg``."""
    p = cfg.params
    lines = {
        "tool": f"ospfws {__version__}",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
        "strategies": ",".join(s.value for s in cfg.strategies),
        "scales": ",".join(str(k) for k in cfg.scales),
        "w_max": str(cfg.w_max),
        "seed": str(cfg.seed),
        "deltas": str(cfg.deltas).lower(),
        "mode": cfg.mode,
        "capacity": _opt(cfg.capacity),
        "parallelism": str(cfg.parallelism),
        "tabu.max_iterations": str(p.max_iterations),
        "tabu.stall_limit": str(p.stall_limit),
        "tabu.tenure": _opt(p.tenure),
        "tabu.neighborhood_samples": str(p.neighborhood_samples),
        "demand.base_seed": str(cfg.demand.base_seed),
        "demand.scale_base": repr(cfg.demand.scale_base),
        "demand.density": repr(cfg.demand.density),
        "demand.base_level": repr(cfg.demand.base_level),
        "demand.target_utilization": _opt(cfg.target_utilization),
    }
    if cfg.gen is not None:
        g = cfg.gen
        lines.update({
            "source": "gen",
            "gen.family": g.family.value,
            "gen.node_count": str(g.node_count),
            "gen.target_arc_count": _opt(g.target_arc_count),
            "gen.edge_probability": _opt(g.edge_probability),
            "gen.waxman_alpha": repr(g.waxman_alpha),
            "gen.waxman_beta": repr(g.waxman_beta),
            "gen.capacity_levels": ",".join(repr(c) for c in g.capacity_levels),
            "gen.seed": str(g.seed),
            "gen.max_retries": str(g.max_retries),
        })
    else:
        lines.update({"source": "files", "files.topology": cfg.topology_file, "files.demands": cfg.demand_file})
    return "".join(f"{k}={v}\n" for k, v in lines.items())


def read_manifest(text: str) -> ExperimentConfig:
    kv = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            k, _, v = line.partition("=")
            kv[k.strip()] = v.strip()
    params = TabuParams(
        max_iterations=int(kv["tabu.max_iterations"]),
        stall_limit=int(kv["tabu.stall_limit"]),
        tenure=_unopt(kv["tabu.tenure"], int),
        neighborhood_samples=int(kv["tabu.neighborhood_samples"]),
    )
    demand = DemandSpec(base_seed=int(kv["demand.base_seed"]), scale_base=float(kv["demand.scale_base"]),
                        density=float(kv["demand.density"]), base_level=float(kv["demand.base_level"]))
    common = dict(
        strategies=tuple(Strategy(s) for s in kv["strategies"].split(",")),
        scales=tuple(int(k) for k in kv["scales"].split(",")),
        params=params,
        w_max=int(kv["w_max"]),
        seed=int(kv["seed"]),
        deltas=kv["deltas"] == "true",
        mode=kv["mode"],
        capacity=_unopt(kv["capacity"], float),
        parallelism=int(kv["parallelism"]),
        demand=demand,
        target_utilization=_unopt(kv["demand.target_utilization"], float),
    )
    if kv["source"] == "gen":
        gen = GenSpec(
            family=Family(kv["gen.family"]),
            node_count=int(kv["gen.node_count"]),
            target_arc_count=_unopt(kv["gen.target_arc_count"], int),
            edge_probability=_unopt(kv["gen.edge_probability"], float),
            waxman_alpha=float(kv["gen.waxman_alpha"]),
            waxman_beta=float(kv["gen.waxman_beta"]),
            capacity_levels=tuple(float(c) for c in kv["gen.capacity_levels"].split(",")),
            seed=int(kv["gen.seed"]),
            max_retries=int(kv["gen.max_retries"]),
        )
        return ExperimentConfig(gen=gen, **common)
    return ExperimentConfig(topology_file=kv["files.topology"], demand_file=kv["files.demands"], **common)
