"""CSV / markdown tables comparing strategies, and plottable search traces.

Deltas are always computed from full-precision costs and rounded only for
display, so a printed delta can differ in the last digit from the difference
of the two printed costs.
"""

from __future__ import annotations

from enum import Enum

from .experiment import ExperimentReport
from .strategies import Strategy, delta_report


class Comparison(str, Enum):
    FT_VS_OH = "FT_VS_OH"
    SS_VS_OH = "SS_VS_OH"
    FT_VS_SS = "FT_VS_SS"


class TableFormat(str, Enum):
    CSV = "csv"
    MARKDOWN = "markdown"


FIXED3 = "fixed3"
SIG6 = "sig6"


class MissingStrategy(LookupError):
    pass


class MissingTrace(LookupError):
    pass


def _num(x: float, precision: str) -> str:
    s = f"{x:.6g}" if precision == SIG6 else f"{x:.3f}"
    if s.startswith("-") and float(s) == 0:
        s = s[1:]
    return s


def _columns(comparison: Comparison) -> list[str]:
    if comparison is Comparison.FT_VS_SS:
        return ["D", "FT_N", "SS_N", "FT_F", "SS_F"]
    x = "FT" if comparison is Comparison.FT_VS_OH else "SS"
    return ["D", f"{x}_N", "OH_N", "delta_N", f"{x}_F", "OH_F", "delta_F", "delta"]


def table_rows(report: ExperimentReport, comparison: Comparison | str, precision: str = FIXED3) -> list[list[str]]:
    comparison = Comparison(comparison)
    if comparison is Comparison.FT_VS_SS:
        a, b = Strategy.FT, Strategy.SS
    else:
        a, b = (Strategy.FT if comparison is Comparison.FT_VS_OH else Strategy.SS), Strategy.OH
    rows = []
    for k in report.scales:
        ra, rb = report.results.get((k, a)), report.results.get((k, b))
        if ra is None or rb is None:
            missing = [s for s, r in ((a, ra), (b, rb)) if r is None and (k, s) not in report.errors]
            if missing:
                raise MissingStrategy(f"scale {k} has no {'/'.join(map(str, missing))} result")
            continue  # a recorded failure; the row is left out
        if comparison is Comparison.FT_VS_SS:
            vals = [ra.cost_norm, rb.cost_norm, ra.cost_fail, rb.cost_fail]
        else:
            d = delta_report(rb, ra)
            vals = [ra.cost_norm, rb.cost_norm, d.delta_norm, ra.cost_fail, rb.cost_fail, d.delta_fail, d.delta]
        rows.append([f"D{k}"] + [_num(v, precision) for v in vals])
    return rows


def emit_table(report: ExperimentReport, fmt: TableFormat | str = TableFormat.CSV,
               comparison: Comparison | str = Comparison.FT_VS_OH, precision: str = FIXED3) -> str:
    header = _columns(Comparison(comparison))
    rows = table_rows(report, comparison, precision)
    if TableFormat(fmt) is TableFormat.CSV:
        return "".join(",".join(r) + "\n" for r in [header] + rows)
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(out) + "\n"


def emit_trace(report: ExperimentReport, scale: int, strategy: Strategy | str) -> str:
    """``iteration,best_cost`` rows, starting with the initial solution at 0."""
    res = report.results.get((scale, Strategy(strategy)))
    if res is None or res.trace is None:
        raise MissingTrace(f"no search trace for {strategy} at scale {scale}")
    lines = ["iteration,best_cost", f"0,{res.trace.initial_cost!r}"]
    lines += [f"{r.iteration},{r.best!r}" for r in res.trace.records]
    return "\n".join(lines) + "\n"
