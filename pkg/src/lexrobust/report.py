"""Per-condition summary tables for pair comparisons and fitted models."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .audio import NoiseCondition
from .hrs import AnalysisError, PairComparison, condition_summary
from .regression import FitResult, format_table

DIFF_BINS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def fivenum(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    """Tukey five-number summary (minimum, lower hinge, median, upper hinge, maximum)."""
    x = sorted(values)
    n = len(x)
    if n == 0:
        raise AnalysisError("five-number summary of no values")
    n4 = math.floor((n + 3) / 2) / 2
    idx = (1, n4, (n + 1) / 2, n + 1 - n4, n)
    return tuple(0.5 * (x[math.floor(d) - 1] + x[math.ceil(d) - 1]) for d in idx)


def histogram(values: Sequence[float], edges: Sequence[float] = DIFF_BINS) -> list[int]:
    """Counts per ``[edge_i, edge_i+1)`` bin; the last bin is closed on the right."""
    counts = [0] * (len(edges) - 1)
    for v in values:
        v = round(v, 9)
        for i in range(len(counts)):
            last = i == len(counts) - 1
            if edges[i] <= v < edges[i + 1] or (last and v == edges[-1]):
                counts[i] += 1
                break
    return counts


@dataclass(frozen=True)
class ConditionRow:
    condition: NoiseCondition
    n_pairs: int
    mean_hrs: float
    mean_diff_hrs: float
    mean_hrs_min: float
    mean_hrs_max: float
    t_vs_baseline: float | None
    p_vs_baseline: float | None
    histogram: tuple[int, ...]
    exceeding: tuple[int, ...]
    fivenum_min: tuple[float, ...]
    fivenum_max: tuple[float, ...]


def summarize(comparisons: Sequence[PairComparison], edges: Sequence[float] = DIFF_BINS) -> list[ConditionRow]:
    """One row per condition, highest SNR first; paired tests use the highest SNR as baseline."""
    if not comparisons:
        raise AnalysisError("no pair comparisons to report")
    by_cond: dict[NoiseCondition, list[PairComparison]] = defaultdict(list)
    for c in comparisons:
        by_cond[c.condition].append(c)
    conds = sorted(by_cond, key=lambda c: (-c.snr_db, c.noise_id))
    baseline = conds[0]
    rows = []
    for cond in conds:
        items = by_cond[cond]
        summary = condition_summary(comparisons, cond, None if cond == baseline else baseline)
        diffs = [c.diff_hrs for c in items]
        rows.append(ConditionRow(
            cond, len(items), summary.mean_hrs, summary.mean_diff_hrs,
            summary.mean_hrs_min, summary.mean_hrs_max,
            summary.test.statistic if summary.test else None,
            summary.test.p_value if summary.test else None,
            tuple(histogram(diffs, edges)),
            tuple(sum(1 for d in diffs if round(d, 9) > t) for t in edges[:-1]),
            fivenum([c.hrs_min for c in items]),
            fivenum([c.hrs_max for c in items]),
        ))
    return rows


def _fmt(v: float | None, digits: int = 3) -> str:
    return "-" if v is None else f"{v:.{digits}f}"


def report(
    comparisons: Sequence[PairComparison],
    fits: Sequence[tuple[str, FitResult]] = (),
    edges: Sequence[float] = DIFF_BINS,
) -> str:
    rows = summarize(comparisons, edges)
    out = ["Recognition by condition", ""]
    out.append(f"{'condition':<18}{'pairs':>6}{'HRS':>8}{'diff':>8}{'HRSmin':>8}{'HRSmax':>8}{'t':>9}{'p':>8}")
    for r in rows:
        label = f"{r.condition.noise_id} SNR {r.condition.snr_db:g}"
        out.append(
            f"{label:<18}{r.n_pairs:>6}{_fmt(r.mean_hrs):>8}{_fmt(r.mean_diff_hrs):>8}"
            f"{_fmt(r.mean_hrs_min):>8}{_fmt(r.mean_hrs_max):>8}{_fmt(r.t_vs_baseline):>9}"
            f"{_fmt(r.p_vs_baseline):>8}"
        )
    out.append("(t, p: paired t-test of diff.HRS against the highest-SNR condition)")

    out += ["", "diff.HRS histogram (pairs per bin)", ""]
    bins = [f"[{lo:g},{hi:g}{']' if i == len(edges) - 2 else ')'}" for i, (lo, hi) in enumerate(zip(edges, edges[1:]))]
    out.append(f"{'condition':<18}" + "".join(f"{b:>10}" for b in bins))
    for r in rows:
        label = f"{r.condition.noise_id} SNR {r.condition.snr_db:g}"
        out.append(f"{label:<18}" + "".join(f"{c:>10}" for c in r.histogram))
    out += ["", "pairs with diff.HRS above threshold", ""]
    out.append(f"{'condition':<18}" + "".join(f"{'>' + format(t, 'g'):>10}" for t in edges[:-1]))
    for r in rows:
        label = f"{r.condition.noise_id} SNR {r.condition.snr_db:g}"
        out.append(f"{label:<18}" + "".join(f"{c:>10}" for c in r.exceeding))

    out += ["", "HRS_min / HRS_max five-number summaries (min, lower hinge, median, upper hinge, max)", ""]
    for r in rows:
        label = f"{r.condition.noise_id} SNR {r.condition.snr_db:g}"
        out.append(f"{label:<18}min  " + " ".join(_fmt(v) for v in r.fivenum_min))
        out.append(f"{'':<18}max  " + " ".join(_fmt(v) for v in r.fivenum_max))

    for title, fit in fits:
        out += ["", format_table(fit, title)]
    return "\n".join(out) + "\n"


REPORT_FIELDS = (
    "condition_snr_db", "noise_id", "n_pairs", "mean_hrs", "mean_diff_hrs", "mean_hrs_min",
    "mean_hrs_max", "t_vs_baseline", "p_vs_baseline",
)


def report_rows(comparisons: Sequence[PairComparison], edges: Sequence[float] = DIFF_BINS) -> list[dict]:
    rows = []
    for r in summarize(comparisons, edges):
        row = {
            "condition_snr_db": f"{r.condition.snr_db:g}", "noise_id": r.condition.noise_id,
            "n_pairs": r.n_pairs, "mean_hrs": repr(r.mean_hrs), "mean_diff_hrs": repr(r.mean_diff_hrs),
            "mean_hrs_min": repr(r.mean_hrs_min), "mean_hrs_max": repr(r.mean_hrs_max),
            "t_vs_baseline": "" if r.t_vs_baseline is None else repr(r.t_vs_baseline),
            "p_vs_baseline": "" if r.p_vs_baseline is None else repr(r.p_vs_baseline),
        }
        for (lo, hi), c in zip(zip(edges, edges[1:]), r.histogram):
            row[f"bin_{lo:g}_{hi:g}"] = c
        for name, five in (("hrs_min", r.fivenum_min), ("hrs_max", r.fivenum_max)):
            for stat, v in zip(("min", "q1", "median", "q3", "max"), five):
                row[f"{name}_{stat}"] = repr(v)
        rows.append(row)
    return rows
