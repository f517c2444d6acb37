"""Experiment harness: baseline protocol, comparison reports, result files.

The baseline protocol repeats budgeted heuristic runs from fresh random
starts and freezes its reported best at completed 50-run block boundaries,
so GA and baseline results compared under equal wall clocks stay honest.
Comparison rows highlight where the GA won and aggregate into success
ratios per dataset.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import random
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from evosat import __version__
from evosat.cnf import Instance, load_instance, random_assignment
from evosat.ga import GaParams, run_ga
from evosat.heuristics import HeuristicSpec, run_heuristic

BLOCK_SIZE = 50

CSV_COLUMNS = [
    "instance",
    "n",
    "m",
    "ga_count",
    "ga_time_s",
    "base_count",
    "base_time_s",
    "count_highlight",
    "time_highlight",
]

RATIO_RULE_NOTE = (
    "denominator: rows with a GA result; a row whose heuristic side is"
    " missing counts as a GA success"
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class BaselineRecord:
    """Outcome of one baseline session (None fields mean no result)."""

    best_count: int | None
    best_time_s: float | None
    runs_completed: int
    blocks_completed: int
    run_log: list = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "best_count": self.best_count,
            "best_time_s": self.best_time_s,
            "runs": self.runs_completed,
            "blocks": self.blocks_completed,
        }


def run_baseline(
    spec: HeuristicSpec,
    inst: Instance,
    rng: random.Random,
    per_run_budget: int,
    time_budget_s: float | None = None,
    run_count: int | None = None,
) -> BaselineRecord:
    """Repeated heuristic runs from fresh uniform random starts.

    Exactly one of time_budget_s / run_count drives the session.  The
    reported best freezes at completed 50-run block boundaries: it is the
    best count within the first blocks * 50 runs together with the wall time
    at which that count first appeared.  Fewer than 50 completed runs means
    no result.  A run cut short by the session clock is discarded.
    """
    if (time_budget_s is None) == (run_count is None):
        raise ValueError("set exactly one of time_budget_s / run_count")
    if per_run_budget <= 0:
        raise ValueError("per_run_budget must be positive")
    if time_budget_s is not None and time_budget_s <= 0:
        raise ValueError("time_budget_s must be positive")
    if run_count is not None and run_count < 0:
        raise ValueError("run_count must be >= 0")
    t0 = time.perf_counter()
    best: int | None = None
    best_time = 0.0
    reported_count: int | None = None
    reported_time: float | None = None
    runs = 0
    log: list[tuple[int, float]] = []
    while True:
        offset = time.perf_counter() - t0
        if run_count is not None:
            if runs >= run_count:
                break
        elif offset >= time_budget_s:
            break
        remaining = None if time_budget_s is None else time_budget_s - offset
        start = random_assignment(inst.n, rng)
        rec = run_heuristic(
            spec, inst, start, rng, max_flips=per_run_budget, max_seconds=remaining
        )
        if rec.total_flips < per_run_budget and rec.best_count < inst.m:
            break  # the session clock interrupted this run: it does not count
        runs += 1
        found_at = offset + rec.best_found_at_time
        log.append((rec.best_count, found_at))
        if best is None or rec.best_count > best:
            best = rec.best_count
            best_time = found_at
        if runs % BLOCK_SIZE == 0:
            reported_count, reported_time = best, best_time
    return BaselineRecord(
        best_count=reported_count,
        best_time_s=reported_time,
        runs_completed=runs,
        blocks_completed=runs // BLOCK_SIZE,
        run_log=log,
    )


def highlight(
    ga: tuple[int, float], base: tuple[int, float]
) -> tuple[bool, bool]:
    """(count_highlight, time_highlight) for one (count, time) pair of results.

    Count is highlighted when the GA satisfied strictly more clauses, or the
    same number in strictly less time; time alone requires equal counts and
    a strictly smaller GA time.
    """
    ga_count, ga_time = ga
    base_count, base_time = base
    if ga_count is None or base_count is None:
        raise ValueError("highlight requires both results")
    time_hl = ga_count == base_count and ga_time < base_time
    count_hl = ga_count > base_count or time_hl
    return count_hl, time_hl


@dataclass
class ComparisonRow:
    instance: str
    n: int | None = None
    m: int | None = None
    ga_count: int | None = None
    ga_time_s: float | None = None
    base_count: int | None = None
    base_time_s: float | None = None
    count_highlight: bool = False
    time_highlight: bool = False
    dataset: str | None = None

    def apply_highlights(self) -> None:
        """Fill the highlight flags from the value cells.

        A row without a GA result is never highlighted (and never counts
        toward ratios); a GA result standing alone — the heuristic produced
        nothing — highlights the count but not the time.
        """
        if self.ga_count is None:
            self.count_highlight = self.time_highlight = False
        elif self.base_count is None:
            self.count_highlight, self.time_highlight = True, False
        else:
            self.count_highlight, self.time_highlight = highlight(
                (self.ga_count, self.ga_time_s), (self.base_count, self.base_time_s)
            )


def _ratio_parts(
    rows: Sequence[ComparisonRow], dataset: str | None
) -> tuple[int, int]:
    selected = [
        r
        for r in rows
        if (dataset is None or r.dataset == dataset) and r.ga_count is not None
    ]
    if not selected:
        raise ValueError(
            "no rows selected"
            + (f" for dataset {dataset!r}" if dataset is not None else "")
        )
    return sum(1 for r in selected if r.count_highlight), len(selected)


def success_ratio(rows: Sequence[ComparisonRow], dataset: str | None = None) -> float:
    """Fraction of count-highlighted rows among rows with a GA result.

    dataset=None aggregates over all rows; otherwise only rows labeled with
    that dataset count.  Rows with no GA result are excluded from the
    denominator; rows where only the heuristic result is missing count as
    successes.  Raises on an empty selection.
    """
    hits, total = _ratio_parts(rows, dataset)
    return hits / total


def emit_report(
    ga_results: dict[str, dict], baseline_results: dict[str, dict]
) -> list[ComparisonRow]:
    """Join per-instance GA and baseline payloads into comparison rows.

    Both mappings are keyed by instance name and must cover the same set;
    a mismatch raises with the offending names.  A payload that carries no
    result yields blank cells on its side.  Rows come back sorted by name
    with highlight flags filled in.
    """
    ga_names = set(ga_results)
    base_names = set(baseline_results)
    if ga_names != base_names:
        missing_ga = sorted(base_names - ga_names)
        missing_base = sorted(ga_names - base_names)
        parts = []
        if missing_ga:
            parts.append(f"missing GA results for: {', '.join(missing_ga)}")
        if missing_base:
            parts.append(f"missing baseline results for: {', '.join(missing_base)}")
        raise ValueError("instance sets do not match; " + "; ".join(parts))
    rows = []
    for name in sorted(ga_names):
        ga_payload = ga_results[name]
        base_payload = baseline_results[name]
        ga_result = ga_payload.get("result") or {}
        base_result = base_payload.get("result") or {}
        info = ga_payload.get("instance") or base_payload.get("instance") or {}
        row = ComparisonRow(
            instance=name,
            n=info.get("n"),
            m=info.get("m"),
            ga_count=ga_result.get("best_S", ga_result.get("best_count")),
            ga_time_s=ga_result.get("best_time_s"),
            base_count=base_result.get("best_count"),
            base_time_s=base_result.get("best_time_s"),
            dataset=ga_payload.get("dataset") or base_payload.get("dataset"),
        )
        row.apply_highlights()
        rows.append(row)
    return rows


def _ratio_lines(rows: Sequence[ComparisonRow]) -> list[str]:
    lines = []
    try:
        hits, total = _ratio_parts(rows, None)
        lines.append(f"# success_ratio combined = {hits / total:.3f} ({hits}/{total})")
    except ValueError:
        lines.append("# success_ratio combined = n/a (no rows with a GA result)")
    for dataset in sorted({r.dataset for r in rows if r.dataset is not None}):
        try:
            hits, total = _ratio_parts(rows, dataset)
            lines.append(
                f"# success_ratio {dataset} = {hits / total:.3f} ({hits}/{total})"
            )
        except ValueError:
            lines.append(f"# success_ratio {dataset} = n/a")
    lines.append(f"# {RATIO_RULE_NOTE}")
    return lines


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_rows_csv(rows: Sequence[ComparisonRow], include_ratios: bool = True) -> str:
    """Render rows as CSV (fixed column set) with ratio footer comments."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.instance,
                _cell(r.n),
                _cell(r.m),
                _cell(r.ga_count),
                _cell(r.ga_time_s),
                _cell(r.base_count),
                _cell(r.base_time_s),
                _cell(r.count_highlight),
                _cell(r.time_highlight),
            ]
        )
    if include_ratios:
        for line in _ratio_lines(rows):
            buf.write(line + "\n")
    return buf.getvalue()


def _parse_int(text: str | None) -> int | None:
    return int(text) if text not in (None, "") else None


def _parse_float(text: str | None) -> float | None:
    return float(text) if text not in (None, "") else None


def read_rows_csv(text: str) -> list[ComparisonRow]:
    """Parse a comparison CSV back into rows.

    Comment lines (leading '#') are skipped.  An optional "dataset" column is
    honored; extra columns are ignored.  Highlight columns are taken as-is
    when present, recomputed otherwise.
    """
    lines = [ln for ln in text.splitlines() if ln and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or "instance" not in reader.fieldnames:
        raise ValueError("comparison CSV needs an 'instance' column")
    have_flags = set(CSV_COLUMNS[-2:]).issubset(reader.fieldnames)
    rows = []
    for rec in reader:
        row = ComparisonRow(
            instance=rec["instance"],
            n=_parse_int(rec.get("n")),
            m=_parse_int(rec.get("m")),
            ga_count=_parse_int(rec.get("ga_count")),
            ga_time_s=_parse_float(rec.get("ga_time_s")),
            base_count=_parse_int(rec.get("base_count")),
            base_time_s=_parse_float(rec.get("base_time_s")),
            dataset=rec.get("dataset") or None,
        )
        if have_flags:
            row.count_highlight = rec["count_highlight"].strip().lower() in ("true", "1")
            row.time_highlight = rec["time_highlight"].strip().lower() in ("true", "1")
        else:
            row.apply_highlights()
        rows.append(row)
    return rows


def render_report(rows: Sequence[ComparisonRow], report_format: str = "csv") -> str:
    """Comparison report as CSV with ratio footers, or as a JSON document."""
    if report_format == "csv":
        return write_rows_csv(rows)
    if report_format != "json":
        raise ValueError(f"unknown report format {report_format!r}")
    ratios: dict[str, float | None] = {}
    try:
        ratios["combined"] = round(success_ratio(rows), 3)
    except ValueError:
        ratios["combined"] = None
    for dataset in sorted({r.dataset for r in rows if r.dataset is not None}):
        try:
            ratios[dataset] = round(success_ratio(rows, dataset), 3)
        except ValueError:
            ratios[dataset] = None
    doc = {
        "rows": [
            {
                "instance": r.instance,
                "n": r.n,
                "m": r.m,
                "ga_count": r.ga_count,
                "ga_time_s": r.ga_time_s,
                "base_count": r.base_count,
                "base_time_s": r.base_time_s,
                "count_highlight": r.count_highlight,
                "time_highlight": r.time_highlight,
                "dataset": r.dataset,
            }
            for r in rows
        ],
        "success_ratios": ratios,
        "rule": RATIO_RULE_NOTE,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass
class ExperimentConfig:
    """One GA or baseline session against one instance file."""

    instance_path: str
    mode: str  # "ga" | "baseline"
    heuristic: HeuristicSpec
    seed: int
    ga_params: GaParams | None = None
    per_run_budget: int | None = None
    time_budget_s: float | None = None
    run_count: int | None = None
    dataset: str | None = None
    out_path: str | None = None
    report_format: str = "json"

    def validate(self) -> None:
        if self.mode not in ("ga", "baseline"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.report_format not in ("json", "csv"):
            raise ConfigError(f"unknown report format {self.report_format!r}")
        if self.mode == "ga":
            if self.ga_params is None:
                raise ConfigError("ga mode requires ga_params")
            if (self.ga_params.generations is None) == (
                self.ga_params.time_budget_s is None
            ):
                raise ConfigError("set exactly one of generations / time budget")
        else:
            if self.per_run_budget is None or self.per_run_budget <= 0:
                raise ConfigError("baseline mode requires a positive per-run flip budget")
            if (self.time_budget_s is None) == (self.run_count is None):
                raise ConfigError("set exactly one of time budget / run count")


def build_payload(
    mode: str,
    instance_path: str,
    inst: Instance,
    spec: HeuristicSpec | None,
    params: dict,
    seed: int,
    dataset: str | None,
    result: dict,
) -> dict:
    """Provenance-carrying result payload shared by all CLI verbs."""
    return {
        "mode": mode,
        "instance": {
            "name": Path(instance_path).stem,
            "path": str(instance_path),
            "n": inst.n,
            "m": inst.m,
        },
        "heuristic": spec.to_json_dict() if spec is not None else None,
        "params": params,
        "seed": seed,
        "dataset": dataset,
        "versions": {"evosat": __version__, "python": platform.python_version()},
        "host": {"platform": platform.platform(), "node": platform.node()},
        "created_at": datetime.now(timezone.utc).isoformat(),
        "result": result,
    }


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def strip_volatile(payload):
    """Deep copy with wall-clock fields removed (for reproducibility checks)."""
    volatile = {"created_at", "best_time_s"}
    if isinstance(payload, dict):
        return {
            k: strip_volatile(v) for k, v in payload.items() if k not in volatile
        }
    if isinstance(payload, list):
        return [strip_volatile(v) for v in payload]
    return payload


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list):
        out[prefix] = json.dumps(value)
    else:
        out[prefix] = value


def write_payload(payload: dict, path: str, report_format: str = "json") -> None:
    """Write a result payload as pretty JSON or a flat one-row CSV."""
    if report_format == "json":
        Path(path).write_text(canonical_json(payload), encoding="utf-8")
        return
    if report_format != "csv":
        raise ValueError(f"unknown report format {report_format!r}")
    flat: dict = {}
    _flatten("", payload, flat)
    keys = sorted(flat)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    writer.writerow([_cell(flat[k]) for k in keys])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute one configured session and return (and optionally write) its payload.

    Deterministic modes (generation-count GA, run-count baseline with flip
    budgets) produce identical payloads for identical seeds, wall-clock
    fields aside.
    """
    config.validate()
    inst = load_instance(config.instance_path)
    rng = random.Random(config.seed)
    if config.mode == "ga":
        record = run_ga(inst, config.heuristic, config.ga_params, rng)
        params = config.ga_params.to_json_dict()
        result = record.to_json_dict()
    else:
        record = run_baseline(
            config.heuristic,
            inst,
            rng,
            config.per_run_budget,
            time_budget_s=config.time_budget_s,
            run_count=config.run_count,
        )
        params = {
            "per_run_budget": config.per_run_budget,
            "time_budget_s": config.time_budget_s,
            "run_count": config.run_count,
            "block_size": BLOCK_SIZE,
        }
        result = record.to_json_dict()
    payload = build_payload(
        config.mode,
        config.instance_path,
        inst,
        config.heuristic,
        params,
        config.seed,
        config.dataset,
        result,
    )
    if config.out_path:
        write_payload(payload, config.out_path, config.report_format)
    return payload
