"""Benchmark harness: four designs x topologies x load levels x seeds.

Within one (topology, load, seed) group all four designs see the same demand
endpoints (the generator ignores the protection flag when sampling pairs),
so wavelength-count and link-usage comparisons are paired. Records are
written as JSON lines and canonically sorted, which makes partial runs
resumable and repeated runs byte-comparable apart from solve times.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from .errors import RwaError, ValidationError
from .model import DesignConfig, VARIANTS
from .solver import STATUS_OPTIMAL, SolverOptions, solve_exact
from .topology import load_topology
from .traffic import generate_traffic
from .validate import check_solution

RECORD_FIELDS = (
    "topology",
    "load",
    "variant",
    "seed",
    "wavelength_count",
    "wavelength_link_usage",
    "status",
    "solve_time",
)

_LOAD_ORDER = {"low": 0, "medium": 1, "high": 2}
_VARIANT_ORDER = {v: i for i, v in enumerate(VARIANTS)}


@dataclass(frozen=True)
class ExperimentPlan:
    topologies: tuple[str, ...]
    loads: tuple[str, ...]
    variants: tuple[str, ...] = VARIANTS
    seeds: tuple[int, ...] = tuple(range(1, 11))
    capacity_overrides: tuple[tuple[str, int], ...] = ()
    time_limit: float = 300.0

    def __post_init__(self):
        if not (self.topologies and self.loads and self.variants and self.seeds):
            raise ValidationError("plan lists must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValidationError("seeds must be distinct")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValidationError(f"unknown design {v!r}; expected one of {VARIANTS}")

    def capacity_for(self, topology: str) -> int | None:
        for name, cap in self.capacity_overrides:
            if name == topology:
                return cap
        return None

    def jobs(self) -> list[dict]:
        out = []
        for topo in self.topologies:
            for load in self.loads:
                for seed in self.seeds:
                    for variant in self.variants:
                        out.append(
                            {
                                "topology": topo,
                                "load": load,
                                "variant": variant,
                                "seed": seed,
                                "capacity": self.capacity_for(topo),
                                "time_limit": self.time_limit,
                            }
                        )
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentPlan":
        known = {"topologies", "loads", "variants", "seeds", "capacity", "time_limit"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown plan fields: {sorted(unknown)}")
        kwargs = {
            "topologies": tuple(data["topologies"]),
            "loads": tuple(data["loads"]),
        }
        if "variants" in data:
            kwargs["variants"] = tuple(data["variants"])
        if "seeds" in data:
            kwargs["seeds"] = tuple(int(s) for s in data["seeds"])
        if "capacity" in data:
            kwargs["capacity_overrides"] = tuple(sorted(data["capacity"].items()))
        if "time_limit" in data:
            kwargs["time_limit"] = float(data["time_limit"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ExperimentResult:
    records: tuple[dict, ...]

    def cells(self) -> list[dict]:
        """Per-(topology, load, variant) averages over the optimal records."""
        grouped: dict[tuple, list[dict]] = {}
        for rec in self.records:
            grouped.setdefault((rec["topology"], rec["load"], rec["variant"]), []).append(rec)
        out = []
        for key in sorted(grouped, key=_cell_sort_key):
            records = grouped[key]
            optimal = [r for r in records if r["status"] == STATUS_OPTIMAL]
            cell = {
                "topology": key[0],
                "load": key[1],
                "variant": key[2],
                "seeds": len(records),
                "optimal": len(optimal),
                "all_optimal": len(optimal) == len(records),
                "wc_avg": _mean([r["wavelength_count"] for r in optimal]),
                "wlu_avg": _mean([r["wavelength_link_usage"] for r in optimal]),
            }
            out.append(cell)
        return out

    def savings(self) -> dict[tuple, float | None]:
        """1 - WLU(integrated)/WLU(single-objective), per cell pair."""
        cells = {(c["topology"], c["load"], c["variant"]): c for c in self.cells()}
        out = {}
        for (topo, load, variant), cell in cells.items():
            if variant not in ("rwa_intwc", "rwa_intwc_p"):
                continue
            baseline = cells.get((topo, load, variant.replace("intwc", "wc")))
            if baseline is None or not baseline["wlu_avg"] or cell["wlu_avg"] is None:
                out[(topo, load, variant)] = None
            else:
                out[(topo, load, variant)] = 1.0 - cell["wlu_avg"] / baseline["wlu_avg"]
        return out


def _mean(values):
    return sum(values) / len(values) if values else None


def _cell_sort_key(key):
    topo, load, variant = key
    return (topo, _LOAD_ORDER.get(load, 9), _VARIANT_ORDER.get(variant, 9))


def _record_sort_key(rec):
    return (
        rec["topology"],
        _LOAD_ORDER.get(rec["load"], 9),
        _VARIANT_ORDER.get(rec["variant"], 9),
        rec["seed"],
    )


def run_cell(job: dict) -> dict:
    """Solve one (topology, load, variant, seed) cell and validate the result."""
    t = load_topology(job["topology"])
    if job.get("capacity"):
        t = t.with_capacity(job["capacity"])
    variant = job["variant"]
    m = generate_traffic(t, job["load"], variant.endswith("_p"), job["seed"])
    cfg = DesignConfig.standard(variant, t)
    opts = SolverOptions(time_limit=job["time_limit"])
    start = time.perf_counter()
    solution = solve_exact(t, m, cfg, opts)
    elapsed = time.perf_counter() - start
    if solution.lightpaths:
        report = check_solution(t, m, cfg, solution)
        if not report.passed:
            raise RwaError(
                f"solver returned an invalid solution for {job}: {report.to_json()['violations']}"
            )
    return {
        "topology": t.name,
        "load": job["load"],
        "variant": variant,
        "seed": job["seed"],
        "wavelength_count": solution.wavelength_count,
        "wavelength_link_usage": solution.wavelength_link_usage,
        "status": solution.status,
        "solve_time": round(elapsed, 3),
    }


def run_experiment(
    plan: ExperimentPlan,
    jobs: int = 1,
    records_path: str | Path | None = None,
    log=None,
) -> ExperimentResult:
    """Execute the plan, skipping cells already present in ``records_path``.

    A cell that raises is recorded with status ``error`` and does not abort
    the run. With ``jobs > 1`` cells run in separate processes; the persisted
    record order is canonical either way.
    """
    done: dict[tuple, dict] = {}
    if records_path is not None:
        records_path = Path(records_path)
        if records_path.exists():
            for rec in load_records(records_path):
                done[_record_key(rec)] = rec
    pending = [job for job in plan.jobs() if _job_key(job) not in done]

    def note(message):
        if log is not None:
            log(message)

    results = dict(done)
    if jobs <= 1:
        for job in pending:
            results[_job_key(job)] = _run_cell_guarded(job, note)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(run_cell, job): job for job in pending}
            for future in as_completed(futures):
                job = futures[future]
                try:
                    rec = future.result()
                except Exception as exc:  # propagated per cell, run continues
                    note(f"cell {_job_key(job)} failed: {exc}")
                    rec = _error_record(job)
                results[_job_key(rec)] = rec
                note(_format_record(rec))
    records = tuple(sorted(results.values(), key=_record_sort_key))
    if records_path is not None:
        save_records(records, records_path)
    return ExperimentResult(records)


def _run_cell_guarded(job, note):
    try:
        rec = run_cell(job)
    except Exception as exc:
        note(f"cell {_job_key(job)} failed: {exc}")
        return _error_record(job)
    note(_format_record(rec))
    return rec


def _error_record(job):
    return {
        "topology": job["topology"],
        "load": job["load"],
        "variant": job["variant"],
        "seed": job["seed"],
        "wavelength_count": 0,
        "wavelength_link_usage": 0,
        "status": "error",
        "solve_time": 0.0,
    }


def _format_record(rec):
    return (
        f"{rec['topology']} {rec['load']} {rec['variant']} seed={rec['seed']}: "
        f"{rec['status']} WC={rec['wavelength_count']} WLU={rec['wavelength_link_usage']} "
        f"({rec['solve_time']}s)"
    )


def _job_key(job):
    return (job["topology"], job["load"], job["variant"], job["seed"])


_record_key = _job_key


def load_records(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def save_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({k: rec[k] for k in RECORD_FIELDS}) + "\n")


def render_table(result: ExperimentResult, format: str) -> str:
    """CSV or Markdown comparison table in the four-design layout."""
    if format not in ("csv", "markdown"):
        raise ValidationError(f"unsupported table format {format!r}; expected csv or markdown")
    savings = result.savings()
    rows = []
    for cell in result.cells():
        key = (cell["topology"], cell["load"], cell["variant"])
        saving = savings.get(key)
        rows.append(
            [
                cell["topology"],
                cell["load"],
                cell["variant"],
                _fmt(cell["wc_avg"]),
                _fmt(cell["wlu_avg"]),
                "" if saving is None else f"{100 * saving:.1f}%",
                f"{cell['optimal']}/{cell['seeds']}",
            ]
        )
    header = ["topology", "load", "variant", "wc_avg", "wlu_avg", "wlu_saving", "optimal"]
    if format == "csv":
        lines = [",".join(header)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
    def md_row(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    lines = [md_row(header), md_row(["-" * w for w in widths])]
    lines.extend(md_row(row) for row in rows)
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    return "" if value is None else f"{value:.2f}"
