"""Scenario catalog, ISR sweeps and result export."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .grid import CellConfig, Direction, ResourceGrid, build_dl_grid, build_ul_grid
from .interference import (
    PAPER_SYNC_FRACTION,
    FootprintMode,
    InterferenceScenario,
    IsrMetrics,
    ScenarioKind,
    apply_interference,
    footprint_for_scenario,
    isr_metrics,
    perfect_sync,
    sync_align,
)
from .linkmodel import LinkConfig, ThroughputReport, estimate_throughput

PAPER_ISR_POINTS_DB = (0.0, 5.0)
DENSE_ISR_POINTS_DB = tuple(float(v) for v in np.linspace(-10.0, 10.0, 21))
CSV_COLUMNS = ("scenario", "direction", "isr_re_db", "isr_f_db", "dl_mbps", "ul_mbps",
               "degradation", "sync_lost")


def scenario_catalog() -> list[InterferenceScenario]:
    """The seven interference test cases, in table order."""
    return [InterferenceScenario.of(kind) for kind in ScenarioKind]


@dataclass(frozen=True)
class RunConfig:
    cell: CellConfig = field(default_factory=CellConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    scenarios: tuple = field(default_factory=lambda: tuple(scenario_catalog()))
    isr_re_sweep_db: tuple = PAPER_ISR_POINTS_DB
    seed: int = 0
    footprint_mode: str = FootprintMode.PAPER_FRACTION.value
    paper_fraction: float = PAPER_SYNC_FRACTION
    pucch_fraction: float = 0.25
    sync_mode: str = "perfect"
    timestamp: str | None = None
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "isr_re_sweep_db", tuple(float(v) for v in self.isr_re_sweep_db))
        if not self.scenarios:
            raise ValueError("RunConfig needs at least one scenario")
        if not all(np.isfinite(self.isr_re_sweep_db)):
            raise ValueError("ISR sweep points must be finite")
        FootprintMode(self.footprint_mode)
        if self.sync_mode not in ("perfect", "acquire"):
            raise ValueError(f"sync_mode must be 'perfect' or 'acquire', got {self.sync_mode!r}")

    def to_dict(self) -> dict:
        return {
            "cell": self.cell.to_dict(),
            "link": self.link.to_dict(),
            "scenarios": [s.to_dict() for s in self.scenarios],
            "isr_re_sweep_db": list(self.isr_re_sweep_db),
            "seed": self.seed,
            "footprint_mode": self.footprint_mode,
            "paper_fraction": self.paper_fraction,
            "pucch_fraction": self.pucch_fraction,
            "sync_mode": self.sync_mode,
            "timestamp": self.timestamp,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "cell" in d:
            d["cell"] = CellConfig.from_dict(d["cell"])
        if "link" in d:
            d["link"] = LinkConfig.from_dict(d["link"])
        if "scenarios" in d:
            d["scenarios"] = [InterferenceScenario.from_dict(s) for s in d["scenarios"]]
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@lru_cache(maxsize=32)
def grids_for(cell: CellConfig, pucch_fraction: float = 0.25) -> tuple[ResourceGrid, ResourceGrid]:
    return build_dl_grid(cell), build_ul_grid(cell, pucch_fraction)


def _acquired_sync(config: RunConfig, dl: ResourceGrid):
    from .iq import acquire_sync, synthesize_iq

    samples = synthesize_iq(dl, frames=2, seed=config.seed)
    return acquire_sync(samples, config.cell.bandwidth_rb)


def _footprint(config: RunConfig, scenario: InterferenceScenario, grid: ResourceGrid):
    if scenario.synchronous:
        if config.sync_mode == "perfect":
            sync = perfect_sync(config.cell.cell_id)
        else:
            sync = _acquired_sync(config, grid)
        return sync_align(scenario, sync, grid, mode=config.footprint_mode,
                          paper_fraction=config.paper_fraction)
    return footprint_for_scenario(scenario, grid, mode=config.footprint_mode,
                                  paper_fraction=config.paper_fraction)


def _blend(jammed: ThroughputReport, clean: ThroughputReport, duty: float) -> ThroughputReport:
    return replace(jammed,
                   dl_mbps=duty * jammed.dl_mbps + (1 - duty) * clean.dl_mbps,
                   ul_mbps=duty * jammed.ul_mbps + (1 - duty) * clean.ul_mbps,
                   pucch_failure_rate=duty * jammed.pucch_failure_rate
                   + (1 - duty) * clean.pucch_failure_rate)


def run_scenario(config: RunConfig, scenario: InterferenceScenario,
                 isr_re_db: float | None = None) -> tuple[ThroughputReport, IsrMetrics | None]:
    """Grid -> footprint -> interference map -> link model for one ISR point.

    Returns the throughput report and the ISR metrics of the footprint that
    was actually used (``None`` for the no-interference case). Asynchronous
    scenarios with ``duty_cycle < 1`` are averaged with the clean link.
    """
    if isr_re_db is not None:
        scenario = scenario.with_isr(isr_re_db)
    dl, ul = grids_for(config.cell, config.pucch_fraction)
    if scenario.kind is ScenarioKind.NONE:
        return estimate_throughput(dl, None, ul, None, config.link, scenario), None

    maps = {Direction.DL: None, Direction.UL: None}
    fractions = []
    for direction, grid in ((Direction.DL, dl), (Direction.UL, ul)):
        if scenario.direction.covers(direction):
            fp = _footprint(config, scenario, grid)
            maps[direction] = apply_interference(grid, fp, scenario.isr_re_db)
            fractions.append(fp.fraction)
    report = estimate_throughput(dl, maps[Direction.DL], ul, maps[Direction.UL],
                                 config.link, scenario)
    if scenario.duty_cycle < 1:
        clean = estimate_throughput(dl, None, ul, None, config.link, scenario)
        report = _blend(report, clean, scenario.duty_cycle)
    # both directions share one frame lattice, so their fractions agree
    metrics = isr_metrics_from_fraction(scenario.isr_re_db, fractions[0])
    return report, metrics


def isr_metrics_from_fraction(isr_re_db: float, fraction: float) -> IsrMetrics:
    return IsrMetrics.from_fraction(isr_re_db, fraction)


@dataclass(frozen=True)
class ExperimentRecord:
    config: dict
    scenario: InterferenceScenario
    isr_re_db: float
    report: ThroughputReport
    metrics: IsrMetrics | None
    timestamp: str | None = None
    version: str = __version__

    def csv_row(self) -> dict:
        return {
            "scenario": int(self.scenario.kind),
            "direction": self.scenario.direction.value,
            "isr_re_db": self.isr_re_db,
            "isr_f_db": "" if self.metrics is None else self.metrics.isr_f_db,
            "dl_mbps": self.report.dl_mbps,
            "ul_mbps": self.report.ul_mbps,
            "degradation": self.report.degradation_fraction,
            "sync_lost": self.report.sync_lost,
        }

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "isr_re_db": self.isr_re_db,
            "report": self.report.to_dict(),
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "timestamp": self.timestamp,
            "version": self.version,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        m = d["metrics"]
        return cls(
            config=d["config"],
            scenario=InterferenceScenario.from_dict(d["scenario"]),
            isr_re_db=d["isr_re_db"],
            report=ThroughputReport.from_dict(d["report"]),
            metrics=None if m is None else IsrMetrics(**m),
            timestamp=d["timestamp"],
            version=d["version"],
        )


def sweep_points(config: RunConfig) -> list[tuple[InterferenceScenario, float]]:
    """(scenario, ISR) pairs in output order; the clean case runs once."""
    points = []
    for scenario in config.scenarios:
        if scenario.kind is ScenarioKind.NONE:
            points.append((scenario, 0.0))
        else:
            points.extend((scenario, isr) for isr in config.isr_re_sweep_db)
    return points


def sweep(config: RunConfig = RunConfig()) -> list[ExperimentRecord]:
    """Evaluate every scenario at every sweep point.

    With ``workers > 1`` points are evaluated on a thread pool; the returned
    order is always that of :func:`sweep_points`.
    """
    points = sweep_points(config)
    echo = config.to_dict()

    def evaluate(point):
        scenario, isr = point
        report, metrics = run_scenario(config, scenario, isr)
        return ExperimentRecord(echo, scenario.with_isr(isr), isr, report, metrics,
                                timestamp=config.timestamp)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(evaluate, points))
    return [evaluate(p) for p in points]


def table2(config: RunConfig = RunConfig()) -> list[dict]:
    """Footprint fraction and ISR_F - ISR_RE (dB) for every interfering scenario."""
    dl, ul = grids_for(config.cell, config.pucch_fraction)
    rows = []
    for scenario in config.scenarios:
        if scenario.kind is ScenarioKind.NONE:
            continue
        grid = dl if scenario.direction.covers(Direction.DL) else ul
        fp = _footprint(config, scenario, grid)
        m = isr_metrics(fp, 0.0)
        rows.append({"scenario": int(scenario.kind), "label": scenario.label,
                     "fraction": m.fraction, "isr_f_minus_isr_re_db": m.isr_f_db})
    return rows


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def records_to_json(records, config: RunConfig | None = None) -> str:
    doc = {
        "version": __version__,
        "config": None if config is None else config.to_dict(),
        "table2": None if config is None else table2(config),
        "records": [r.to_dict() for r in records],
    }
    return json.dumps(doc, indent=2) + "\n"


def records_from_json(text: str) -> list[ExperimentRecord]:
    return [ExperimentRecord.from_dict(d) for d in json.loads(text)["records"]]


def plotdata(records) -> dict:
    """DL/UL throughput series grouped by scenario, one bar group per ISR point."""
    out: dict[str, dict] = {}
    for r in records:
        key = f"{int(r.scenario.kind)}:{r.scenario.label}"
        series = out.setdefault(key, {"isr_re_db": [], "dl_mbps": [], "ul_mbps": []})
        series["isr_re_db"].append(r.isr_re_db)
        series["dl_mbps"].append(r.report.dl_mbps)
        series["ul_mbps"].append(r.report.ul_mbps)
    return out


def export(records, out_dir, config: RunConfig | None = None,
           formats=("csv", "json", "plotdata")) -> dict[str, Path]:
    """Write the sweep as ``results.csv``, ``results.json`` and ``plotdata.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for fmt in formats:
        if fmt == "csv":
            path, text = out / "results.csv", records_to_csv(records)
        elif fmt == "json":
            path, text = out / "results.json", records_to_json(records, config)
        elif fmt == "plotdata":
            path, text = out / "plotdata.json", json.dumps(plotdata(records), indent=2) + "\n"
        else:
            raise ValueError(f"unknown export format {fmt!r}")
        path.write_text(text)
        written[fmt] = path
    return written
