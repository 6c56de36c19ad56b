"""Command-line entry point: ``ltelab <command> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .detector import DetectionConfig, KnnModel, TrainingSet, generate_samples, run_detection_experiment
from .grid import CellConfig, build_dl_grid, build_ul_grid, occupancy_table
from .harness import DENSE_ISR_POINTS_DB, RunConfig, export, grids_for, run_scenario, sweep, table2
from .interference import InterferenceScenario, ScenarioKind, footprint_for_scenario, sync_align, perfect_sync
from .iq import footprint_re_values, grid_re_values, standard_sample_rate, synthesize_iq, write_iq


def _run_config(args) -> RunConfig:
    config = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "mode", None):
        overrides["footprint_mode"] = args.mode
    if getattr(args, "workers", None):
        overrides["workers"] = args.workers
    return dataclasses.replace(config, **overrides) if overrides else config


def cmd_grid_inspect(args):
    cell = CellConfig(bandwidth_rb=args.rb, cell_id=args.cell_id, cfi=args.cfi)
    grid = build_dl_grid(cell) if args.direction == "DL" else build_ul_grid(cell)
    if args.json:
        print(grid.to_json())
        return
    print(f"{args.direction} grid, {args.rb} RB, cell {args.cell_id}, CFI {args.cfi}: "
          f"{grid.n_total} REs per frame")
    print(f"{'channel':<8} {'REs':>8} {'fraction':>10}")
    for name, (count, frac) in occupancy_table(grid).items():
        print(f"{name:<8} {count:>8d} {frac:>10.5f}")


def cmd_scenario_run(args):
    config = _run_config(args)
    scenario = InterferenceScenario.of(args.scenario, args.isr_re, timing_offset=args.timing_offset)
    report, metrics = run_scenario(config, scenario)
    doc = {"report": report.to_dict(), "metrics": None if metrics is None else metrics.to_dict()}
    if not args.verbose:
        doc["report"].pop("subframes")
    print(json.dumps(doc, indent=2))


def cmd_sweep(args):
    config = _run_config(args)
    if args.dense:
        config = dataclasses.replace(config, isr_re_sweep_db=DENSE_ISR_POINTS_DB)
    if args.stamp:
        config = dataclasses.replace(config, timestamp=datetime.now(timezone.utc).isoformat())
    records = sweep(config)
    out = args.out or config.output_dir
    if out:
        for fmt, path in export(records, out, config).items():
            print(f"wrote {fmt}: {path}", file=sys.stderr)
    print(f"{'id':>2} {'scenario':<24} {'ISR_RE':>7} {'ISR_F':>8} {'DL Mbps':>8} {'UL Mbps':>8} sync_lost")
    for r in records:
        isr_f = "" if r.metrics is None else f"{r.metrics.isr_f_db:8.2f}"
        print(f"{int(r.scenario.kind):>2} {r.scenario.label:<24} {r.isr_re_db:7.1f} {isr_f:>8} "
              f"{r.report.dl_mbps:8.3f} {r.report.ul_mbps:8.3f} {r.report.sync_lost}")
    print("\nfraction and ISR_F - ISR_RE per scenario:")
    for row in table2(config):
        print(f"{row['label']:<24} {row['fraction']:8.4%} {row['isr_f_minus_isr_re_db']:8.2f} dB")


def cmd_iq_export(args):
    config = _run_config(args)
    scenario = InterferenceScenario.of(args.scenario, args.isr_re)
    dl, ul = grids_for(config.cell, config.pucch_fraction)
    grid = ul if scenario.direction.value == "UL" else dl
    rate = args.sample_rate or standard_sample_rate(config.cell.bandwidth_rb)
    if scenario.kind is ScenarioKind.NONE:
        jam = np.zeros(grid.shape, dtype=complex)
    else:
        if scenario.synchronous:
            fp = sync_align(scenario, perfect_sync(config.cell.cell_id), grid,
                            mode=config.footprint_mode, paper_fraction=config.paper_fraction)
        else:
            fp = footprint_for_scenario(scenario, grid, mode=config.footprint_mode,
                                        paper_fraction=config.paper_fraction)
        jam = footprint_re_values(fp, args.isr_re, seed=config.seed)
    if args.signal == "interference":
        values = jam
    elif args.signal == "cell":
        values = grid_re_values(grid, seed=config.seed)
    else:
        values = grid_re_values(grid, seed=config.seed) + jam
    samples = synthesize_iq(values, frames=args.frames, sample_rate=rate)
    write_iq(args.out, samples, {
        "sample_rate": rate,
        "frames": args.frames,
        "scenario": scenario.to_dict(),
        "isr_re_db": args.isr_re,
        "signal": args.signal,
        "bandwidth_rb": config.cell.bandwidth_rb,
        "version": __version__,
    })
    print(f"wrote {samples.size} samples to {args.out}", file=sys.stderr)


def _detection_config(args) -> DetectionConfig:
    fields = {f.name for f in dataclasses.fields(DetectionConfig)}
    kwargs = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    return DetectionConfig(**kwargs)


def cmd_detect_train(args):
    samples = generate_samples(_detection_config(args))
    text = samples.to_csv(args.out)
    if not args.out:
        sys.stdout.write(text)


def cmd_detect_classify(args):
    training = TrainingSet.from_csv(args.train)
    model = KnnModel.fit(training, k=args.k or 3, metric=args.metric or "euclidean",
                         normalize=not args.raw)
    for point in args.point:
        x = [float(v) for v in point.split(",")]
        print(f"{point} -> {model.classify(x)}")


def cmd_detect_experiment(args):
    report = run_detection_experiment(_detection_config(args))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json())
    print(report.to_json(), end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ltelab", description=__doc__)
    p.add_argument("--version", action="version", version=f"ltelab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    grid = sub.add_parser("grid", help="resource grid tools").add_subparsers(dest="action", required=True)
    gi = grid.add_parser("inspect", help="per-channel occupancy table")
    gi.add_argument("--rb", type=int, default=50)
    gi.add_argument("--cell-id", type=int, default=0)
    gi.add_argument("--cfi", type=int, default=2)
    gi.add_argument("--direction", choices=("DL", "UL"), default="DL")
    gi.add_argument("--json", action="store_true", help="print the serialized grid instead")
    gi.set_defaults(func=cmd_grid_inspect)

    def common(sp):
        sp.add_argument("--config", help="RunConfig JSON file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--mode", choices=("paper-fraction", "grid-exact"),
                        help="PSS/SSS footprint mode")

    scen = sub.add_parser("scenario", help="single scenario").add_subparsers(dest="action", required=True)
    sr = scen.add_parser("run", help="evaluate one scenario at one ISR_RE")
    sr.add_argument("--scenario", type=int, required=True, choices=range(7), metavar="N")
    sr.add_argument("--isr-re", type=float, default=0.0, metavar="DB")
    sr.add_argument("--timing-offset", type=int, default=0, metavar="SAMPLES")
    sr.add_argument("--verbose", action="store_true", help="include per-subframe outcomes")
    common(sr)
    sr.set_defaults(func=cmd_scenario_run)

    sw = sub.add_parser("sweep", help="all scenarios x ISR points")
    common(sw)
    sw.add_argument("--out", help="directory for results.csv/results.json/plotdata.json")
    sw.add_argument("--dense", action="store_true", help="21 points from -10 to 10 dB")
    sw.add_argument("--workers", type=int)
    sw.add_argument("--stamp", action="store_true", help="record the wall-clock time in outputs")
    sw.set_defaults(func=cmd_sweep)

    iq = sub.add_parser("iq", help="baseband IQ").add_subparsers(dest="action", required=True)
    ie = iq.add_parser("export", help="write cf32 IQ plus a JSON sidecar")
    ie.add_argument("--scenario", type=int, required=True, choices=range(7), metavar="N")
    ie.add_argument("--frames", type=int, default=1)
    ie.add_argument("--out", required=True)
    ie.add_argument("--isr-re", type=float, default=0.0, metavar="DB")
    ie.add_argument("--sample-rate", type=float)
    ie.add_argument("--signal", choices=("interference", "cell", "combined"), default="interference")
    common(ie)
    ie.set_defaults(func=cmd_iq_export)

    det = sub.add_parser("detect", help="k-NN interference detection").add_subparsers(dest="action", required=True)

    def det_common(sp):
        sp.add_argument("--isr-re-db", type=float)
        sp.add_argument("--n-per-class", type=int)
        sp.add_argument("--noise-sd", type=float)
        sp.add_argument("--seed", type=int)

    dt = det.add_parser("train", help="write a synthetic PM-counter training set as CSV")
    det_common(dt)
    dt.add_argument("--out")
    dt.set_defaults(func=cmd_detect_train)

    dc = det.add_parser("classify", help="classify PM-counter points against a training CSV")
    dc.add_argument("--train", required=True)
    dc.add_argument("--point", action="append", required=True, help="comma-separated features")
    dc.add_argument("--k", type=int)
    dc.add_argument("--metric", choices=("euclidean", "manhattan"))
    dc.add_argument("--raw", action="store_true", help="skip z-score normalization")
    dc.set_defaults(func=cmd_detect_classify)

    dx = det.add_parser("experiment", help="train/hold-out detection experiment")
    det_common(dx)
    dx.add_argument("--k", type=int)
    dx.add_argument("--metric", choices=("euclidean", "manhattan"))
    dx.add_argument("--displaced-fraction", type=float)
    dx.add_argument("--out")
    dx.set_defaults(func=cmd_detect_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"ltelab: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
