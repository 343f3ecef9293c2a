"""Command-line front end.

    beliefnet run --config ba.yaml --seed 7 --out results/ba
    beliefnet experiment 1a --scale desk --out results/fig1a
    beliefnet analyze results/ba/network.txt --metrics histogram,fit,diameter

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import analysis
from .config import load_config
from .engine import TRACE_COLUMNS, run_simulation, trace_rows
from .experiments import FIGURE_IDS, SCALES, ExperimentError, default_jobs, preset, run_experiment
from .network import ConfigurationError, DumpFormatError, SignedNetwork

log = logging.getLogger("beliefnet")

METRICS = ("histogram", "fit", "diameter", "components")


class UsageError(Exception):
    pass


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_run(args) -> int:
    config = load_config(args.config, args.set)
    if args.seed is not None:
        config = config.replace(seed=args.seed).validate()
    out = Path(args.out)
    t0 = time.perf_counter()
    result = run_simulation(config)
    net = result.network
    out.mkdir(parents=True, exist_ok=True)
    (out / "network.txt").write_text(net.to_text(), encoding="utf-8")
    _write_csv(out / "trace.csv", TRACE_COLUMNS, trace_rows(result.reports))
    if net.number_of_vertices:
        _write_csv(out / "histogram.csv", ("k", "p_k"), analysis.degree_distribution(net).rows())
    else:
        _write_csv(out / "histogram.csv", ("k", "p_k"), [])
    meta = {
        "config": config.to_dict(),
        "seed": config.seed,
        "config_path": str(args.config),
        "assignments": list(args.set),
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "n_vertices": net.number_of_vertices,
        "n_edges": net.number_of_edges,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %s (%d vertices, %d edges)", out, net.number_of_vertices, net.number_of_edges)
    return 0


def cmd_experiment(args) -> int:
    if args.figure not in FIGURE_IDS:
        raise UsageError(f"unknown figure id {args.figure!r}; valid ids: {', '.join(FIGURE_IDS)}")
    spec = preset(args.figure, args.scale)
    if args.runs is not None:
        if args.runs < 1:
            raise UsageError("--runs must be positive")
        spec = spec.with_runs(args.runs)
    if args.seed is not None:
        spec.seed = args.seed
    out = Path(args.out)
    dump_dir = out / "networks" if args.dump else None
    data = run_experiment(spec, jobs=args.jobs or default_jobs(), dump_dir=dump_dir)
    data.write(out)
    log.info("wrote %s in %.1fs", out, data.meta["wall_time_s"])
    return 0


def _parse_metrics(text: str) -> list[str]:
    metrics = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in metrics if m not in METRICS]
    if bad or not metrics:
        raise UsageError(f"unknown metrics {bad}; choose from {', '.join(METRICS)}")
    return metrics


def cmd_analyze(args) -> int:
    metrics = _parse_metrics(args.metrics)
    try:
        text = Path(args.dump).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.dump}: {exc.strerror}") from None
    net = SignedNetwork.from_text(text)
    report: dict = {"n_vertices": net.number_of_vertices, "n_edges": net.number_of_edges}
    hist = analysis.degree_distribution(net) if net.number_of_vertices else None
    if "histogram" in metrics:
        report["histogram"] = [] if hist is None else [{"k": k, "p_k": p} for k, p in hist.rows()]
    if "fit" in metrics:
        try:
            report["fit"] = analysis.fit_power_law(hist, args.k_min, args.k_max).to_dict() if hist else None
        except analysis.InsufficientDataError as exc:
            report["fit"] = {"error": str(exc)}
    if "diameter" in metrics:
        try:
            import random

            report["diameter"] = analysis.diameter(net, args.sample_pairs, random.Random(args.seed))
        except ValueError as exc:
            report["diameter"] = {"error": str(exc)}
    if "components" in metrics:
        report["component_sizes"] = analysis.component_sizes(net)
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beliefnet", description="Signed belief-network simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one simulation from a config file")
    r.add_argument("--config", required=True, help="YAML/JSON config document")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key (repeatable)")
    r.add_argument("--seed", type=int, help="replaces the config seed")
    r.add_argument("--out", default="run-output", help="output directory")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("experiment", help="run a figure preset")
    e.add_argument("figure", help=f"one of {', '.join(FIGURE_IDS)}")
    e.add_argument("--scale", choices=SCALES, default="desk")
    e.add_argument("--runs", type=int, help="override the preset's run count")
    e.add_argument("--seed", type=int, help="master seed (run r uses seed + r)")
    e.add_argument("--jobs", type=int, default=None, help="worker processes (default: available cores)")
    e.add_argument("--out", default=None, help="output directory (default: fig-<id>)")
    e.add_argument("--dump", action="store_true", help="also write every final network")
    e.set_defaults(func=cmd_experiment)

    a = sub.add_parser("analyze", help="measure a dumped network")
    a.add_argument("dump", help="network dump file")
    a.add_argument("--metrics", default="histogram,fit,diameter,components")
    a.add_argument("--k-min", type=int, default=None)
    a.add_argument("--k-max", type=int, default=None)
    a.add_argument("--sample-pairs", type=int, default=None)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "out", "x") is None:
        args.out = f"fig-{args.figure}"
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, DumpFormatError) as exc:
        print(f"beliefnet: error: {exc}", file=sys.stderr)
        return 2
    except ExperimentError as exc:
        print(f"beliefnet: runtime error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"beliefnet: runtime error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
