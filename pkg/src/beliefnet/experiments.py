"""Figure presets and the ensemble runner.

Each preset bundles one or more base configurations, a sweep, a run count and
a master seed. ``run_experiment`` executes the independent runs (optionally in
worker processes), reduces them in seed order and returns plot-ready tables.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import analysis
from .config import RND, Override, SimConfig
from .engine import run_simulation
from .network import SignedNetwork

FIGURE_IDS = ("1a", "1b-type1", "1b-type2", "2", "3", "4", "5", "6", "7")
SCALES = ("full", "desk")

# scale-free settings: plain preferential attachment and two general variants
BARABASI = SimConfig(h=1.0, u=2, e=1, f_forget=0, n_points=10000, fitness=1.0, sign_counts=(1.0, 0.0, 0.0))
TYPE1 = SimConfig(h=0.5, u=2, e=10, f_forget=1, n_points=10000, fitness=1.0, sign_counts=(1.0, 1.0, 1.0))
TYPE2 = SimConfig(h=0.5, u=2, e=10, f_forget=1, n_points=10000, fitness=RND, sign_counts=RND)
# star settings: ordinary points share the special point's H, U, E and F
STAR = SimConfig(h=0.5, u=1, e=10, f_forget=1, n_points=1000, fitness=RND, sign_counts=RND)
STAR_FITNESS_POINT = Override(0, fitness=3.0, sign_counts=(1.0, 1.0, 1.0), e=10)
STAR_TIME_POINT = Override(999, fitness=1.0, sign_counts=RND, e=1000)
# learning: base network, forgetting of new inputs, total time for the added inputs
LEARN_BASE = SimConfig(h=0.5, u=1, e=2, f_forget=0, n_points=1000, fitness=1.0, sign_counts=(1.0, 0.0, 0.0))
LEARN_FORGET = 10
LEARN_TOTAL_TIME = 1000
# attacker of the size experiment
ATTACKER = Override(0, fitness=1.0, e=100)


class UnknownFigureError(KeyError):
    def __str__(self) -> str:
        return f"unknown figure id {self.args[0]!r}; valid ids: {', '.join(FIGURE_IDS)}"


class ExperimentError(RuntimeError):
    def __init__(self, run_index: int, cause: BaseException):
        super().__init__(f"run {run_index} failed: {cause!r}")
        self.run_index = run_index


@dataclass
class ExperimentSpec:
    figure_id: str
    scale: str
    runs: int
    configs: dict[str, SimConfig]
    sweep: tuple = ()
    seed: int = 0
    sample_pairs: int = 2000

    def with_runs(self, runs: int) -> "ExperimentSpec":
        return ExperimentSpec(self.figure_id, self.scale, runs, self.configs, self.sweep, self.seed, self.sample_pairs)

    def to_dict(self) -> dict:
        return {
            "figure_id": self.figure_id,
            "scale": self.scale,
            "runs": self.runs,
            "seed": self.seed,
            "sweep": list(self.sweep),
            "sample_pairs": self.sample_pairs,
            "configs": {k: c.to_dict() for k, c in self.configs.items()},
        }


@dataclass
class FigureData:
    figure_id: str
    columns: tuple[str, ...]
    rows: list[tuple]
    fit: dict | None = None
    summary: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def write(self, out: str | Path) -> None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "data.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            w.writerows(self.rows)
        if self.fit is not None:
            (out / "fit.json").write_text(json.dumps(self.fit, indent=2, default=_json_default) + "\n", encoding="utf-8")
        meta = dict(self.meta)
        meta["summary"] = self.summary
        (out / "meta.json").write_text(json.dumps(meta, indent=2, default=_json_default) + "\n", encoding="utf-8")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def derive_seed(*parts: int | str) -> int:
    digest = hashlib.blake2b(":".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def preset(figure_id: str, scale: str = "full") -> ExperimentSpec:
    if figure_id not in FIGURE_IDS:
        raise UnknownFigureError(figure_id)
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")
    desk = scale == "desk"
    if figure_id == "1a":
        return ExperimentSpec(figure_id, scale, 20 if desk else 200, {"ba": BARABASI})
    if figure_id == "1b-type1":
        return ExperimentSpec(figure_id, scale, 20 if desk else 200, {"type1": TYPE1})
    if figure_id == "1b-type2":
        return ExperimentSpec(figure_id, scale, 20 if desk else 200, {"type2": TYPE2})
    if figure_id == "2":
        sizes = (100, 200, 500, 1000, 2000) if desk else (100, 200, 500, 1000, 2000, 5000, 10000)
        return ExperimentSpec(figure_id, scale, 10 if desk else 100, {"ba": BARABASI, "type2": TYPE2}, sizes)
    if figure_id == "3":
        # the first and the 32nd point, as 0-based ordinals
        return ExperimentSpec(figure_id, scale, 200 if desk else 10000, {"star": STAR}, (0, 31))
    if figure_id == "4":
        n = 2000 if desk else 10000
        return ExperimentSpec(
            figure_id, scale, 200, {"ba": BARABASI.replace(n_points=n), "type2": TYPE2.replace(n_points=n)}
        )
    if figure_id == "5":
        cfg = STAR.replace(overrides=(STAR_TIME_POINT,))
        return ExperimentSpec(figure_id, scale, 200 if desk else 10000, {"star": cfg})
    if figure_id == "6":
        return ExperimentSpec(figure_id, scale, 50 if desk else 500, {"type2": TYPE2}, (100, 300, 1000, 3000))
    # figure 7
    return ExperimentSpec(
        figure_id,
        scale,
        100 if desk else 1000,
        {"base": LEARN_BASE, "input": LEARN_BASE.replace(f_forget=LEARN_FORGET)},
        tuple(range(10, 101, 10)),
    )


# -- per-run workers (module level so they pickle) ----------------------------


def _hist_run(cfg: SimConfig, seed: int, special: int | None = None, dump: bool = False):
    net = run_simulation(cfg.replace(seed=seed)).network
    deg = net.degree(special) if special is not None and special in net else None
    return analysis.degree_distribution(net), deg, net.to_text() if dump else None


def _diameter_run(cfg: SimConfig, seed: int, sizes: Sequence[int], sample_pairs: int):
    sizes = sorted(sizes)
    out = []
    probe_rng = random.Random(derive_seed(seed, "pairs"))

    def on_cycle(net: SignedNetwork, rep) -> None:
        n = rep.cycle + 1
        if n in sizes:
            d = analysis.diameter(net, sample_pairs, probe_rng)
            out.append((n, d, net.number_of_vertices))

    run_simulation(cfg.replace(seed=seed, n_points=max(sizes)), on_cycle=on_cycle)
    return out


def _ordinal_run(cfg: SimConfig, seed: int):
    net = run_simulation(cfg.replace(seed=seed)).network
    deg = np.full(cfg.n_points, -1, dtype=np.int64)
    for v in net.vertices():
        deg[net.attrs(v).ordinal] = net.degree(v)
    return deg


def _attacker_run(cfg: SimConfig, seed: int, size: int):
    attacker = Override(size, fitness=ATTACKER.fitness, e=ATTACKER.e)
    net = run_simulation(cfg.replace(seed=seed, n_points=size + 1, overrides=(attacker,))).network
    others = [net.degree(v) for v in net.vertices() if v != size]
    att = net.degree(size) if size in net else 0
    return att, max(others, default=0)


def build_learning_base(cfg: SimConfig, seed: int) -> tuple[SignedNetwork, random.Random]:
    rng = random.Random(seed)
    net = run_simulation(cfg.replace(seed=seed), rng=rng).network
    return net, rng


def _learning_run(base_cfg: SimConfig, input_cfg: SimConfig, seed: int, sweep: Sequence[int]):
    base, _ = build_learning_base(base_cfg, seed)
    first = base_cfg.n_points
    finals = []
    for added in sweep:
        net = base.copy()
        cfg = input_cfg.replace(e=LEARN_TOTAL_TIME // added, n_points=added, first_ordinal=first, seed=seed)
        run_simulation(cfg, network=net, rng=random.Random(derive_seed(seed, "learn", added)))
        finals.append(net.number_of_vertices)
    return base.number_of_vertices, base.number_of_edges, finals


# -- execution ---------------------------------------------------------------


def _call(job):
    fn, args = job
    return fn(*args)


def _execute(jobs: list[tuple[Callable, tuple]], n_jobs: int) -> list:
    if n_jobs <= 1 or len(jobs) <= 1:
        out = []
        for k, job in enumerate(jobs):
            try:
                out.append(_call(job))
            except Exception as exc:  # noqa: BLE001 - re-raised with the run index
                raise ExperimentError(k, exc) from exc
        return out
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        futures = [pool.submit(_call, job) for job in jobs]
        out = []
        for k, fut in enumerate(futures):
            try:
                out.append(fut.result())
            except Exception as exc:  # noqa: BLE001
                raise ExperimentError(k, exc) from exc
        return out


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def _hist_rows(hist: analysis.DegreeHistogram, prefix: tuple = ()) -> list[tuple]:
    return [prefix + (k, p) for k, p in hist.rows()]


def _mean_std(xs: Sequence[float]) -> tuple[float, float]:
    xs = [float(x) for x in xs]
    if not xs:
        return float("nan"), float("nan")
    return statistics.fmean(xs), statistics.stdev(xs) if len(xs) > 1 else 0.0


def _star_summary(hist: analysis.DegreeHistogram, special_degrees: list[int | None]) -> dict:
    peak = analysis.find_peak(hist)
    bulk = analysis.split_peak(hist, peak)
    try:
        fit = analysis.fit_power_law(bulk).to_dict()
    except analysis.InsufficientDataError:
        fit = None
    alive = [d for d in special_degrees if d is not None]
    return {
        "fit": fit,
        "peak": None
        if peak is None
        else {
            "bulk_max": peak.bulk_max,
            "peak_min": peak.peak_min,
            "peak_max": peak.peak_max,
            "mass": peak.mass,
            "mean_k": peak.mean_k,
            "gap_decades": peak.gap_decades,
        },
        "special_mean_degree": statistics.fmean(alive) if alive else float("nan"),
        "special_survival": len(alive) / len(special_degrees),
        "special_degrees": special_degrees,
    }


def run_experiment(spec: ExperimentSpec, jobs: int = 1, dump_dir: str | Path | None = None) -> FigureData:
    """Run every seed of ``spec`` and reduce to the figure's table.

    Runs use seeds ``spec.seed + r``; results are reduced in that order, so
    the output does not depend on ``jobs``.
    """
    t0 = time.perf_counter()
    fid = spec.figure_id
    seeds = [spec.seed + r for r in range(spec.runs)]
    summary: dict[str, Any] = {}
    fit = None
    dump = dump_dir is not None

    if fid in ("1a", "1b-type1", "1b-type2"):
        (cfg,) = spec.configs.values()
        results = _execute([(_hist_run, (cfg, s, None, dump)) for s in seeds], jobs)
        _dump(dump_dir, [(f"run_{r:05d}", res[2]) for r, res in enumerate(results)])
        hist = analysis.average_histograms([res[0] for res in results])
        columns, rows = ("k", "p_k"), _hist_rows(hist)
        fit = analysis.fit_power_law(hist).to_dict()
        summary["mean_vertices"] = hist.n_vertices

    elif fid == "2":
        sizes = spec.sweep
        jobs_list = [(_diameter_run, (cfg, s, sizes, spec.sample_pairs)) for cfg in spec.configs.values() for s in seeds]
        results = _execute(jobs_list, jobs)
        columns = ("series", "n", "mean_distance", "std_distance", "mean_vertices", "runs")
        rows = []
        per = len(seeds)
        for j, name in enumerate(spec.configs):
            chunk = results[j * per : (j + 1) * per]
            for n in sizes:
                ds = [d for res in chunk for (m, d, _) in res if m == n]
                vs = [v for res in chunk for (m, _, v) in res if m == n]
                mean, std = _mean_std(ds)
                rows.append((name, n, mean, std, statistics.fmean(vs), len(ds)))

    elif fid == "3":
        (cfg,) = spec.configs.values()
        columns, rows = ("special_ordinal", "k", "p_k"), []
        fit = {}
        all_dumps = []
        for ordinal in spec.sweep:
            point = Override(ordinal, STAR_FITNESS_POINT.fitness, STAR_FITNESS_POINT.sign_counts, STAR_FITNESS_POINT.e)
            c = cfg.replace(overrides=(point,))
            results = _execute([(_hist_run, (c, s, ordinal, dump)) for s in seeds], jobs)
            all_dumps += [(f"special_{ordinal}_run_{r:05d}", res[2]) for r, res in enumerate(results)]
            hist = analysis.average_histograms([res[0] for res in results])
            rows += _hist_rows(hist, (ordinal,))
            fit[str(ordinal)] = _star_summary(hist, [res[1] for res in results])
        _dump(dump_dir, all_dumps)
        summary = {k: {kk: vv for kk, vv in v.items() if kk != "special_degrees"} for k, v in fit.items()}

    elif fid == "4":
        columns, rows = ("series", "ordinal", "mean_degree", "survivors"), []
        for name, cfg in spec.configs.items():
            results = _execute([(_ordinal_run, (cfg, s)) for s in seeds], jobs)
            stack = np.vstack(results)
            alive = stack >= 0
            count = alive.sum(axis=0)
            total = np.where(alive, stack, 0).sum(axis=0)
            for o in range(cfg.n_points):
                mean = float(total[o] / count[o]) if count[o] else float("nan")
                rows.append((name, o, mean, int(count[o])))
            dbo = analysis.DegreeByOrdinal(np.where(count > 0, total / np.maximum(count, 1), np.nan), count)
            summary[name] = {"decile_means": dbo.decile_means(), "first_ordinals": [rows[-cfg.n_points + o][2] for o in range(3)]}

    elif fid == "5":
        (cfg,) = spec.configs.values()
        special = cfg.n_points - 1
        cfg = cfg.replace(overrides=(Override(special, STAR_TIME_POINT.fitness, STAR_TIME_POINT.sign_counts, STAR_TIME_POINT.e),))
        results = _execute([(_hist_run, (cfg, s, special, dump)) for s in seeds], jobs)
        _dump(dump_dir, [(f"run_{r:05d}", res[2]) for r, res in enumerate(results)])
        hist = analysis.average_histograms([res[0] for res in results])
        columns, rows = ("k", "p_k"), _hist_rows(hist)
        fit = _star_summary(hist, [res[1] for res in results])
        summary = {k: v for k, v in fit.items() if k != "special_degrees"}

    elif fid == "6":
        (cfg,) = spec.configs.values()
        columns = (
            "n",
            "attacker_degree_mean",
            "attacker_degree_std",
            "max_degree_mean",
            "max_degree_std",
            "attacker_is_max_fraction",
            "runs",
        )
        rows = []
        for size in spec.sweep:
            results = _execute([(_attacker_run, (cfg, s, size)) for s in seeds], jobs)
            att = [a for a, _ in results]
            mx = [max(a, m) for a, m in results]
            frac = sum(a >= m for a, m in results) / len(results)
            rows.append((size, *_mean_std(att), *_mean_std(mx), frac, len(results)))

    elif fid == "7":
        base_cfg, input_cfg = spec.configs["base"], spec.configs["input"]
        results = _execute([(_learning_run, (base_cfg, input_cfg, s, spec.sweep)) for s in seeds], jobs)
        columns = ("added", "e_per_input", "final_vertices_mean", "final_vertices_std", "runs")
        rows = []
        for j, added in enumerate(spec.sweep):
            finals = [res[2][j] for res in results]
            rows.append((added, LEARN_TOTAL_TIME // added, *_mean_std(finals), len(finals)))
        summary["base_vertices_mean"] = statistics.fmean(res[0] for res in results)
        summary["base_edges_mean"] = statistics.fmean(res[1] for res in results)
        means = [r[2] for r in rows]
        summary["argmax_added"] = spec.sweep[int(np.argmax(means))]

    else:  # pragma: no cover - preset() guards the ids
        raise UnknownFigureError(fid)

    meta = {
        "experiment": spec.to_dict(),
        "seeds": [seeds[0], seeds[-1]] if seeds else [],
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    return FigureData(fid, columns, rows, fit, summary, meta)


def _dump(dump_dir, items: list[tuple[str, str]]) -> None:
    if dump_dir is None:
        return
    d = Path(dump_dir)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in items:
        (d / f"{name}.txt").write_text(text, encoding="utf-8")
