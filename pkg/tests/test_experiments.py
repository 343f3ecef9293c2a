import csv
import json

import pytest

from beliefnet.config import RND
from beliefnet.experiments import (
    FIGURE_IDS,
    ExperimentError,
    UnknownFigureError,
    _execute,
    build_learning_base,
    preset,
    run_experiment,
)


def test_preset_ba_row():
    spec = preset("1a", "full")
    (cfg,) = spec.configs.values()
    assert spec.runs == 200
    assert (cfg.n_points, cfg.u, cfg.e, cfg.f_forget, cfg.fitness) == (10000, 2, 1, 0, 1.0)


def test_preset_general_rows():
    t1 = preset("1b-type1", "full").configs["type1"]
    assert (t1.h, t1.u, t1.e, t1.f_forget, t1.fitness, t1.sign_counts) == (0.5, 2, 10, 1, 1.0, (1.0, 1.0, 1.0))
    t2 = preset("1b-type2", "full").configs["type2"]
    assert (t2.fitness, t2.sign_counts, t2.h, t2.e) == (RND, RND, 0.5, 10)


def test_preset_star_fitness():
    spec = preset("3", "full")
    assert spec.runs == 10000 and spec.sweep == (0, 31)
    cfg = spec.configs["star"]
    assert (cfg.n_points, cfg.h, cfg.u, cfg.e, cfg.f_forget) == (1000, 0.5, 1, 10, 1)


def test_preset_learning():
    spec = preset("7", "full")
    assert spec.runs == 1000 and spec.sweep == tuple(range(10, 101, 10))
    base, inp = spec.configs["base"], spec.configs["input"]
    assert (base.n_points, base.u, base.f_forget, base.sign_counts) == (1000, 1, 0, (1.0, 0.0, 0.0))
    assert inp.f_forget == 10


def test_desk_scale_keeps_cycle_parameters():
    for fid in FIGURE_IDS:
        full, desk = preset(fid, "full"), preset(fid, "desk")
        for name, cfg in full.configs.items():
            d = desk.configs[name]
            assert (d.h, d.u, d.e, d.f_forget, d.fitness, d.sign_counts) == (
                cfg.h, cfg.u, cfg.e, cfg.f_forget, cfg.fitness, cfg.sign_counts
            )


def test_desk_run_counts():
    assert [preset(f, "desk").runs for f in FIGURE_IDS] == [20, 20, 20, 10, 200, 200, 200, 50, 100]
    assert preset("4", "desk").configs["ba"].n_points == 2000


def test_unknown_figure():
    with pytest.raises(UnknownFigureError) as exc:
        preset("8", "desk")
    assert "1a" in str(exc.value)


def test_learning_base_edges():
    spec = preset("7", "desk")
    net, _ = build_learning_base(spec.configs["base"], 0)
    assert net.number_of_vertices == 1000
    assert 1900 <= net.number_of_edges <= 2000


def small(fid, runs=2, **kw):
    spec = preset(fid, "desk").with_runs(runs)
    for k, v in kw.items():
        setattr(spec, k, v)
    return spec


def shrink(spec, n):
    spec.configs = {k: c.replace(n_points=n) for k, c in spec.configs.items()}
    return spec


@pytest.mark.parametrize(
    "fid, columns",
    [
        ("1a", ("k", "p_k")),
        ("2", ("series", "n", "mean_distance", "std_distance", "mean_vertices", "runs")),
        ("4", ("series", "ordinal", "mean_degree", "survivors")),
        ("6", ("n", "attacker_degree_mean", "attacker_degree_std", "max_degree_mean", "max_degree_std", "attacker_is_max_fraction", "runs")),
    ],
)
def test_schemas_and_determinism(fid, columns):
    spec = small(fid)
    if fid == "1a":
        spec = shrink(spec, 800)
    if fid == "2":
        spec.sweep = (100, 200)
    if fid == "4":
        spec = shrink(spec, 300)
    if fid == "6":
        spec.sweep = (50, 100)
    a = run_experiment(spec)
    b = run_experiment(spec)
    assert a.columns == columns
    assert repr(a.rows) == repr(b.rows) and repr(a.fit) == repr(b.fit)
    assert all(len(r) == len(columns) for r in a.rows)


def test_star_figures_report_peak():
    spec = small("5", runs=3)
    data = run_experiment(spec)
    assert data.columns == ("k", "p_k")
    assert set(data.fit) >= {"fit", "peak", "special_mean_degree", "special_survival"}
    spec3 = small("3", runs=2)
    spec3.sweep = (0,)
    d3 = run_experiment(spec3)
    assert d3.columns == ("special_ordinal", "k", "p_k")
    assert "0" in d3.fit


def test_learning_schema():
    spec = small("7", runs=1)
    spec.sweep = (10, 50)
    data = run_experiment(spec)
    assert data.columns == ("added", "e_per_input", "final_vertices_mean", "final_vertices_std", "runs")
    assert data.column("e_per_input") == [100, 20]
    assert data.summary["argmax_added"] in (10, 50)


def test_parallel_equals_serial():
    spec = shrink(small("1b-type2", runs=3), 400)
    assert run_experiment(spec, jobs=2).rows == run_experiment(spec, jobs=1).rows


def test_write_outputs(tmp_path):
    spec = shrink(small("1a"), 500)
    data = run_experiment(spec, dump_dir=tmp_path / "nets")
    data.write(tmp_path / "out")
    with open(tmp_path / "out" / "data.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "p_k"]
    fit = json.loads((tmp_path / "out" / "fit.json").read_text())
    assert set(fit) == {"gamma", "intercept", "r_squared", "k_min", "k_max"}
    meta = json.loads((tmp_path / "out" / "meta.json").read_text())
    assert meta["experiment"]["figure_id"] == "1a"
    assert len(list((tmp_path / "nets").glob("*.txt"))) == 2


def _boom(x):
    if x == 2:
        raise RuntimeError("bad run")
    return x


def test_errors_carry_run_index():
    with pytest.raises(ExperimentError) as exc:
        _execute([(_boom, (k,)) for k in range(4)], 1)
    assert exc.value.run_index == 2
