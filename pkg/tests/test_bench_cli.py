from __future__ import annotations

import io
import json
import re

import numpy as np
import pytest

from spectral_games import bench
from spectral_games.bench import (
    BenchConfig,
    BenchResult,
    config_from_mapping,
    emit_plot,
    first_hit,
    format_csv,
    parse_config,
    parse_csv,
    render_svg,
    rerun_from_metadata,
    run_benchmark,
    write_result,
)
from spectral_games.cli import main

HEADER = "iteration,extragradient,hgd,neg_momentum,omd,accel_bilinear,accel_eg,accel_consensus"


def cli(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def small_result():
    return run_benchmark(BenchConfig(dims=[20], cond=10, iters=150, seed=5))[0]


# --- configuration ----------------------------------------------------------


def test_config_defaults():
    cfg = BenchConfig()
    assert cfg.dims == [100, 500, 1000] and cfg.cond == 100 and cfg.iters == 1000
    assert cfg.methods == list(bench.DEFAULT_METHODS)


@pytest.mark.parametrize("kw", [{"dims": [101]}, {"dims": []}, {"iters": 0}, {"methods": []}, {"methods": ["nope"]}])
def test_config_rejects_invalid(kw):
    with pytest.raises(ValueError):
        BenchConfig(**kw)


def test_parse_config_text():
    text = """
    # benchmark settings
    dims = 100, 500
    cond = 50   # trailing comment
    seed = 7
    methods = extragradient, accel_eg
    emit_plot = true
    """
    values = parse_config(text)
    cfg = config_from_mapping(values)
    assert cfg.dims == [100, 500] and cfg.cond == 50 and cfg.seed == 7
    assert cfg.methods == ["extragradient", "accel_eg"] and cfg.emit_plot is True


# --- tables -----------------------------------------------------------------


def test_table_layout(small_result):
    r = small_result
    assert r.columns == HEADER.split(",")
    assert r.table.shape == (151, 8)
    np.testing.assert_array_equal(r.table[:, 0], np.arange(151))
    # row 0 holds the shared initial distance
    assert np.all(r.table[0, 1:] == r.table[0, 1])
    assert r.to_csv().split("\n", 1)[0] == HEADER


def test_csv_round_trip(small_result):
    text = small_result.to_csv()
    columns, table = parse_csv(text)
    assert columns == small_result.columns
    np.testing.assert_array_equal(table, small_result.table)
    assert format_csv(columns, table) == text
    assert "\r" not in text and text.endswith("\n")


def test_same_seed_gives_identical_csv(small_result):
    again = run_benchmark(BenchConfig(dims=[20], cond=10, iters=150, seed=5))[0]
    assert again.to_csv() == small_result.to_csv()
    other = run_benchmark(BenchConfig(dims=[20], cond=10, iters=150, seed=6))[0]
    assert other.to_csv() != small_result.to_csv()


def test_parallel_schedule_does_not_change_output(small_result):
    par = run_benchmark(BenchConfig(dims=[20], cond=10, iters=150, seed=5, jobs=4))[0]
    assert par.to_csv() == small_result.to_csv()


def test_sidecar_reproduces_csv(tmp_path, small_result):
    path = write_result(small_result, tmp_path / "xp-20.csv")
    meta = json.loads(path.with_suffix(".json").read_text())
    for col in small_result.columns[1:]:
        assert meta["methods"][col]["hyper"]
    assert {"seed", "sigma_min", "sigma_max", "wall_time_s"} <= meta.keys()
    rebuilt = rerun_from_metadata(path.with_suffix(".json"))
    assert rebuilt.to_csv() == path.read_text()


def test_hyperparameter_override_is_recorded():
    cfg = BenchConfig(dims=[8], iters=5, seed=1, methods=["extragradient"], overrides={"extragradient.eta": 0.01})
    r = run_benchmark(cfg)[0]
    assert r.metadata["methods"]["extragradient"]["hyper"]["eta"] == 0.01


def test_isotropic_game_all_methods_converge():
    r = run_benchmark(BenchConfig(dims=[20], cond=1, iters=200, seed=0))[0]
    for j, col in enumerate(r.columns[1:], start=1):
        assert first_hit(r.table[:, j], 1e-6) is not None, col


def test_first_hit():
    assert first_hit([1, 0.1, 1e-7, 1e-8], 1e-6) == 2
    assert first_hit([1, 0.5], 1e-6) is None
    assert first_hit([1, np.nan], 1e-6) is None


# --- plots ------------------------------------------------------------------


def toy_result():
    table = np.array([[0, 1.0, 1.0], [1, 0.5, 0.1], [2, 0.25, 0.01], [3, 0.125, 0.001]])
    return BenchResult(dim=4, columns=["iteration", "first", "second"], table=table, metadata={})


def test_svg_toy(tmp_path):
    path = emit_plot(toy_result(), tmp_path / "toy.svg")
    svg = path.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert "iteration" in svg and "distance to the optimum" in svg
    assert ">first<" in svg and ">second<" in svg


def test_svg_log_scale_labels():
    svg = render_svg(toy_result())
    decades = sorted(int(k) for k in re.findall(r">1e(-?\d+)<", svg))
    assert decades[0] <= -3 and decades[-1] >= 0


def test_svg_rejects_empty():
    r = BenchResult(dim=4, columns=["iteration", "x"], table=np.array([[0, np.nan]]), metadata={})
    with pytest.raises(ValueError):
        render_svg(r)


# --- command line -----------------------------------------------------------


def test_cli_acf_ellipse():
    code, text = cli("acf", "--shape", "ellipse", "--a", "4", "--b", "3", "--c", "5")
    assert code == 0
    lines = dict(line.split("=") for line in text.split())
    assert lines["rho"] == "0.757359"
    assert {"alpha", "beta"} <= lines.keys()


def test_cli_acf_disc():
    code, text = cli("acf", "--shape", "disc", "--c", "2", "--r", "1")
    assert code == 0 and text.splitlines()[0] == "rho=0.5"


def test_cli_exit_codes(capsys):
    assert cli("acf", "--shape", "hexagon")[0] == 1
    assert cli("acf", "--shape", "disc", "--c", "2")[0] == 1
    assert cli("frobnicate")[0] == 1
    code, _ = cli("acf", "--shape", "disc", "--c", "1", "--r", "2")
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_cli_oracle():
    code, text = cli("oracle", "--shape", "disc", "--c", "2", "--r", "1", "-t", "8", "-n", "400")
    assert code == 0
    est = float(re.search(r"acf_estimate=(\S+)", text).group(1))
    assert est == pytest.approx(0.5, rel=0.02)


def test_cli_rate():
    code, text = cli("rate", "--method", "bilinear_accel", "--a", "1", "--b", "10", "--dim", "12", "--seed", "0",
                     "--iters", "300")
    assert code == 0
    vals = dict(line.split("=") for line in text.split())
    assert float(vals["predicted_rate"]) == pytest.approx(9 / 11, abs=1e-6)
    assert float(vals["fitted_rate"]) == pytest.approx(9 / 11, abs=0.02)


def test_cli_solve_writes_trace(tmp_path):
    out = tmp_path / "trace.csv"
    code, _ = cli("solve", "--method", "extragradient", "--dim", "10", "--cond", "5", "--seed", "3",
                  "--iters", "50", "--out", str(out))
    assert code == 0
    columns, table = parse_csv(out.read_text())
    assert columns == ["iteration", "distance"] and table.shape == (51, 2)


def test_cli_seed_from_environment(monkeypatch):
    monkeypatch.setenv("SPECTRAL_GAMES_SEED", "11")
    a = cli("solve", "--method", "omd", "--dim", "8", "--iters", "5")[1]
    b = cli("solve", "--method", "omd", "--dim", "8", "--iters", "5", "--seed", "11")[1]
    assert a == b


def test_cli_bench_file_layout(tmp_path):
    out = tmp_path / "xp-100.csv"
    code, _ = cli("bench", "--dim", "100", "--cond", "100", "--iters", "1000", "--seed", "42", "--out", str(out),
                  "--plot")
    assert code == 0
    lines = out.read_text().split("\n")
    assert lines[0] == HEADER
    # header, 1001 rows, and the empty string after the final newline
    assert len(lines) == 1003 and lines[-1] == ""
    assert all(len(line.split(",")) == 8 for line in lines[1:-1])
    assert out.with_suffix(".json").exists()
    svg = out.with_suffix(".svg").read_text()
    assert svg.count("<polyline") == 7
    # the plotted range covers at least six decades
    _, table = parse_csv(out.read_text())
    d = table[:, 1:][np.isfinite(table[:, 1:]) & (table[:, 1:] > 0)]
    assert np.log10(d.max() / d.min()) >= 6


def test_cli_bench_config_file(tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text(f"dims = 8\niters = 4\nseed = 2\nmethods = omd, hgd\noutput_dir = {tmp_path}\n")
    code, _ = cli("bench", "--config", str(cfg), "--iters", "6")
    assert code == 0
    columns, table = parse_csv((tmp_path / "xp-8.csv").read_text())
    assert columns == ["iteration", "omd", "hgd"] and table.shape == (7, 3)


def test_cli_bench_usage_errors(tmp_path):
    assert cli("bench", "--dim", "7", "--iters", "2", "--output-dir", str(tmp_path))[0] == 1
    assert cli("bench", "--dim", "8", "--dim", "10", "--out", str(tmp_path / "x.csv"))[0] == 1
    assert cli("bench", "--config", str(tmp_path / "missing.cfg"))[0] == 1
