import csv
import io

import pytest

from compnoma import expcli
from compnoma.analytic import QuadratureError
from compnoma.assoc import ClassKind
from compnoma.expcli import COLUMNS, ExperimentSpec, defaults_text, main, parse_config, run_experiment, to_csv
from compnoma.mcharness import _cached_table
from compnoma.netmodel import ConfigError, NetworkConfig
from compnoma.sirlab import Scheme


def test_empty_config_gives_reference_values():
    s = parse_config("")
    c = s.base
    assert c.lambda_b == pytest.approx(1e-5)
    assert (c.rho_u, c.rho_t, c.h_u, c.m_L, c.m_N, c.alpha_L) == (0.9, pytest.approx(0.1), 75.0, 3, 1, 2.6)
    assert c.theta == pytest.approx(2.5118864315, rel=1e-9)
    assert s.schemes == tuple(Scheme) and s.paths == "both"


def test_db_keys_are_converted():
    s = parse_config("theta_dB = 4\neta_L_dB = -30\n")
    assert s.base.theta == pytest.approx(2.512, abs=5e-4)
    assert s.base.eta_L == pytest.approx(1e-3)


@pytest.mark.parametrize("text, word", [
    ("rho_u = 0.4", "rho_u"),
    ("foo = 1", "foo"),
    ("theta = 2\ntheta_dB = 3", "theta"),
    ("m_L = 2.5", "m_L"),
    ("alpha_L = 1.9", "alpha_L"),
    ("schemes = CompNoma, Turbo", "Turbo"),
    ("sweep_axis = h_u", "sweep_values"),
    ("sweep_axis = rho_u\nsweep_values = 0.9, 0.4", "rho_u"),
    ("metrics = coverage, latency", "metrics"),
    ("h_u = abc", "h_u"),
])
def test_bad_configs_name_the_problem(text, word):
    with pytest.raises(ConfigError, match=word):
        parse_config(text)


def test_defaults_text_round_trips():
    s = parse_config(defaults_text())
    assert s.base == NetworkConfig()
    assert s == ExperimentSpec(NetworkConfig())


def test_sections_are_optional():
    a = parse_config("h_u = 100\nschemes = NomaOnly")
    b = parse_config("[network]\nh_u = 100\n[experiment]\nschemes = NomaOnly")
    assert a == b


def test_usage_errors_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("schemes =\n")
    assert main(["validate", str(bad)]) == expcli.EXIT_USAGE
    assert "schemes" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == expcli.EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["run", str(bad), "--path", "sideways"])
    assert e.value.code == 2


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_assoc_sweep_over_altitude():
    spec = parse_config("sweep_axis = h_u\nsweep_values = 50, 75, 100, 150\nmetrics = assoc\n"
                        "iterations = 300")
    rows = _rows(to_csv(run_experiment(spec)))
    assert list(rows[0]) == list(COLUMNS)
    for h in ("50.0", "75.0", "100.0", "150.0"):
        for path in ("analytic", "mc"):
            got = {r["case"] for r in rows if r["sweep_value"] == h and r["path"] == path}
            assert got == {k.value for k in ClassKind}


def test_csv_schema_and_values(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("thresholds_dB = 0\nsweep_values = 0, 12\nschemes = CompNoma\npaths = analytic\n"
                   "metrics = coverage\n")
    out = tmp_path / "o.csv"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert all(set(r) == set(COLUMNS) for r in rows)
    over = {r["threshold_dB"]: float(r["value"]) for r in rows
            if r["metric"] == "coverage_au" and r["case"] == "overall"}
    assert 0 < over["0.0"] < 1
    # 12 dB exceeds the single-BS NOMA ceiling: only cooperative AUs can be covered
    nc = [float(r["value"]) for r in rows if r["threshold_dB"] == "12.0" and r["case"] in ("NonCompL", "NonCompN")]
    assert nc == [0.0, 0.0]
    t = [r for r in rows if r["threshold_dB"] == "0.0"][0]
    assert float(t["threshold_linear"]) == 1.0


def test_byte_identical_across_workers(tmp_path, monkeypatch):
    cfg = tmp_path / "c.ini"
    cfg.write_text("sweep_values = -5, 5\npaths = mc\niterations = 800\n")
    outs = []
    for w in ("1", "2"):
        monkeypatch.setenv("COMPNOMA_WORKERS", w)
        o = tmp_path / f"o{w}.csv"
        # bypass the table cache so the worker setting is exercised
        _cached_table.cache_clear()
        assert main(["run", str(cfg), "--out", str(o), "--seed", "7"]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


def test_no_partial_file_on_failure(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("paths = analytic\n")
    out = tmp_path / "o.csv"

    def boom(spec):
        raise QuadratureError("coverage of class CompLL: no convergence")
    monkeypatch.setattr(expcli, "run_experiment", boom)
    assert main(["run", str(cfg), "--out", str(out)]) == expcli.EXIT_NUMERIC
    assert "CompLL" in capsys.readouterr().err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [cfg]


def test_cli_overrides(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("iterations = 10\n")
    args = expcli.build_parser().parse_args(["run", str(cfg), "--iterations", "99", "--seed", "3", "--path", "mc"])
    s = expcli._load(str(cfg), args)
    assert (s.iterations, s.master_seed, s.paths) == (99, 3, "mc")
