import csv
import json
from pathlib import Path

import numpy as np
import pytest

from nmthermo import cli
from nmthermo.thermo import ThermoSample

GOLDEN = Path(__file__).parent / "data" / "fig1_golden.csv"


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    rows = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    return comments, rows


def test_fig1_golden(tmp_path):
    out = tmp_path / "fig1.csv"
    assert cli.main(["fig1", "--output", str(out)]) == 0
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_example2_negative_window(tmp_path):
    out = tmp_path / "e2.csv"
    args = ["example2", "--beta", "0.1", "--eps", "1", "--lam", "1", "--horizon", "10", "--grid", "2000"]
    assert cli.main(args + ["--output", str(out)]) == 0
    comments, rows = read_csv(out)
    assert list(rows[0]) == ThermoSample.columns()
    assert len(rows) == 2000
    assert min(float(r["Sigma"]) for r in rows) < 0
    config = json.loads(comments[0].split(":", 1)[1])
    assert config["beta"] == 0.1 and config["grid"] == 2000 and config["command"] == "example2"


def test_classify(capsys):
    assert cli.main(["classify", "--profile", "osc", "--gamma0", "1", "--a", "1.5", "--nu", "5",
                     "--horizon", "10"]) == 0
    assert "EssentiallyNonMarkovian" in capsys.readouterr().out


def test_example1_semigroup_positive(tmp_path):
    out = tmp_path / "e1.csv"
    assert cli.main(["example1", "--beta", "1", "--omega", "1", "--profile", "const", "--gamma0", "1",
                     "--grid", "20000", "--output", str(out)]) == 0
    _, rows = read_csv(out)
    assert min(float(r["sigma"]) for r in rows) >= 0


def test_example1_coarse_grid_warns(tmp_path, capsys):
    out = tmp_path / "e1.csv"
    assert cli.main(["example1", "--grid", "300", "--output", str(out)]) == 0
    assert "warning" in capsys.readouterr().err
    comments, _ = read_csv(out)
    assert "Sigma_relent_difference" in comments[1]


def test_example3_table(tmp_path):
    out = tmp_path / "e3.csv"
    assert cli.main(["example3", "--grid", "400", "--output", str(out)]) == 0
    comments, rows = read_csv(out)
    assert {"tau", "dS_S", "dS_B", "dQ_B", "dU_chi", "cumulative"} <= set(rows[0])
    assert "negative_windows" in comments[1]


def test_json_output(tmp_path):
    out = tmp_path / "f.json"
    assert cli.main(["fig1", "--grid", "50", "--format", "json", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["config"]["grid"] == 50
    assert len(doc["records"]) == 50
    assert set(doc["records"][0]) == set(ThermoSample.columns())


def test_sweep_independent_of_workers(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", "--count", "2500", "--workers", "1", "--output", str(a)]) == 0
    assert cli.main(["sweep", "--count", "2500", "--workers", "4", "--output", str(b)]) == 0
    # only the recorded worker count differs
    assert a.read_text().split("\n", 1)[1] == b.read_text().split("\n", 1)[1]
    _, rows = read_csv(a)
    assert len(rows) == 2500 and all(r["consistent"] == "True" for r in rows)


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("# fig1 at a warmer bath\nbeta = 0.05\ngrid = 30\n")
    out = tmp_path / "o.csv"
    assert cli.main(["fig1", "--config", str(conf), "--grid", "40", "--output", str(out)]) == 0
    comments, rows = read_csv(out)
    config = json.loads(comments[0].split(":", 1)[1])
    assert config["beta"] == 0.05 and config["grid"] == 40 and len(rows) == 40


def test_unknown_config_key(tmp_path, capsys):
    conf = tmp_path / "bad.cfg"
    conf.write_text("beta = 0.1\nomega_c = 3\n")
    assert cli.main(["fig1", "--config", str(conf)]) == 2
    assert "unknown keys" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["example1", "--rho0", "1,1,1"],
    ["example1", "--rho0", "0.1,0.2"],
    ["example1", "--grid", "2.5"],
    ["example2", "--lam", "-1"],
    ["example3", "--s", "0.5"],
    ["classify", "--profile", "cubic"],
    ["fig1", "--format", "xml"],
    ["fig1", "--output", "/nonexistent/dir/x.csv"],
])
def test_validation_exit_code(args, capsys):
    assert cli.main(args) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_numerical_exit_code(capsys):
    # a pure start with coherence makes the entropy rate diverge at tau = 0
    assert cli.main(["example3", "--rho0", "1,0,0", "--grid", "10", "--output", "-"]) == 3
    assert "PureStateSingularity" in capsys.readouterr().err


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as exc:
        cli.main(["fig1", "--omega", "2"])
    assert exc.value.code == 2


def test_emit_series_single_sample(tmp_path):
    out = tmp_path / "one.csv"
    sample = ThermoSample(0.0, 0.1, 0.0, 0.2, 0.6, 0.0, 0.0, 0.0, 0.0, 0.01)
    cli.emit_series([sample], "csv", str(out), {"config": {}})
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines == [",".join(ThermoSample.columns()), "0.0,0.1,0.0,0.2,0.6,0.0,0.0,0.0,0.0,0.01"]


def test_emit_series_empty(tmp_path):
    with pytest.raises(cli.ValidationError):
        cli.emit_series([], "csv", str(tmp_path / "x.csv"))


def test_round_trip_floats(tmp_path):
    out = tmp_path / "f.csv"
    cli.main(["fig1", "--grid", "97", "--output", str(out)])
    _, rows = read_csv(out)
    from nmthermo.gad_map import GadSchedule, sigma_integrated_gad
    from nmthermo.qstate import QubitState

    taus = np.linspace(0, 10, 97)
    sched = GadSchedule(1.0, 1.0, 0.1)
    for r, t in zip(rows, taus):
        assert float(r["tau"]) == t
        assert float(r["Sigma"]) == sigma_integrated_gad(QubitState(0, 0, 0), sched, float(t))


def test_plot_written(tmp_path):
    pytest.importorskip("matplotlib")
    png = tmp_path / "fig.png"
    assert cli.main(["fig1", "--grid", "200", "--output", str(tmp_path / "f.csv"), "--plot", str(png)]) == 0
    assert png.read_bytes()[:4] == b"\x89PNG"
