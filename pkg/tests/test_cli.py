import csv
import io
import json

import pytest

from steklov_fem import cli

SMALL = ["--alphas", "2,1/2", "--eps-list", "1/4,1/8", "--n-modes", "2", "--rows", "16"]


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_fmt_round_trip():
    x = 0.1 + 0.2
    assert float(cli.fmt(x)) == x
    assert cli.fmt(None) == "" and cli.fmt(float("nan")) == ""
    assert cli.fmt(7) == "7"


def test_config_parsing(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# comment\nalphas = 2, 1\neps_list = 1/4, 1/8  # dyadic\nn_modes=3\nrecord_timing = yes\n")
    cfg = cli.SweepConfig.from_mapping(cli.read_config(p))
    assert cfg.alphas == [2.0, 1.0]
    assert cfg.eps_list == [0.25, 0.125]
    assert cfg.n_modes == 3 and cfg.record_timing


@pytest.mark.parametrize(
    "values",
    [{"eps_list": "1/3"}, {"eps_list": "3/8"}, {"n_modes": "0"}, {"profile": "square"}, {"colour": "red"}, {"alphas": "-1"}],
)
def test_config_errors(values):
    with pytest.raises(cli.ConfigError):
        cli.SweepConfig.from_mapping(values)


def test_sweep_rows_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("STEKLOV_THREADS", "2")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", *SMALL, "--out", str(a)]) == 0
    monkeypatch.setenv("STEKLOV_THREADS", "1")
    assert cli.main(["sweep", *SMALL, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text().splitlines()
    assert text[0] == "alpha,eps,n,mu_eps,mu0,c_b,predicted,ratio,residual,dofs,ms"
    rows = read_csv(a)
    assert len(rows) == 2 + 2 * 2 * 2
    assert [r["alpha"] for r in rows[:2]] == ["", ""]
    assert [(r["alpha"], r["eps"], r["n"]) for r in rows[2:6]] == [
        ("2", "0.25", "1"), ("2", "0.25", "2"), ("2", "0.125", "1"), ("2", "0.125", "2"),
    ]
    for r in rows[6:]:
        assert r["ratio"] == "" and r["predicted"] == "0"
        assert float(r["mu_eps"]) > 0
    assert all(r["ms"] == "" for r in rows)


def test_sweep_full_grid_counts(tmp_path):
    out = tmp_path / "s.csv"
    args = ["sweep", "--alphas", "2,1,1/2", "--eps-list", "1/4,1/8,1/16,1/32", "--n-modes", "2", "--rows", "32", "--out", str(out)]
    assert cli.main(args) == 0
    rows = read_csv(out)
    assert len(rows) == 24 + 2
    alpha1 = [r for r in rows if r["alpha"] == "1" and r["n"] == "1"]
    ratios = [float(r["ratio"]) for r in alpha1]
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    assert float(alpha1[0]["predicted"]) == pytest.approx(float(alpha1[0]["mu0"]) / 2**0.5)


def test_sweep_timing_flag(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["sweep", *SMALL, "--timing", "--out", str(out)]) == 0
    assert all(r["ms"] != "" for r in read_csv(out)[2:])


def test_sweep_config_error_exit(tmp_path, capsys):
    assert cli.main(["sweep", "--eps-list", "1/3", "--out", str(tmp_path / "x.csv")]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.txt")]) == 2


def test_sweep_error_row(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(cli, "solve_cell", boom)
    out = tmp_path / "e.csv"
    assert cli.main(["sweep", *SMALL, "--out", str(out)]) == 1
    rows = read_csv(out)
    assert sum(r["mu_eps"] == "error" for r in rows) == 4


def test_solve_and_export(tmp_path):
    out, vtk = tmp_path / "s.csv", tmp_path / "m.vtk"
    assert cli.main(["solve", "--alpha", "1", "--eps", "1/8", "--mode", "mixed", "--rows", "16",
                     "--n-modes", "2", "--out", str(out), "--export-mesh", str(vtk)]) == 0
    rows = read_csv(out)
    assert [r["n"] for r in rows] == ["1", "2"]
    assert vtk.read_text().startswith("# vtk DataFile Version 3.0")
    assert cli.main(["solve", "--mode", "full", "--nx", "8", "--rows", "8", "--n-modes", "2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0]["n"] == "0" and abs(float(rows[0]["lambda"])) < 1e-8


def test_solve_config_error():
    assert cli.main(["solve", "--alpha", "1", "--eps", "1"]) == 2


def test_emap_csv(tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert cli.main(["emap", "--alpha", "2", "--eps-list", "1/4,1/8", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["eps"] for r in rows] == ["0.25", "0.125"]
    assert float(rows[1]["rel_gap"]) < float(rows[0]["rel_gap"])


def test_validate_json(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert cli.main(["validate", "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    assert {c["name"] for c in report} >= {"strip oracle", "disk oracle", "zero mode", "assembly identities"}
    assert all(c["passed"] for c in report)
    lines = capsys.readouterr().out.splitlines()
    assert all(line.startswith("PASS") for line in lines)


def test_validate_coarse_oracle_fails(capsys):
    assert cli.main(["validate", "--coarse-oracle"]) == 1
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if "strip oracle" in l)
    assert line.startswith("FAIL") and "errors" in line
