import json
import subprocess
import sys

import pytest

from fkdiv import cli

FK_CFG = {
    "setting": "fullspace", "N": 3, "t": 0.5, "x": [1.0, 0.0, 0.0],
    "potential": {"c": 0.3, "beta": 2.0},
    "initial": {"kind": "gaussian_bump", "radius": 0.5},
    "grid": {"n_steps": 16, "n_paths": 4000},
    "caps": [2.0, 8.0],
}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_zeros_csv(capsys):
    code, out, _ = run(["zeros", "--mu", "0.5", "--count", "3"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# config_hash=") and "seed=20240601" in lines[0]
    assert lines[1] == "k,j"
    assert float(lines[2].split(",")[1]) == pytest.approx(3.141592653589793)


def test_confine_series_and_mc(capsys):
    code, out, _ = run(["confine", "--N", "3", "--rho", "0.2", "--T", "0.3"], capsys)
    series = json.loads(out)
    assert code == 0 and series["method"] == "series"
    code, out, _ = run(["--seed", "5", "confine", "--N", "3", "--rho", "0.2", "--T", "0.3", "--mc",
                        "--paths", "20000", "--steps", "100"], capsys)
    mc = json.loads(out)
    assert mc["seed"] == 5 and "config_hash" in mc
    assert abs(mc["mean"] - series["value"]) < 4 * mc["std_err"]


def test_confine_small_time_is_numeric_error(capsys):
    code, _, err = run(["confine", "--N", "3", "--T", "1e-6"], capsys)
    assert code == cli.EXIT_NUMERIC and "confine_prob_mc" in err


def test_domain_error_exit_code(capsys):
    code, _, err = run(["confine", "--N", "3", "--rho", "1.5", "--T", "0.3"], capsys)
    assert code == cli.EXIT_CONFIG and err.startswith("error:")


def test_law_sample_and_check(capsys):
    code, out, _ = run(["law", "sample", "--name", "local_time", "--params", "x=0.3,s=1", "--n", "5"], capsys)
    assert code == 0 and out.splitlines()[1] == "local_time,endpoint" and len(out.splitlines()) == 7
    code, out, _ = run(["law", "check", "--name", "meander"], capsys)
    assert code == 0 and json.loads(out)["passed"]
    code, _, _ = run(["law", "sample", "--name", "bogus"], capsys)
    assert code == cli.EXIT_CONFIG
    code, _, _ = run(["law", "sample", "--name", "meander", "--params", "dur"], capsys)
    assert code == cli.EXIT_CONFIG


def test_fk_run_with_table_and_replay(tmp_path, capsys):
    cfg = write(tmp_path, "fk.json", FK_CFG)
    outs = []
    for i in range(2):
        out = tmp_path / f"out{i}.json"
        table = tmp_path / f"table{i}.csv"
        assert cli.main(["--out", str(out), "fk", "run", "--config", cfg, "--table", str(table)]) == 0
        outs.append((out.read_bytes(), table.read_bytes()))
    assert outs[0] == outs[1]
    body = json.loads(outs[0][0])
    assert body["config_hash"] == cli.config_hash(FK_CFG)
    means = [e["mean"] for e in body["estimates"]]
    assert means[0] <= means[1]
    assert outs[0][1].decode().splitlines()[1] == "cap,mean,std_err,n"


def test_fk_workers_do_not_change_output(tmp_path):
    cfg = write(tmp_path, "fk.json", {**FK_CFG, "grid": {"n_steps": 8, "n_paths": 50_000}})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["--out", str(a), "fk", "run", "--config", cfg]) == 0
    assert cli.main(["--workers", "3", "--out", str(b), "fk", "run", "--config", cfg]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fk_uncapped_rejected(tmp_path, capsys):
    cfg = {k: v for k, v in FK_CFG.items() if k != "caps"}
    code, _, err = run(["fk", "run", "--config", write(tmp_path, "fk.json", cfg)], capsys)
    assert code == cli.EXIT_CONFIG and "min" in err


def test_fk_schema_rejection(tmp_path, capsys):
    bad = {**FK_CFG, "N": "three"}
    code, _, err = run(["fk", "run", "--config", write(tmp_path, "bad.json", bad)], capsys)
    assert code == cli.EXIT_CONFIG and "rejected" in err
    code, _, _ = run(["fk", "run", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == cli.EXIT_CONFIG


def test_fk_other_settings(tmp_path, capsys):
    for extra in ({"setting": "stable", "alpha": 1.0, "potential": {"c": 0.3, "beta": 1.0, "cap": 4.0}},
                  {"setting": "halfspace", "x": [0.0, 0.0, 0.3],
                   "potential": {"c": 0.3, "beta": 1.0, "cap": 4.0, "flavor": "boundary"}},
                  {"setting": "radial_bessel", "potential": {"c": 0.1, "cap": 10.0}}):
        cfg = {**FK_CFG, "grid": {"n_steps": 8, "n_paths": 2000}, **extra}
        cfg.pop("caps")
        code, out, err = run(["fk", "run", "--config", write(tmp_path, "c.json", cfg)], capsys)
        assert code == 0, err
        assert json.loads(out)["setting"] == extra["setting"]


def test_constants_table(capsys):
    code, out, _ = run(["constants", "--dims", "3..5", "--alpha", "0.5,1.5"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[1] == "N,hardy,frac_hardy,kato,cond_bm,cond_stable,cond_boundary,alpha"
    assert len(lines) == 2 + 6
    code, out, _ = run(["constants", "--dims", "1,2"], capsys)
    row = out.splitlines()[2].split(",")
    assert row[1] == "" and row[5] == ""


def test_pde_solve(tmp_path, capsys):
    cfg = {"N": 3, "t": 0.5, "potential": {"c": 0.0}, "initial": {"kind": "gaussian_bump", "radius": 0.5},
           "grid": {"n_r": 201, "n_t": 50}}
    code, out, _ = run(["pde", "solve", "--config", write(tmp_path, "p.json", cfg)], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[1] == "r,u" and len(lines) == 2 + 201


def test_sweep(tmp_path, capsys):
    cfg = {"setting": "fullspace", "N": 3, "c_list": [0.02, 1.0], "m_list": [4, 8, 16], "t": 0.5,
           "x": [0.5, 0.0, 0.0], "grid": {"n_steps": 32, "n_paths": 5000}}
    code, out, _ = run(["sweep", "--config", write(tmp_path, "s.json", cfg)], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[1] == "c,cap,mean,std_err,ratio_to_previous,verdict"
    assert len(lines) == 2 + 6
    assert lines[2].split(",")[-1] == "plateau"


def test_appendix_phi(capsys):
    code, out, _ = run(["appendix", "check", "--name", "phi"], capsys)
    assert code == 0 and json.loads(out)["passed"]


def test_check_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli.checks, "appendix_check", lambda name, seed, workers: {"name": name, "passed": False})
    code, _, _ = run(["appendix", "check", "--name", "cauchy"], capsys)
    assert code == cli.EXIT_CHECK


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        cli.main(["zeros"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["--workers", "0", "zeros", "--mu", "1"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fkdiv", "zeros", "--mu", "0", "--count", "2"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1] == "k,j"
