import json
import subprocess
import sys

import pytest

from randrec import cli


def run(tmp_path, *argv, prefix=None):
    args = list(argv) + ["--out-dir", str(tmp_path)]
    if prefix:
        args += ["--prefix", prefix]
    return cli.main(args)


def load(tmp_path, prefix):
    return (tmp_path / f"{prefix}.csv").read_text(), json.loads((tmp_path / f"{prefix}.json").read_text())


def test_rate_example(tmp_path):
    code = run(tmp_path, "rate", "--system", "markov23", "--r-max", "0.015625", "--ratio", "0.5", "--levels", "9",
               "--p", "8", "--seed", "42", "--expect", "slope=0.8:1.2")
    assert code == 0
    text, rec = load(tmp_path, "rate")
    assert text.splitlines()[0] == "r,tau_or_T,log_tau,neg_log_r,capped_flag"
    assert len(text.splitlines()) == 10
    assert abs(rec["summary"]["slope"] - 1) < 0.2
    assert rec["expectations_passed"] is True
    assert rec["config_digest"] == cli.digest(rec["config"])
    assert "runtime_s" not in rec


def test_kac_example(tmp_path):
    assert run(tmp_path, "kac", "--system", "markov23", "--center", "0.5", "--radius", "0.05", "--points", "1000",
               "--realizations", "50", "--seed", "7") == 0
    _, rec = load(tmp_path, "kac")
    assert abs(rec["summary"]["kac_integral"] - 1) < 0.05


def test_list_systems(capsys):
    assert cli.main(["list-systems"]) == 0
    out = capsys.readouterr().out
    for name in ("markov23", "catmaps", "perturbed-circle", "perturbed-interval", "rotation-identity"):
        assert f"\n{name}\n" in "\n" + out
    assert "positive" in out and "not random-aperiodic" in out


def test_config_errors_list_every_key(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("system: {family: markov23}\nbogus: 1\nlevls: 3\nr_max: -2\n")
    assert run(tmp_path, "rate", "--config", str(cfg)) == 2
    err = capsys.readouterr().err
    assert "'bogus'" in err and "'levls'" in err and "r_max" in err


def test_bad_system_is_config_error(tmp_path):
    assert run(tmp_path, "rate", "--system", "henon") == 2
    assert run(tmp_path, "rate", "--system", "catmaps", "--param", "A0=[[1,0],[0,1]]") == 2


def test_insufficient_data_writes_partial(tmp_path):
    code = run(tmp_path, "rate", "--mode", "quenched", "--r-max", "1e-9", "--levels", "5", "--n-max", "50")
    assert code == 3
    text, rec = load(tmp_path, "rate")
    assert rec["status"] == "insufficient-data" and len(text.splitlines()) == 6


def test_byte_identical_across_runs_and_workers(tmp_path):
    base = ["rate", "--r-max", "0.03", "--levels", "6", "--M", "300", "--seed", "5"]
    assert run(tmp_path, *base, "--workers", "1", prefix="a") == 0
    assert run(tmp_path, *base, "--workers", "4", prefix="b") == 0
    assert run(tmp_path, *base, "--workers", "2", prefix="c") == 0
    a, b, c = ((tmp_path / f"{p}.csv").read_bytes() for p in "abc")
    assert a == b == c
    ja, jb = ((tmp_path / f"{p}.json").read_bytes() for p in "ab")
    assert ja == jb


def test_replay_from_summary(tmp_path):
    assert run(tmp_path, "correlations", "--M", "20000", "--lags", "4", "--seed", "3") == 0
    assert cli.main(["run", str(tmp_path / "correlations.json"), "--out-dir", str(tmp_path), "--prefix", "again"]) == 0
    assert (tmp_path / "correlations.csv").read_bytes() == (tmp_path / "again.csv").read_bytes()
    assert (tmp_path / "correlations.json").read_bytes() == (tmp_path / "again.json").read_bytes()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("system:\n  family: catmaps\n  q: 0.3\nradius: 0.1\npoints: 200\nrealizations: 10\nseed: 4\n")
    assert run(tmp_path, "kac", "--config", str(cfg), "--radius", "0.12") == 0
    _, rec = load(tmp_path, "kac")
    assert rec["config"]["radius"] == 0.12 and rec["config"]["system"]["q"] == 0.3


@pytest.mark.parametrize("argv", [
    ["orbit", "--n", "5", "--x", "0.2"],
    ["return-time", "--mode", "annealed", "--system", "perturbed-interval", "--M", "50"],
    ["return-time", "--radius", "0.1"],
    ["dimension", "--exact", "--points", "3"],
    ["dimension", "--system", "catmaps", "--N", "50000", "--points", "3", "--r-max", "0.25", "--levels", "4"],
    ["aperiodicity", "--system", "rotation-identity", "--M", "2000", "--samples", "200"],
    ["wdr", "--exact", "--eps", "1"],
    ["correlations", "--system", "perturbed-interval", "--psi", "coordinate", "--phi", "{kind: tent, center: [0.5], width: 0.3}", "--M", "5000", "--measure-N", "20000"],
    ["rate", "--system", "catmaps", "--r-max", "0.125", "--levels", "5", "--M", "20"],
])
def test_every_subcommand_runs(tmp_path, argv):
    assert run(tmp_path, *argv) == 0
    text, rec = load(tmp_path, argv[0])
    assert rec["status"] == "ok" and text.count("\n") >= 2


def test_csv_uses_17_significant_digits(tmp_path):
    run(tmp_path, "orbit", "--n", "2", "--x", "0.2")
    text, _ = load(tmp_path, "orbit")
    assert text.splitlines()[1] == "0,0.20000000000000001"


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "randrec.cli", "list-systems"], capture_output=True, text=True)
    assert out.returncode == 0 and "markov23" in out.stdout
