import json
import subprocess
import sys

from qrecec.cli import main
from qrecec.experiments import read_csv


def test_run_prints_summary(capsys):
    assert main(["run", "--links", "1", "--runs", "5", "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert "links=1" in out and "mode=cec" in out and "F=" in out


def test_run_with_config_and_mode(tmp_path, capsys):
    cfg = {"nodes": ["a", "b", "c"],
           "links": [{"left": "a", "right": "b", "length_km": 10},
                     {"left": "b", "right": "c", "length_km": 10}],
           "protocol": {"cec_mode": "cec"}, "experiment": {"runs": 3}}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(p), "--mode", "none", "--z", "1"]) == 0
    out = capsys.readouterr().out
    assert "links=2" in out and "mode=none" in out and "runs=3" in out and "F=1.00000" in out


def test_sweep_writes_csv(tmp_path, capsys):
    spec = {"kind": "z", "grid": [0.0, 1.0], "n_links": 1, "runs": 4, "modes": ["cec", "none"]}
    sp = tmp_path / "spec.json"
    sp.write_text(json.dumps(spec))
    out = tmp_path / "o.csv"
    assert main(["sweep", str(sp), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 4 and rows[-1].mean_fidelity == 1.0


def test_rejections_exit_nonzero(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nodes": ["a", "b"], "links": [], "bogus": 1}))
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--runs", "0"]) == 2
    assert main(["run", "--z", "3"]) == 2
    assert main(["run", "--jobs", "0"]) == 2
    sp = tmp_path / "s.json"
    sp.write_text(json.dumps({"kind": "z", "grid": []}))
    assert main(["sweep", str(sp)]) == 2
    assert "error:" in capsys.readouterr().err


def test_validate_command(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qrecec", "run", "--runs", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "F=" in res.stdout
