import json
import subprocess
import sys

import numpy as np
import pytest

from fockcascade import cli
from fockcascade.scheme import Scheme


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def design(tmp_path, capsys, *target, extra=()):
    path = tmp_path / "s.json"
    code, _, err = run(["design", *target, "--out", str(path), *extra], capsys)
    assert code == 0, err
    return path, json.loads(path.read_text())


def test_design_london(tmp_path, capsys):
    _, doc = design(tmp_path, capsys, "london", "1", "0.0", extra=["--tsq", "0.62"])
    assert len(doc["stages"]) == 1
    assert doc["report"]["efficiency_numeric"] == pytest.approx(0.41, abs=0.005)
    assert set(doc) >= {"cutoff", "t_re", "t_im", "r_re", "r_im", "stages"}
    assert set(doc["stages"][0]) == {"alpha_re", "alpha_im", "clicks"}


def test_design_fock_and_cat(tmp_path, capsys):
    _, doc = design(tmp_path, capsys, "fock", "3")
    assert doc["stages"] == [{"alpha_re": 0.0, "alpha_im": 0.0, "clicks": 3}]
    _, doc = design(tmp_path, capsys, "cat", "2", "1.0")
    assert [s["clicks"] for s in doc["stages"]] == [2, 2]
    _, doc = design(tmp_path, capsys, "cat", "2", "1.0", extra=["--no-merge"])
    assert [s["clicks"] for s in doc["stages"]] == [1, 1, 1, 1]


def test_design_amplitude_list_and_trig(tmp_path, capsys):
    _, doc = design(tmp_path, capsys, "amps", "1", "0.5j", "-0.2")
    assert sum(s["clicks"] for s in doc["stages"]) == 2
    _, doc = design(tmp_path, capsys, "trig", "1", "0.6", "0.3")
    assert len(doc["stages"]) == 1


def test_verify_round_trip(tmp_path, capsys):
    path, doc = design(tmp_path, capsys, "london", "2", "0.4")
    for rho in (["vacuum"], ["fock", "1"], ["coherent", "0.3", "-0.2"], ["superpos01", "0.6", "0"]):
        code, out, err = run(["verify", str(path), *rho], capsys)
        assert code == 0, err
        rep = json.loads(out)
        assert rep["ok"] and rep["relative_difference"] < 1e-6
        assert rep["recorded_efficiency_numeric_relative_difference"] < 1e-9


def test_verify_density_file(tmp_path, capsys):
    path, _ = design(tmp_path, capsys, "london", "1", "0.0")
    rho = np.array([[0.7, 0.1 - 0.2j], [0.1 + 0.2j, 0.3]])
    f = tmp_path / "rho.json"
    f.write_text(json.dumps({"dim": 2, "entries": [[z.real, z.imag] for z in rho.ravel()]}))
    code, out, _ = run(["verify", str(path), "file", str(f)], capsys)
    assert code == 0 and json.loads(out)["ok"]


def test_verify_detects_tampered_report(tmp_path, capsys):
    path, doc = design(tmp_path, capsys, "london", "1", "0.0")
    doc["report"]["efficiency_numeric"] *= 1.01
    path.write_text(json.dumps(doc))
    code, out, _ = run(["verify", str(path), "vacuum"], capsys)
    assert code == 2 and not json.loads(out)["ok"]


def test_sample_reproducible(tmp_path, capsys):
    path, _ = design(tmp_path, capsys, "london", "1", "0.0")
    argv = ["sample", str(path), "superpos01", "0.6", "0", "--shots", "20000", "--seed", "3", "--deterministic"]
    code, first, _ = run(argv, capsys)
    assert code == 0
    _, second, _ = run(argv, capsys)
    assert first == second
    doc = json.loads(first)
    assert doc["shots"] == 20000 and doc["seed"] == 3 and "rng" in doc
    assert abs(doc["estimate"] - 0.941176) < 5 * doc["stderr"]


def test_figures_csv(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    code, _, _ = run(["figures", "2", "--grid", "40", "--deterministic", "--out", str(out)], capsys)
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0].startswith("# {") and json.loads(lines[0][2:])["grid"] == 40
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "Tabs," + ",".join(f"eff_N{n}" for n in range(1, 9))
    rows = [ln.split(",") for ln in lines if ln[0].isdigit()]
    assert len(rows) == 40
    assert all(v == cli.fmt(float(v)) for row in rows for v in row)
    assert float(rows[0][0]) == pytest.approx(1 / 41)


def test_figures_deterministic_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["figures", "6", "--grid", "30", "--deterministic", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    cli.main(["figures", "6", "--grid", "30", "--out", str(a)])
    assert "generated" in a.read_text().splitlines()[0]


def test_figures_json_format(capsys):
    code, out, _ = run(["figures", "4", "--grid", "20", "--format", "json", "--deterministic"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == ["phi", "tsq_opt", "eff_max"] and len(doc["rows"]) == 20


def test_seventeen_digits():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(np.pi)) == np.pi


def test_phase_command(capsys):
    code, out, _ = run(["phase", "canonical", "1", "vacuum", "--grid", "8", "--deterministic"], capsys)
    assert code == 0
    vals = [float(ln.split(",")[1]) for ln in out.splitlines()[2:]]
    assert np.allclose(vals, 1 / (2 * np.pi))
    code, out, _ = run(["phase", "trig", "1", "vacuum", "--grid", "8", "--chi", "0"], capsys)
    assert code == 0 and out.splitlines()[2] == "phi,prob,direct_only"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": 12, "tsq": 0.5}))
    code, out, _ = run(["phase", "canonical", "1", "vacuum", "--config", str(cfg), "--deterministic"], capsys)
    assert code == 0 and len(out.splitlines()) == 2 + 12
    code, out, _ = run(["phase", "canonical", "1", "vacuum", "--config", str(cfg), "--grid", "5",
                        "--deterministic"], capsys)
    assert len(out.splitlines()) == 2 + 5
    assert json.loads(out.splitlines()[0][2:])["tsq"] == 0.5


@pytest.mark.parametrize("argv", [
    ["design"],
    ["design", "bogus", "1"],
    ["design", "fock", "x"],
    ["design", "fock", "2", "--tsq", "1.5"],
    ["verify", "missing.json", "vacuum"],
    ["figures", "5"],
    ["phase", "canonical", "1", "coherent", "1"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert cli.main(argv) == 1


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"nope": 1}')
    assert cli.main(["figures", "2", "--config", str(cfg)]) == 1


def test_design_verification_failure_exit_2(capsys):
    # zeros far outside the unit disc at small |T|: the design cannot be verified
    code = cli.main(["design", "amps", "1", "0", "0", "0", "0", "0", "0", "0.0001", "--tsq", "0.05"])
    assert code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fockcascade", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "design" in out.stdout


def test_scheme_file_is_loadable(tmp_path, capsys):
    path, doc = design(tmp_path, capsys, "cat", "1", "0.8")
    sch = Scheme.from_dict(doc)
    assert sch.to_dict() == {k: doc[k] for k in sch.to_dict()}
