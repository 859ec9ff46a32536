import json
import subprocess
import sys

import pytest

from spikewave.cli import parse_config, run
from spikewave.errors import ConfigError

R1_CONFIG = """
[problem]
omega = 1, 5
curvature2 = -0.15, 0
curvature3 = 0, -0.05

[coupling]
23 = 1
32 = 5

[reduced]
b = 0.5
"""


def _lines(path):
    return path.read_text().splitlines()


# ---------------------------------------------------------------- parsing


def test_defaults_are_two_equation():
    cfg = parse_config("")
    spec = cfg.spec()
    assert cfg.mode == "two-eq" and spec.components == 2
    assert cfg.rel_delta_for(False) == 0.05 and cfg.rel_delta_for(True) == 0.4


def test_overrides_and_exact_omega():
    cfg = parse_config("[problem]\nomega = 1/4, 0.36\n", epsilon=(0.04,))
    assert cfg.epsilon == (0.04,)
    assert str(cfg.spec().omega[1]) == "9/25"


def test_lv_beta_follows_schedule():
    cfg = parse_config(R1_CONFIG, mode="lv")
    spec = cfg.spec(0.01)
    assert spec.beta == pytest.approx(0.1 * 0.01**0.5)
    fixed = parse_config(R1_CONFIG.replace("[problem]", "[problem]\nbeta = 0.003"), mode="lv")
    assert fixed.spec(0.01).beta == 0.003


@pytest.mark.parametrize(
    "text, kw",
    [
        ("[nonsense]\nx = 1\n", {}),
        ("[problem]\nomeg = 1\n", {}),
        ("[problem]\ncomponents = 3\n", {}),
        ("[coupling]\n21 = 0.5\n", {}),
        ("[grid]\nn = many\n", {}),
        ("[sweep]\nepsilon = 0.5, 2\n", {}),
        ("", {"mode": "schrodinger"}),
        ("", {"preset": "R9"}),
        ("[problem\n", {}),
    ],
)
def test_bad_configs_rejected(text, kw):
    with pytest.raises(ConfigError):
        parse_config(text, **kw)


def test_digest_tracks_content():
    a = parse_config(R1_CONFIG, mode="lv")
    b = parse_config(R1_CONFIG, mode="lv")
    c = parse_config(R1_CONFIG, mode="lv", epsilon=(0.01,))
    assert a.digest == b.digest != c.digest


def test_preset_sets_mode():
    assert parse_config("", preset="GPEqual").mode == "gp"
    assert parse_config("", preset="R1").mode == "lv"
    grid = parse_config("", preset="grid-R3")
    assert grid.mode == "lv" and grid.exponent == 0.9
    assert tuple(map(str, grid.spec().omega)) == ("1/4", "9/25")


# ---------------------------------------------------------------- commands


def test_reduced_names_regime(tmp_path):
    cfgfile = tmp_path / "r1.ini"
    cfgfile.write_text(R1_CONFIG)
    assert run(["reduced", "--config", str(cfgfile), "--mode", "lv", "--out", str(tmp_path / "o")]) == 0
    lines = _lines(tmp_path / "o" / "reduced.csv")
    assert lines[0].startswith("# config-sha256=") and "command=reduced" in lines[0]
    assert any("regime=R1" in l for l in lines)
    assert any(l.startswith("# D2=[") for l in lines) and any(l.startswith("# D3=[") for l in lines)
    assert "epsilon,rho2,rho3" in "\n".join(lines)


def test_sweep_is_deterministic(tmp_path):
    args = ["sweep", "--preset", "R1", "--epsilon", "0.05,0.025,0.0125"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    a, b = (tmp_path / d / "sweep.csv" for d in "ab")
    assert a.read_bytes() == b.read_bytes()
    rows = [l.split(",") for l in _lines(a) if not l.startswith("#")][1:]
    assert len(rows) == 3 and all(r[7] == "ok" for r in rows)


def test_narrow_domain_reports_status(tmp_path):
    out = tmp_path / "o"
    assert run(["reduced", "--epsilon", "0.05", "--out", str(out)]) == 0
    text = (out / "reduced.csv").read_text()
    assert "no sign change" in text


def test_interaction_log_case(tmp_path):
    assert run(["interaction", "--case", "acr-ii-log", "--out", str(tmp_path)]) == 0
    lines = _lines(tmp_path / "interaction_acr-ii-log.csv")
    note = next(l for l in lines if "spread_last3=" in l)
    assert float(note.split("spread_last3=")[1]) <= 0.03


def test_ground_state_and_report(tmp_path):
    assert run(["ground-state", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "ground_state.csv").read_text().startswith("# config-sha256=")
    assert run(["report", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep["files"]) == {"decay_plateau.csv", "ground_state.csv"}
    assert "decay_plateau.csv" in (tmp_path / "report.txt").read_text()


def test_verify_header_contract(tmp_path):
    cfgfile = tmp_path / "v.ini"
    cfgfile.write_text("[grid]\nn = 64\nnx = 64\n")
    assert run(["verify", "--config", str(cfgfile), "--epsilon", "0.05", "--out", str(tmp_path)]) == 0
    lines = [l for l in _lines(tmp_path / "verify.csv") if not l.startswith("#")]
    assert lines[0] == "epsilon,rho_measured,rho_predicted,ratio"
    eps, measured, predicted, ratio = map(float, lines[1].split(","))
    assert eps == 0.05 and abs(measured / predicted - 1) < 0.2


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nkind = lv\ncomponents = 3\n")
    assert run(["reduced", "--config", str(bad), "--mode", "two-eq", "--out", str(tmp_path)]) == 2
    assert "ConfigError" in capsys.readouterr().err
    assert run(["reduced", "--config", str(tmp_path / "missing.ini")]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "spikewave", "ground-state", "--out", str(tmp_path)],
        capture_output=True, text=True, check=True,
    )
    assert "ground_state.csv" in out.stdout
