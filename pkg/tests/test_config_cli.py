import functools
from pathlib import Path

import pytest

from spreadwave import cli, config, wave
from spreadwave.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]
FISHER_CFG = (ROOT / "configs" / "fisher.cfg").read_text()
UNGULATE_CFG = (ROOT / "configs" / "ungulate.cfg").read_text()


def write(tmp_path, text, name="m.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_parse_shipped_configs():
    f = config.parse_text(FISHER_CFG)
    assert f.model_name == "fisher" and f.c_values == (2.5,) and f.sim.X == 250.0
    u = config.parse_text(UNGULATE_CFG)
    assert u.model_params == dict(d1=1.0, d2=0.5, alpha=1.0, delta=1.0, r1=2.0, r2=1.0)
    assert u.build_model().name == "ungulate"


@pytest.mark.parametrize("text,line,match", [
    ("model = fisher\nfoo = 1\n", 2, "unknown key"),
    ("model = fisher\nd = 1\nd = 2\n", 3, "duplicate"),
    ("model = fisher\nd =\n", 2, "empty"),
    ("model = fisher\nd = one\n", 2, "number"),
    ("model = fisher\nthis line has no equals\n", 2, "key = value"),
    ("# comment\nmodel = snail\n", 2, "unknown model"),
    ("model = fisher\nd1 = 1\n", 2, "does not apply"),
    ("model = fisher\nc = 2.5, x\n", 2, "comma-separated"),
])
def test_parse_errors_carry_line_numbers(text, line, match):
    with pytest.raises(ConfigError, match=match) as info:
        config.parse_text(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_parse_missing_keys():
    with pytest.raises(ConfigError, match="model"):
        config.parse_text("d = 1\n")
    with pytest.raises(ConfigError, match="requires key 'delta'"):
        config.parse_text("model = ungulate\nd1 = 1\nd2 = 1\nalpha = 1\nr1 = 2\nr2 = 1\n")


def test_alpha_at_least_r1_rejected_at_parse():
    text = UNGULATE_CFG.replace("alpha = 1", "alpha = 2")
    with pytest.raises(ConfigError, match="alpha"):
        config.parse_text(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        config.load(tmp_path / "nope.cfg")


def test_speed_command(tmp_path, capsys):
    for text in (FISHER_CFG, UNGULATE_CFG):
        cfg = write(tmp_path, text)
        assert cli.main(["speed", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "c_star = 2.000000000" in out
        assert "c[2.5].Lambda_c = 0.500000000" in out
        assert cfg.with_name("m.speed.txt").read_text() == out


def test_speed_output_is_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, UNGULATE_CFG)
    cli.main(["speed", "--config", str(cfg)])
    first = capsys.readouterr().out
    cli.main(["speed", "--config", str(cfg)])
    assert capsys.readouterr().out == first


def test_speed_below_c_star_exits_1(tmp_path, capsys):
    cfg = write(tmp_path, FISHER_CFG)
    assert cli.main(["speed", "--config", str(cfg), "--c", "1.5"]) == 1
    err = capsys.readouterr().err
    assert "no traveling wave exists below c*" in err


def test_config_error_exits_3(tmp_path, capsys):
    cfg = write(tmp_path, "model = fisher\nbogus = 1\n")
    assert cli.main(["speed", "--config", str(cfg)]) == 3
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["speed", "--config", str(tmp_path / "missing.cfg")]) == 3


def test_wave_command(tmp_path, capsys):
    cfg = write(tmp_path, FISHER_CFG)
    out_dir = tmp_path / "out"
    assert cli.main(["wave", "--config", str(cfg), "--out", str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert "fminus.decay_fit = pass" in out and "FAIL" not in out
    assert (out_dir / "wave_fminus.csv").read_text().startswith("xi,u1\n")
    assert (out_dir / "wave_sandwich.csv").exists()


def test_wave_nonconvergence_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(wave, "sandwich_wave", functools.partial(wave.sandwich_wave, max_iter=3))
    cfg = write(tmp_path, FISHER_CFG)
    assert cli.main(["wave", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "did not converge" in capsys.readouterr().err


def test_verify_shipped_configs_exit_0(tmp_path, capsys):
    for text in (FISHER_CFG, UNGULATE_CFG):
        cfg = write(tmp_path, text)
        out_dir = tmp_path / "out"
        assert cli.main(["verify", "--config", str(cfg), "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert (out_dir / "verify.txt").read_text() == out


def test_verify_d1_below_d2_fails_dominance(tmp_path, capsys):
    text = UNGULATE_CFG.replace("d1 = 1", "d1 = 0.4")
    cfg = write(tmp_path, text)
    assert cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    out = capsys.readouterr().out
    dominance = [line for line in out.splitlines() if "H2.dominance" in line]
    assert dominance and "FAIL" in dominance[0]


def test_report_lines_carry_margins(tmp_path):
    cfg = config.load(write(tmp_path, UNGULATE_CFG))
    rep = cli.cmd_verify(cfg, out=tmp_path / "o")
    assert rep.checks
    for c in rep.checks:
        assert isinstance(c.margin, float)
