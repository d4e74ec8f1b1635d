import csv
from pathlib import Path

import pytest

from wildflow2d.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_verify_geometry(tmp_path):
    assert main(["verify", "geometry", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "report.csv")
    assert rows[0] == ["name", "status", "value", "threshold"]
    rec = {r[0]: r for r in rows[1:]}
    assert rec["geometry reconstruction"][1] == "pass"
    assert float(rec["geometry reconstruction"][3]) == 1e-12


def test_verify_blocks_supports(tmp_path):
    assert main(["verify", "blocks", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "report.csv")
    supports = [r for r in rows if r[0].endswith("mode supports")]
    assert len(supports) == 3 and all(r[1] == "pass" for r in supports)


def test_verify_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["verify", "all", "--seed", "7", "--out", str(out)]) == 0
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    names = [r[0] for r in read_rows(a / "report.csv")[1:]]
    assert len(names) == len(set(names))
    assert b"\r\n" not in (a / "report.csv").read_bytes()


def test_unknown_suite_rejected():
    with pytest.raises(SystemExit):
        main(["verify", "everything"])


@pytest.mark.parametrize("regime", ["additive", "multiplicative"])
def test_iterate_small(tmp_path, regime):
    assert main(["iterate", "--config", str(CONFIGS / f"small_{regime}.yaml"), "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "diagnostics.csv")
    checks = {r[1] for r in rows[1:]}
    assert "R_CtL1" in checks
    for piece in ("R_lin", "R_cor", "R_osc", "R_com1", "R_com2"):
        assert f"{piece}_L1" in checks
    if regime == "multiplicative":
        assert "m_L" in checks and "Upsilon pathwise bound" in checks
    assert (tmp_path / "v_level1.wf2d").exists()


def test_iterate_is_deterministic(tmp_path):
    cfg = str(CONFIGS / "small_additive.yaml")
    for d in ("a", "b"):
        assert main(["iterate", "--config", cfg, "--seed", "3", "--out", str(tmp_path / d)]) == 0
    for name in ("report.csv", "diagnostics.csv", "v_level1.wf2d", "noise_path.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_strict_config_aborts(capsys):
    code = main(["iterate", "--config", str(CONFIGS / "strict_small_b.yaml")])
    assert code != 0
    assert "b > 16/α" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("m: 0.5\nlambda_one: 100\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown config keys"):
        main(["iterate", "--config", str(bad)])


def test_sweep_rejects_inadmissible_lambda(capsys):
    assert main(["sweep", "lambda", "--values", "100,105"]) != 0
    assert "multiples of 10" in capsys.readouterr().err


def test_sweep_l_footer(tmp_path):
    assert main(["sweep", "l", "--values", "1,0.5", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sweep_l.csv")
    assert rows[0][0] == "l" and len(rows) == 4
    assert rows[-1][0] == "slope"


def test_sweep_grid_invariants(tmp_path):
    assert main(["sweep", "grid", "--values", "256"]) == 2
    assert main(["sweep", "grid", "--values", "512,1024", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sweep_grid.csv")[1:3]
    for r in rows:
        assert all(float(x) <= 1e-8 for x in r[1:])


def test_noise_additive(tmp_path):
    assert main(["noise", "--regime", "additive", "--paths", "2000", "--steps", "20", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "noise_modes.csv")
    ratios = [float(r[-1]) for r in rows[1:]]
    assert all(0.85 < x < 1.15 for x in ratios)
    stops = read_rows(tmp_path / "stopping_times.csv")[1:]
    assert all(float(t) == 1e6 for L, t in stops if float(L) == 1e6)


def test_noise_multiplicative(tmp_path):
    assert main(["noise", "--regime", "multiplicative", "--paths", "5000", "--steps", "20", "--out", str(tmp_path)]) == 0
    rows = dict(read_rows(tmp_path / "noise_upsilon.csv")[1:])
    assert abs(float(rows["upsilon_mean_ratio"]) - 1) < 0.1


def test_noise_needs_paths(capsys):
    assert main(["noise", "--paths", "0"]) != 0
