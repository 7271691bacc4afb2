import pytest

from vvlc.cli import main


def test_emit_preset_round_trip(tmp_path, capsys):
    out = tmp_path / "preset.toml"
    assert main(["emit-preset", "--out", str(out)]) == 0
    assert main(["emit-preset", "--scenario", str(out)]) == 0
    assert capsys.readouterr().out == out.read_text()


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("ellipse.a_m = 19\nellipse.b_m = 40\n")
    assert main(["los-sweep", "--scenario", str(bad)]) == 2
    assert "a > b violated" in capsys.readouterr().err


def test_unknown_preset_is_config_error(capsys):
    assert main(["emit-preset", "no-such"]) == 2


def test_runtime_error_exit_code(tmp_path, capsys):
    assert main(["sb-sweep", "--variable", "k", "--values", "-1"]) == 3


def test_sb_sweep_k(capsys):
    assert main(["sb-sweep", "--variable", "k", "--values", "3", "30"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("k,time_s,distance_m,sb1_lsh_W")
    assert len(lines) == 3


def test_sb_sweep_alpha_degrees(capsys):
    assert main(["sb-sweep", "--variable", "alpha0", "--values", "30"]) == 0
    row = capsys.readouterr().out.splitlines()[1]
    assert row.startswith("5.23598776e-01")


def test_los_sweep_mode_number(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["los-sweep", "--out", str(a)]) == 0
    assert main(["los-sweep", "--mode-number", "20", "--out", str(b)]) == 0
    ha = a.read_text().splitlines()
    assert ha[0] == "time_s,distance_m,los_lsh_W,los_rsh_W,los_W,total_W,total_bare_W"
    assert len(ha) == 322
    assert a.read_text() != b.read_text()


@pytest.mark.parametrize("flags", [["--geometry-backend", "paper"], ["--lens-mode", "constant-cpc"], ["--seed", "4"]])
def test_common_flags(flags, tmp_path):
    assert main(["snr-sweep", "--out", str(tmp_path / "x.csv")] + flags) == 0


def test_bad_flag_exits_argparse():
    with pytest.raises(SystemExit):
        main(["los-sweep", "--geometry-backend", "fancy"])
