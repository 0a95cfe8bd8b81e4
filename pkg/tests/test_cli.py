import math

import pytest

from permstc.cli import main, parse_angle, parse_snr_grid, read_config
from permstc.codes import load_code


def test_parse_helpers(tmp_path):
    assert parse_snr_grid("0:10:2.5") == [0.0, 2.5, 5.0, 7.5, 10.0]
    assert parse_snr_grid("3, 7") == [3.0, 7.0]
    with pytest.raises(ValueError):
        parse_snr_grid("5:1:1")
    assert parse_angle("7pi/4") == pytest.approx(7 * math.pi / 4)
    assert parse_angle("pi") == pytest.approx(math.pi)
    assert parse_angle("-pi/2") == pytest.approx(-math.pi / 2)
    assert parse_angle("0.5") == 0.5
    cfg = tmp_path / "a.cfg"
    cfg.write_text("# comment\nvalues = 0, 1\n\nN = 32  # trailing\n")
    assert read_config(cfg) == {"values": "0, 1", "N": "32"}
    cfg.write_text("oops\n")
    with pytest.raises(ValueError):
        read_config(cfg)


def test_build_evaluate(tmp_path, capsys):
    out = tmp_path / "t4.txt"
    assert main(["build", "--preset", "nc-T4", "--out", str(out)]) == 0
    assert len(load_code(out)) == 21
    assert main(["evaluate", "--code", str(out), "--snr-db", "10"]) == 0
    text = capsys.readouterr().out
    assert "cardinality = 21" in text
    assert "full_diversity = true" in text
    assert "min_diversity_product" in text


def test_build_from_spec_file(tmp_path):
    spec = tmp_path / "s.cfg"
    spec.write_text("values = 0,1\nmultiplicities = 8,1\nN = 8\nT = 4\ninner = qpsk\nalpha = 7pi/4\n")
    out = tmp_path / "c.txt"
    assert main(["build", "--spec", str(spec), "--out", str(out)]) == 0
    code = load_code(out)
    assert len(code) == 96 and code.mode == "coherent"


def test_build_reports_errors(tmp_path, capsys):
    spec = tmp_path / "s.cfg"
    spec.write_text("values = 0,1\nmultiplicities = 7,2\nN = 99\nT = 4\n")
    assert main(["build", "--spec", str(spec), "--out", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err


def test_simulate_byte_identical(tmp_path):
    code = tmp_path / "t4.txt"
    main(["build", "--preset", "nc-T4", "--out", str(code)])
    args = ["simulate", "--code", str(code), "--snr-db", "4:8:2", "--trials", "3000", "--seed", "42"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv"), "--workers", "3"])
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert a.decode().splitlines()[0] == "snr_db,trials,symbol_errors,bit_errors,ser,ber,ber_lo95,ber_hi95"
    assert len(a.decode().splitlines()) == 4


def test_simulate_config_file(tmp_path):
    code = tmp_path / "a.txt"
    main(["build", "--preset", "alamouti-bpsk", "--out", str(code)])
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(f"code = {code}\nmode = coherent\nsnr_db = 5\ntrials = 1000\nseed = 1\nout = {tmp_path / 'o.csv'}\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert (tmp_path / "o.csv").exists()
    assert main(["simulate", "--config", str(cfg), "--trials", "500", "--out", str(tmp_path / "p.csv")]) == 0
    assert ",500," in (tmp_path / "p.csv").read_text()
