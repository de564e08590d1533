"""Config parsing and CLI subcommands, including exit-code taxonomy."""

import json
import math

import pytest

from qbcsim.cli import main
from qbcsim.config import ConfigError, load_config, parse_sweep


GOOD_CONFIG = """
# demo run
[experiment]
name = sfg-bpsk
receiver = sfg
alphabet = bpsk
N_S = 0.01
N_Z = 100
M = 1000000
sweep = 0.25:0.75:3
trials = 2000
seed = 7

[output]
directory = {outdir}
format = csv
"""


def _write_config(tmp_path, text=None, **fmt):
    cfg = tmp_path / "run.cfg"
    body = GOOD_CONFIG if text is None else text
    outdir = fmt.pop("outdir", tmp_path / "out")
    cfg.write_text(body.format(outdir=outdir, **fmt))
    return cfg


def test_parse_sweep():
    assert parse_sweep("1:3:3") == (1.0, 2.0, 3.0)
    assert parse_sweep("0.5:0.5:1") == (0.5,)
    with pytest.raises(ValueError):
        parse_sweep("3:1:5")
    with pytest.raises(ValueError):
        parse_sweep("1:2")


def test_load_config_roundtrip(tmp_path):
    cfg = load_config(_write_config(tmp_path))
    assert len(cfg.experiments) == 1
    name, exp = cfg.experiments[0]
    assert name == "sfg-bpsk"
    assert exp.master_seed == 7
    assert exp.sweep == (0.25, 0.5, 0.75)
    assert cfg.output_format == "csv"


def test_load_config_unknown_key_has_location(tmp_path):
    bad = GOOD_CONFIG.replace("seed = 7", "sed = 7")
    path = _write_config(tmp_path, text=bad)
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "sed" in str(err.value)
    # the diagnostic carries file:line
    assert str(path) in str(err.value)
    assert f":{err.value.line}:" in str(err.value)


def test_load_config_unknown_section(tmp_path):
    path = _write_config(tmp_path, text="[inventory]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_load_config_missing_key(tmp_path):
    bad = GOOD_CONFIG.replace("M = 1000000\n", "")
    with pytest.raises(ConfigError) as err:
        load_config(_write_config(tmp_path, text=bad))
    assert "'M'" in str(err.value)


def test_bounds_table_values(tmp_path, capsys):
    out = tmp_path / "bounds.csv"
    code = main(["bounds", "--sweep", "0.5:1.5:3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == [
        "s", "het_pam", "het_bpsk", "het_qpsk",
        "pa_pam", "pa_bpsk", "sfg_pam", "sfg_bpsk", "sfg_qpsk",
    ]
    assert len(lines) == 4
    row1 = dict(zip(header, map(float, lines[2].split(","))))
    assert row1["s"] == 1.0
    assert row1["sfg_bpsk"] == pytest.approx(math.exp(-4.0), abs=1e-12)
    assert row1["het_bpsk"] == pytest.approx(0.25 * math.erfc(1.0), rel=1e-12)
    assert row1["pa_bpsk"] == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_bounds_csv_is_lossless(tmp_path):
    out = tmp_path / "bounds.csv"
    assert main(["bounds", "--sweep", "0.1:20:25", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    from qbcsim.cli import bound_table_row

    for line in lines[1:]:
        row = dict(zip(header, map(float, line.split(","))))
        expect = bound_table_row(row["s"])
        for key, val in expect.items():
            assert row[key] == val  # exact round-trip through 17 digits


def test_bounds_pa_qpsk_refused(capsys):
    code = main(["bounds", "--columns", "pa_qpsk"])
    assert code == 4
    assert "no gain" in capsys.readouterr().err


def test_bounds_bad_sweep_usage_error():
    assert main(["bounds", "--sweep", "bogus"]) == 2


def test_bounds_io_error(tmp_path):
    assert main(["bounds", "--out", str(tmp_path / "nodir" / "x.csv")]) == 3


def test_simulate_end_to_end(tmp_path, capsys):
    cfgpath = _write_config(tmp_path)
    code = main(["simulate", str(cfgpath)])
    assert code == 0
    outdir = tmp_path / "out"
    curve = (outdir / "sfg-bpsk.csv").read_text()
    assert curve.splitlines()[0].startswith("s,empirical_ber")
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary[0]["experiment"] == "sfg-bpsk"
    assert "fitted_exponent" in summary[0]
    # SFG-BPSK empirical exponent sits near 4x the classical coefficient
    assert summary[0]["exponent_ratio_vs_classical"] == pytest.approx(4.0, abs=1.2)


def test_simulate_rerun_is_byte_identical(tmp_path):
    cfgpath = _write_config(tmp_path)
    assert main(["simulate", str(cfgpath), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", str(cfgpath), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "sfg-bpsk.csv").read_bytes() == (
        tmp_path / "b" / "sfg-bpsk.csv"
    ).read_bytes()


def test_simulate_json_roundtrip(tmp_path):
    cfgpath = _write_config(tmp_path)
    assert main(["simulate", str(cfgpath), "--format", "json"]) == 0
    payload = json.loads((tmp_path / "out" / "sfg-bpsk.json").read_text())
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert payload["points"] == summary[0]["points"]
    # JSON floats round-trip exactly
    again = json.loads(json.dumps(payload))
    assert again == payload


def test_simulate_config_error_exit_code(tmp_path):
    bad = GOOD_CONFIG.replace("alphabet = bpsk", "alphabet = 16qam")
    assert main(["simulate", str(_write_config(tmp_path, text=bad))]) == 2


def test_simulate_unsupported_pair_exit_code(tmp_path):
    bad = GOOD_CONFIG.replace("receiver = sfg", "receiver = pa").replace(
        "alphabet = bpsk", "alphabet = qpsk"
    )
    assert main(["simulate", str(_write_config(tmp_path, text=bad))]) == 2


def test_simulate_missing_config_io_error(tmp_path):
    assert main(["simulate", str(tmp_path / "absent.cfg")]) == 3


def test_link_budget_output(capsys):
    code = main([
        "link-budget",
        "--gt", "100", "--gr", "100", "--f-hz", "1e9",
        "--rt", "10", "--rr", "10", "--sigma-q", "0.01",
        "--t", "290", "--w", "1e6", "--ts", "1e-3",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "6042.119563" in out
    assert "M = 1000" in out
    eta_line = next(line for line in out.splitlines() if line.startswith("eta"))
    assert float(eta_line.split("=")[1].split()[0]) == pytest.approx(
        4.5290989990698180e-07, rel=1e-12
    )
    assert "phase (omega R / c convention)" in out
    assert "phase (2 pi R / c convention, verbatim)" in out


def test_link_budget_quarter_on_doubled_distance(capsys):
    def eta_for(rr):
        main([
            "link-budget",
            "--gt", "100", "--gr", "100", "--f-hz", "1e9",
            "--rt", "10", "--rr", rr, "--sigma-q", "0.01",
            "--t", "290", "--w", "1e6", "--ts", "1e-3",
        ])
        out = capsys.readouterr().out
        line = next(l for l in out.splitlines() if l.startswith("eta"))
        return float(line.split("=")[1].split()[0])

    assert eta_for("20") == pytest.approx(eta_for("10") / 4.0, rel=1e-12)


def test_link_budget_rejects_nonpositive():
    code = main([
        "link-budget",
        "--gt", "100", "--gr", "100", "--f-hz", "1e9",
        "--rt", "-10", "--rr", "10", "--sigma-q", "0.01",
        "--t", "290", "--w", "1e6", "--ts", "1e-3",
    ])
    assert code == 2


def test_security_report(capsys):
    assert main(["security"]) == 0
    out = capsys.readouterr().out
    assert "ratio = 4" in out
    assert "0.50: penalty 0.5" in out
    assert "negates the PA-receiver gain" in out


def test_security_simulation(capsys):
    assert main(["security", "--simulate", "--trials", "20000", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if "eavesdropper BER" in l)
    ber = float(line.split("=")[1].split()[0])
    assert abs(ber - 0.5) < 3 * math.sqrt(0.25 / 20000)


def test_usage_error_exit_code():
    assert main(["bogus-command"]) == 2
