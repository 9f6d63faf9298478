import csv
import subprocess
import sys

import pytest

from gapcount.cli import EXIT_CONFIG, EXIT_OK, main, parse_config
from gapcount.errors import ConfigurationError

MINIMAL = """
[field]
kind = constant
B_plus = 1

[lambda]
lambda_grid = 1e-3 1e-1 5
"""

INDICATOR = """
[field]
kind = smooth-step
B_minus = 0.5
B_plus = 1.0
center = -0.5
width = 0.05

[potential]
kind = indicator
amplitude = 0.4
region = rectangle
region_params = 1 2 -10 10

[grid]
n_k = 9

[lambda]
lambda_grid = 1e-6 1e-2 9
delta = 0.1
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.j == 1 and cfg.delta == 0.1 and cfg.potential.kind == "zero"
    assert cfg.echo["grid"]["n_k"] == "21"
    assert cfg.echo["gap"]["upper"] == "2"


@pytest.mark.parametrize("text, key", [
    (INDICATOR.replace("delta = 0.1", "delta = 1.5"), "delta"),
    (INDICATOR.replace("1e-6 1e-2 9", "1e-6 0.6 9"), "lambda_grid"),
    (MINIMAL.replace("B_plus = 1", ""), "B_plus"),
    (MINIMAL + "\n[grid]\nj = 0\n", "j"),
    (MINIMAL + "\n[grid]\nbogus = 1\n", "bogus"),
    (MINIMAL + "\n[oracle]\nenabled = yes\nboxes = -5 5 -5 5 100 100\n", "boxes"),
])
def test_config_errors_name_key(text, key):
    with pytest.raises(ConfigurationError) as exc:
        parse_config(text)
    assert exc.value.key == key


def test_bands_on_constant_field(tmp_path):
    out = tmp_path / "out"
    assert main(["bands", "--config", _write(tmp_path, MINIMAL), "--out", str(out)]) == EXIT_OK
    with open(out / "bands.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["k", "j", "E_j", "gap", "ratio"]
    for r in rows:
        assert abs(float(r["E_j"]) - (2 * int(r["j"]) - 1)) < 1e-6


def test_report_zero_potential(tmp_path):
    out = tmp_path / "out"
    assert main(["report", "--config", _write(tmp_path, MINIMAL), "--out", str(out)]) == EXIT_OK
    with open(out / "counting.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["lambda", "count_lower", "count_upper", "log_abs_log_lambda_sqrt"]
    assert all(r["count_lower"] == "0" and r["count_upper"] == "0" for r in rows)
    text = (out / "report.txt").read_text()
    assert "PASS  finiteness probe" in text
    assert "status: ok" in (out / "manifest.txt").read_text()


def test_report_indicator_contents(tmp_path):
    out = tmp_path / "out"
    assert main(["report", "--config", _write(tmp_path, INDICATOR), "--out", str(out)]) == EXIT_OK
    text = (out / "report.txt").read_text()
    assert "count_lower  count_upper" in text
    assert "C_minus < C_plus" in text
    with open(out / "fits.csv") as fh:
        header = next(csv.reader(fh))
    assert header[:4] == ["model", "coefficient", "residual_norm", "points_used"]
    assert len(header) == 4 + 9


def test_oracle_over_cap_exit_code(tmp_path, capsys):
    text = MINIMAL + "\n[oracle]\nboxes = -5 5 -5 5 100 100\n"
    assert main(["oracle", "--config", _write(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "boxes" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["bands", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gapcount", "bands", "--config",
                           _write(tmp_path, MINIMAL.replace("B_plus = 1", "B_plus = 1\nB_minus = 2")),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == EXIT_CONFIG and "B_minus" in proc.stderr
