import csv
import json
import math
import shutil
import subprocess
import xml.etree.ElementTree as ET

import pytest

from cavsqueeze import cli, gaussian
from cavsqueeze.errors import IntegrationError

criterion = pytest.mark.criterion
PROPS = "property suites: symplectic floor, norm and <S^2> conservation, Sz conservation, theta-argmin, CLI determinism"

REFERENCE = {
    "cavity_coupling": "2pi*100kHz", "rabi_frequency": "1e4 g", "detuning": "1e5 g",
    "two_photon_detuning": "500 g", "atomic_decay": "100 g", "cavity_decay": "100 g",
    "atom_number": 5e6, "interaction_time": "0.3 us",
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def error_payload(err):
    return json.loads(err.strip().splitlines()[-1])


# --- derive-params ----------------------------------------------------------------

def test_derive_reference(tmp_path, capsys):
    code, out, err = run(["derive-params", "-c", write_config(tmp_path, REFERENCE)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["effective"]["r0"] == 0.1
    assert report["effective"]["regime_flags"]["small_r0"] is True
    assert "small_r0" in err


def test_derive_no_drive_gives_zero_rates(tmp_path, capsys):
    cfg = dict(REFERENCE, rabi_frequency=0)
    code, out, _ = run(["derive-params", "-c", write_config(tmp_path, cfg)], capsys)
    eff = json.loads(out)["effective"]
    assert code == 0
    assert all(eff[k] == 0 for k in ("kappa0", "chi0", "eta", "alpha", "eta0", "beta", "phi0"))


def test_derive_zero_detuning_names_field(tmp_path, capsys):
    code, _, err = run(["derive-params", "-c", write_config(tmp_path, REFERENCE), "--detuning", "0"], capsys)
    assert code == 2
    payload = error_payload(err)
    assert payload["fields"] == ["detuning"] and payload["error"] == "ParameterError"


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "detuning": 1,,\n}')
    code, _, err = run(["derive-params", "-c", str(path)], capsys)
    assert code == 2
    assert ":2:" in error_payload(err)["message"]


def test_missing_fields_listed(tmp_path, capsys):
    code, _, err = run(["derive-params", "-c", write_config(tmp_path, {"detuning": 1})], capsys)
    assert code == 2
    assert set(error_payload(err)["fields"]) == {"rabi_frequency", "cavity_coupling", "two_photon_detuning"}


# --- simulate ----------------------------------------------------------------------

def test_simulate_dicke_matches_gaussian(tmp_path, capsys):
    # kappa0 = 1, N = 100: alpha = 100 t, scanned up to alpha = 2
    cfg = {"cavity_coupling": 1, "rabi_frequency": 1, "detuning": 1, "two_photon_detuning": 0.25,
           "atom_number": 100, "interaction_time": 0.02, "ideal": True, "points": 41}
    out = tmp_path / "dicke"
    code, _, _ = run(["simulate", "--engine", "dicke", "-c", write_config(tmp_path, cfg), "-o", str(out)], capsys)
    assert code == 0
    best = json.loads((out / "dicke_report.json").read_text())["best"]
    assert best["xi2"] == pytest.approx(gaussian.xi2_oat_ideal(best["alpha"]).xi2, rel=0.15)
    rows = read_csv(out / "dicke_series.csv")
    assert rows[0] == ["t", "alpha", "sx", "sy", "sz", "xi2", "dB", "theta"] and len(rows) == 42


def test_simulate_dicke_through_depolarized_state(tmp_path, capsys):
    cfg = {"cavity_coupling": 1, "rabi_frequency": 1, "detuning": 1, "two_photon_detuning": 0.25,
           "atom_number": 10, "interaction_time": math.pi / 2, "ideal": True, "points": 3}
    out = tmp_path / "cat"
    code, _, _ = run(["simulate", "--engine", "dicke", "-c", write_config(tmp_path, cfg), "-o", str(out)], capsys)
    assert code == 0
    assert read_csv(out / "dicke_series.csv")[-1][5] == "nan"
    assert json.loads((out / "dicke_report.json").read_text())["final"] is None


def test_simulate_dicke_capacity_is_config_error(tmp_path, capsys):
    code, _, err = run(["simulate", "--engine", "dicke", "-c", write_config(tmp_path, REFERENCE),
                        "-o", str(tmp_path / "x")], capsys)
    assert code == 2 and error_payload(err)["error"] == "CapacityError"


def test_simulate_gaussian_reference(tmp_path, capsys):
    out = tmp_path / "g"
    code, _, _ = run(["simulate", "--engine", "gaussian", "-c", write_config(tmp_path, REFERENCE),
                      "-o", str(out)], capsys)
    assert code == 0
    report = json.loads((out / "gaussian_report.json").read_text())
    assert report["alpha"] == pytest.approx(4.7, abs=0.05)
    assert report["eta0"] == pytest.approx(0.094, abs=0.001)
    assert report["final"]["dB"] > 10 and report["squeezing_over_10dB"] is True


def test_simulate_meanfield_without_drive_is_flat(tmp_path, capsys):
    cfg = {"cavity_coupling": 1, "rabi_frequency": 0, "detuning": 100, "two_photon_detuning": 10,
           "atom_number": 100, "interaction_time": 1, "points": 21}
    out = tmp_path / "mf"
    code, _, _ = run(["simulate", "--engine", "meanfield", "-c", write_config(tmp_path, cfg), "-o", str(out)], capsys)
    assert code == 0
    rows = read_csv(out / "meanfield_series.csv")
    assert len(rows) == 22
    assert all(r[1:] == rows[1][1:] for r in rows[1:])


def test_simulate_requires_time(tmp_path, capsys):
    cfg = dict(REFERENCE, interaction_time=0)
    code, _, err = run(["simulate", "--engine", "gaussian", "-c", write_config(tmp_path, cfg),
                        "-o", str(tmp_path / "o")], capsys)
    assert code == 2 and error_payload(err)["fields"] == ["interaction_time"]


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise IntegrationError("step size underflow", error_estimate=1.0)

    monkeypatch.setattr(gaussian, "trajectory", broken)
    code, _, err = run(["simulate", "--engine", "gaussian", "-c", write_config(tmp_path, REFERENCE),
                        "-o", str(tmp_path / "o")], capsys)
    assert code == 3 and error_payload(err)["error"] == "IntegrationError"


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(["figure", "2a", "-o", str(blocker / "sub")], capsys)
    assert code == 2 and error_payload(err)["fields"] == ["output_dir"]


# --- sweep and figures ---------------------------------------------------------------

def test_sweep_stdout(capsys):
    code, out, _ = run(["sweep", "--protocol", "tat", "--alpha", "0:8:0.1", "--eta0", "0:0.3:0.05"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["protocol", "alpha", "eta0", "xi2", "dB", "theta"]
    assert len(rows) == 1 + 81 * 7
    assert {len(r) for r in rows} == {6}
    assert rows[1] == ["TAT", "0", "0", "1", "0", "0.785398163397"]


def test_sweep_bad_range(capsys):
    code, _, err = run(["sweep", "--alpha", "0:8", "--eta0", "0"], capsys)
    assert code == 2 and error_payload(err)["fields"] == ["alpha"]
    code, _, err = run(["sweep", "--alpha", "1", "--eta0", "1.5"], capsys)
    assert code == 2 and error_payload(err)["fields"] == ["eta0"]


def _figure(tmp_path, capsys, fig, *extra):
    out = tmp_path / f"fig{fig}"
    assert run(["figure", fig, "-o", str(out), *extra], capsys)[0] == 0
    ET.parse(out / f"fig{fig}.svg")
    rows = read_csv(out / f"fig{fig}.csv")
    assert len({len(r) for r in rows}) == 1
    return out, rows


def test_figure_2a(tmp_path, capsys):
    _, rows = _figure(tmp_path, capsys, "2a")
    body = [dict(zip(rows[0], r)) for r in rows[1:]]
    # without coupling only the pumping loss of <Sx> remains: xi2 = 1 / (1 - eta0)
    for r in body:
        if float(r["alpha"]) == 0:
            assert float(r["dB"]) == pytest.approx(10 * math.log10(1 - float(r["eta0"])), abs=1e-9)
    (tat,) = [r for r in body if r["protocol"] == "TAT" and r["eta0"] == "0.1" and r["alpha"] == "5"]
    assert float(tat["dB"]) == pytest.approx(15.5, abs=0.1)
    assert {r["eta0"] for r in body} == {"0", "0.05", "0.1", "0.2"}


def test_figure_2b(tmp_path, capsys):
    _, rows = _figure(tmp_path, capsys, "2b")
    assert rows[0] == ["alpha", "eta0", "xi2_oat_minus_tat"]


def test_figure_2c_marks_experimental_depth(tmp_path, capsys):
    _, rows = _figure(tmp_path, capsys, "2c")
    body = [dict(zip(rows[0], r)) for r in rows[1:]]
    (mark,) = [r for r in body if float(r["d_c"]) == pytest.approx(6000 / math.pi, rel=1e-11)]
    assert float(mark["dB_oat"]) == pytest.approx(13.4, abs=0.5)
    assert float(mark["dB_tat"]) == pytest.approx(19.6, abs=0.5)
    dcs = [float(r["d_c"]) for r in body]
    assert dcs == sorted(dcs) and dcs[0] == pytest.approx(10) and dcs[-1] == pytest.approx(1e4)


@criterion("8", PROPS)
def test_outputs_are_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, REFERENCE)
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert run(["figure", "2c", "-o", str(out)], capsys)[0] == 0
        assert run(["figure", "2a", "-o", str(out), "--jobs", str(1 + 2 * k)], capsys)[0] == 0
        assert run(["simulate", "--engine", "gaussian", "-c", cfg, "-o", str(out)], capsys)[0] == 0
        assert run(["derive-params", "-c", cfg, "-o", str(out)], capsys)[0] == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1]
    assert len(outputs[0]) == 7


@pytest.mark.skipif(shutil.which("squeeze") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["squeeze", "derive-params", "-c", write_config(tmp_path, REFERENCE)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["effective"]["r0"] == 0.1
