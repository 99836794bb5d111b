import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hemicav import cli, gridio

DATA = Path(__file__).parent / "data"
CQED = {
    "emitter": {"dipole_moment": "60 D", "wavelength": "750 nm", "linewidth": "15 ueV"},
    "cavity": {"length": "50 um", "mirror_reflectivity": 0.996},
    "mode": {"waist_radius": "0.5 um"},
}


def write(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def call(*argv):
    return cli.main([str(a) for a in argv])


def report(out):
    return json.loads((Path(out) / "report.json").read_text())


def test_tmm_sweep_matches_golden(tmp_path):
    assert call("tmm", "sweep", "-c", DATA / "tmm_sweep_golden.yaml", "-o", tmp_path) == 0
    got = list(csv.reader(open(tmp_path / "sweep.csv")))
    want = list(csv.reader(open(DATA / "tmm_sweep_golden.csv")))
    assert got[0] == want[0] == ["wavelength_nm", "R", "T", "phase_rad"]
    a = np.array(got[1:], float)
    b = np.array(want[1:], float)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)
    rep = report(tmp_path)
    assert rep["schema"] == cli.SCHEMA_ID and rep["command"] == "tmm sweep"
    assert rep["outputs"]["max_abs_R_plus_T_minus_1"] < 1e-12


def test_cqed_report_strong_coupling(tmp_path):
    assert call("cqed", "report", "-c", write(tmp_path, CQED), "-o", tmp_path / "o") == 0
    out = report(tmp_path / "o")["outputs"]
    assert out["coupling_energy"] == pytest.approx(49, rel=0.05)
    assert out["strong"] is True and out["kappa"] == pytest.approx(7.9, abs=0.05)


def test_missing_unit_is_schema_error(tmp_path, capsys):
    cfg = json.loads(json.dumps(CQED))
    cfg["cavity"]["length"] = 50
    assert call("cqed", "report", "-c", write(tmp_path, cfg), "-o", tmp_path / "o") == cli.EXIT_SCHEMA
    assert "cavity.length" in capsys.readouterr().err


def test_schema_error_names_line(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text("cavity: {length: 10 um, mirror_radius: 20 um}\nwavelength_window: [740 nm, 760 nm]\n"
                 "max_transverse_order: 2\nwavelenght: 750 nm\n")
    assert call("modes", "spectrum", "-c", p, "-o", tmp_path / "o") == cli.EXIT_SCHEMA
    assert "line 4" in capsys.readouterr().err


def test_domain_error_exit_code(tmp_path, capsys):
    cfg = {"cavity": {"length": "50 um", "mirror_radius": "50 um"},
           "wavelength_window": ["740 nm", "760 nm"], "max_transverse_order": 2}
    assert call("modes", "spectrum", "-c", write(tmp_path, cfg), "-o", tmp_path / "o") == cli.EXIT_DOMAIN
    assert "DegenerateGeometryError" in capsys.readouterr().err


def test_io_error_exit_code(tmp_path):
    assert call("cqed", "report", "-c", tmp_path / "absent.json") == cli.EXIT_IO
    cfg = {"spectrum": "nowhere.csv", "analysis": "finesse"}
    assert call("cqed", "fit", "-c", write(tmp_path, cfg), "-o", tmp_path / "o") == cli.EXIT_IO


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        call("tmm", "explode", "-c", "x.json")
    assert info.value.code == cli.EXIT_SCHEMA


def test_override_changes_result(tmp_path):
    p = write(tmp_path, CQED)
    assert call("cqed", "report", "-c", p, "-o", tmp_path / "a") == 0
    assert call("cqed", "report", "-c", p, "--set", "emitter.dipole_moment=100 D", "-o", tmp_path / "b") == 0
    a, b = (report(tmp_path / k)["outputs"]["coupling_energy"] for k in "ab")
    assert b / a == pytest.approx(100 / 60, rel=1e-12)
    assert report(tmp_path / "b")["config"]["emitter"]["dipole_moment"] == "100 D"


def _strip(rep):
    return {k: v for k, v in rep.items() if k not in ("wall_time_s", "files")}


def test_deterministic_seeded_spectrum(tmp_path):
    cfg = {**CQED, "detuning": {"start": "-200 ueV", "stop": "200 ueV", "points": 401},
           "noise_rms": 0.01, "seed": 11}
    p = write(tmp_path, cfg)
    for d in "ab":
        assert call("cqed", "spectrum", "-c", p, "-o", tmp_path / d) == 0
    assert (tmp_path / "a/spectrum.csv").read_bytes() == (tmp_path / "b/spectrum.csv").read_bytes()
    assert _strip(report(tmp_path / "a")) == _strip(report(tmp_path / "b"))


def test_config_echo_reproduces_run(tmp_path):
    cfg = {**CQED, "detuning": {"start": "-200 ueV", "stop": "200 ueV", "points": 401},
           "noise_rms": 0.01, "seed": 5}
    assert call("cqed", "spectrum", "-c", write(tmp_path, cfg), "-o", tmp_path / "a") == 0
    echo = report(tmp_path / "a")["config"]
    assert echo == cfg
    assert call("cqed", "spectrum", "-c", write(tmp_path, echo, "echo.json"), "-o", tmp_path / "b") == 0
    assert (tmp_path / "a/spectrum.csv").read_bytes() == (tmp_path / "b/spectrum.csv").read_bytes()


def test_spectrum_then_fit_pipeline(tmp_path):
    cfg = {**CQED, "detuning": {"start": "-250 ueV", "stop": "250 ueV", "points": 2001}}
    assert call("cqed", "spectrum", "-c", write(tmp_path, cfg), "-o", tmp_path / "s") == 0
    fit = {"spectrum": "s/spectrum.csv", "analysis": "splitting"}
    assert call("cqed", "fit", "-c", write(tmp_path, fit, "fit.json"), "-o", tmp_path / "f") == 0
    out = report(tmp_path / "f")["outputs"]
    expected = report(tmp_path / "s")["outputs"]["expected_splitting"]
    assert out["splitting"] == pytest.approx(expected, rel=0.01) and out["axis_unit"] == "ueV"


def test_output_directory_priority(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    p = write(tmp_path, CQED)
    assert call("cqed", "report", "-c", p) == 0
    assert (tmp_path / "env/report.json").exists()
    p = write(tmp_path, {**CQED, "output_dir": "from_cfg"}, "with_dir.json")
    assert call("cqed", "report", "-c", p) == 0
    assert (tmp_path / "from_cfg/report.json").exists()
    assert call("cqed", "report", "-c", p, "-o", tmp_path / "flag") == 0
    assert (tmp_path / "flag/report.json").exists()
    monkeypatch.delenv(cli.OUTPUT_ENV)
    assert call("cqed", "report", "-c", write(tmp_path, CQED)) == 0
    assert (tmp_path / "hemicav-out/report.json").exists()


def test_coating_modes_and_surface_pipelines(tmp_path):
    stack = {"quarter_wave": {"n_high": 2.45, "n_low": 1.45, "substrate_index": 1.5,
                              "center_wavelength": "750 nm", "pairs": 10, "terminate_high": True}}
    cfg = {"stack": stack, "working_wavelength": "750 nm", "max_angle": "40 deg"}
    assert call("coating", "optimize", "-c", write(tmp_path, cfg), "-o", tmp_path / "c") == 0
    out = report(tmp_path / "c")["outputs"]
    assert out["center_scale"] > 1 and out["meets_threshold"]

    cfg = {"cavity": {"length": "10 um", "mirror_radius": "20 um"},
           "wavelength_window": ["740 nm", "760 nm"], "max_transverse_order": 2}
    assert call("modes", "spectrum", "-c", write(tmp_path, cfg), "-o", tmp_path / "m") == 0
    assert report(tmp_path / "m")["outputs"]["g2"] == pytest.approx(0.5)

    y, x = np.mgrid[0:128, 0:128] * 0.2
    R = 60.0
    h = (R - np.sqrt(R**2 - (x - 12.8) ** 2 - (y - 12.8) ** 2)) * 1e3
    gridio.write_grid(tmp_path / "h.grid", h, 200.0, "height", "nm")
    cfg = {"height_map": "h.grid", "region_center": ["12.8 um", "12.8 um"], "region_diameter": "15 um"}
    assert call("surface", "sphere", "-c", write(tmp_path, cfg), "-o", tmp_path / "s") == 0
    assert report(tmp_path / "s")["outputs"]["fitted_radius"] == pytest.approx(R, rel=1e-3)
    cfg = {"rms_roughness": "1 nm", "wavelength": "750 nm", "mirror_transmissions": [0.005, 0.005]}
    assert call("surface", "budget", "-c", write(tmp_path, cfg), "-o", tmp_path / "b") == 0
    assert report(tmp_path / "b")["outputs"]["finesse_ceiling"] == pytest.approx(595, abs=1)


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "hemicav", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout


def test_fdtd_closed_cylinder_matches_bessel_modes(tmp_path):
    # TM0np of a PEC cylinder: f = c/2pi sqrt((2.405/a)^2 + (p pi/L)^2)
    cfg = {"geometry": {"length": "1.5 um", "flat_top": True, "radial_extent": "1.0 um"},
           "resolution": 20, "azimuthal_order": 0, "design_wavelength": "750 nm",
           "source": {"position": ["0.3 um", "0.41 um"], "center_frequency": "400 THz",
                      "bandwidth": "200 THz", "component": "e_z"},
           "probes": [{"component": "e_z", "position": ["0.3 um", "0.93 um"]}],
           "duration_cycles": 400, "analysis": {"band": ["50 THz", "700 THz"]}}
    assert call("fdtd", "simulate", "-c", write(tmp_path, cfg), "-o", tmp_path / "f") == 0
    out = report(tmp_path / "f")["outputs"]
    a = (out["grid_shape"][0] - 1) * out["cell_size_nm"] * 1e-3
    found = [r["frequency_THz"] for r in out["resonances"]]
    c = 299.792458  # um THz
    for p in (0, 1):
        f = c / (2 * np.pi) * np.hypot(2.404826 / a, p * np.pi / 1.5)
        assert min(abs(g - f) for g in found) < 0.005 * f
    rec = {"record": "f/record.csv", "band": ["50 THz", "700 THz"]}
    assert call("fdtd", "analyze", "-c", write(tmp_path, rec, "an.json"), "-o", tmp_path / "a") == 0
    again = [r["frequency_THz"] for r in report(tmp_path / "a")["outputs"]["resonances"]]
    assert np.allclose(again, found, rtol=1e-12)
