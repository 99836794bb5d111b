"""Command-line front end: ``hemicav <module> <action> --config FILE``.

One config file (JSON or YAML) describes a run; ``--set key=value`` overrides
single fields. Results go to the output directory (``--out``, else the
config's ``output_dir``, else ``$HEMICAV_OUTPUT_DIR``, else ``./hemicav-out``)
together with ``report.json``.

Exit codes: 0 success, 2 schema violation, 3 domain error raised by a
module, 4 file-system failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import Section, SchemaError, apply_override, load_config
from .errors import HemicavError

SCHEMA_ID = "hemicav.run-report/1"
OUTPUT_ENV = "HEMICAV_OUTPUT_DIR"
EXIT_OK, EXIT_SCHEMA, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4

COMMANDS = {
    "tmm": ("sweep",),
    "coating": ("optimize",),
    "modes": ("spectrum",),
    "cqed": ("report", "spectrum", "fit"),
    "fdtd": ("simulate", "analyze"),
    "surface": ("psd", "sphere", "budget"),
}


class RunContext:
    """Where a pipeline reads inputs from and writes outputs to."""

    def __init__(self, config_dir: Path, out_dir: Path):
        self.config_dir = config_dir
        self.out_dir = out_dir
        self.files: dict = {}
        self.warnings: list = []

    def input_path(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.config_dir / p

    def output(self, key: str, name: str) -> Path:
        path = self.out_dir / name
        self.files[key] = str(path)
        return path


def _finite(x):
    """JSON-safe float: ``inf``/``nan`` become ``None``."""
    x = float(x)
    return x if math.isfinite(x) else None


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _read_two_column_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise HemicavError(f"{path}: empty spectrum file")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(a), float(b)] for a, b, *_ in body])
    except ValueError as exc:
        raise HemicavError(f"{path}: spectrum rows must be two numbers ({exc})") from exc
    return header, data


# --- shared config pieces --------------------------------------------------

def _stack(sec: Section, ctx: RunContext):
    from . import coating, tmm

    kind = sec.choose("file", "quarter_wave", "match_band")
    if kind == "file":
        stack, headers = tmm.load_stack(ctx.input_path(sec.string("file")))
        sec.finish()
        return stack, {"source": "file", "headers": headers}
    if kind == "quarter_wave":
        q = sec.section("quarter_wave")
        stack = tmm.quarter_wave_stack(
            q.number("n_high"), q.number("n_low"), q.number("substrate_index"),
            q.quantity("center_wavelength", "nm", positive=True),
            q.number("pairs", integer=True, low=1),
            high_first=q.flag("high_first", True),
            terminate_high=q.flag("terminate_high", False),
            incident_index=q.number("incident_index", required=False, default=1.0),
        )
        q.finish()
        sec.finish()
        return stack, {"source": "quarter_wave"}
    m = sec.section("match_band")
    band = m.quantity_list("band", "nm", length=2)
    stack, info = coating.match_stop_band(
        band, n_low=m.number("n_low", required=False, default=1.45),
        substrate_index=m.number("substrate_index", required=False, default=1.5),
        reflectance_threshold=m.number("reflectance_threshold", required=False, default=0.95))
    m.finish()
    sec.finish()
    return stack, {"source": "match_band", **{k: (list(v) if isinstance(v, tuple) else v) for k, v in info.items()}}


def _cavity(sec: Section):
    from .modes import CavityGeometry

    geo = CavityGeometry(sec.quantity("length", "um"), sec.quantity("mirror_radius", "um"))
    return geo


def _grid(sec: Section, unit: str):
    start = sec.quantity("start", unit)
    stop = sec.quantity("stop", unit)
    points = sec.number("points", integer=True, low=2)
    sec.finish()
    return np.linspace(start, stop, points)


# --- pipelines -------------------------------------------------------------

def run_tmm_sweep(cfg: Section, ctx: RunContext):
    from . import tmm

    stack, info = _stack(cfg.section("stack"), ctx)
    wl = _grid(cfg.section("wavelengths"), "nm")
    angle = cfg.quantity("angle", "rad", required=False, default=0.0)
    pol = cfg.string("polarization", required=False, default="TE", choices=("TE", "TM"))
    cfg.finish()
    res = tmm.sweep(stack, wl, angle, tmm.Polarization(pol))
    _write_csv(ctx.output("sweep_csv", "sweep.csv"), ["wavelength_nm", "R", "T", "phase_rad"],
               zip(wl, res.R, res.T, res.reflection_phase))
    band = tmm.stop_band(stack, angle, pol)
    return {
        "layers": len(stack),
        "stack": info,
        "points": int(wl.size),
        "R_max": float(np.max(res.R)),
        "stop_band_95_nm": None if band is None else list(band),
        "max_abs_R_plus_T_minus_1": float(np.max(np.abs(res.R + res.T - 1))) if stack.lossless else None,
    }


def run_coating_optimize(cfg: Section, ctx: RunContext):
    from . import coating, tmm
    from .errors import OptimizationError

    stack, info = _stack(cfg.section("stack"), ctx)
    wl = cfg.quantity("working_wavelength", "nm", positive=True)
    max_angle = cfg.quantity("max_angle", "rad", positive=True)
    model = coating.DepositionModel(cfg.number("thinning_exponent", required=False, default=1.0, low=0))
    threshold = cfg.number("reflectance_threshold", required=False, default=0.995)
    profile_step = cfg.quantity("profile_step", "rad", required=False, default=math.radians(0.5), positive=True)
    cfg.finish()
    base = coating.CoatingDesign(stack, 1.0)
    cutoff_base = coating.cutoff_angle(base, model, wl, threshold)
    try:
        s_opt, min_r = coating.optimize_center_scale(stack, model, wl, max_angle)
    except OptimizationError as exc:
        if exc.best is None:
            raise
        raise OptimizationError(f"{exc} (best scale {exc.best[0]:.4f}, min R {exc.best[1]:.4f})", exc.best) from exc
    design = coating.CoatingDesign(stack, s_opt)
    coating.save_design(design, ctx.output("design", "design.stack"))
    theta = np.arange(0.0, max_angle + 1e-12, profile_step)
    prof = coating.reflectivity_profile(design, model, wl, theta)
    _write_csv(ctx.output("profile_csv", "reflectivity_profile.csv"), ["theta_deg", "R"],
               [(math.degrees(t), r) for t, r in prof])
    cutoff_opt = coating.cutoff_angle(design, model, wl, threshold)
    band = tmm.stop_band(stack)
    return {
        "stack": info,
        "center_scale": s_opt,
        "min_reflectance": min_r,
        "meets_threshold": bool(min_r >= threshold),
        "reflectance_threshold": threshold,
        "cutoff_angle_unoptimized_deg": None if cutoff_base is None else math.degrees(cutoff_base),
        "cutoff_angle_optimized_deg": None if cutoff_opt is None else math.degrees(cutoff_opt),
        "base_stop_band_95_nm": None if band is None else list(band),
    }


def run_modes_spectrum(cfg: Section, ctx: RunContext):
    from . import modes

    geo = _cavity(cfg.section("cavity"))
    window = cfg.quantity_list("wavelength_window", "nm", length=2)
    order = cfg.number("max_transverse_order", integer=True, low=0)
    wavelength = cfg.quantity("wavelength", "nm", required=False, default=float(np.mean(window)))
    cfg.finish()
    spec = modes.mode_spectrum(geo, window, order)
    _write_csv(ctx.output("modes_csv", "modes.csv"), ["q", "n", "frequency_THz", "wavelength_nm"], spec.rows())
    g = modes.gaussian_mode(geo, wavelength)
    st = modes.stability(geo)
    fsr = modes.free_spectral_range(geo.length)
    return {
        "g1": st.g1, "g2": st.g2,
        "free_spectral_range_THz": fsr,
        "transverse_spacing_THz": fsr * math.acos(math.sqrt(st.g1 * st.g2)) / math.pi,
        "mode_count": len(spec),
        "waist_radius_um": g.waist_radius,
        "rayleigh_range_um": g.rayleigh_range,
        "divergence_half_angle_deg": math.degrees(g.divergence_half_angle),
        "effective_mode_volume_um3": g.effective_mode_volume,
    }


def _emitter(sec: Section):
    from .cqed import Emitter

    em = Emitter(sec.quantity("dipole_moment", "D"), sec.quantity("wavelength", "nm"),
                 sec.quantity("linewidth", "ueV"), sec.quantity("detuning", "ueV", required=False, default=0.0))
    sec.finish()
    return em


def _mode_volume(sec: Section, length_um):
    kind = sec.choose("effective_mode_volume", "waist_radius")
    if kind == "effective_mode_volume":
        v = sec.quantity("effective_mode_volume", "um^3", positive=True)
    else:
        w0 = sec.quantity("waist_radius", "um", positive=True)
        v = math.pi * w0**2 * length_um / 4
    sec.finish()
    return v


def _cqed_setup(cfg: Section):
    from . import cqed

    cav = cfg.section("cavity")
    loss = cqed.cavity_linewidth(cav.quantity("length", "um"), cav.number("mirror_reflectivity"))
    kappa = cav.quantity("kappa", "ueV", required=False, default=None)
    cav.finish()
    emitter = _emitter(cfg.section("emitter"))
    return loss, kappa, emitter


def run_cqed_report(cfg: Section, ctx: RunContext):
    from . import cqed

    loss, kappa_override, emitter = _cqed_setup(cfg)
    volume = _mode_volume(cfg.section("mode"), loss.length)
    cfg.finish()
    g = cqed.coupling_energy(emitter, volume)
    kappa = loss.kappa if kappa_override is None else kappa_override
    rep = cqed.strong_coupling(g, emitter.linewidth, kappa)
    out = {
        **rep.to_dict(),
        "effective_mode_volume_um3": volume,
        "cavity_finesse": loss.finesse,
        "cavity_kappa_from_mirrors": loss.kappa,
        "free_spectral_range_THz": loss.free_spectral_range,
        "units": {"coupling_energy": "ueV", "splitting": "ueV", "gamma": "ueV", "kappa": "ueV", "margin": "ueV"},
    }
    Path(ctx.output("coupling_json", "coupling.json")).write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    return out


def run_cqed_spectrum(cfg: Section, ctx: RunContext, seed):
    from . import cqed

    loss, kappa_override, emitter = _cqed_setup(cfg)
    if kappa_override is not None:
        from dataclasses import replace

        loss = replace(loss, kappa=kappa_override)
    coupling_kind = cfg.choose("coupling", "mode")
    if coupling_kind == "coupling":
        g = cfg.quantity("coupling", "ueV")
    else:
        g = cqed.coupling_energy(emitter, _mode_volume(cfg.section("mode"), loss.length))
    grid = _grid(cfg.section("detuning"), "ueV")
    noise = cfg.number("noise_rms", required=False, default=0.0, low=0)
    cfg.finish()
    spec = cqed.transmission_spectrum(loss, emitter, g, grid)
    y = spec.transmission
    if noise > 0:
        y = y + np.random.default_rng(seed).normal(0.0, noise, y.size)
    _write_csv(ctx.output("spectrum_csv", "spectrum.csv"), ["detuning_ueV", "transmission"], zip(grid, y))
    out = {"coupling_energy": g, "kappa": loss.kappa, "gamma": emitter.linewidth,
           "expected_splitting": 2 * math.sqrt(max(g**2 - (emitter.linewidth - loss.kappa) ** 2 / 4, 0.0)),
           "noise_rms": noise, "units": "ueV"}
    try:
        out["peak_separation"] = cqed.peak_separation(cqed.TransmissionSpectrum(grid, y))
    except HemicavError as exc:
        ctx.warnings.append(f"no doublet in the synthesized spectrum: {exc}")
    return out


def run_cqed_fit(cfg: Section, ctx: RunContext):
    from . import cqed

    path = ctx.input_path(cfg.string("spectrum"))
    analysis = cfg.string("analysis", choices=("finesse", "splitting", "lineshape"))
    threshold = cfg.number("threshold", required=False, default=1.5)
    cfg.finish()
    header, data = _read_two_column_csv(path)
    unit = header[0].rsplit("_", 1)[-1] if "_" in header[0] else "unknown"
    spec = cqed.TransmissionSpectrum(data[:, 0], data[:, 1], unit)
    if analysis == "finesse":
        return {"finesse": cqed.extract_finesse(spec), "axis_unit": unit}
    if analysis == "splitting":
        fit = cqed.normal_mode_splitting(spec)
        return {**{k: float(v) for k, v in vars(fit).items()}, "axis_unit": unit}
    lf = cqed.classify_line(spec.frequency_grid, spec.transmission, threshold)
    return {**{k: (v if isinstance(v, str) else float(v)) for k, v in vars(lf).items()}, "axis_unit": unit}


def _fdtd_domain(cfg: Section, ctx: RunContext):
    from .coating import DimpleGeometry
    from .fdtd import build_domain
    from .modes import CavityGeometry

    geo = cfg.section("geometry")
    length = geo.quantity("length", "um", positive=True)
    flat = geo.flag("flat_top", False)
    dimple = None
    if flat:
        # the radius is unused for a flat top mirror
        cavity = CavityGeometry(length, 1e9)
    else:
        radius = geo.quantity("mirror_radius", "um", positive=True)
        cavity = CavityGeometry(length, radius)
        kind = geo.choose("dimple_depth", "opening_half_angle")
        if kind == "dimple_depth":
            dimple = DimpleGeometry(radius, depth=geo.quantity("dimple_depth", "um"))
        else:
            dimple = DimpleGeometry(radius, opening_half_angle=geo.quantity("opening_half_angle", "deg"))
    radial = geo.quantity("radial_extent", "um", required=flat, default=None)
    fill = geo.number("fill_permittivity", required=False, default=1.0, low=1.0)
    substrate = geo.quantity("substrate_thickness", "um", required=False, default=0.0)
    geo.finish()
    stack_sec = cfg.section("stack", required=False)
    stack = _stack(stack_sec, ctx)[0] if stack_sec is not None else None
    domain = build_domain(
        cavity, stack, dimple,
        resolution=cfg.number("resolution", low=0),
        m=cfg.number("azimuthal_order", integer=True, low=0),
        wavelength=cfg.quantity("design_wavelength", "nm", required=False, default=750.0, positive=True),
        radial_extent=radial, substrate_thickness=substrate, fill_permittivity=fill,
    )
    return domain


def _fdtd_source(sec: Section):
    from .fdtd import SourceSpec

    src = SourceSpec(
        position=tuple(sec.quantity_list("position", "um", length=2)),
        center_frequency=sec.quantity("center_frequency", "THz", positive=True),
        bandwidth=sec.quantity("bandwidth", "THz", positive=True),
        field_component=sec.string("component", required=False, default="e_r"),
        amplitude=sec.number("amplitude", required=False, default=1.0),
        radial_width=sec.quantity("radial_width", "um", required=False, default=None),
    )
    sec.finish()
    return src


def _band(cfg: Section):
    band = cfg.quantity_list("band", "THz", required=False, default=None, length=2)
    return None if band is None else tuple(band)


def run_fdtd_simulate(cfg: Section, ctx: RunContext):
    from .fdtd import analysis, io, mode_profile, run_ringdown

    domain = _fdtd_domain(cfg, ctx)
    source = _fdtd_source(cfg.section("source"))
    probes = []
    for p in cfg.sections("probes"):
        probes.append((p.string("component", required=False, default="e_r"),
                       *p.quantity_list("position", "um", length=2)))
        p.finish()
    cycles = cfg.number("duration_cycles", low=0)
    precision = cfg.string("precision", required=False, default="double", choices=("double", "single"))
    courant = cfg.number("courant", required=False, default=0.99)
    ana = cfg.section("analysis", required=False) or Section({}, "analysis")
    band = _band(ana)
    noise_factor = ana.number("noise_factor", required=False, default=analysis.NOISE_FACTOR)
    ana.finish()
    prof = cfg.section("mode_profile", required=False)
    prof_opts = None
    if prof is not None:
        target = prof.data.get("frequency", "strongest")
        prof_opts = {
            "frequency": None if target == "strongest" else prof.quantity("frequency", "THz"),
            "settle_cycles": prof.number("settle_cycles", required=False, default=50, low=0),
            "average_cycles": prof.number("average_cycles", required=False, default=400, low=1),
            "bandwidth": prof.quantity("bandwidth", "THz", required=False, default=None),
        }
        prof._used.add("frequency")
        prof.finish()
    cfg.finish()

    io.write_map(ctx.output("permittivity_grid", "permittivity.grid"), domain, domain.material_map, "eps_r")
    record = run_ringdown(domain, source, probes, cycles, courant=courant, precision=precision)
    io.write_record(ctx.output("record_csv", "record.csv"), record)
    found = analysis.resonances(record, 0, noise_factor=noise_factor, band=band)
    io.write_resonances(ctx.output("resonances_json", "resonances.json"), found,
                        resolution_limit_THz=analysis.resolution_limit(record))
    out = {
        "grid_shape": list(domain.shape),
        "cell_size_nm": domain.cell_size,
        "time_step_fs": record.time_step,
        "steps": int(record.series.shape[0]),
        "resolution_limit_THz": analysis.resolution_limit(record),
        "resonances": [{"frequency_THz": f, "quality_factor": _finite(q)} for f, q in found],
    }
    if prof_opts is not None:
        f_target = prof_opts["frequency"]
        if f_target is None:
            f_target = analysis.strongest_resonance(record, 0, band=band, noise_factor=noise_factor)[0]
        mp = mode_profile(domain, f_target, source, settle_cycles=prof_opts["settle_cycles"],
                          average_cycles=prof_opts["average_cycles"], bandwidth=prof_opts["bandwidth"],
                          courant=courant, precision=precision)
        for key, path in io.write_profile(ctx.out_dir, domain, mp).items():
            ctx.files[f"mode_{key}"] = path
        out["mode_profile"] = mp.to_dict()
        if mp.waist_radius is None:
            ctx.warnings.append("mode waist not applicable: no 1/e crossing inside the domain")
    return out


def run_fdtd_analyze(cfg: Section, ctx: RunContext):
    from .fdtd import analysis, io

    record = io.read_record(ctx.input_path(cfg.string("record")))
    probe = cfg.number("probe", required=False, default=0, integer=True, low=0)
    band = _band(cfg)
    noise_factor = cfg.number("noise_factor", required=False, default=analysis.NOISE_FACTOR)
    cfg.finish()
    if probe >= record.series.shape[1]:
        raise HemicavError(f"record has {record.series.shape[1]} probes; probe {probe} does not exist")
    found = analysis.resonances(record, probe, noise_factor=noise_factor, band=band)
    io.write_resonances(ctx.output("resonances_json", "resonances.json"), found,
                        resolution_limit_THz=analysis.resolution_limit(record, probe))
    return {"resonances": [{"frequency_THz": f, "quality_factor": _finite(q)} for f, q in found],
            "resolution_limit_THz": analysis.resolution_limit(record, probe)}


def _height_map(cfg: Section, ctx: RunContext):
    from . import surface

    path = ctx.input_path(cfg.string("height_map"))
    pitch = cfg.quantity("pixel_pitch", "um", required=False, default=None, positive=True)
    return surface.load_height_map(path, pitch)


def run_surface_psd(cfg: Section, ctx: RunContext):
    from . import surface

    hm = _height_map(cfg, ctx)
    window = cfg.string("window", required=False, default="hann", choices=("hann", "none"))
    bands = []
    for b in cfg.sections("rms_bands", required=False):
        bands.append((b.quantity("low", "1/mm"), b.quantity("high", "1/mm")))
        b.finish()
    cfg.finish()
    psd = surface.compute_psd(hm, window)
    _write_csv(ctx.output("psd_csv", "psd.csv"), ["spatial_frequency_per_mm", "psd_nm2_mm2"],
               zip(psd.spatial_frequency, psd.psd_value))
    return {
        "variance_nm2": psd.variance,
        "rms_nm": math.sqrt(psd.variance),
        "bin_width_per_mm": psd.bin_width,
        "window": psd.window,
        "band_rms_nm": [{"low_per_mm": lo, "high_per_mm": hi, "rms_nm": surface.rms_in_band(psd, lo, hi)}
                        for lo, hi in bands],
    }


def run_surface_sphere(cfg: Section, ctx: RunContext):
    from . import surface

    hm = _height_map(cfg, ctx)
    center = cfg.quantity_list("region_center", "um", length=2)
    diameter = cfg.quantity("region_diameter", "um", positive=True)
    cfg.finish()
    fit = surface.fit_sphere(hm, tuple(center), diameter)
    out = fit.to_dict()
    out["center"] = list(out["center"])
    Path(ctx.output("fit_json", "sphere_fit.json")).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


def run_surface_budget(cfg: Section, ctx: RunContext):
    from . import surface

    sigma = cfg.quantity("rms_roughness", "nm", required=False, default=None)
    if sigma is None:
        hm = _height_map(cfg, ctx)
        psd = surface.compute_psd(hm, cfg.string("window", required=False, default="hann", choices=("hann", "none")))
        band = cfg.quantity_list("band", "1/mm", required=False, default=None, length=2)
        sigma = surface.rms_in_band(psd, *band) if band else math.sqrt(psd.variance)
    wavelength = cfg.quantity("wavelength", "nm", positive=True)
    transmissions = cfg.numbers("mirror_transmissions")
    cfg.finish()
    est = surface.scatter_budget(sigma, wavelength, transmissions)
    out = est.to_dict()
    Path(ctx.output("budget_json", "scatter_budget.json")).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


PIPELINES = {
    ("tmm", "sweep"): run_tmm_sweep,
    ("coating", "optimize"): run_coating_optimize,
    ("modes", "spectrum"): run_modes_spectrum,
    ("cqed", "report"): run_cqed_report,
    ("cqed", "spectrum"): run_cqed_spectrum,
    ("cqed", "fit"): run_cqed_fit,
    ("fdtd", "simulate"): run_fdtd_simulate,
    ("fdtd", "analyze"): run_fdtd_analyze,
    ("surface", "psd"): run_surface_psd,
    ("surface", "sphere"): run_surface_sphere,
    ("surface", "budget"): run_surface_budget,
}


def _resolve_out(cli_out, config_out, config_dir):
    if cli_out:
        return Path(cli_out)
    if config_out:
        p = Path(config_out)
        return p if p.is_absolute() else config_dir / p
    return Path(os.environ.get(OUTPUT_ENV) or "hemicav-out")


def run(module: str, action: str, config: dict, config_dir: Path = Path("."), out_dir=None, lines=None) -> dict:
    """Execute one pipeline and write ``report.json``; returns the report.

    Raises :class:`SchemaError`, module errors (:class:`HemicavError`) and
    ``OSError``; :func:`main` maps them to exit codes.
    """
    if (module, action) not in PIPELINES:
        raise SchemaError(f"unknown command '{module} {action}'")
    echo = copy.deepcopy(config)
    root = Section(config, "", lines)
    seed = root.number("seed", required=False, default=None, integer=True)
    config_out = root.string("output_dir", required=False, default=None)
    out = _resolve_out(out_dir, config_out, config_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(config_dir, out)
    fn = PIPELINES[(module, action)]
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        outputs = fn(root, ctx, seed) if fn is run_cqed_spectrum else fn(root, ctx)
    ctx.warnings.extend(str(w.message) for w in caught if not issubclass(w.category, _IGNORED_WARNINGS))
    report = {
        "schema": SCHEMA_ID,
        "package_version": __version__,
        "command": f"{module} {action}",
        "config": echo,
        "outputs": outputs,
        "files": ctx.files,
        "warnings": ctx.warnings,
        "wall_time_s": time.perf_counter() - t0,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=_finite) + "\n")
    return report


try:  # numba reports threading-layer fallbacks as warnings; they do not affect results
    from numba.core.errors import NumbaWarning as _NumbaWarning

    _IGNORED_WARNINGS = (_NumbaWarning,)
except ImportError:  # pragma: no cover
    _IGNORED_WARNINGS = ()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hemicav", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="module", required=True)
    for module, actions in COMMANDS.items():
        mp = sub.add_parser(module)
        msub = mp.add_subparsers(dest="action", required=True)
        for action in actions:
            ap = msub.add_parser(action)
            ap.add_argument("--config", "-c", required=True, help="JSON or YAML run config")
            ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                            help="override a config field (dotted path), repeatable")
            ap.add_argument("--out", "-o", help=f"output directory (default: config output_dir, ${OUTPUT_ENV}, ./hemicav-out)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config, lines = load_config(args.config)
        for assignment in args.set:
            apply_override(config, assignment)
        report = run(args.module, args.action, config, Path(args.config).resolve().parent, args.out, lines)
    except SchemaError as exc:
        print(f"hemicav: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except HemicavError as exc:
        print(f"hemicav: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"hemicav: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"command": report["command"], "files": report["files"],
                      "warnings": report["warnings"]}, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
