import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hemicav import tmm
from hemicav.errors import InputDomainError
from hemicav.tmm import Layer, LayerStack, PlaneWaveQuery, Polarization


def qw_closed_form(nh, nl, ns, n_pairs):
    # independent oracle: admittance of (H L)^N on the substrate
    y = (nh / nl) ** (2 * n_pairs) * ns
    return ((1 - y) / (1 + y)) ** 2


def fresnel(n1, n2, theta):
    ct1 = math.cos(theta)
    st2 = n1 * math.sin(theta) / n2
    ct2 = math.sqrt(1 - st2**2)
    rs = (n1 * ct1 - n2 * ct2) / (n1 * ct1 + n2 * ct2)
    rp = (n2 * ct1 - n1 * ct2) / (n2 * ct1 + n1 * ct2)
    return rs**2, rp**2


def test_empty_stack_index_matched():
    r = tmm.stack_response(LayerStack(1.0, (), 1.0), PlaneWaveQuery(700.0))
    assert r.R == 0 and r.T == pytest.approx(1, abs=1e-15) and abs(r.r) == 0


def test_empty_stack_glass_interface():
    r = tmm.stack_response(LayerStack(1.0, (), 1.5), PlaneWaveQuery(700.0))
    assert r.R == pytest.approx(0.04, abs=1e-15)


@pytest.mark.parametrize("angle_deg", [0, 10, 30, 50, 70, 85])
def test_single_interface_matches_fresnel(angle_deg):
    th = math.radians(angle_deg)
    rs, rp = fresnel(1.0, 1.5, th)
    stack = LayerStack(1.0, (), 1.5)
    assert tmm.stack_response(stack, PlaneWaveQuery(633.0, th, "TE")).R == pytest.approx(rs, abs=1e-12)
    assert tmm.stack_response(stack, PlaneWaveQuery(633.0, th, "TM")).R == pytest.approx(rp, abs=1e-12)


def test_quarter_wave_layer_thickness():
    s = tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 8)
    assert s.layers[0].thickness == pytest.approx(750 / (4 * 2.3))
    assert len(s) == 16
    assert len(tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 8, terminate_high=True)) == 17


def test_quarter_wave_rejects_zero_pairs():
    with pytest.raises(InputDomainError):
        tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 0)


def test_quarter_wave_closed_form():
    s = tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 8)
    R = tmm.stack_response(s, PlaneWaveQuery(750.0)).R
    assert R == pytest.approx(qw_closed_form(2.3, 1.45, 1.5, 8), abs=1e-10)


def test_terminated_quarter_wave_closed_form():
    s = tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 8, terminate_high=True)
    R = tmm.stack_response(s, PlaneWaveQuery(750.0)).R
    assert R == pytest.approx(tmm.quarter_wave_reflectance(2.3, 1.45, 1.5, 8), abs=1e-10)


def test_stop_band_none_below_threshold():
    assert tmm.stop_band(LayerStack(1.0, (), 1.5)) is None


def test_stop_band_scales_with_thickness():
    s = tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 8)
    lo, hi = tmm.stop_band(s)
    lo2, hi2 = tmm.stop_band(tmm.scale_thicknesses(s, 1.1))
    assert lo2 == pytest.approx(1.1 * lo, abs=0.03) and hi2 == pytest.approx(1.1 * hi, abs=0.03)


def test_stop_band_empty_scan_rejected():
    s = tmm.quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 8)
    with pytest.raises(InputDomainError):
        tmm.stop_band(s, scan_range=(800.0, 700.0))


def test_finesse_values():
    assert tmm.finesse_from_mirrors(0.995, 0.995) == pytest.approx(626.7, abs=0.1)
    assert tmm.finesse_from_mirrors(0.99, 0.99) < tmm.finesse_from_mirrors(0.999, 0.999)
    with pytest.raises(InputDomainError):
        tmm.finesse_from_mirrors(1.0, 1.0)


def test_sweep_matches_pointwise():
    s = tmm.quarter_wave_stack(2.45, 1.45, 1.5, 750.0, 5)
    wl = np.linspace(600, 900, 7)
    sw = tmm.sweep(s, wl, 0.2, "TM")
    for w, R in zip(wl, sw.R):
        assert R == pytest.approx(tmm.stack_response(s, PlaneWaveQuery(w, 0.2, "TM")).R, abs=1e-14)


def test_reflection_phase_range():
    s = tmm.quarter_wave_stack(2.45, 1.45, 1.5, 750.0, 5)
    ph = tmm.sweep(s, np.linspace(500, 1000, 501)).reflection_phase
    assert np.all(ph > -math.pi) and np.all(ph <= math.pi)


def test_absorbing_layer_loses_energy():
    s = LayerStack(1.0, (Layer(2.0 + 0.1j, 100.0),), 1.5)
    r = tmm.stack_response(s, PlaneWaveQuery(700.0))
    assert r.R + r.T < 1


def test_continuity_inside_band():
    s = tmm.quarter_wave_stack(2.45, 1.45, 1.5, 750.0, 8)
    wl = np.linspace(700, 800, 101)
    a, b = tmm.sweep(s, wl).R, tmm.sweep(s, wl + 0.001).R
    assert np.max(np.abs(a - b)) < 1e-3


def test_stack_file_round_trip(tmp_path):
    s = tmm.quarter_wave_stack(2.45, 1.45, 1.5, 750.0, 3, incident_index=1.2)
    path = tmp_path / "m.stack"
    tmm.save_stack(s, path)
    back, _ = tmm.load_stack(path)
    assert back == s


def test_tabulated_index_interpolates(tmp_path):
    p = tmp_path / "n.csv"
    p.write_text("wavelength_nm,n,k\n500,2.0,0\n1000,1.8,0\n")
    n = tmm.TabulatedIndex.from_csv(p)
    assert complex(n(750.0)).real == pytest.approx(1.9)


indices = st.floats(1.0, 3.5)
layers = st.lists(st.tuples(indices, st.floats(1.0, 400.0)), min_size=0, max_size=12)


@settings(max_examples=200, deadline=None)
@given(layers, st.floats(1.0, 2.0), st.floats(300, 2000), st.floats(0, 1.4),
       st.sampled_from(["TE", "TM"]))
def test_energy_conservation_property(ls, ns, wl, angle, pol):
    stack = LayerStack(1.0, tuple(Layer(n, d) for n, d in ls), ns)
    r = tmm.stack_response(stack, PlaneWaveQuery(wl, angle, pol))
    assert abs(r.R + r.T - 1) < 1e-12


@settings(max_examples=100, deadline=None)
@given(layers, st.floats(300, 2000))
def test_normal_incidence_te_equals_tm(ls, wl):
    stack = LayerStack(1.0, tuple(Layer(n, d) for n, d in ls), 1.5)
    te = tmm.stack_response(stack, PlaneWaveQuery(wl, 0.0, "TE"))
    tm = tmm.stack_response(stack, PlaneWaveQuery(wl, 0.0, "TM"))
    assert abs(te.R - tm.R) < 1e-12 and abs(te.r - tm.r) < 1e-12


@settings(max_examples=100, deadline=None)
@given(layers, st.floats(0.5, 2.0), st.floats(400, 1500))
def test_thickness_wavelength_scaling(ls, f, wl):
    stack = LayerStack(1.0, tuple(Layer(n, d) for n, d in ls), 1.5)
    a = tmm.stack_response(tmm.scale_thicknesses(stack, f), PlaneWaveQuery(wl))
    b = tmm.stack_response(stack, PlaneWaveQuery(wl / f))
    assert abs(a.r - b.r) < 1e-10


def test_polarization_enum_accepts_strings():
    assert Polarization("TE") is Polarization.TE
