import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hemicav import modes
from hemicav.errors import DegenerateGeometryError
from hemicav.modes import CavityGeometry

C = 299792458.0


def test_stability_classes():
    s = modes.stability(CavityGeometry(50, 50))
    assert s.g2 == 0 and s.marginal and s.stable
    s = modes.stability(CavityGeometry(25, 50))
    assert s.g2 == 0.5 and s.stable and not s.marginal
    assert not modes.stability(CavityGeometry(60, 50)).stable


def test_marginal_geometry_refused():
    with pytest.raises(DegenerateGeometryError):
        modes.gaussian_mode(CavityGeometry(50, 50), 750)
    with pytest.raises(DegenerateGeometryError):
        modes.mode_spectrum(CavityGeometry(50, 50), (700, 800), 2)
    with pytest.raises(DegenerateGeometryError):
        modes.gaussian_mode(CavityGeometry(60, 50), 750)


def test_waist_near_hemisphere():
    g = modes.gaussian_mode(CavityGeometry(50, 50.1), 750)
    assert g.waist_radius == pytest.approx(0.731, abs=5e-4)


def test_waist_matches_abcd_round_trip():
    geo = CavityGeometry(50, 80)
    q = modes.round_trip_q(geo, 750)
    w_abcd = math.sqrt(-0.75 / (math.pi * (1 / q).imag))
    assert modes.gaussian_mode(geo, 750).waist_radius == pytest.approx(w_abcd, rel=1e-10)


def test_mode_volume_formula():
    w0 = 0.5
    R = 50 + (math.pi * w0**2 / 0.75) ** 2 / 50  # geometry with w0 = 0.5 um
    g = modes.gaussian_mode(CavityGeometry(50, R), 750)
    assert g.waist_radius == pytest.approx(0.5, rel=1e-12)
    assert g.effective_mode_volume == pytest.approx(9.817, abs=1e-3)


def test_waist_shrinks_towards_hemisphere():
    w = [modes.gaussian_mode(CavityGeometry(50, 50 + d), 750).waist_radius for d in (10, 1, 0.1, 0.01)]
    assert all(a > b for a, b in zip(w, w[1:]))


def test_hemispherical_spacing_c_over_4L():
    geo = CavityGeometry(60, 60 / (1 - 1e-6))
    spec = modes.mode_spectrum(geo, (740, 760), 1)
    by = {(q, n): f for q, n, f in spec}
    q = next(q for q, n in by if n == 0 and (q, 1) in by)
    assert by[(q, 1)] - by[(q, 0)] == pytest.approx(C / (4 * 60e-6) / 1e12, rel=1e-3)
    assert C / (4 * 60e-6) / 1e12 == pytest.approx(1.249, abs=1e-3)


def test_half_confocal_spacing():
    spec = modes.mode_spectrum(CavityGeometry(50, 100), (740, 760), 1)
    by = {(q, n): f for q, n, f in spec}
    q = next(q for q, n in by if n == 0 and (q, 1) in by)
    assert by[(q, 1)] - by[(q, 0)] == pytest.approx(modes.free_spectral_range(50) / 4, rel=1e-12)


def test_near_planar_transverse_degeneracy():
    spec = modes.mode_spectrum(CavityGeometry(10, 1e12), (740, 760), 3)
    by = {(q, n): f for q, n, f in spec}
    q = next(q for q, n in by if n == 0 and (q, 3) in by)
    assert by[(q, 3)] - by[(q, 0)] < 1e-3


def test_spectrum_window_and_rows():
    spec = modes.mode_spectrum(CavityGeometry(10, 20), (740, 760), 4)
    for q, n, f, wl in spec.rows():
        assert 740 <= wl <= 760
        assert wl == pytest.approx(C / (f * 1e12) * 1e9)


def test_divergence_round_trip():
    for w in (0.3, 0.75, 2.0):
        th = modes.divergence_from_waist(w, 750)
        assert modes.mode_waist_from_divergence(th, 750) == pytest.approx(w, rel=1e-12)
    assert math.degrees(modes.divergence_from_waist(0.75, 750)) == pytest.approx(18.24, abs=0.01)
    assert math.degrees(modes.divergence_from_waist(0.5, 750)) == pytest.approx(27.357, abs=1e-3)


geometries = st.tuples(st.floats(1, 100), st.floats(0.01, 0.99)).map(lambda t: CavityGeometry(t[0], t[0] / (1 - t[1])))


@settings(max_examples=100, deadline=None)
@given(geometries)
def test_fsr_exact_for_all_orders(geo):
    spec = modes.mode_spectrum(geo, (600, 900), 3)
    by = {(q, n): f for q, n, f in spec}
    fsr = modes.free_spectral_range(geo.length)
    for (q, n), f in by.items():
        if (q + 1, n) in by:
            assert by[(q + 1, n)] - f == pytest.approx(fsr, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(geometries, st.floats(0.2, 5.0))
def test_waist_homogeneity(geo, a):
    w = modes.gaussian_mode(geo, 750).waist_radius
    w2 = modes.gaussian_mode(CavityGeometry(a * geo.length, a * geo.mirror_radius), 750 * a).waist_radius
    # w0^2 ~ lambda * sqrt(L (R - L)) scales as a^2
    assert w2 == pytest.approx(a * w, rel=1e-9)


def _radius_for_waist(L, w0, wl_um=0.75):
    return L + (math.pi * w0**2 / wl_um) ** 2 / L


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 100), st.floats(1.01, 10), st.floats(0.3, 2.0))
def test_mode_volume_linear_in_length_at_fixed_waist(L, k, w0):
    a = modes.gaussian_mode(CavityGeometry(L, _radius_for_waist(L, w0)), 750)
    b = modes.gaussian_mode(CavityGeometry(k * L, _radius_for_waist(k * L, w0)), 750)
    assert b.waist_radius == pytest.approx(a.waist_radius, rel=1e-9)
    assert b.effective_mode_volume == pytest.approx(k * a.effective_mode_volume, rel=1e-9)


def test_hemispherical_grouping_degeneracy():
    geo = CavityGeometry(20, 20 / (1 - 1e-12))
    spec = modes.mode_spectrum(geo, (700, 800), 4)
    by = {(q, n): f for q, n, f in spec}
    pairs = [(k, (k[0] - 1, k[1] + 2)) for k in by if (k[0] - 1, k[1] + 2) in by]
    assert pairs
    for a, b in pairs:
        assert by[a] == pytest.approx(by[b], abs=1e-3)
    # and not degenerate away from the hemispherical limit
    by = {(q, n): f for q, n, f in modes.mode_spectrum(CavityGeometry(20, 40), (700, 800), 4)}
    assert all(abs(by[a] - by[(a[0] - 1, a[1] + 2)]) > 1 for a in by if (a[0] - 1, a[1] + 2) in by)
    assert np.all(np.diff(modes.mode_spectrum(geo, (700, 800), 4).frequencies) >= 0)
