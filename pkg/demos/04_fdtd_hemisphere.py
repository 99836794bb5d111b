"""Full-wave mode of a hemispherical cavity below the paraxial limit.

At L = R the paraxial theory is marginal and gives no finite waist, so the
mode is computed with the axisymmetric FDTD solver: a flat PEC bottom mirror,
a 10 um radius dimple 6 um deep, m = 1 (linear polarization). A short pulse
finds the resonances near 750 nm; a narrowband re-excitation of the strongest
one gives the energy-density map and the waist. Under 2 minutes on one core.

Run: python3 demos/04_fdtd_hemisphere.py
"""

from pathlib import Path

from scipy.constants import c

from hemicav.coating import DimpleGeometry
from hemicav.fdtd import SourceSpec, build_domain, io, mode_profile, resonances, run_ringdown, strongest_resonance
from hemicav.modes import CavityGeometry, free_spectral_range, gaussian_mode

L = R = 10.0
f0 = c / 750e-9 / 1e12
fsr = free_spectral_range(L)
print(f"1. Paraxial check just off the hemispherical point (R = 10.01 um): "
      f"w0 = {gaussian_mode(CavityGeometry(L, 10.01), 750).waist_radius:.3f} um, shrinking to zero as R -> L")

dom = build_domain(CavityGeometry(L, R), None, DimpleGeometry(R, depth=6.0), 20, 1, 750.0)
print(f"\n2. Grid {dom.material_map.shape[0]} x {dom.material_map.shape[1]} cells of {dom.cell_size:.1f} nm")

src = SourceSpec((0.0, 0.1875), f0, 40.0, "e_x", 1.0, 0.35)
rec = run_ringdown(dom, src, [("e_r", 0.0, 0.1875)], 6.0 * f0, precision="single")
band = (f0 - fsr / 2, f0 + fsr / 2)
print(f"\n3. Resonances within one FSR ({fsr:.2f} THz) of {f0:.2f} THz")
print("   (the walls are lossless, so only frequencies matter here):")
found = [f for f, _ in resonances(rec, band=band)]
for i in range(0, len(found), 6):
    print("   " + "  ".join(f"{f:.3f}" for f in found[i:i + 6]))
f_mode = strongest_resonance(rec, band=band)[0]

mp = mode_profile(dom, f_mode, src, settle_cycles=50, average_cycles=7.0 * f_mode, bandwidth=8.0, precision="single")
print(f"\n4. Fundamental at {f_mode:.3f} THz: waist {mp.waist_radius:.3f} um "
      f"(one wavelength is 0.75 um), taken at z = {mp.waist_plane:.3f} um")
r, a = mp.transverse_profile
print("   r (um)  |E|   (the shoulder beyond 0.45 um is a near-degenerate neighbour mixing in)")
for i in range(0, min(len(r), 24), 3):
    print(f"   {r[i]:6.3f}  {a[i]:.3f}")

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
io.write_map(out / "hemisphere_energy.grid", dom, mp.energy_density_map, "energy_density")
print(f"\n5. Energy density map written to {out / 'hemisphere_energy.grid'}")
