"""Is the dimple smooth enough? A roughness-to-finesse budget.

A synthetic height map stands in for an interferometer measurement: a 50 um
radius dimple with 1 nm rms roughness. The walk-through fits the sphere,
reads the roughness from the PSD, and converts it to a scatter-limited
finesse ceiling. It also writes the map to demos/out/dimple.grid, the input
for the surface CLI configs.

Run: python3 demos/03_surface_budget.py
"""

import math
from pathlib import Path

import numpy as np

from hemicav import gridio, surface
from hemicav.surface import HeightMap

N, PITCH, R = 256, 0.1, 50.0  # pixels, um, um
y, x = np.mgrid[0:N, 0:N] * PITCH
c = N * PITCH / 2
shape = (R - np.sqrt(R**2 - (x - c) ** 2 - (y - c) ** 2)) * 1e3
rough = np.random.default_rng(3).normal(0, 1.0, shape.shape)
heights = shape + rough

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
gridio.write_grid(out / "dimple.grid", heights, PITCH * 1e3, "height", "nm")
hm = HeightMap(heights, PITCH)

fit = surface.fit_sphere(hm, (c, c), 15.0)
print(f"1. Sphere fit over a 15 um patch: R = {fit.fitted_radius:.3f} um, "
      f"residual {fit.rms_residual:.2f} nm rms, {'concave' if fit.concave_up else 'convex'}")

psd = surface.compute_psd(HeightMap(rough, PITCH))
sigma = math.sqrt(psd.variance)
mid = surface.rms_in_band(psd, 100.0, 1000.0)
print(f"\n2. Roughness after removing the sphere: {sigma:.2f} nm rms, "
      f"{mid:.2f} nm in the 100-1000 /mm band")

print("\n3. Scatter-limited finesse at 750 nm")
for T in (0.004, 0.0005):
    est = surface.scatter_budget(sigma, 750.0, [T, T])
    print(f"   mirrors with T = {T}: TIS per bounce {est.total_integrated_scatter:.2e}, "
          f"finesse ceiling {est.finesse_ceiling:.0f}")
print("\n   Scatter matters once mirror transmission falls towards the TIS level.")
