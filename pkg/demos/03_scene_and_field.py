"""
Scenes, exact probe masses and the observed field
==================================================

A scene is an intensity supported on a convex body.  The probe mass
l_f(u, r) is the mass of f beyond the line x.u = r.  How fast that mass
vanishes as r approaches h(u) is the mass index alpha, which sets the
attainable rate.  The observed field is the blurred image plus white noise,
discretized as increments over grid cells.
"""

import numpy as np

from convexprobe import BlurKernel, Disk, GridSpec, IntensityModel, Polygon, ProbeLocation
from convexprobe import blur_on_grid, fit_alpha, integrate_against, probe_functional_exact, simulate_grid_field
from convexprobe.scene import rasterize

disk = IntensityModel.sharp(Disk(0.7))
square = IntensityModel.sharp(Polygon([[-0.6, -0.6], [0.6, -0.6], [0.6, 0.6], [-0.6, 0.6]]))
soft = IntensityModel.boundary_power(Disk(0.7), gamma=1.0)

# probe mass falls to zero at the support value
u = np.array([1.0, 0.0])
for r in (0.0, 0.4, 0.65, 0.7):
    print(f"r={r:4.2f}  disk {probe_functional_exact(disk, ProbeLocation(u, r)):.5f}"
          f"  soft {probe_functional_exact(soft, ProbeLocation(u, r)):.5f}")

# mass index from small depths: 3/2 for curved edges, 1 along a face, 2 at a corner
eta = np.geomspace(1e-3, 1e-2, 6)
diag = np.array([1.0, 1.0]) / np.sqrt(2)
for name, model, v in [("disk", disk, u), ("square face", square, u), ("square corner", square, diag),
                       ("soft disk", soft, u)]:
    alpha, q = fit_alpha(model, v, eta)
    print(f"{name:14s} alpha = {alpha:.3f}  (Q = {q:.3f}, nominal {model.nominal_alpha(v)})")

# blurred, noisy observation on a periodic grid
grid = GridSpec(4.0, 256)
f = rasterize(disk, grid)
blurred = blur_on_grid(BlurKernel.sobolev(1.0), f, grid)
print(f"\nimage mass {f.sum() * grid.cell_area:.4f}, after blur {blurred.values.sum() * grid.cell_area:.4f}"
      f" (wrap-around flag {blurred.wraparound})")
obs = simulate_grid_field(blurred, 1e-2, seed=(1,), grid=grid)
ones = np.ones(grid.shape)
print(f"integral of dY over the domain: {integrate_against(obs, ones):.4f} "
      f"(noise sd {1e-2 * 8.0:.2f})")
