"""
Reconstructing the static background
====================================

With 2000 patterns, just under half of a raster scan, total-variation
minimisation recovers the binary background almost exactly.
"""

import time

from ghosttrack import SolverConfig, bundled_scene, mse, render_scene, sensing_matrix, tv_min
from ghosttrack.tracking import unrotate

from _ascii import show

bg = render_scene(bundled_scene(), 0)

for m in (400, 1000, 2000):
    A = sensing_matrix(m, 64, 64, seed=20131)
    t0 = time.perf_counter()
    rec = unrotate(tv_min(A, A.measure(bg).values, SolverConfig(nonnegative=True)))
    print(f"m={m:5d} ({100 * m / 4096:4.1f}% of raster): MSE {mse(bg, rec):.4f}, "
          f"{rec.outer_iterations} outer iterations, {time.perf_counter() - t0:.1f} s")

# The last reconstruction (m = 2000):
show(rec.as_array())
