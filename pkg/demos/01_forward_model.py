"""
The measurement model
=====================

Each measurement is a photon-coincidence count: the number of pixels that are
"on" both in a random binary pattern and in the object. The object enters
with both coordinates inverted, so the count is the overlap of the pattern
with the scene turned by 180 degrees.
"""

import numpy as np

from ghosttrack import bundled_scene, render_scene, sensing_matrix
from ghosttrack.sensing import rotate180

from _ascii import show

scene = bundled_scene()
bg = render_scene(scene, 0)
print(f"background: {bg.width}x{bg.height}, {bg.count()} pixels set")
show(bg.image())

###############################################################################
# A sensing matrix is just the stack of flattened patterns. Patterns are
# i.i.d. fair coin flips, so each row covers about half the scene.
A = sensing_matrix(400, 64, 64, seed=20131)
print("mean pattern fill:", A.rows.mean())

###############################################################################
# One measurement by brute force, and the same thing as a matrix product.
k = 0
mask = A.pattern(k).image()
brute = sum(
    int(mask[r, c]) * int(bg.image()[63 - r, 63 - c]) for r in range(64) for c in range(64)
)
J = A.measure(bg)
print("brute force:", brute, " matrix row:", int(J.values[k]))
assert brute == J.values[k]
assert np.array_equal(J.values, A.rows @ rotate180(bg).pixels)

###############################################################################
# The model is linear, so measuring two frames and subtracting equals
# measuring their signed difference. That is what makes background
# subtraction in measurement space work.
f1, f2 = render_scene(scene, 1), render_scene(scene, 2)
dJ = A.measure(f2).values - A.measure(f1).values
diff = f2.image().astype(int) - f1.image().astype(int)
assert np.array_equal(dJ, A.rows @ diff[::-1, ::-1].ravel())
print(f"frame 2 minus frame 1 touches {np.count_nonzero(diff)} pixels "
      f"out of {diff.size}; the measurement difference needs only those")
