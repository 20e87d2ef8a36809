"""
Tracking by subtracting measurement vectors
===========================================

Instead of reconstructing every frame, subtract the measurement vector of the
previous frame. Only the change is left: a positive blob where the object
arrived and a negative one where it left. That change is sparse, so a few
hundred patterns (or even 100) are enough.
"""

from ghosttrack import bundled_scene, sensing_matrix, track_sequence
from ghosttrack.config import load_config
from ghosttrack.noise import NoiseModel

from _ascii import show

scene = bundled_scene()
config = load_config().track_solver  # bundled tracking solver settings

for m in (400, 100):
    A = sensing_matrix(m, 64, 64, seed=20131)
    print(f"\n--- m = {m} noiseless ---")
    for k, st in enumerate(track_sequence(scene, A, None, config), start=1):
        r = st.result
        fmt = lambda c: "   -    " if c is None else f"({c[0]:4.1f},{c[1]:4.1f})"  # noqa: E731
        print(f"step {k}: new {fmt(r.new_centroid)} old {fmt(r.old_centroid)} "
              f"confidence {r.confidence:.2f}")

###############################################################################
# The change map of the last step at m = 100: "+" where the saucer is now,
# "-" where it was.
show(st.reconstruction.as_array(), signed=True)

###############################################################################
# With photon noise (500 photons per measurement) the positions are still found.
A = sensing_matrix(100, 64, 64, seed=20131)
steps = track_sequence(scene, A, NoiseModel(500.0, seed=1), config)
for k, st in enumerate(steps, start=1):
    print(f"noisy step {k}: displacement {st.result.displacement}")
