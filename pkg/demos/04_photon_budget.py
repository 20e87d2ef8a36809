"""
How many photons does tracking need?
====================================

Sweep the photons per measurement for 100 and 400 patterns and find the
smallest budget that keeps the tracked change map under MSE 0.04. Fewer
patterns need more photons each, but far fewer photons overall.
"""

import math

from ghosttrack import bits_per_photon, bundled_scene, photon_sweep
from ghosttrack.config import load_config
from ghosttrack.metrics import photon_threshold

cfg = load_config()
seeds = 3  # the acceptance run uses 10; 3 keeps this demo to a few minutes

points = photon_sweep(bundled_scene(), cfg.sweep_pair, [100, 400], [None, 50, 200, 500, 1000, 2000],
                      seeds, cfg.track_solver, cfg.seed,
                      progress=lambda p: print(f"m={p.measurements:4d} P={p.photons_per_measurement:>6} "
                                               f"MSE {p.mse_mean:.4f} +- {p.mse_std:.4f}"))

for m in (100, 400):
    P = photon_threshold(points, m)
    if P is None or math.isinf(P):
        print(f"m={m}: no budget on this grid reaches MSE 0.04")
        continue
    print(f"m={m}: {P:g} photons/measurement, {m * P:g} photons per frame, "
          f"{bits_per_photon(4096, m, P):.3f} bits/photon")
