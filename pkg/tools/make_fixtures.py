"""Regenerate the golden measurement fixtures used by the tests.

The overlaps are computed pixel by pixel from the pattern masks, without the
sensing-matrix code path, so the fixtures check that path independently.
Run from the repository root:  python tools/make_fixtures.py
"""

from pathlib import Path

import numpy as np

from ghosttrack.csvio import write_vector
from ghosttrack.scene import bundled_scene, render_scene
from ghosttrack.sensing import gen_patterns

SEED = 20131
M = 400
OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def overlaps(patterns, image):
    h, w = image.shape
    out = np.zeros(len(patterns), dtype=np.int64)
    for k, p in enumerate(patterns):
        mask = p.image()
        total = 0
        for r in range(h):
            for c in range(w):
                if mask[r, c] and image[h - 1 - r, w - 1 - c]:
                    total += 1
        out[k] = total
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    scene = bundled_scene()
    pats = gen_patterns(M, 64, 64, SEED)
    meta = {"seed": SEED, "m": M, "width": 64, "height": 64, "kind": "ideal"}
    bg = overlaps(pats, render_scene(scene, 0).image())
    write_vector(OUT / "background_m400.csv", bg, {**meta, "frame": 0})
    j1 = overlaps(pats, render_scene(scene, 1).image())
    j2 = overlaps(pats, render_scene(scene, 2).image())
    write_vector(OUT / "delta_m400_f1_f2.csv", j2 - j1, {**meta, "frame": 2, "kind": "delta"})


if __name__ == "__main__":
    main()
