"""Tiny terminal renderer shared by the demos."""

import numpy as np


def show(image, levels=" .:-=+*#%@", signed=False):
    """Print a 2-D array as characters; signed images use +/- glyphs."""
    img = np.asarray(image, dtype=float)
    if signed:
        peak = np.abs(img).max() or 1.0
        for row in img / peak:
            print("".join("+" if v > 0.5 else "-" if v < -0.5 else "." for v in row))
        return
    lo, hi = img.min(), img.max()
    scaled = (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)
    idx = np.minimum((scaled * len(levels)).astype(int), len(levels) - 1)
    for row in idx:
        print("".join(levels[i] for i in row))
