"""Draw the bundled 64x64 demo scene and write its PGM assets and script.

Run from the repository root:  python tools/make_scene.py
"""

from pathlib import Path

import numpy as np

from ghosttrack.csvio import sha256_file
from ghosttrack.scene import Frame, save_frame

SIZE = 64
OUT = Path(__file__).resolve().parents[1] / "src" / "ghosttrack" / "data"


def disk(img, r0, c0, radius, value=1):
    rr, cc = np.mgrid[: img.shape[0], : img.shape[1]]
    img[(rr - r0) ** 2 + (cc - c0) ** 2 <= radius**2] = value


def background():
    img = np.zeros((SIZE, SIZE), dtype=np.uint8)
    g = SIZE  # baseline row; the scene has no drawn ground
    # house: walls, roof, door
    img[g - 8 : g, 6:15] = 1
    for k in range(4):
        img[g - 12 + k, 10 - k : 11 + k] = 1
    img[g - 4 : g, 9:12] = 0
    # tree: crown and trunk
    disk(img, g - 11, 52, 4)
    img[g - 6 : g, 51:53] = 1
    # crescent moon
    disk(img, 7, 55, 5)
    disk(img, 5, 58, 4, 0)
    return img


def sprite(h=12, w=20, a=3.5, b=9.5):
    """A flying saucer: flat elliptical hull with a dome on top."""
    rr, cc = np.mgrid[:h, :w]
    hull = ((rr - (h - 1 - a)) / a) ** 2 + ((cc - (w - 1) / 2) / b) ** 2 <= 1.0
    dome = ((rr - (h - 1 - 2 * a)) / 4.0) ** 2 + ((cc - (w - 1) / 2) / 5.0) ** 2 <= 1.0
    return (hull | dome).astype(np.uint8)


POSITIONS = [(24, 2), (6, 12), (24, 22), (6, 32), (26, 40)]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    save_frame(OUT / "background.pgm", Frame.from_array(background()))
    save_frame(OUT / "sprite.pgm", Frame.from_array(sprite()))
    lines = [
        "# bundled demo scene: house, tree and moon with a flying saucer",
        "background.pgm",
        "sprite.pgm",
    ]
    lines += [f"{r} {c}" for r, c in POSITIONS]
    (OUT / "scene.txt").write_text("\n".join(lines) + "\n")
    names = ["background.pgm", "sprite.pgm", "scene.txt"]
    (OUT / "assets.sha256").write_text("".join(f"{sha256_file(OUT / n)}  {n}\n" for n in names))


if __name__ == "__main__":
    main()
