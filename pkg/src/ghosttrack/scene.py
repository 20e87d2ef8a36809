"""Binary scenes: a static background plus a sprite moving along scripted positions.

All images are flattened row-major with the origin at the top-left pixel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError, PGMParseError
from .pgm import read_pgm, write_pgm


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Frame:
    """Binary reflectivity image. ``pixels`` is flat, row-major, values in {0, 1}."""

    width: int
    height: int
    pixels: np.ndarray
    index: int = 0

    def __post_init__(self):
        px = np.asarray(self.pixels).ravel()
        if px.size != self.width * self.height:
            raise DimensionError(
                f"frame has {px.size} pixels, expected {self.width}x{self.height}"
            )
        if not np.isin(px, (0, 1)).all():
            raise DomainError("frame pixels must be 0 or 1")
        if self.index < 0:
            raise ValueError("frame index must be nonnegative")
        object.__setattr__(self, "pixels", _readonly(px.astype(np.uint8)))

    @classmethod
    def from_array(cls, image, index: int = 0) -> "Frame":
        image = np.asarray(image)
        if image.ndim != 2:
            raise DimensionError("expected a 2-D array")
        h, w = image.shape
        return cls(w, h, image.ravel(), index)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def n(self) -> int:
        return self.width * self.height

    def image(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)

    def count(self) -> int:
        """Number of set pixels."""
        return int(self.pixels.sum())

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.index == other.index
            and np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None


@dataclass(frozen=True)
class DeltaImage:
    """Signed change map between two frames, flat row-major."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size != self.width * self.height:
            raise DimensionError("delta image size does not match its dimensions")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def image(self) -> np.ndarray:
        return self.values.reshape(self.height, self.width)

    def __neg__(self) -> "DeltaImage":
        return DeltaImage(self.width, self.height, -self.values)

    __hash__ = None


@dataclass(frozen=True)
class Scene:
    background: Frame
    sprite: Frame
    positions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pos = tuple((int(r), int(c)) for r, c in self.positions)
        bh, bw = self.background.shape
        sh, sw = self.sprite.shape
        for r, c in pos:
            if r < 0 or c < 0 or r + sh > bh or c + sw > bw:
                raise DomainError(
                    f"sprite at ({r}, {c}) does not fit inside the {bw}x{bh} background"
                )
        object.__setattr__(self, "positions", pos)

    @property
    def n_frames(self) -> int:
        """Number of frames including the background-only frame 0."""
        return len(self.positions) + 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.background.shape


def load_frame(path, index: int = 0) -> Frame:
    """Load a binary PGM. Samples must be 0 or the declared max value."""
    samples, maxval = read_pgm(path)
    on = samples == maxval
    off = samples == 0
    if not np.all(on | off):
        raise DomainError(f"{path}: scene images must be binary (0 or {maxval})")
    return Frame.from_array(on.astype(np.uint8), index)


def save_frame(path, frame: Frame, binary: bool = True) -> None:
    write_pgm(path, frame.image() * 255, binary=binary)


def load_scene(path) -> Scene:
    """Parse a scene script.

    Line 1 is the background PGM, line 2 the sprite PGM (both relative to the
    script's directory), and every further line a ``row col`` offset. ``#``
    starts a comment.
    """
    path = Path(path)
    lines = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if len(lines) < 2:
        raise PGMParseError(f"{path}: scene script needs background and sprite paths")
    base = path.parent
    background = load_frame(base / lines[0])
    sprite = load_frame(base / lines[1])
    positions = []
    for line in lines[2:]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: expected 'row col', got {line!r}")
        positions.append((int(parts[0]), int(parts[1])))
    return Scene(background, sprite, tuple(positions))


def render_scene(scene: Scene, j: int) -> Frame:
    """Frame ``j`` of the scene: background OR sprite placed at ``positions[j-1]``."""
    if not 0 <= j <= len(scene.positions):
        raise IndexError(f"frame index {j} outside 0..{len(scene.positions)}")
    img = scene.background.image().copy()
    if j > 0:
        r, c = scene.positions[j - 1]
        sh, sw = scene.sprite.shape
        img[r : r + sh, c : c + sw] |= scene.sprite.image()
    return Frame.from_array(img, index=j)


def frame_diff(f_j: Frame, f_prev: Frame) -> DeltaImage:
    if f_j.shape != f_prev.shape:
        raise DimensionError(f"frame shapes differ: {f_j.shape} vs {f_prev.shape}")
    vals = f_j.pixels.astype(np.int64) - f_prev.pixels.astype(np.int64)
    return DeltaImage(f_j.width, f_j.height, vals)


def bundled_scene_path() -> Path:
    """Path of the packaged 64x64 demo scene script."""
    return Path(__file__).parent / "data" / "scene.txt"


def bundled_scene() -> Scene:
    return load_scene(bundled_scene_path())
