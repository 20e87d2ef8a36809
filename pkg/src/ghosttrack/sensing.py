"""Random binary patterns and the coincidence forward model.

The coincidence rate for pattern ``A_m`` is proportional to the spatial
overlap of the pattern with the object seen through inverted coordinates,
so the object enters every measurement rotated by 180 degrees. The
proportionality constant is left to :mod:`ghosttrack.noise` (gain).

Randomness comes from numpy's PCG64 bit generator seeded through a
``SeedSequence``; identical seeds give bit-identical masks on every
platform numpy supports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .scene import Frame, _readonly

IDEAL = "ideal"
COUNTS = "counts"


def rng_for(seed: int, *stream) -> np.random.Generator:
    """Independent PCG64 stream derived from ``seed`` and integer stream keys."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=stream)))


@dataclass(frozen=True)
class Pattern:
    width: int
    height: int
    mask: np.ndarray
    seq: int = 0

    def __post_init__(self):
        m = np.asarray(self.mask).ravel()
        if m.size != self.width * self.height:
            raise DimensionError("mask size does not match pattern dimensions")
        if not np.isin(m, (0, 1)).all():
            raise ValueError("pattern masks must be binary")
        object.__setattr__(self, "mask", _readonly(m.astype(np.uint8)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def image(self) -> np.ndarray:
        return self.mask.reshape(self.height, self.width)

    __hash__ = None


@dataclass(frozen=True)
class SensingMatrix:
    """Row-stacked flattened pattern masks, shape (m, n)."""

    rows: np.ndarray
    width: int
    height: int
    seed: int | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2 or rows.shape[1] != self.width * self.height:
            raise DimensionError("sensing matrix rows must have width*height entries")
        object.__setattr__(self, "rows", _readonly(rows.astype(np.uint8)))
        if self.m >= self.n:
            warnings.warn(
                f"m={self.m} >= n={self.n}: not a compressive configuration",
                stacklevel=3,
            )

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    @property
    def provenance(self) -> tuple:
        return (self.seed, self.m, self.width, self.height)

    def pattern(self, k: int) -> Pattern:
        return Pattern(self.width, self.height, self.rows[k], k)

    def measure(self, frame: Frame) -> "MeasurementVector":
        """Ideal measurement of every row at once (matrix-vector form)."""
        if frame.shape != (self.height, self.width):
            raise DimensionError("frame and patterns differ in size")
        vals = self.rows.astype(np.int64) @ rotate180(frame).pixels.astype(np.int64)
        return MeasurementVector(vals.astype(float), frame.index, IDEAL, self.provenance)

    __hash__ = None


@dataclass(frozen=True)
class MeasurementVector:
    """Per-pattern coincidence values for one frame.

    ``provenance`` identifies the pattern set (seed, m, width, height);
    ``gain`` is set on noisy vectors and records the overlap-to-photon scale.
    """

    values: np.ndarray
    frame_index: int = 0
    kind: str = IDEAL
    provenance: tuple | None = None
    gain: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if self.kind not in (IDEAL, COUNTS):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if np.any(v < 0):
            raise ValueError("measurements must be nonnegative")
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self):
        return self.values.size

    __hash__ = None


def gen_patterns(m: int, width: int, height: int, seed: int) -> list[Pattern]:
    """``m`` i.i.d. Bernoulli(1/2) masks, deterministic in ``seed``.

    The first ``k`` patterns for a given seed do not depend on ``m``.
    """
    if m < 1:
        raise ValueError("need at least one pattern")
    if width * height < 1:
        raise ValueError("patterns need at least one pixel")
    bits = rng_for(seed).random((m, width * height)) < 0.5
    return [Pattern(width, height, bits[k], k) for k in range(m)]


def rotate180(frame: Frame) -> Frame:
    """Map pixel (r, c) to (height-1-r, width-1-c)."""
    return Frame.from_array(frame.image()[::-1, ::-1], frame.index)


def _check_dims(pattern: Pattern, frame: Frame):
    if pattern.shape != frame.shape:
        raise DimensionError(f"pattern {pattern.shape} and frame {frame.shape} differ in size")


def measure(pattern: Pattern, frame: Frame) -> float:
    """Overlap of the pattern with the coordinate-inverted frame."""
    _check_dims(pattern, frame)
    return float(np.dot(pattern.mask.astype(np.int64), rotate180(frame).pixels.astype(np.int64)))


def measure_unrotated(pattern: Pattern, frame: Frame) -> float:
    _check_dims(pattern, frame)
    return float(np.dot(pattern.mask.astype(np.int64), frame.pixels.astype(np.int64)))


def measure_all(patterns, frame: Frame, seed: int | None = None) -> MeasurementVector:
    """Measure ``frame`` against each pattern; ``seed`` is recorded as provenance."""
    patterns = list(patterns)
    vals = [measure(p, frame) for p in patterns]
    prov = (seed, len(patterns), frame.width, frame.height)
    return MeasurementVector(np.asarray(vals, dtype=float), frame.index, IDEAL, prov)


def build_sensing_matrix(patterns, seed: int | None = None) -> SensingMatrix:
    patterns = list(patterns)
    if not patterns:
        raise ValueError("cannot build a sensing matrix from no patterns")
    shape = patterns[0].shape
    if any(p.shape != shape for p in patterns):
        raise DimensionError("patterns have mixed dimensions")
    rows = np.stack([p.mask for p in patterns])
    return SensingMatrix(rows, shape[1], shape[0], seed)


def sensing_matrix(m: int, width: int, height: int, seed: int) -> SensingMatrix:
    """Shortcut for ``build_sensing_matrix(gen_patterns(...))``."""
    return build_sensing_matrix(gen_patterns(m, width, height, seed), seed)
