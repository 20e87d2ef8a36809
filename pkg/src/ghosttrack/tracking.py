"""Background subtraction in measurement space and object localisation.

Two frames measured with the same patterns are subtracted; the static part
of the scene cancels and only the change map has to be recovered, which is
much sparser in the gradient domain than either frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ProvenanceError
from .noise import NoiseModel, apply_noise, calibrate_gain
from .scene import DeltaImage, Scene, frame_diff, render_scene
from .sensing import MeasurementVector, SensingMatrix
from .solver import Reconstruction, SolverConfig, tv_min

PREVIOUS = "previous"
BACKGROUND = "background"


@dataclass(frozen=True)
class DeltaVector:
    """Difference of two measurement vectors, ``J^j - J^(j-1)``.

    ``gain`` is the shared overlap-to-counts scale (``None`` for ideal
    vectors); ``photons_per_measurement`` is the budget it was calibrated to.
    """

    values: np.ndarray
    frame_pair: tuple[int, int]
    gain: float | None = None
    photons_per_measurement: float | None = None
    provenance: tuple | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def overlap_units(self) -> np.ndarray:
        """Values divided by the gain, i.e. back in pixel-overlap units."""
        return self.values / self.gain if self.gain else self.values.copy()

    def __neg__(self) -> "DeltaVector":
        a, b = self.frame_pair
        return DeltaVector(
            -self.values, (b, a), self.gain, self.photons_per_measurement, self.provenance
        )

    __hash__ = None


@dataclass(frozen=True)
class TrackResult:
    """Blob centroids (row, col) in scene coordinates.

    A centroid is ``None`` when that polarity has no blob; both are ``None``
    for the no-motion signal.
    """

    new_centroid: tuple[float, float] | None
    old_centroid: tuple[float, float] | None
    confidence: float

    @property
    def displacement(self) -> tuple[float, float] | None:
        if self.new_centroid is None or self.old_centroid is None:
            return None
        return (
            self.new_centroid[0] - self.old_centroid[0],
            self.new_centroid[1] - self.old_centroid[1],
        )

    @property
    def moving(self) -> bool:
        return self.new_centroid is not None or self.old_centroid is not None


NO_MOTION = TrackResult(None, None, 0.0)


@dataclass(frozen=True)
class TrackStep:
    frame_pair: tuple[int, int]
    result: TrackResult
    reconstruction: Reconstruction
    truth: DeltaImage


def delta_measure(
    J_j: MeasurementVector,
    J_prev: MeasurementVector,
    photons_per_measurement: float | None = None,
) -> DeltaVector:
    if len(J_j) != len(J_prev):
        raise DimensionError("measurement vectors differ in length")
    if J_j.provenance != J_prev.provenance:
        raise ProvenanceError(
            f"vectors come from different pattern sets: {J_j.provenance} vs {J_prev.provenance}"
        )
    if J_j.kind != J_prev.kind:
        raise ProvenanceError("cannot subtract ideal and noisy vectors")
    if J_j.gain != J_prev.gain:
        raise ProvenanceError("vectors were calibrated with different gains")
    return DeltaVector(
        J_j.values - J_prev.values,
        (J_prev.frame_index, J_j.frame_index),
        J_j.gain,
        photons_per_measurement,
        J_j.provenance,
    )


def unrotate(rec: Reconstruction) -> Reconstruction:
    """Undo the coordinate inversion of the forward model."""
    img = rec.as_array()[::-1, ::-1]
    return Reconstruction(
        img.ravel(), rec.width, rec.height, rec.outer_iterations,
        rec.objective, rec.residual, rec.converged,
    )


def track_step(A: SensingMatrix, dJ: DeltaVector, config: SolverConfig = SolverConfig()) -> Reconstruction:
    """Recover the signed change map from a subtracted measurement vector.

    Counts are converted back to overlap units with the shared gain, so the
    result is in reflectivity units (roughly -1..1) whatever the photon
    budget. The output is in scene coordinates.
    """
    if A.m != len(dJ):
        raise DimensionError(f"A has {A.m} rows but the delta vector has {len(dJ)}")
    rec = tv_min(A, dJ.overlap_units(), config.with_(nonnegative=False))
    return unrotate(rec)


def _centroid(weights: np.ndarray, mask: np.ndarray, width: int):
    idx = np.flatnonzero(mask)
    wts = weights[idx]
    total = wts.sum()
    rows, cols = np.divmod(idx, width)
    return (float(rows @ wts / total), float(cols @ wts / total))


def localize(delta, threshold_fraction: float = 0.5) -> TrackResult:
    """Centroids of the positive (new position) and negative (old position) blobs.

    Pixels above ``threshold_fraction * max`` form the new blob and pixels
    below ``threshold_fraction * min`` the old one; centroids are weighted by
    |value|. A polarity whose peak is under ``threshold_fraction`` of the
    strongest peak of either sign is treated as absent, so an appearing
    object does not produce a spurious old position from ringing.
    ``confidence`` is the share of total |value| mass inside the two blobs.
    """
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    if isinstance(delta, Reconstruction):
        values, width = delta.image, delta.width
    elif isinstance(delta, DeltaImage):
        values, width = delta.values, delta.width
    else:
        raise TypeError("localize expects a Reconstruction or DeltaImage")
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("delta image contains non-finite values")

    hi = max(float(values.max()), 0.0)
    lo = min(float(values.min()), 0.0)
    peak = max(hi, -lo)
    if peak == 0.0:
        return NO_MOTION

    pos = values > threshold_fraction * hi if hi >= threshold_fraction * peak else None
    neg = values < threshold_fraction * lo if -lo >= threshold_fraction * peak else None
    mag = np.abs(values)
    captured = 0.0
    new_c = old_c = None
    if pos is not None:
        new_c = _centroid(mag, pos, width)
        captured += mag[pos].sum()
    if neg is not None:
        old_c = _centroid(mag, neg, width)
        captured += mag[neg].sum()
    return TrackResult(new_c, old_c, float(captured / mag.sum()))


def centroid_error(result: TrackResult, reference: TrackResult) -> float:
    """Largest centroid distance in pixels between two localizations.

    Both polarities are compared; a blob present in one result but not the
    other counts as an infinite error. Two no-motion results agree (0.0).
    """
    errs = []
    for got, want in ((result.new_centroid, reference.new_centroid),
                      (result.old_centroid, reference.old_centroid)):
        if got is None and want is None:
            continue
        if got is None or want is None:
            return math.inf
        errs.append(math.hypot(got[0] - want[0], got[1] - want[1]))
    return max(errs, default=0.0)


def measure_frames(scene: Scene, A: SensingMatrix, noise: NoiseModel | None, frames=None):
    """Measurement vectors for the requested frame indices (default: all).

    With a noise model the gain is calibrated once, on the background frame.
    """
    if frames is None:
        frames = range(scene.n_frames)
    frames = sorted(set(frames))
    ideal = {j: A.measure(render_scene(scene, j)) for j in frames}
    if noise is None:
        return ideal
    bg = ideal[0] if 0 in ideal else A.measure(render_scene(scene, 0))
    gain = calibrate_gain(bg, noise.photons_per_measurement)
    return {j: apply_noise(v, noise, gain=gain) for j, v in ideal.items()}


def track_sequence(
    scene: Scene,
    A: SensingMatrix,
    noise: NoiseModel | None = None,
    config: SolverConfig = SolverConfig(),
    reference: str = PREVIOUS,
    threshold_fraction: float = 0.5,
) -> list[TrackStep]:
    """Track the sprite through every frame of ``scene``.

    Step ``j`` subtracts frame ``j-1`` (``reference="previous"``) or the
    background frame 0 (``reference="background"``) from frame ``j``. Step 1
    always compares against the background, so it shows the object
    appearing rather than moving.
    """
    if len(scene.positions) < 2:
        raise ValueError("scene needs at least two object frames to track")
    if reference not in (PREVIOUS, BACKGROUND):
        raise ValueError(f"unknown reference mode {reference!r}")
    vecs = measure_frames(scene, A, noise)
    photons = noise.photons_per_measurement if noise is not None else None
    steps = []
    for j in range(1, scene.n_frames):
        prev = j - 1 if reference == PREVIOUS else 0
        dJ = delta_measure(vecs[j], vecs[prev], photons)
        rec = track_step(A, dJ, config)
        truth = frame_diff(render_scene(scene, j), render_scene(scene, prev))
        steps.append(TrackStep((prev, j), localize(rec, threshold_fraction), rec, truth))
    return steps
