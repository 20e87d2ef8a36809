"""Photon-counting noise: Poisson shot noise on the signal plus Poisson dark counts."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSceneError
from .sensing import COUNTS, IDEAL, MeasurementVector, rng_for

# accidental coincidences scale, as a fraction of the signal budget
DEFAULT_DARK_FRACTION = 0.02


@dataclass(frozen=True)
class NoiseModel:
    photons_per_measurement: float
    dark_rate: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.photons_per_measurement > 0:
            raise ValueError("photons_per_measurement must be positive")
        if self.dark_rate is None:
            object.__setattr__(
                self, "dark_rate", DEFAULT_DARK_FRACTION * self.photons_per_measurement
            )
        if not self.dark_rate >= 0:
            raise ValueError("dark_rate must be nonnegative")


def calibrate_gain(ideal: MeasurementVector, photons_per_measurement: float) -> float:
    """Gain that maps the mean of ``ideal`` onto ``photons_per_measurement``."""
    if ideal.kind != IDEAL:
        raise ValueError("gain calibration needs an ideal measurement vector")
    mean = float(np.mean(ideal.values)) if len(ideal) else 0.0
    if mean <= 0:
        raise DegenerateSceneError("ideal vector is all zeros; nothing to calibrate")
    return photons_per_measurement / mean


def apply_noise(
    ideal: MeasurementVector,
    model: NoiseModel,
    gain: float | None = None,
    stream: tuple = (),
) -> MeasurementVector:
    """Sample photon counts ``Poisson(gain * ideal) + Poisson(dark_rate)``.

    ``gain`` defaults to :func:`calibrate_gain` on ``ideal`` itself; tracking
    runs pass the gain of the background frame so that every frame shares one
    scale. Each call draws from a PCG64 stream keyed by
    ``(model.seed, ideal.frame_index, *stream)``, so results are reproducible
    and independent of call order. numpy's Poisson sampler uses inversion
    for small means and PTRS rejection for large ones.
    """
    if ideal.kind != IDEAL:
        raise ValueError("noise is applied to ideal vectors only")
    if gain is None:
        gain = calibrate_gain(ideal, model.photons_per_measurement)
    rng = rng_for(model.seed, ideal.frame_index, *stream)
    signal = rng.poisson(gain * ideal.values)
    dark = rng.poisson(model.dark_rate, size=len(ideal))
    counts = (signal + dark).astype(float)
    return replace(ideal, values=counts, kind=COUNTS, gain=float(gain))


def expected_counts(ideal: MeasurementVector, model: NoiseModel, gain: float) -> np.ndarray:
    return gain * ideal.values + model.dark_rate
