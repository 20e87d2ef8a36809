"""Reconstruction fidelity, photon efficiency, and the photon-budget sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .noise import DEFAULT_DARK_FRACTION, NoiseModel, apply_noise, calibrate_gain
from .scene import DeltaImage, Frame, Scene, frame_diff, render_scene
from .sensing import sensing_matrix
from .solver import Reconstruction, SolverConfig
from .tracking import delta_measure, track_step


def _values(obj) -> np.ndarray:
    if isinstance(obj, Frame):
        return obj.pixels.astype(float)
    if isinstance(obj, DeltaImage):
        return obj.values
    if isinstance(obj, Reconstruction):
        return obj.image
    return np.asarray(obj, dtype=float).ravel()


def mse(truth, estimate) -> float:
    """Mean-squared error after a least-squares scalar fit of the estimate.

    Returns ``mean((truth - a * estimate)**2)`` with
    ``a = <estimate, truth> / <estimate, estimate>`` (``a = 0`` for an all-zero
    estimate). Reconstructions come out in arbitrary units, so the fit makes
    the number comparable against a fixed quality threshold.
    """
    t = _values(truth)
    e = _values(estimate)
    if t.shape != e.shape:
        raise DimensionError(f"truth has {t.size} pixels, estimate has {e.size}")
    ee = float(e @ e)
    alpha = float(e @ t) / ee if ee > 0 else 0.0
    r = t - alpha * e
    return float(r @ r) / t.size


def bits_per_photon(n_pixels: int, measurements: int, photons_per_measurement: float) -> float:
    """Bits carried per detected photon, counting one bit per binary pixel."""
    if n_pixels <= 0 or measurements <= 0 or photons_per_measurement <= 0:
        raise ValueError("pixels, measurements and photons must all be positive")
    return n_pixels / (measurements * photons_per_measurement)


@dataclass(frozen=True)
class SweepPoint:
    measurements: int
    photons_per_measurement: float
    seeds: int
    mse_mean: float
    mse_std: float

    def __post_init__(self):
        if self.seeds < 1 or self.mse_mean < 0:
            raise ValueError("invalid sweep point")


# stream tags keep pattern and noise randomness apart under one master seed
PATTERN_STREAM = 1
NOISE_STREAM = 2


def replicate_seed(master_seed: int, replicate: int) -> int:
    """Pattern seed for one sweep replicate.

    All (m, P) points share the replicate's pattern set (common random
    numbers); fewer measurements use a prefix of the same patterns.
    """
    return int(np.random.SeedSequence(master_seed, spawn_key=(PATTERN_STREAM, replicate))
               .generate_state(1, np.uint64)[0])


def noise_seed(master_seed: int, m: int, photons: float, replicate: int) -> int:
    key = (NOISE_STREAM, int(m), int(round(photons * 1000)), replicate)
    return int(np.random.SeedSequence(master_seed, spawn_key=key).generate_state(1, np.uint64)[0])


def sweep_mse(
    scene: Scene,
    frame_pair: tuple[int, int],
    m: int,
    photons: float | None,
    replicate: int,
    config: SolverConfig = SolverConfig(),
    master_seed: int = 0,
    dark_fraction: float = DEFAULT_DARK_FRACTION,
) -> float:
    """MSE of one tracked reconstruction; ``photons=None`` means noiseless."""
    prev, cur = frame_pair
    f_prev, f_cur = render_scene(scene, prev), render_scene(scene, cur)
    truth = frame_diff(f_cur, f_prev)
    A = sensing_matrix(m, f_cur.width, f_cur.height, replicate_seed(master_seed, replicate))
    J_prev, J_cur = A.measure(f_prev), A.measure(f_cur)
    if photons is not None:
        model = NoiseModel(photons, dark_fraction * photons,
                           noise_seed(master_seed, m, photons, replicate))
        gain = calibrate_gain(A.measure(render_scene(scene, 0)), photons)
        J_prev = apply_noise(J_prev, model, gain=gain)
        J_cur = apply_noise(J_cur, model, gain=gain)
    rec = track_step(A, delta_measure(J_cur, J_prev, photons), config)
    return mse(truth, rec)


def photon_sweep(
    scene: Scene,
    frame_pair: tuple[int, int],
    m_list,
    photon_list,
    seeds: int = 10,
    config: SolverConfig = SolverConfig(),
    master_seed: int = 0,
    dark_fraction: float = DEFAULT_DARK_FRACTION,
    progress=None,
) -> list[SweepPoint]:
    """MSE of tracked reconstructions over a grid of (measurements, photons).

    For every grid point and replicate: draw the replicate's patterns,
    measure both frames of ``frame_pair`` with independent Poisson noise at
    the given budget, subtract, reconstruct, and score against the true
    change map. A photon budget of None is the noiseless case, reported as
    an infinite budget. Points are returned in grid order (m outer, photons
    inner).
    """
    m_list = list(m_list)
    photon_list = list(photon_list)
    if not m_list or not photon_list:
        raise ValueError("sweep grids must be nonempty")
    if seeds < 1:
        raise ValueError("need at least one seed per point")
    points = []
    for m in m_list:
        for P in photon_list:
            vals = [
                sweep_mse(scene, frame_pair, m, P, r, config, master_seed, dark_fraction)
                for r in range(seeds)
            ]
            budget = math.inf if P is None else float(P)
            pt = SweepPoint(int(m), budget, seeds, float(np.mean(vals)), float(np.std(vals)))
            points.append(pt)
            if progress is not None:
                progress(pt)
    return points


def photon_threshold(points, m: int, mse_max: float = 0.04) -> float | None:
    """Smallest swept photon budget at which mean MSE reaches ``mse_max``."""
    ok = [p.photons_per_measurement for p in points
          if p.measurements == m and p.mse_mean <= mse_max
          and math.isfinite(p.photons_per_measurement)]
    return min(ok) if ok else None
