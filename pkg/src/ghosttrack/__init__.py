"""Compressive ghost-imaging simulation with background-subtracted object tracking."""

__version__ = "0.1.0"

from .errors import GhostTrackError  # noqa: E402
from .metrics import bits_per_photon, mse, photon_sweep  # noqa: E402
from .noise import NoiseModel, apply_noise  # noqa: E402
from .scene import Frame, Scene, bundled_scene, frame_diff, load_scene, render_scene  # noqa: E402
from .sensing import gen_patterns, measure, measure_all, sensing_matrix  # noqa: E402
from .solver import SolverConfig, reference_solve, tv_min  # noqa: E402
from .tracking import delta_measure, localize, track_sequence, track_step  # noqa: E402

__all__ = [
    "GhostTrackError", "bits_per_photon", "mse", "photon_sweep", "NoiseModel", "apply_noise",
    "Frame", "Scene", "bundled_scene", "frame_diff", "load_scene", "render_scene",
    "gen_patterns", "measure", "measure_all", "sensing_matrix", "SolverConfig",
    "reference_solve", "tv_min", "delta_measure", "localize", "track_sequence", "track_step",
]
