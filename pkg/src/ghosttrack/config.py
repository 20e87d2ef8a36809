"""Run configuration: an INI file with fixed sections.

Grammar (``configparser`` syntax, ``#`` or ``;`` comments)::

    [scene]
    script = <path>            scene script; relative to the config file,
                               or "bundled" for the packaged scene
    [run]
    seed = <u64>               master seed
    m = <int>                  measurement count
    output = <dir>             output directory, relative to the working
                               directory
    reference = previous|background
    threshold_fraction = <real in (0, 1)>
    [noise]
    photons = <real>|none      photons per measurement; none = noiseless
    dark_rate = <real>|auto    auto = 2% of photons
    [solver]                   base solver settings, any SolverConfig field
    [solver.track]             overrides used by track and sweep
    [solver.background]        overrides used by background
    [sweep]
    frame_pair = <int> <int>
    m_list = <int> ...
    photons = <real|none> ...
    seeds = <int>
    [acceptance]               thresholds checked for the exit code;
    max_mse = <real>|none      "none" disables a check
    max_centroid_error = <real>|none
    band.<m> = <lo> <hi>       photon-threshold band for sweep point m

Unknown sections or keys are rejected so that typos do not pass silently.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .noise import NoiseModel
from .scene import bundled_scene_path
from .solver import SolverConfig

BUNDLED = "bundled"
MODES = ("background", "track", "sweep", "eval")

_KEYS = {
    "scene": {"script"},
    "run": {"seed", "m", "output", "reference", "threshold_fraction"},
    "noise": {"photons", "dark_rate"},
    "sweep": {"frame_pair", "m_list", "photons", "seeds"},
    "acceptance": {"max_mse", "max_centroid_error"},
}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
_SOLVER_SECTIONS = ("solver", "solver.track", "solver.background")


def default_config_path() -> Path:
    return Path(__file__).resolve().parent / "data" / "default.ini"


@dataclass
class RunConfig:
    scene_script: Path
    seed: int = 0
    m: int = 400
    output: Path = Path("out")
    reference: str = "previous"
    threshold_fraction: float = 0.5
    photons: float | None = None
    dark_rate: float | None = None
    solver: SolverConfig = SolverConfig()
    track_solver: SolverConfig = SolverConfig()
    background_solver: SolverConfig = SolverConfig(nonnegative=True)
    sweep_pair: tuple[int, int] = (1, 2)
    sweep_m: list = field(default_factory=lambda: [100, 400])
    sweep_photons: list = field(default_factory=lambda: [50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0])
    sweep_seeds: int = 10
    max_mse: float | None = 0.04
    max_centroid_error: float | None = 4.0
    bands: dict = field(default_factory=dict)
    source: configparser.ConfigParser | None = None

    def noise_model(self, seed: int | None = None) -> NoiseModel | None:
        if self.photons is None:
            return None
        return NoiseModel(self.photons, self.dark_rate, self.seed if seed is None else seed)

    def canonical(self) -> str:
        """Resolved settings as text; equal configs give equal text."""
        if self.source is None:
            raise ConfigError("config was not loaded from a file")
        lines = []
        for sec in sorted(self.source.sections()):
            lines.append(f"[{sec}]")
            for k in sorted(self.source[sec]):
                lines.append(f"{k} = {self.source[sec][k]}")
            lines.append("")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _opt_float(text: str) -> float | None:
    return None if text.strip().lower() in ("none", "auto", "") else float(text)


def _solver_overlay(base: SolverConfig, section) -> SolverConfig:
    kw = {}
    for key, text in section.items():
        if key not in _SOLVER_KEYS:
            raise ConfigError(f"unknown solver key {key!r}")
        if key in ("max_outer", "max_inner"):
            kw[key] = int(text)
        elif key in ("nonnegative", "precondition"):
            kw[key] = section.getboolean(key)
        elif key == "tv_norm":
            kw[key] = text.strip()
        else:
            kw[key] = float(text)
    try:
        return base.with_(**kw)
    except ValueError as e:
        raise ConfigError(f"bad solver settings in [{section.name}]: {e}") from e


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Read a run config; ``overrides`` maps ``"section.key"`` to text values."""
    path = Path(path) if path is not None else default_config_path()
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    for dotted, value in (overrides or {}).items():
        sec, key = dotted.rsplit(".", 1)
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp[sec][key] = str(value)

    for sec in cp.sections():
        if sec in _SOLVER_SECTIONS:
            continue
        if sec not in _KEYS:
            raise ConfigError(f"unknown section [{sec}] in {path}")
        for key in cp[sec]:
            if key not in _KEYS[sec] and not (sec == "acceptance" and key.startswith("band.")):
                raise ConfigError(f"unknown key {key!r} in [{sec}] of {path}")

    base = path.parent
    get = lambda sec, key, fb=None: cp.get(sec, key, fallback=fb)  # noqa: E731
    try:
        script = get("scene", "script", BUNDLED)
        script_path = bundled_scene_path() if script == BUNDLED else (base / script)
        if not script_path.is_file():
            raise ConfigError(f"scene script not found: {script_path}")

        solver = SolverConfig()
        if cp.has_section("solver"):
            solver = _solver_overlay(solver, cp["solver"])
        track = _solver_overlay(solver, cp["solver.track"]) if cp.has_section("solver.track") else solver
        bg = solver.with_(nonnegative=True)
        if cp.has_section("solver.background"):
            bg = _solver_overlay(bg, cp["solver.background"])

        bands = {}
        if cp.has_section("acceptance"):
            for key, text in cp["acceptance"].items():
                if key.startswith("band."):
                    lo, hi = (float(t) for t in text.split())
                    bands[int(key[5:])] = (lo, hi)

        sweep_photons = [_opt_float(t) for t in get("sweep", "photons", "50 100 200 500 1000 2000").split()]
        cfg = RunConfig(
            scene_script=script_path.resolve(),
            seed=int(get("run", "seed", "0")),
            m=int(get("run", "m", "400")),
            output=Path(get("run", "output", "out")),
            reference=get("run", "reference", "previous"),
            threshold_fraction=float(get("run", "threshold_fraction", "0.5")),
            photons=_opt_float(get("noise", "photons", "none")),
            dark_rate=_opt_float(get("noise", "dark_rate", "auto")),
            solver=solver,
            track_solver=track,
            background_solver=bg,
            sweep_pair=tuple(int(t) for t in get("sweep", "frame_pair", "1 2").split()),
            sweep_m=[int(t) for t in get("sweep", "m_list", "100 400").split()],
            sweep_photons=sweep_photons,
            sweep_seeds=int(get("sweep", "seeds", "10")),
            max_mse=_opt_float(get("acceptance", "max_mse", "0.04")),
            max_centroid_error=_opt_float(get("acceptance", "max_centroid_error", "4")),
            bands=bands,
            source=cp,
        )
    except ValueError as e:
        raise ConfigError(f"bad value in {path}: {e}") from e

    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg.m < 1:
        raise ConfigError("m must be at least 1")
    if cfg.reference not in ("previous", "background"):
        raise ConfigError(f"reference must be 'previous' or 'background', not {cfg.reference!r}")
    if not 0 < cfg.threshold_fraction < 1:
        raise ConfigError("threshold_fraction must lie in (0, 1)")
    if cfg.photons is not None and cfg.photons <= 0:
        raise ConfigError("photons must be positive or 'none'")
    if len(cfg.sweep_pair) != 2:
        raise ConfigError("frame_pair needs exactly two frame indices")
    if not cfg.sweep_m or not cfg.sweep_photons:
        raise ConfigError("sweep grids must be nonempty")
    if cfg.sweep_seeds < 1:
        raise ConfigError("sweep seeds must be at least 1")
    return cfg
