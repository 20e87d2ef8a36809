"""``ghost-tracker``: reproducible background, tracking, sweep and eval runs.

Exit status: 0 when every configured acceptance check passes, 1 when a check
fails, 2 for usage or configuration errors, 3 when stored artifacts fail
their integrity check.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import BUNDLED, RunConfig, load_config
from .csvio import read_table, read_vector, sha256_file, write_measurements, write_table, write_vector
from .errors import ConfigError, GhostTrackError, IntegrityError
from .metrics import (
    bits_per_photon,
    mse,
    noise_seed,
    photon_sweep,
    photon_threshold,
    replicate_seed,
)
from .noise import NoiseModel, apply_noise, calibrate_gain
from .pgm import write_real_pgm
from .scene import bundled_scene_path, frame_diff, load_scene, render_scene
from .sensing import sensing_matrix
from .solver import Reconstruction, tv_min
from .tracking import centroid_error, delta_measure, localize, measure_frames, track_sequence, unrotate

MANIFEST = "MANIFEST.sha256"
RUN_CONFIG = "run.ini"
LOG = "run.log"
ASSET_HASHES = Path(__file__).resolve().parent / "data" / "assets.sha256"

log = logging.getLogger("ghosttrack")


class Run:
    """Output directory bookkeeping: headers, artifact list, checks."""

    def __init__(self, cfg: RunConfig, mode: str):
        self.cfg = cfg
        self.mode = mode
        self.out = Path(cfg.output)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[str] = []
        self.checks: dict[str, bool] = {}
        self.report: list[str] = []

    def meta(self, **extra) -> dict:
        d = {"tool": f"ghosttrack-{__version__}", "mode": self.mode,
             "master_seed": self.cfg.seed, "config": self.cfg.digest()}
        d.update(extra)
        return d

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)
        self.report.append(f"check {name}: {'pass' if ok else 'FAIL'}")

    def finish(self) -> int:
        head = f"# ghosttrack-{__version__} {self.mode} report, config {self.cfg.digest()}\n"
        self.path("report.txt").write_text(head + "\n".join(self.report) + "\n")
        (self.out / RUN_CONFIG).write_text(self.cfg.canonical())
        lines = [f"# mode={self.mode}"]
        lines += [f"{sha256_file(self.out / a)}  {a}" for a in self.artifacts + [RUN_CONFIG]]
        (self.out / MANIFEST).write_text("\n".join(lines) + "\n")
        for line in self.report:
            print(line)
        return 0 if all(self.checks.values()) else 1


def _pattern_seed(cfg: RunConfig) -> int:
    return replicate_seed(cfg.seed, 0)


def _noise(cfg: RunConfig) -> NoiseModel | None:
    if cfg.photons is None:
        return None
    return cfg.noise_model(noise_seed(cfg.seed, cfg.m, cfg.photons, 0))


def _fmt_opt(v) -> str:
    return "none" if v is None else repr(float(v))


def cmd_background(cfg: RunConfig) -> int:
    run = Run(cfg, "background")
    scene = load_scene(cfg.scene_script)
    bg = render_scene(scene, 0)
    A = sensing_matrix(cfg.m, bg.width, bg.height, _pattern_seed(cfg))
    J = A.measure(bg)
    gain = 1.0
    noise = _noise(cfg)
    if noise is not None:
        gain = calibrate_gain(J, noise.photons_per_measurement)
        J = apply_noise(J, noise, gain=gain)
    write_measurements(run.path("measurements.csv"), J, run.meta())
    log.info("background: solving m=%d", cfg.m)
    rec = unrotate(tv_min(A, J.values / gain, cfg.background_solver))
    err = mse(bg, rec)
    write_real_pgm(run.path("background.pgm"), rec.as_array(),
                   comments=[f"ghosttrack-{__version__} config {cfg.digest()}"])
    run.artifacts.append("background.pgm.map")
    write_vector(run.path("background.csv"), rec.image,
                 run.meta(width=rec.width, height=rec.height, mse=repr(err)))
    run.report += [
        f"measurements {cfg.m} of {bg.n} pixels ({100 * cfg.m / bg.n:.2f}% of raster)",
        f"photons_per_measurement {_fmt_opt(cfg.photons)}",
        f"residual {rec.residual!r}",
        f"outer_iterations {rec.outer_iterations}",
        f"mse {err!r}",
    ]
    if cfg.max_mse is not None:
        run.check("background_mse", err < cfg.max_mse)
    return run.finish()


def _step_metrics(rec, truth, threshold_fraction):
    res = localize(rec, threshold_fraction)
    return res, mse(truth, rec), centroid_error(res, localize(truth, threshold_fraction))


def cmd_track(cfg: RunConfig) -> int:
    run = Run(cfg, "track")
    scene = load_scene(cfg.scene_script)
    w, h = scene.shape[1], scene.shape[0]
    A = sensing_matrix(cfg.m, w, h, _pattern_seed(cfg))
    noise = _noise(cfg)
    vecs = measure_frames(scene, A, noise)
    log.info("track: %d frames, m=%d, photons=%s", scene.n_frames, cfg.m, cfg.photons)
    steps = track_sequence(scene, A, noise, cfg.track_solver, cfg.reference, cfg.threshold_fraction)
    rows = []
    for k, st in enumerate(steps, start=1):
        prev, j = st.frame_pair
        dJ = delta_measure(vecs[j], vecs[prev], cfg.photons)
        write_vector(run.path(f"dJ_{k}.csv"), dJ.values,
                     run.meta(step=k, frames=f"{prev}->{j}", gain=repr(dJ.gain)))
        rec = st.reconstruction
        write_real_pgm(run.path(f"delta_{k}.pgm"), rec.as_array(),
                       comments=[f"step {k} frames {prev}->{j}"])
        run.artifacts.append(f"delta_{k}.pgm.map")
        write_vector(run.path(f"delta_{k}.csv"), rec.image,
                     run.meta(step=k, width=rec.width, height=rec.height))
        res, err, cerr = _step_metrics(rec, st.truth, cfg.threshold_fraction)
        new = res.new_centroid or (math.nan, math.nan)
        old = res.old_centroid or (math.nan, math.nan)
        rows.append([k, prev, j, float(new[0]), float(new[1]), float(old[0]), float(old[1]),
                     float(res.confidence), float(err), float(cerr)])
        run.report.append(f"step {k} frames {prev}->{j}: mse {err:.5f} centroid_error {cerr:.3f} px "
                          f"confidence {res.confidence:.3f} iterations {rec.outer_iterations}")
        log.info("step %d done: mse %.5f", k, err)
    write_table(run.path("trajectory.csv"),
                ["step", "prev_frame", "frame", "new_row", "new_col", "old_row", "old_col",
                 "confidence", "mse", "centroid_error"], rows, run.meta(m=cfg.m))
    if cfg.photons is not None:
        run.report.append(f"bits_per_photon {bits_per_photon(w * h, cfg.m, cfg.photons)!r}")
    if cfg.max_mse is not None:
        run.check("step_mse", all(r[8] < cfg.max_mse for r in rows))
    if cfg.max_centroid_error is not None:
        run.check("centroid_error", all(r[9] < cfg.max_centroid_error for r in rows))
    return run.finish()


def cmd_sweep(cfg: RunConfig) -> int:
    run = Run(cfg, "sweep")
    scene = load_scene(cfg.scene_script)

    def progress(pt):
        log.info("sweep m=%d P=%s mse %.5f", pt.measurements, pt.photons_per_measurement, pt.mse_mean)

    points = photon_sweep(scene, cfg.sweep_pair, cfg.sweep_m, cfg.sweep_photons, cfg.sweep_seeds,
                          cfg.track_solver, cfg.seed, progress=progress)
    rows = [[p.measurements, "none" if math.isinf(p.photons_per_measurement)
             else float(p.photons_per_measurement), p.seeds, float(p.mse_mean), float(p.mse_std)]
            for p in points]
    write_table(run.path("sweep.csv"), ["m", "photons", "seeds", "mse_mean", "mse_std"], rows,
                run.meta(frame_pair=f"{cfg.sweep_pair[0]}->{cfg.sweep_pair[1]}"))
    mse_max = cfg.max_mse if cfg.max_mse is not None else 0.04
    for m in cfg.sweep_m:
        thr = photon_threshold(points, m, mse_max)
        run.report.append(f"m {m}: smallest photons reaching mse <= {mse_max}: {_fmt_opt(thr)}")
        if m in cfg.bands:
            lo, hi = cfg.bands[m]
            run.check(f"photon_band_m{m}", thr is not None and lo <= thr <= hi)
    return run.finish()


def _verify_manifest(out: Path) -> str:
    man = out / MANIFEST
    if not man.is_file():
        raise IntegrityError(f"no {MANIFEST} in {out}; run a command first")
    mode = None
    for line in man.read_text().splitlines():
        if line.startswith("# mode="):
            mode = line.split("=", 1)[1].strip()
            continue
        digest, name = line.split(None, 1)
        f = out / name
        if not f.is_file():
            raise IntegrityError(f"artifact missing: {name}")
        if sha256_file(f) != digest:
            raise IntegrityError(f"artifact modified since the run: {name}")
    if mode is None:
        raise IntegrityError("manifest does not record the run mode")
    return mode


def _verify_assets() -> None:
    if not ASSET_HASHES.is_file():
        raise IntegrityError("bundled asset hash list is missing")
    base = ASSET_HASHES.parent
    for line in ASSET_HASHES.read_text().splitlines():
        digest, name = line.split(None, 1)
        if sha256_file(base / name) != digest:
            raise IntegrityError(f"bundled asset {name} does not match its recorded hash")


def _same(a: float, b: float) -> bool:
    return a == b or (math.isnan(a) and math.isnan(b))


def cmd_eval(cfg: RunConfig, out: Path, overrides: dict | None = None) -> int:
    """Re-derive the metrics of the run stored in ``out`` and verify its hashes."""
    mode = _verify_manifest(out)
    _verify_assets()
    stored = load_config(out / RUN_CONFIG, overrides)
    lines = [f"mode {mode}", "integrity: manifest and bundled assets verified"]
    checks = {}
    scene = load_scene(stored.scene_script)
    w, h = scene.shape[1], scene.shape[0]
    if mode == "track":
        rows, _ = read_table(out / "trajectory.csv")
        for row in rows:
            k, prev, j = int(row["step"]), int(row["prev_frame"]), int(row["frame"])
            vals, meta = read_vector(out / f"delta_{k}.csv")
            rec = Reconstruction(vals, int(meta["width"]), int(meta["height"]))
            truth = frame_diff(render_scene(scene, j), render_scene(scene, prev))
            _, err, cerr = _step_metrics(rec, truth, stored.threshold_fraction)
            if not (_same(err, float(row["mse"])) and _same(cerr, float(row["centroid_error"]))):
                raise IntegrityError(f"step {k}: stored metrics do not match the stored image")
            lines.append(f"step {k}: mse {err!r} centroid_error {cerr!r}")
        if stored.max_mse is not None:
            checks["step_mse"] = all(float(r["mse"]) < stored.max_mse for r in rows)
        if stored.max_centroid_error is not None:
            checks["centroid_error"] = all(float(r["centroid_error"]) < stored.max_centroid_error
                                           for r in rows)
    elif mode == "background":
        vals, _ = read_vector(out / "background.csv")
        err = mse(render_scene(scene, 0), vals)
        lines.append(f"mse {err!r}")
        if stored.max_mse is not None:
            checks["background_mse"] = err < stored.max_mse
    elif mode == "sweep":
        rows, _ = read_table(out / "sweep.csv")
        mse_max = stored.max_mse if stored.max_mse is not None else 0.04
        for m in sorted({int(r["m"]) for r in rows}):
            ok = [float(r["photons"]) for r in rows if int(r["m"]) == m
                  and r["photons"] != "none" and float(r["mse_mean"]) <= mse_max]
            thr = min(ok) if ok else None
            lines.append(f"m {m}: photon threshold {_fmt_opt(thr)}")
            if m in stored.bands:
                lo, hi = stored.bands[m]
                checks[f"photon_band_m{m}"] = thr is not None and lo <= thr <= hi
    if stored.photons is not None:
        lines.append(f"bits_per_photon {bits_per_photon(w * h, stored.m, stored.photons)!r}")
    else:
        lines.append("bits_per_photon none (noiseless run)")
    lines += [f"check {k}: {'pass' if v else 'FAIL'}" for k, v in checks.items()]
    (out / "eval.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if all(checks.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghost-tracker", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["background", "track", "sweep", "eval"])
    p.add_argument("--config", type=Path, default=None,
                   help="run config (INI); defaults to the bundled one")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    p.add_argument("--m", type=int, default=None, help="number of measurements")
    p.add_argument("--photons", default=None, help="photons per measurement, or 'none'")
    p.add_argument("--version", action="version", version=f"ghost-tracker {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.m is not None:
        overrides["run.m"] = args.m
    if args.photons is not None:
        overrides["noise.photons"] = args.photons
    try:
        cfg = load_config(args.config, overrides)
        if args.out is not None:
            cfg.output = args.out
        _pin_scene(cfg)
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(out / LOG)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
        try:
            if args.command == "eval":
                return cmd_eval(cfg, out, overrides)
            return {"background": cmd_background, "track": cmd_track,
                    "sweep": cmd_sweep}[args.command](cfg)
        finally:
            log.removeHandler(handler)
            handler.close()
    except IntegrityError as e:
        print(f"ghost-tracker: integrity error: {e}", file=sys.stderr)
        return 3
    except (ConfigError, GhostTrackError, ValueError, OSError) as e:
        print(f"ghost-tracker: error: {e}", file=sys.stderr)
        return 2


def _pin_scene(cfg: RunConfig) -> None:
    """Record the resolved scene path so run.ini works from the output directory."""
    cp = cfg.source
    if not cp.has_section("scene"):
        cp.add_section("scene")
    if cfg.scene_script == bundled_scene_path().resolve():
        cp["scene"]["script"] = BUNDLED
    else:
        cp["scene"]["script"] = str(cfg.scene_script)
    if cp.has_option("run", "output"):
        cp.remove_option("run", "output")


if __name__ == "__main__":
    sys.exit(main())
