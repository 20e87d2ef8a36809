import numpy as np
import pytest

from ghosttrack.cli import main
from ghosttrack.config import load_config
from ghosttrack.csvio import read_table, read_vector
from ghosttrack.errors import ConfigError
from ghosttrack.scene import Frame, save_frame

SMALL = """
[scene]
script = scene.txt

[run]
seed = 7
m = {m}

[noise]
photons = {photons}

[solver.track]
mu = 64

[sweep]
frame_pair = 1 2
m_list = 40 80
photons = none 2000
seeds = 2

[acceptance]
max_mse = {max_mse}
max_centroid_error = 3
band.80 = 1 1e9
"""


@pytest.fixture
def small(tmp_path):
    """A 16x16 scene with a 4x4 square moving in three frames, plus a config."""
    bg = np.zeros((16, 16), np.uint8)
    bg[13:, :] = 1
    save_frame(tmp_path / "bg.pgm", Frame.from_array(bg))
    save_frame(tmp_path / "sq.pgm", Frame.from_array(np.ones((4, 4), np.uint8)))
    (tmp_path / "scene.txt").write_text("bg.pgm\nsq.pgm\n2 2\n3 8\n7 9\n")

    def make(m=80, photons="none", max_mse="0.04", name="run.ini"):
        p = tmp_path / name
        p.write_text(SMALL.format(m=m, photons=photons, max_mse=max_mse))
        return p

    return make


def test_default_config_loads():
    cfg = load_config()
    assert cfg.m == 400 and cfg.photons is None
    assert cfg.background_solver.nonnegative and not cfg.track_solver.nonnegative
    assert cfg.bands == {100: (250.0, 1000.0), 400: (100.0, 400.0)}
    assert cfg.sweep_photons == [50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0]
    assert cfg.digest() == load_config().digest()


def test_overrides_change_digest():
    a = load_config()
    b = load_config(overrides={"run.m": 100, "noise.photons": 500})
    assert (b.m, b.photons) == (100, 500.0)
    assert a.digest() != b.digest()


@pytest.mark.parametrize(
    "text",
    [
        "[run]\nm = 0\n",
        "[run]\nbogus = 1\n",
        "[nonsense]\n",
        "[solver]\nlambda = 3\n",
        "[solver]\nmu = -1\n",
        "[scene]\nscript = missing.txt\n",
        "[sweep]\nm_list =\n",
        "[noise]\nphotons = -5\n",
        "[run]\nreference = sideways\n",
    ],
)
def test_bad_configs_rejected(tmp_path, text):
    p = tmp_path / "c.ini"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p)


def test_cli_config_errors_exit_2(tmp_path, capsys):
    assert main(["track", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["background", "--m", "0", "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_track_artifacts_and_eval(small, tmp_path, capsys):
    cfg = small()
    out = tmp_path / "out"
    assert main(["track", "--config", str(cfg), "--out", str(out)]) == 0
    rows, meta = read_table(out / "trajectory.csv")
    assert len(rows) == 3 and meta["master_seed"] == "7" and meta["tool"].startswith("ghosttrack-")
    assert {"delta_1.pgm", "delta_1.csv", "dJ_2.csv", "report.txt", "run.ini",
            "MANIFEST.sha256", "run.log"} <= {p.name for p in out.iterdir()}
    vals, vmeta = read_vector(out / "delta_2.csv")
    assert vals.size == 256 and vmeta["config"] == meta["config"]
    # the square moves from (3, 8) to (7, 9): centre (4.5, 9.5) -> (8.5, 10.5)
    assert float(rows[2]["new_row"]) == pytest.approx(8.5, abs=1.0)
    assert float(rows[2]["old_col"]) == pytest.approx(9.5, abs=1.0)

    capsys.readouterr()
    assert main(["eval", "--config", str(cfg), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    for k in (1, 2, 3):
        assert f"step {k}: mse {float(rows[k - 1]['mse'])!r}" in text
    assert "noiseless" in text


def test_runs_are_byte_identical(small, tmp_path):
    cfg = small(photons="300")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["track", "--config", str(cfg), "--out", str(a)]) in (0, 1)
    assert main(["track", "--config", str(cfg), "--out", str(b)]) in (0, 1)
    names = sorted(p.name for p in a.iterdir() if p.name != "run.log")
    assert names == sorted(p.name for p in b.iterdir() if p.name != "run.log")
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n


def test_seed_flag_changes_outputs(small, tmp_path):
    cfg = small(photons="300")
    a, b = tmp_path / "a", tmp_path / "b"
    main(["track", "--config", str(cfg), "--out", str(a)])
    main(["track", "--config", str(cfg), "--out", str(b), "--seed", "8"])
    assert (a / "dJ_1.csv").read_text() != (b / "dJ_1.csv").read_text()


def test_eval_reports_bits_per_photon(small, tmp_path, capsys):
    out = tmp_path / "out"
    main(["track", "--config", str(small(m=40, photons="500")), "--out", str(out)])
    capsys.readouterr()
    main(["eval", "--out", str(out)])
    assert f"bits_per_photon {256 / (40 * 500)!r}" in capsys.readouterr().out


def test_tampered_artifact_is_integrity_error(small, tmp_path, capsys):
    out = tmp_path / "out"
    main(["track", "--config", str(small()), "--out", str(out)])
    f = out / "delta_1.csv"
    lines = f.read_text().splitlines()
    lines[5] = "0.5"
    f.write_text("\n".join(lines) + "\n")
    assert main(["eval", "--out", str(out)]) == 3
    assert "integrity" in capsys.readouterr().err
    (out / "trajectory.csv").unlink()
    assert main(["eval", "--out", str(out)]) == 3


def test_eval_without_run_is_integrity_error(tmp_path):
    assert main(["eval", "--out", str(tmp_path)]) == 3


def test_failed_threshold_gives_exit_1(small, tmp_path):
    out = tmp_path / "out"
    assert main(["track", "--config", str(small(max_mse="1e-12")), "--out", str(out)]) == 1
    assert "step_mse: FAIL" in (out / "report.txt").read_text()
    assert main(["eval", "--out", str(out)]) == 1


def test_background_command(small, tmp_path):
    out = tmp_path / "bg"
    assert main(["background", "--config", str(small(m=200)), "--out", str(out)]) == 0
    vals, meta = read_vector(out / "background.csv")
    assert vals.size == 256 and float(meta["mse"]) < 0.04
    assert (out / "background.pgm.map").is_file()
    assert main(["eval", "--out", str(out)]) == 0


def test_sweep_command(small, tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(small()), "--out", str(out)]) == 0
    rows, meta = read_table(out / "sweep.csv")
    assert [(r["m"], r["photons"]) for r in rows] == [
        ("40", "none"), ("40", "2000"), ("80", "none"), ("80", "2000")]
    assert meta["frame_pair"] == "1->2"
    assert main(["eval", "--out", str(out)]) == 0


def test_sweep_csv_reproducible(small, tmp_path):
    cfg = small()
    main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()
