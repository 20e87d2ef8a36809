import numpy as np
import pytest

from ghosttrack.csvio import read_measurements, read_vector
from ghosttrack.errors import DimensionError, ProvenanceError
from ghosttrack.noise import NoiseModel, apply_noise
from ghosttrack.scene import DeltaImage, Frame, Scene, bundled_scene, frame_diff, render_scene
from ghosttrack.sensing import measure_all, gen_patterns, sensing_matrix
from ghosttrack.solver import Reconstruction, SolverConfig
from ghosttrack.tracking import (
    NO_MOTION,
    centroid_error,
    DeltaVector,
    delta_measure,
    localize,
    track_sequence,
    track_step,
)

from .conftest import FIXTURES, GOLDEN_M, GOLDEN_SEED


def blob_delta(shape=(64, 64), new=(10, 20), old=(40, 12), half=2):
    img = np.zeros(shape)
    r, c = new
    img[r - half : r + half + 1, c - half : c + half + 1] = 1.0
    r, c = old
    img[r - half : r + half + 1, c - half : c + half + 1] = -1.0
    return DeltaImage(shape[1], shape[0], img.ravel())


def sprite_centre(scene, j):
    """Centroid of the sprite's set pixels at frame j (scene coordinates)."""
    r0, c0 = scene.positions[j - 1]
    rr, cc = np.nonzero(scene.sprite.image())
    return (r0 + rr.mean(), c0 + cc.mean())


# -- delta_measure -----------------------------------------------------------


def test_identical_vectors_give_zero_delta():
    A = sensing_matrix(30, 8, 8, seed=1)
    f = Frame.from_array(np.eye(8, dtype=np.uint8))
    d = delta_measure(A.measure(f), A.measure(f))
    assert not d.values.any() and len(d) == 30


def test_delta_is_forward_model_of_frame_difference():
    scene = bundled_scene()
    pats = gen_patterns(120, 64, 64, seed=4)
    A = sensing_matrix(120, 64, 64, seed=4)
    f1, f2 = render_scene(scene, 1), render_scene(scene, 2)
    d = delta_measure(measure_all(pats, f2, seed=4), measure_all(pats, f1, seed=4))
    truth = frame_diff(f2, f1)
    # A applied to the (rotated) signed difference, by linearity
    expect = A.rows.astype(float) @ truth.image()[::-1, ::-1].ravel()
    np.testing.assert_array_equal(d.values, expect)
    assert d.frame_pair == (1, 2)


def test_provenance_mismatch_rejected():
    f = Frame.from_array(np.eye(8, dtype=np.uint8))
    a = sensing_matrix(20, 8, 8, seed=1).measure(f)
    b = sensing_matrix(20, 8, 8, seed=2).measure(f)
    with pytest.raises(ProvenanceError):
        delta_measure(a, b)
    with pytest.raises(DimensionError):
        delta_measure(a, sensing_matrix(21, 8, 8, seed=1).measure(f))


def test_mixed_gain_rejected():
    A = sensing_matrix(20, 8, 8, seed=1)
    f = Frame.from_array(np.eye(8, dtype=np.uint8))
    v = A.measure(f)
    a = apply_noise(v, NoiseModel(100.0, seed=1), gain=1.0)
    b = apply_noise(v, NoiseModel(100.0, seed=2), gain=2.0)
    with pytest.raises(ProvenanceError):
        delta_measure(a, b)
    with pytest.raises(ProvenanceError):
        delta_measure(a, v)


def test_golden_delta_fixture():
    golden_bg = read_measurements(FIXTURES / "background_m400.csv")
    golden, meta = read_vector(FIXTURES / "delta_m400_f1_f2.csv")
    scene = bundled_scene()
    A = sensing_matrix(GOLDEN_M, 64, 64, GOLDEN_SEED)
    j1, j2 = A.measure(render_scene(scene, 1)), A.measure(render_scene(scene, 2))
    np.testing.assert_array_equal(delta_measure(j2, j1).values, golden)
    assert int(meta["seed"]) == GOLDEN_SEED
    assert golden_bg.provenance == j1.provenance


# -- localize ------------------------------------------------------------------


def test_localize_ideal_blobs():
    res = localize(blob_delta())
    assert res.new_centroid == pytest.approx((10, 20), abs=0.5)
    assert res.old_centroid == pytest.approx((40, 12), abs=0.5)
    assert res.displacement == pytest.approx((-30, 8), abs=1.0)
    assert res.confidence == pytest.approx(1.0)


def test_localize_zero_is_no_motion():
    res = localize(DeltaImage(4, 4, np.zeros(16)))
    assert res is NO_MOTION and not res.moving


def test_localize_appearance_only():
    img = np.zeros((16, 16))
    img[3:6, 3:6] = 1.0
    img[12, 12] = -0.1  # ringing below the polarity cut
    res = localize(DeltaImage(16, 16, img.ravel()))
    assert res.old_centroid is None and res.displacement is None
    assert res.new_centroid == pytest.approx((4, 4))


def test_localize_antisymmetry():
    d = blob_delta()
    a = localize(d)
    b = localize(-d)
    assert a.new_centroid == pytest.approx(b.old_centroid)
    assert a.old_centroid == pytest.approx(b.new_centroid)


def test_localize_validation():
    with pytest.raises(ValueError):
        localize(blob_delta(), threshold_fraction=1.0)
    with pytest.raises(ValueError):
        localize(Reconstruction(np.array([np.inf, 0.0]), 2, 1))


# -- track_step / sequences ------------------------------------------------------


def test_zero_delta_exits_immediately():
    A = sensing_matrix(40, 16, 16, seed=0)
    rec = track_step(A, DeltaVector(np.zeros(40), (0, 1)))
    assert not rec.image.any() and rec.converged and rec.outer_iterations == 0


def test_track_step_length_check():
    A = sensing_matrix(40, 16, 16, seed=0)
    with pytest.raises(DimensionError):
        track_step(A, DeltaVector(np.zeros(39), (0, 1)))


def test_delta_antisymmetry_in_reconstruction():
    scene = bundled_scene()
    A = sensing_matrix(200, 64, 64, seed=6)
    j1, j2 = A.measure(render_scene(scene, 1)), A.measure(render_scene(scene, 2))
    fwd = delta_measure(j2, j1)
    bwd = delta_measure(j1, j2)
    np.testing.assert_array_equal(bwd.values, (-fwd).values)
    a = localize(track_step(A, fwd))
    b = localize(track_step(A, bwd))
    assert a.new_centroid == pytest.approx(b.old_centroid, abs=1e-6)
    assert a.old_centroid == pytest.approx(b.new_centroid, abs=1e-6)


def test_static_scene_reports_no_motion():
    s = bundled_scene()
    static = Scene(s.background, s.sprite, (s.positions[0],) * 3)
    A = sensing_matrix(100, 64, 64, seed=2)
    steps = track_sequence(static, A)
    assert [st.result.moving for st in steps] == [True, False, False]


def test_sequence_needs_two_object_frames():
    s = bundled_scene()
    with pytest.raises(ValueError):
        track_sequence(Scene(s.background, s.sprite, s.positions[:1]), sensing_matrix(10, 64, 64, 0))


def test_sparsity_of_difference():
    s = bundled_scene()
    for j in range(1, s.n_frames):
        d = frame_diff(render_scene(s, j), render_scene(s, j - 1))
        assert np.count_nonzero(d.values) < render_scene(s, j).count()


def test_noiseless_sequence_m400():
    s = bundled_scene()
    A = sensing_matrix(400, 64, 64, seed=GOLDEN_SEED)
    steps = track_sequence(s, A)
    assert len(steps) == len(s.positions)
    # step 1: the object appears against the bare background
    first = steps[0].result
    assert first.old_centroid is None
    assert np.hypot(*np.subtract(first.new_centroid, sprite_centre(s, 1))) < 2.0
    for j, st in enumerate(steps[1:], start=2):
        want = np.subtract(sprite_centre(s, j), sprite_centre(s, j - 1))
        assert np.hypot(*np.subtract(st.result.displacement, want)) < 2.0
        assert st.result.confidence >= 0.5
        # reconstructed centroids vs the frame_diff oracle
        oracle = localize(st.truth)
        assert np.hypot(*np.subtract(st.result.new_centroid, oracle.new_centroid)) < 2.0
        assert np.hypot(*np.subtract(st.result.old_centroid, oracle.old_centroid)) < 2.0


def test_centroid_error():
    a = localize(blob_delta())
    assert centroid_error(a, a) == 0.0
    b = localize(blob_delta(new=(13, 24)))
    assert centroid_error(b, a) == pytest.approx(5.0)
    assert centroid_error(NO_MOTION, NO_MOTION) == 0.0
    assert centroid_error(NO_MOTION, a) == float("inf")


@pytest.mark.slow
@pytest.mark.xfail(
    strict=True,
    raises=AssertionError,
    reason="at m=100, P=500 the reconstructions are partial blobs plus edge spikes; "
    "steps 1 and 3 average about 6 px even with smoothed localization (see decisions ledger)",
)
def test_noisy_sequence_m100_p500():
    s = bundled_scene()
    n_steps = len(s.positions)
    errs = np.zeros((10, n_steps))
    cols = np.zeros((10, n_steps))
    for seed in range(10):
        A = sensing_matrix(100, 64, 64, seed=seed)
        steps = track_sequence(s, A, NoiseModel(500.0, seed=seed), SolverConfig(mu=48))
        for k, st in enumerate(steps):
            errs[seed, k] = centroid_error(st.result, localize(st.truth))
            c = st.result.new_centroid
            cols[seed, k] = np.nan if c is None else c[1]
    # per-step error averaged over seeds, and the path moves left to right
    assert errs.mean(axis=0).max() < 4.0
    assert np.all(np.diff(cols.mean(axis=0)) > 0)
