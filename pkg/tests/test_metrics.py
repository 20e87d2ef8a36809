import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghosttrack.config import load_config
from ghosttrack.errors import DimensionError
from ghosttrack.metrics import (
    SweepPoint,
    bits_per_photon,
    mse,
    noise_seed,
    photon_sweep,
    photon_threshold,
    replicate_seed,
    sweep_mse,
)
from ghosttrack.scene import DeltaImage, Frame, bundled_scene


def test_mse_identity_is_zero(rng):
    x = rng.standard_normal(100)
    assert mse(x, x) == 0.0


def test_mse_scale_invariant(rng):
    x = rng.standard_normal(100)
    assert mse(x, 2.0 * x) == pytest.approx(0.0, abs=1e-15)
    assert mse(x, -0.3 * x) == pytest.approx(0.0, abs=1e-15)


def test_mse_zero_estimate_is_truth_power():
    t = np.zeros(4096)
    t[:9] = 1.0
    assert mse(t, np.zeros(4096)) == pytest.approx(9 / 4096)


def test_mse_hand_case():
    # t = (1, 0), e = (1, 1): a = 1/2, residual (1/2, -1/2)
    assert mse([1.0, 0.0], [1.0, 1.0]) == pytest.approx(0.25)


def test_mse_accepts_frames_and_delta_images():
    f = Frame.from_array(np.eye(4, dtype=np.uint8))
    d = DeltaImage(4, 4, np.eye(4).ravel())
    assert mse(f, d) == 0.0
    with pytest.raises(DimensionError):
        mse(np.zeros(3), np.zeros(4))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 10))
def test_mse_fit_is_optimal(seed, scale):
    r = np.random.default_rng(seed)
    t, e = r.standard_normal((2, 30))
    best = mse(t, e)
    # no other multiple of the estimate does better
    for a in (0.0, scale, -scale):
        assert best <= np.mean((t - a * e) ** 2) + 1e-12
    assert best <= np.mean(t * t) + 1e-12


# -- photon efficiency -----------------------------------------------------------


@pytest.mark.parametrize(
    "n,m,P,expect",
    [(4096, 100, 500, 0.08192), (4096, 400, 200, 0.0512), (64, 8, 8, 1.0), (4096, 2000, 100, 0.02048)],
)
def test_bits_per_photon_values(n, m, P, expect):
    assert bits_per_photon(n, m, P) == pytest.approx(expect, rel=1e-12)


@settings(max_examples=50)
@given(st.integers(1, 10**6), st.integers(1, 10**4), st.floats(0.5, 1e5), st.floats(0.1, 10))
def test_bits_per_photon_inverse_in_budget(n, m, P, c):
    assert bits_per_photon(n, m, c * P) == pytest.approx(bits_per_photon(n, m, P) / c, rel=1e-9)


def test_bits_per_photon_rejects_nonpositive():
    for args in [(0, 1, 1), (1, 0, 1), (1, 1, 0.0), (1, 1, -2)]:
        with pytest.raises(ValueError):
            bits_per_photon(*args)


# -- sweep --------------------------------------------------------------------------


def test_seed_streams_are_distinct():
    assert replicate_seed(0, 0) != replicate_seed(0, 1)
    assert replicate_seed(0, 0) != replicate_seed(1, 0)
    assert noise_seed(0, 100, 500, 0) != noise_seed(0, 400, 500, 0)
    assert noise_seed(0, 100, 500, 0) != noise_seed(0, 100, 200, 0)
    assert noise_seed(0, 100, 500, 0) == noise_seed(0, 100, 500.0, 0)


def test_photon_threshold_picks_smallest_passing_budget():
    pts = [SweepPoint(100, P, 3, v, 0.0) for P, v in [(50, 0.09), (200, 0.05), (500, 0.03), (1000, 0.01)]]
    pts.append(SweepPoint(100, math.inf, 3, 0.001, 0.0))
    pts.append(SweepPoint(400, 50, 3, 0.001, 0.0))
    assert photon_threshold(pts, 100) == 500
    assert photon_threshold(pts, 400) == 50
    assert photon_threshold(pts, 200) is None


def test_sweep_reproducible_and_ordered():
    scene = bundled_scene()
    a = photon_sweep(scene, (1, 2), [60, 120], [None, 300.0], seeds=1)
    b = photon_sweep(scene, (1, 2), [60, 120], [None, 300.0], seeds=1)
    assert a == b
    assert [(p.measurements, p.photons_per_measurement) for p in a] == [
        (60, math.inf), (60, 300.0), (120, math.inf), (120, 300.0)]
    with pytest.raises(ValueError):
        photon_sweep(scene, (1, 2), [], [100.0])


def test_high_budget_approaches_noiseless():
    scene = bundled_scene()
    track = load_config().track_solver  # sweeps run with the tracking settings
    clean = sweep_mse(scene, (1, 2), 400, None, 0, track)
    bright = sweep_mse(scene, (1, 2), 400, 1e6, 0, track)
    assert bright == pytest.approx(clean, rel=0.1)
