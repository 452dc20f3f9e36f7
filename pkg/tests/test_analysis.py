import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import erf

import oracles
from qpgstreak.analysis import (TemporalTrace, analyze, binned_errors, effective_length,
                                fit_gaussian, fit_tophat, gaussian_model, integrate_roi,
                                subtract_background, tophat_model)
from qpgstreak.errors import (BadROI, BinTooSmall, CalibrationMismatch, NoConvergence, NoPeak,
                              Unphysical)
from qpgstreak.streak_camera import StreakCameraModel, StreakImage, synthesize_image

T = np.arange(-100.0, 100.0001, 0.5)


def rect_irf(width=27.0, irf=5.0, t=T):
    s = irf / (2 * math.sqrt(2 * math.log(2)))
    return 0.5 * (erf((t + width / 2) / (math.sqrt(2) * s)) - erf((t - width / 2) / (math.sqrt(2) * s)))


def test_gaussian_fit_recovers_parameters():
    y = gaussian_model(T, 50.0, 3.0, 12.0, 2.0)
    r = fit_gaussian(TemporalTrace(T, y))
    assert r.converged
    assert r.fwhm == pytest.approx(12.0, rel=1e-8)
    assert r.center == pytest.approx(3.0, abs=1e-8)
    assert r.amplitude == pytest.approx(50.0, rel=1e-8)
    assert r.offset == pytest.approx(2.0, abs=1e-6)


def test_gaussian_fit_of_blurred_top_hat():
    # least squares pulls the Gaussian FWHM well below the top-hat's own FWHM
    r = fit_gaussian(TemporalTrace(T, rect_irf()))
    assert r.fwhm == pytest.approx(oracles.RECT27_IRF5_GAUSS_FWHM, abs=1e-4)


def test_direct_fwhm_of_blurred_top_hat():
    from qpgstreak.fields import fwhm
    fine = np.arange(-60, 60, 0.01)
    assert fwhm(rect_irf(t=fine), x=fine) == pytest.approx(oracles.RECT27_IRF5_DIRECT_FWHM,
                                                          abs=1e-3)


@given(st.floats(-30, 30), st.floats(0.01, 1e4))
def test_gaussian_fit_translation_and_scale_invariance(shift, scale):
    base = TemporalTrace(T, rect_irf(20.0) + 0.01)
    r0 = fit_gaussian(base)
    r1 = fit_gaussian(base.shifted(shift).scaled(scale))
    assert r1.fwhm == pytest.approx(r0.fwhm, rel=1e-6)
    assert r1.center == pytest.approx(r0.center + shift, abs=1e-6)
    assert r1.amplitude == pytest.approx(r0.amplitude * scale, rel=1e-6)


@given(st.floats(-30, 30), st.floats(0.01, 1e4))
def test_tophat_fit_translation_and_scale_invariance(shift, scale):
    base = TemporalTrace(T, rect_irf(20.0))
    r0 = fit_tophat(base, 5.0)
    r1 = fit_tophat(base.shifted(shift).scaled(scale), 5.0)
    assert r1.width == pytest.approx(r0.width, rel=1e-6)
    assert r1.center == pytest.approx(r0.center + shift, abs=1e-6)


@pytest.mark.parametrize("width", [15.0, 20.0, 27.0, 40.0])
def test_tophat_fit_recovers_width(width):
    r = fit_tophat(TemporalTrace(T, 7.0 * rect_irf(width) + 1.0), 5.0)
    assert r.width == pytest.approx(width, rel=1e-7)
    assert r.fwhm == pytest.approx(width, abs=0.01)
    assert np.allclose(r.model(T), 7.0 * rect_irf(width) + 1.0, atol=1e-7)


def test_tophat_model_matches_independent_form():
    assert np.allclose(tophat_model(T, 1.0, 0.0, 27.0, 0.0, 5.0), rect_irf())


def test_fit_on_noise_raises_no_peak():
    rng = np.random.default_rng(0)
    noise = rng.normal(0, 1, T.size)
    with pytest.raises(NoPeak):
        fit_gaussian(TemporalTrace(T, noise, np.ones(T.size)))
    with pytest.raises(NoPeak):
        fit_gaussian(TemporalTrace(T[:5], np.arange(5.0)))


def test_non_convergence_reported():
    y = gaussian_model(T, 50.0, 3.0, 12.0, 2.0) + np.sin(T)
    r = fit_gaussian(TemporalTrace(T, y), max_iterations=1)
    assert not r.converged
    with pytest.raises(NoConvergence) as exc:
        fit_gaussian(TemporalTrace(T, y), max_iterations=1, strict=True)
    assert exc.value.result is not None


def test_weighted_fit():
    y = gaussian_model(T, 50.0, 3.0, 12.0, 2.0)
    r = fit_gaussian(TemporalTrace(T, y, np.full(T.size, 0.5)), weighted=True)
    assert r.fwhm == pytest.approx(12.0, rel=1e-8)


def test_effective_length():
    e = effective_length(28.5, 5.0, 1.0)
    assert e.deconvolved_fwhm == pytest.approx(math.sqrt(28.5**2 - 25))
    assert e.quadrature_mm == pytest.approx(e.deconvolved_fwhm)
    assert e.raw_mm == 28.5
    assert effective_length(oracles.RECT27_IRF5_QUADRATURE, 5.0, 1.0).quadrature_mm == \
        pytest.approx(27.0)
    with pytest.raises(Unphysical):
        effective_length(4.0, 5.0, 1.0)
    with pytest.raises(Unphysical):
        effective_length(30.0, 5.0, -1.0)


def test_binned_errors():
    t = np.arange(0.25, 20, 0.5)  # 40 samples, 10 per 5 ps bin
    y = np.tile(np.arange(10.0), 4)
    tr = binned_errors(TemporalTrace(t, y), 5.0)
    assert np.allclose(tr.errors, np.std(np.arange(10.0), ddof=1))
    with pytest.raises(BinTooSmall):
        binned_errors(TemporalTrace(t, y), 0.1)
    lone = binned_errors(TemporalTrace(np.array([0.25, 0.75, 5.25]), np.array([1.0, 3.0, 9.0])), 5.0, 0.0)
    assert lone.errors[-1] == 0.0


def test_roi_and_subtraction():
    img = StreakImage(np.arange(20.0).reshape(4, 5), 0.5, 0.0)
    tr = integrate_roi(img, 1, 3)
    assert np.array_equal(tr.counts, img.counts[:, 1:3].sum(axis=1))
    for lo, hi in [(3, 3), (-1, 2), (0, 6), (0.5, 2)]:
        with pytest.raises(BadROI):
            integrate_roi(img, lo, hi)
    diff = subtract_background(img, StreakImage(np.ones((4, 5)), 0.5, 0.0))
    assert diff.counts[0, 0] == -1.0
    with pytest.raises(CalibrationMismatch):
        subtract_background(img, StreakImage(np.ones((4, 5)), 0.5, 1.0))


def test_trace_validation():
    with pytest.raises(ValueError):
        TemporalTrace([0, 1], [1.0])
    with pytest.raises(ValueError):
        TemporalTrace([1, 0], [1.0, 2.0])


def test_analyze_identical_images_has_no_peak():
    cam = StreakCameraModel()
    img = synthesize_image(np.zeros(cam.n_rows), cam, 1)
    with pytest.raises(NoPeak):
        analyze(img, img, 103, 153, 5.0, 1.0)


def test_analyze_noiseless_top_hat():
    cam = StreakCameraModel(readout_noise_sigma=0.0, dark_rate=0.0)
    sig = 1e5 * rect_irf(26.0, t=cam.row_times)
    img = StreakImage(sig[:, None] * np.ones((1, cam.n_cols)) / cam.n_cols, cam.time_per_pixel,
                      cam.t_origin)
    bg = StreakImage(np.zeros(img.shape), cam.time_per_pixel, cam.t_origin)
    res = analyze(img, bg, 0, cam.n_cols, 5.0, 1.0)
    assert res.tophat.width == pytest.approx(26.0, rel=1e-6)
    assert res.length_from_tophat_mm == pytest.approx(26.0, rel=1e-6)
    rep = res.report()
    assert rep["length.tophat_mm"] == res.length_from_tophat_mm
    assert rep["gaussian.fwhm_ps"] < 26.0
