"""Filter bank and local frame construction tests.

Closed-form frequency responses are cross-checked against a direct DFT
of the time-domain formulas on a fine grid, so the two definitions of
each wavelet family act as oracles for one another.
"""

import math
import warnings

import numpy as np
import pytest

from sparsescat.frames import (
    FilterSupportError,
    FrameRankWarning,
    GammatoneParams,
    LocalFrame,
    MorletParams,
    build_filterbank,
    gammatone_freq,
    gammatone_sigma,
    gammatone_time,
    local_frame,
    make_scales,
    morlet_freq,
    morlet_time,
    transform_length,
)

# Bandwidth solution for (m=4, r=1/2, xi=2pi/3, B=pi/3), computed once with
# 30-digit interval bisection (mpmath) and frozen here.
SIGMA_G_REFERENCE = 0.7963665213291504


def test_scale_grid_geometric():
    s = make_scales(3, 2)
    assert s.J == 3 and s.Q == 2
    expected = 2.0 ** (np.arange(6) / 2.0)
    np.testing.assert_allclose(s.lambdas, expected, rtol=1e-15)


@pytest.mark.parametrize("J,Q", [(0, 2), (3, 0), (-1, 1)])
def test_scale_grid_rejects_bad_counts(J, Q):
    with pytest.raises(ValueError):
        make_scales(J, Q)


def test_morlet_quality_carrier_placement():
    for Q in (1, 2, 4, 8):
        p = MorletParams.for_quality(Q)
        assert math.isclose(p.omega0, 2 * math.pi / (1 + 2 ** (1 / Q)), rel_tol=1e-12)


def test_morlet_mother_unit_energy():
    p = MorletParams(6.0)
    t = np.arange(-30, 30, 1e-3)
    energy = np.trapezoid(np.abs(morlet_time(t, p)) ** 2, t)
    assert abs(energy - 1.0) < 1e-9


def test_morlet_freq_analytic():
    p = MorletParams(6.0)
    w = np.linspace(-5.0, 20.0, 401)
    F = morlet_freq(w, p)
    assert np.all(F[w <= 0] == 0.0)
    assert np.all(F[w > 0] >= 0.0)
    peak = w[np.argmax(F)]
    assert abs(peak - 6.0) < 0.1


def test_morlet_fft_matches_closed_form():
    # Unitary convention: FT(f)(w) = int f e^{-iwt} dt / sqrt(2 pi).
    p = MorletParams(6.0)
    dt = 1 / 256
    t = np.arange(-40.0, 40.0, dt)
    f = morlet_time(t, p)
    w = 2 * np.pi * np.fft.fftfreq(t.size, d=dt)
    F = np.fft.fft(f) * dt * np.exp(-1j * w * t[0]) / np.sqrt(2 * np.pi)
    ref = morlet_freq(w, p)
    sel = np.abs(w) < 30
    err = np.abs(F[sel] - ref[sel]).max() / np.abs(ref).max()
    assert err < 1e-6


def test_gammatone_sigma_frozen_value():
    sg = gammatone_sigma(4, 0.5, 2 * math.pi / 3, math.pi / 3)
    assert math.isclose(sg, SIGMA_G_REFERENCE, rel_tol=1e-12)


def test_gammatone_sigma_rejects_bad_input():
    with pytest.raises(ValueError):
        gammatone_sigma(1, 0.5, 2.0, 1.0)  # order too small
    with pytest.raises(ValueError):
        gammatone_sigma(4, 1.5, 2.0, 1.0)  # attenuation not in (0, 1)
    with pytest.raises(ValueError):
        gammatone_sigma(4, 0.5, 2.0, 0.0)  # empty bandwidth


def test_gammatone_quasi_orthogonal_placement():
    for Q in (1, 2, 4):
        g = GammatoneParams.quasi_orthogonal(Q)
        xi = 2 * math.pi / (1 + 2 ** (1 / Q))
        assert math.isclose(g.xi, xi, rel_tol=1e-12)
        assert math.isclose(g.B, (1 - 2 ** (-1 / Q)) * xi, rel_tol=1e-12)
        assert g.sigma_g is not None and g.sigma_g > 0


def test_gammatone_time_causal():
    g = GammatoneParams.quasi_orthogonal(1.0)
    t = np.linspace(-5.0, 5.0, 1001)
    f = gammatone_time(t, g)
    assert np.all(f[t < 0] == 0.0)
    assert np.any(f[t > 0] != 0.0)


def test_gammatone_fft_matches_closed_form():
    # Non-unitary convention for this family: FT(f)(w) = int f e^{-iwt} dt.
    g = GammatoneParams.quasi_orthogonal(1.0)
    dt = 1 / 64
    t = np.arange(0.0, 200.0, dt)
    f = gammatone_time(t, g)
    w = 2 * np.pi * np.fft.fftfreq(t.size, d=dt)
    F = np.fft.fft(f) * dt
    ref = gammatone_freq(w, g)
    sel = np.abs(w) < 20
    err = np.abs(F[sel] - ref[sel]).max() / np.abs(ref).max()
    assert err < 1e-6


def test_gammatone_freq_vanishes_at_dc():
    g = GammatoneParams.quasi_orthogonal(2.0)
    assert gammatone_freq(np.array([0.0]), g)[0] == 0.0


# ---------------------------------------------------------------------------
# bank construction
# ---------------------------------------------------------------------------


def _bank(family="morlet", J=3, Q=2, n=256):
    scales = make_scales(J, Q)
    if family == "morlet":
        params = MorletParams.for_quality(Q)
    else:
        params = GammatoneParams.quasi_orthogonal(Q)
    n_fft = transform_length(scales, params, n)
    return build_filterbank(scales, params, n_fft)


@pytest.mark.parametrize("family", ["morlet", "gammatone"])
def test_bank_rows_zero_mean(family):
    bank = _bank(family)
    sums = np.abs(bank.filters_time.sum(axis=1))
    norms = np.linalg.norm(bank.filters_time, axis=1)
    assert np.all(sums <= 1e-12 * norms)


@pytest.mark.parametrize("family", ["morlet", "gammatone"])
def test_bank_peaks_track_center_frequencies(family):
    bank = _bank(family)
    w = 2 * np.pi * np.arange(bank.n_fft) / bank.n_fft
    peaks = w[np.abs(bank.filters_freq).argmax(axis=1)]
    # within two grid bins of the analytic carrier
    assert np.all(np.abs(peaks - bank.center_freqs) < 3 * 2 * np.pi / bank.n_fft)


def test_bank_rows_near_unit_energy():
    bank = _bank("morlet", J=4, Q=4, n=512)
    norms = np.linalg.norm(bank.filters_time, axis=1)
    assert np.all(np.abs(norms - 1.0) < 0.02)


def test_bank_dilation_consistency():
    # A stored row must match the directly dilated mother up to the
    # (small) admissibility correction: psi_l(t) = psi(t/l)/sqrt(l).
    scales = make_scales(3, 1)
    params = MorletParams(6.0)
    bank = build_filterbank(scales, params, 2048)
    k = 2  # lambda = 4
    lam = scales.lambdas[k]
    row = bank.filters_time[k]
    t = np.arange(-bank.time_origin, row.size - bank.time_origin, dtype=float)
    direct = morlet_time(t / lam, params) / np.sqrt(lam)
    mask = np.abs(direct) > 1e-4
    err = np.abs(row - direct)[mask].max()
    assert err < 1e-5


def test_bank_supports_cover_stored_energy():
    bank = _bank("morlet")
    for k in range(bank.n_filters):
        lo, hi = bank.supports[k]
        row = bank.filters_time[k]
        outside = np.concatenate([row[:lo], row[hi:]])
        if outside.size:
            assert np.abs(outside).max() == 0.0


def test_bank_lowpass_is_dc_normalized_gaussian():
    bank = _bank("morlet")
    assert bank.lowpass_freq[0] == pytest.approx(1.0)
    assert np.all(bank.lowpass_freq <= 1.0 + 1e-12)
    assert bank.lowpass_sigma_t == pytest.approx(2.0 ** bank.scale_set.J / 2.0)


def test_bank_rejects_short_fft_grid():
    scales = make_scales(4, 2)
    params = MorletParams.for_quality(2)
    with pytest.raises(FilterSupportError):
        build_filterbank(scales, params, 64)


def test_bank_rejects_unknown_normalization():
    scales = make_scales(2, 1)
    with pytest.raises(ValueError):
        build_filterbank(scales, MorletParams(6.0), 512, normalization="l3")


def test_transform_length_leaves_room():
    scales = make_scales(3, 2)
    params = MorletParams.for_quality(2)
    n = 300
    n_fft = transform_length(scales, params, n)
    bank = build_filterbank(scales, params, n_fft)
    assert n_fft >= n + bank.support_length


# ---------------------------------------------------------------------------
# local frames
# ---------------------------------------------------------------------------


def test_pseudoinverse_matches_hand_computed_tight_frame():
    # W^T W = [[1.5, 0.5], [0.5, 1.5]], inverse [[0.75, -0.25], [-0.25, 0.75]].
    s = 1 / math.sqrt(2)
    W = np.array([[1.0, 0.0], [0.0, 1.0], [s, s]])
    fr = LocalFrame.from_matrix(W)
    inv = np.array([[0.75, -0.25], [-0.25, 0.75]])
    np.testing.assert_allclose(fr.Wd, inv @ W.T, atol=1e-14)
    np.testing.assert_allclose(fr.gram_dual, fr.Wd.T.conj() @ fr.Wd, atol=1e-14)
    np.testing.assert_allclose(fr.l1_norms, [1.0, 1.0, math.sqrt(2)], atol=1e-14)
    assert fr.rank == 2


def test_local_frame_reconstructs_row_space():
    rng = np.random.default_rng(42)
    bank = _bank("morlet", J=3, Q=2, n=200)
    fr = local_frame(bank)
    K, L = fr.W.shape
    assert K == bank.n_filters and L == bank.support_length
    # K < L here: coefficients determine the least-norm window, so the
    # dual inverts exactly on the row space and W Wd is the identity.
    np.testing.assert_allclose(fr.W @ fr.Wd, np.eye(K), atol=1e-10)
    x = fr.W.conj().T @ rng.normal(size=K)
    np.testing.assert_allclose(fr.Wd @ (fr.W @ x), x, atol=1e-10)


def test_rank_deficient_frame_warns():
    W = np.array([[1.0, 2.0], [2.0, 4.0], [0.5, 1.0]])  # all parallel
    with pytest.warns(FrameRankWarning):
        fr = LocalFrame.from_matrix(W)
    assert fr.rank == 1


def test_full_rank_frame_does_not_warn():
    rng = np.random.default_rng(0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        LocalFrame.from_matrix(rng.normal(size=(5, 3)))


def test_grams_are_hermitian():
    rng = np.random.default_rng(1)
    W = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    fr = LocalFrame.from_matrix(W)
    np.testing.assert_allclose(fr.gram_dual, fr.gram_dual.conj().T, atol=1e-14)
    np.testing.assert_allclose(fr.gram_analysis, fr.gram_analysis.conj().T, atol=1e-14)
