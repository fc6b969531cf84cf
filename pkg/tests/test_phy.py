import math

import numpy as np
import pytest
from scipy import stats

from harqrelay.phy import (
    NoiseParams,
    SoftObservation,
    bpsk_ber,
    calibrate_tx_energy,
    demodulate,
    sample_fading,
    transmit,
)
from harqrelay.topology import PathLossParams, path_gain

PARAMS = PathLossParams()


def test_rayleigh_power_mean():
    h = sample_fading(np.random.default_rng(0), np.ones(10**6))
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.005)


def test_rayleigh_power_is_exponential():
    h = sample_fading(np.random.default_rng(1), np.full(20_000, 3.0))
    assert stats.kstest(np.abs(h) ** 2, stats.expon(scale=3.0).cdf).pvalue > 0.01


def test_fading_at_50m_is_about_minus_91_db():
    g = path_gain(50.0, PARAMS)
    h = sample_fading(np.random.default_rng(2), np.full(10**6, g))
    assert 10 * math.log10(np.mean(np.abs(h) ** 2)) == pytest.approx(-91.0, abs=0.05)


def test_scalar_fading_draw():
    h = sample_fading(np.random.default_rng(3), 2.0)
    assert isinstance(h, complex)


def test_fading_independent_across_links():
    rng = np.random.default_rng(4)
    draws = sample_fading(rng, np.ones((10**5, 2)))
    p = np.abs(draws) ** 2
    assert abs(np.corrcoef(p[:, 0], p[:, 1])[0, 1]) < 0.01


def test_noiseless_transmission():
    noise = NoiseParams(n0=1e-30, tx_energy=4.0)
    y = transmit(np.array([0, 1, 1, 0]), 1.0, noise, np.random.default_rng(0))
    np.testing.assert_allclose(y, [2, -2, -2, 2], atol=1e-12)


def test_transmit_rejects_empty():
    with pytest.raises(ValueError):
        transmit(np.array([]), 1.0, NoiseParams(1.0, 1.0), np.random.default_rng(0))


def test_noise_variance_calibration():
    noise = NoiseParams(n0=0.37, tx_energy=2.0)
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, 10**6)
    h = 0.8 - 0.3j
    y = transmit(bits, h, noise, rng)
    resid = y - h * math.sqrt(2.0) * (1 - 2 * bits)
    assert np.var(resid) == pytest.approx(0.37, rel=0.01)
    # split evenly between I and Q
    assert np.var(resid.real) == pytest.approx(0.185, rel=0.02)


@pytest.mark.parametrize("gamma_db", [0.0, 3.0, 6.0])
def test_uncoded_ber_matches_q_function(gamma_db):
    gamma = 10 ** (gamma_db / 10)
    h = 0.6 + 0.8j  # |h| = 1
    noise = NoiseParams(n0=1.0, tx_energy=gamma)
    rng = np.random.default_rng(int(gamma_db * 10) + 7)
    n = 10**6
    bits = rng.integers(0, 2, n)
    obs = demodulate(transmit(bits, h, noise, rng), h, noise)
    errors = np.count_nonzero((obs.llrs < 0) != (bits == 1))
    p = stats.norm.sf(math.sqrt(2 * gamma))
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(errors / n - p) < 3 * sigma
    assert bpsk_ber(gamma) == pytest.approx(p, rel=1e-12)


def test_llr_noiseless_value():
    noise = NoiseParams(n0=0.5, tx_energy=3.0)
    h = 0.2 + 0.4j
    y = np.array([h * math.sqrt(3.0)])
    obs = demodulate(y, h, noise)
    assert obs.llrs[0] == pytest.approx(4 * abs(h) ** 2 * 3.0 / 0.5)
    assert obs.llrs[0] > 0


def test_llr_zero_channel_is_erasure():
    noise = NoiseParams(n0=1.0, tx_energy=1.0)
    y = np.random.default_rng(0).standard_normal(50) + 0j
    assert np.all(demodulate(y, 0.0, noise).llrs == 0)


def test_llr_sign_equals_minimum_distance_decision():
    rng = np.random.default_rng(9)
    noise = NoiseParams(n0=1.3, tx_energy=0.7)
    for _ in range(200):
        h = complex(*rng.standard_normal(2))
        bits = rng.integers(0, 2, 64)
        y = transmit(bits, h, noise, rng)
        llr = demodulate(y, h, noise).llrs
        s = math.sqrt(noise.tx_energy)
        pick_zero = np.abs(y - h * s) ** 2 < np.abs(y + h * s) ** 2
        np.testing.assert_array_equal(llr > 0, pick_zero)


def test_llr_linear_in_channel_power():
    noise = NoiseParams(n0=1.0, tx_energy=1.0)
    y = np.array([0.3 + 0.1j, -0.7 + 0.2j])
    base = demodulate(y, 1.0, noise).llrs
    # same received direction relative to h, channel power scaled by 4
    scaled = demodulate(2.0 * y, 2.0, noise).llrs
    np.testing.assert_allclose(scaled, 4 * base)


def test_demodulation_is_deterministic():
    noise = NoiseParams(n0=1.0, tx_energy=2.0)
    y = np.array([0.5 - 1j, -2 + 0.1j])
    a = demodulate(y, 0.3 + 0.3j, noise).llrs
    b = demodulate(y, 0.3 + 0.3j, noise).llrs
    np.testing.assert_array_equal(a, b)


def test_soft_observation_validation():
    with pytest.raises(ValueError):
        SoftObservation(np.array([3, 2]), np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        SoftObservation(np.array([1, 2]), np.array([0.1]))


def test_calibrate_zero_db():
    n0 = 10 ** (-134 / 10)
    e = calibrate_tx_energy(0.0, 100.0, PARAMS, n0)
    assert path_gain(100.0, PARAMS) * e / n0 == pytest.approx(1.0, rel=1e-12)


def test_calibrate_default_setting():
    n0 = 10 ** (-134 / 10)
    e = calibrate_tx_energy(2.0, 100.0, PARAMS, n0)
    # gain at 100 m is -100.05 dB, so E/N0 = 2 + 100.05 dB
    assert 10 * math.log10(path_gain(100.0, PARAMS)) == pytest.approx(-100.052, abs=1e-3)
    assert 10 * math.log10(e / n0) == pytest.approx(102.052, abs=1e-3)
    snr = path_gain(100.0, PARAMS) * e / n0
    assert 10 * math.log10(snr) == pytest.approx(2.0, rel=1e-12)


def test_calibrate_rejects_nonfinite():
    with pytest.raises(ValueError):
        calibrate_tx_energy(float("inf"), 100.0, PARAMS, 1.0)


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(0.0, 1.0)
