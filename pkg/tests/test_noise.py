import math

import pytest
from hypothesis import given, strategies as st

from vvlc import noise
from vvlc.noise import NoiseConfig

CFG = NoiseConfig()


def test_background_term():
    sig, bg = noise.shot_noise(CFG, 0.54, 0.0)
    assert sig == 0.0
    assert bg == pytest.approx(2 * 1.6e-19 * 5.1e-3 * 0.562 * 2e7, rel=1e-12)
    assert bg == pytest.approx(1.834e-14, rel=1e-3)


def test_signal_shot_term():
    sig, _ = noise.shot_noise(CFG, 0.54, 1e-6)
    assert sig == pytest.approx(3.456e-18, rel=1e-12)
    assert noise.shot_noise(CFG, 0.54, 2e-6)[0] == pytest.approx(2 * sig, rel=1e-15)


def test_thermal_first_term_recomputed():
    first, second = noise.thermal_terms(CFG, 1e-4)
    expect = 8 * math.pi * 1.38e-23 * 298 / 10 * 1.12e-6 * 1e-4 * 0.562 * 4e14
    assert first == pytest.approx(expect, rel=1e-12)
    assert first == pytest.approx(2.602e-16, rel=1e-3)
    assert second > 0


def test_thermal_scaling_with_bandwidth_and_gamma():
    f1, s1 = noise.thermal_terms(CFG, 1e-4)
    f2, s2 = noise.thermal_terms(NoiseConfig(bandwidth=4e7), 1e-4)
    assert f2 == pytest.approx(4 * f1, rel=1e-12)
    assert s2 == pytest.approx(8 * s1, rel=1e-12)
    assert noise.thermal_terms(NoiseConfig(fet_noise_factor=0.0), 1e-4)[1] == 0.0


def test_dark_default_zero():
    assert noise.dark_noise(CFG) == 0.0
    assert noise.dark_noise(NoiseConfig(dark_current=1e-9)) > 0


@given(st.floats(0, 1e-2), st.floats(1e-6, 1e-2))
def test_total_is_sum_of_parts(p, area):
    nb = noise.noise_breakdown(CFG, 0.54, p, area)
    parts = nb.shot + nb.background + nb.dark + nb.thermal
    assert nb.total == pytest.approx(parts, rel=1e-15)
    assert min(nb.shot, nb.background, nb.dark, nb.thermal) >= 0


def test_snr_zero_power():
    ratio, db = noise.snr(CFG, 0.54, 0.0, 1e-4)
    assert ratio == 0.0 and db == -math.inf


def test_snr_doubling_near_6db():
    _, d1 = noise.snr(CFG, 0.54, 1e-9, 1e-4)
    _, d2 = noise.snr(CFG, 0.54, 2e-9, 1e-4)
    assert d2 - d1 == pytest.approx(20 * math.log10(2), abs=0.01)


@given(st.floats(1e-9, 1e-2), st.floats(0.1, 10))
def test_snr_mixed_scaling_law(p, c):
    r1, _ = noise.snr(CFG, 0.54, p, 1e-4)
    r2, _ = noise.snr(CFG, 0.54, c * p, 1e-4)
    s1 = noise.noise_breakdown(CFG, 0.54, p, 1e-4).total
    s2 = noise.noise_breakdown(CFG, 0.54, c * p, 1e-4).total
    assert r2 * s2 == pytest.approx(c * c * r1 * s1, rel=1e-12)


def test_validation():
    with pytest.raises(ValueError):
        NoiseConfig(bandwidth=0)
    with pytest.raises(ValueError):
        NoiseConfig(dark_current=-1)
    with pytest.raises(ValueError):
        noise.shot_noise(CFG, 0.54, -1.0)
    with pytest.raises(ValueError):
        noise.thermal_terms(CFG, 0.0)
