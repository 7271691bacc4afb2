"""Receiver noise budget and SNR for an IM/DD OOK photodetector front end."""

from __future__ import annotations

import math
from dataclasses import dataclass

Q_E = 1.6e-19  # C, as tabulated
K_B = 1.38e-23  # J/K, as tabulated


@dataclass(frozen=True)
class NoiseConfig:
    bandwidth: float = 20e6
    bg_current: float = 5100e-6
    dark_current: float = 0.0
    i2: float = 0.562
    i3: float = 0.0868
    fet_noise_factor: float = 1.5
    open_loop_gain: float = 10.0
    transconductance: float = 30e-3
    pd_capacitance_per_area: float = 112e-12 / 1e-4  # F/m^2
    temperature: float = 298.0

    def __post_init__(self):
        for name in ("bandwidth", "bg_current", "i2", "i3", "open_loop_gain",
                     "transconductance", "pd_capacitance_per_area", "temperature"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.fet_noise_factor < 0:
            raise ValueError("fet_noise_factor must be >= 0")
        if self.dark_current < 0:
            raise ValueError("dark_current must be >= 0")


@dataclass(frozen=True)
class NoiseBreakdown:
    shot: float
    background: float
    dark: float
    thermal: float

    @property
    def total(self) -> float:
        return math.fsum((self.shot, self.background, self.dark, self.thermal))


def shot_noise(cfg: NoiseConfig, responsivity: float, p_rx: float) -> tuple[float, float]:
    """Signal and background shot-noise variances (A^2), returned separately."""
    if p_rx < 0:
        raise ValueError("received power must be >= 0")
    signal = 2 * Q_E * responsivity * p_rx * cfg.bandwidth
    background = 2 * Q_E * cfg.bg_current * cfg.i2 * cfg.bandwidth
    return signal, background


def dark_noise(cfg: NoiseConfig) -> float:
    return 2 * Q_E * cfg.dark_current * cfg.i2 * cfg.bandwidth


def thermal_terms(cfg: NoiseConfig, area: float) -> tuple[float, float]:
    """Feedback-resistor and FET channel terms of the thermal noise variance.

    The second term carries A_r squared, matching the expression this model
    is built on; a textbook front end would square the capacitance C_PD*A_r
    as a whole.
    """
    if not area > 0:
        raise ValueError("area must be > 0")
    kt = K_B * cfg.temperature
    b = cfg.bandwidth
    c = cfg.pd_capacitance_per_area
    first = 8 * math.pi * kt / cfg.open_loop_gain * c * area * cfg.i2 * b ** 2
    second = (16 * math.pi ** 2 * kt * cfg.fet_noise_factor / cfg.transconductance
              * c * area ** 2 * cfg.i3 * b ** 3)
    return first, second


def thermal_noise(cfg: NoiseConfig, area: float) -> float:
    return sum(thermal_terms(cfg, area))


def noise_breakdown(cfg: NoiseConfig, responsivity: float, p_rx: float, area: float) -> NoiseBreakdown:
    sig, bg = shot_noise(cfg, responsivity, p_rx)
    return NoiseBreakdown(shot=sig, background=bg, dark=dark_noise(cfg),
                          thermal=thermal_noise(cfg, area))


def snr(cfg: NoiseConfig, responsivity: float, p_rx: float, area: float) -> tuple[float, float]:
    """Linear SNR and its dB value (``-inf`` for zero received power)."""
    total = noise_breakdown(cfg, responsivity, p_rx, area).total
    if total <= 0:
        raise ValueError("total noise variance must be positive")
    ratio = (responsivity * p_rx) ** 2 / total
    return ratio, (10 * math.log10(ratio) if ratio > 0 else -math.inf)
