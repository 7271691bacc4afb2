"""Headlamp and photodetector models.

Radiometric quantities are in watts, photometric ones in candela / lux.
Incidence angles are measured from the receiver normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LENS_MODES = ("constant-cpc", "paper-form")
# smallest incidence accepted by the paper-form lens gain (rad)
PAPER_FORM_MIN_INCIDENCE = 1e-6
DEFAULT_EFFICACY = 300.0  # lm per optical watt, white LED


class OpticsError(ValueError):
    pass


def radiometric_power_from_intensity(intensity_cd: float, mode_number: float,
                                     efficacy: float = DEFAULT_EFFICACY) -> float:
    """Optical power of a Lambertian source with peak luminous intensity ``intensity_cd``.

    Inverts I0 = P (m+1)/(2 pi) * efficacy.
    """
    if intensity_cd <= 0 or efficacy <= 0:
        raise OpticsError("intensity and efficacy must be positive")
    return intensity_cd * 2 * math.pi / ((mode_number + 1) * efficacy)


@dataclass(frozen=True)
class Headlamp:
    """Lambertian headlamp.

    ``tx_power`` is the radiometric transmit power per headlight.  When it is
    not given it is derived from ``luminous_intensity_peak`` through the
    luminous efficacy.
    """

    mode_number: float = 1.0
    tx_power: float | None = None
    luminous_intensity_peak: float | None = 8830.0
    luminous_efficacy: float = DEFAULT_EFFICACY

    def __post_init__(self):
        if not self.mode_number >= 1:
            raise OpticsError("mode number must be >= 1")
        if self.tx_power is None:
            if self.luminous_intensity_peak is None:
                raise OpticsError("either tx_power or luminous_intensity_peak is required")
            object.__setattr__(self, "tx_power", radiometric_power_from_intensity(
                self.luminous_intensity_peak, self.mode_number, self.luminous_efficacy))
        if not self.tx_power > 0:
            raise OpticsError("P_Tx > 0 violated")


@dataclass(frozen=True)
class OpticalReceiver:
    area: float = 1e-4
    fov: float = math.radians(80.0)
    refractive_index: float = 1.5
    filter_transmission: float = 1.0
    responsivity: float = 0.54
    lens_mode: str = "constant-cpc"

    def __post_init__(self):
        if not self.area > 0:
            raise OpticsError("A_r > 0 violated")
        if not (0 < self.fov <= math.pi / 2):
            raise OpticsError("0 < FoV <= pi/2 violated")
        if not self.refractive_index >= 1:
            raise OpticsError("refractive index >= 1 violated")
        if not (0 <= self.filter_transmission <= 1):
            raise OpticsError("0 <= T <= 1 violated")
        if not self.responsivity > 0:
            raise OpticsError("responsivity > 0 violated")
        if self.lens_mode not in LENS_MODES:
            raise OpticsError(f"lens_mode must be one of {LENS_MODES}")

    def in_fov(self, incidence):
        inc = np.asarray(incidence, dtype=float)
        return (inc >= 0) & (inc <= self.fov)


def lambertian_intensity(m: float, beta_t):
    """Normalised Lambertian intensity (m+1)/(2 pi) cos^m(beta_t), per steradian."""
    c = np.cos(np.asarray(beta_t, dtype=float))
    out = (m + 1) / (2 * math.pi) * np.power(np.clip(c, 0.0, None), m)
    return float(out) if np.ndim(out) == 0 else out


def illuminance(intensity_cd: float, beta_r, distance) -> float:
    """Illuminance in lux from a point source of the given luminous intensity."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise OpticsError("distance must be positive")
    e = intensity_cd * np.clip(np.cos(np.asarray(beta_r, dtype=float)), 0.0, None) / d ** 2
    return float(e) if np.ndim(e) == 0 else e


def effective_area(rx: OpticalReceiver, beta_r):
    """Projected detector area, zero outside the field of view."""
    b = np.asarray(beta_r, dtype=float)
    out = np.where(rx.in_fov(b), rx.area * np.cos(b), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def concentrator_gain(refractive_index: float, fov: float) -> float:
    """Ideal non-imaging concentrator gain n^2 / sin^2(FoV)."""
    return refractive_index ** 2 / math.sin(fov) ** 2


def lens_gain(rx: OpticalReceiver, beta_r):
    """Concentrator gain at incidence ``beta_r``; zero outside the FoV.

    ``paper-form`` uses n^2/sin^2(beta_r), which diverges at normal incidence;
    such inputs raise.
    """
    b = np.asarray(beta_r, dtype=float)
    inside = rx.in_fov(b)
    if rx.lens_mode == "constant-cpc":
        out = np.where(inside, concentrator_gain(rx.refractive_index, rx.fov), 0.0)
    else:
        if np.any(inside & (b < PAPER_FORM_MIN_INCIDENCE)):
            raise OpticsError("paper-form lens gain is singular at normal incidence")
        with np.errstate(divide="ignore"):
            out = np.where(inside, rx.refractive_index ** 2 / np.sin(b) ** 2, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def collection_factor(rx: OpticalReceiver, beta_r, concentrated: bool = True):
    """G(beta_r) * T * A_r with FoV clipping (``concentrated=False`` drops G)."""
    b = np.asarray(beta_r, dtype=float)
    if concentrated:
        g = np.asarray(lens_gain(rx, b))
    else:
        g = np.where(rx.in_fov(b), 1.0, 0.0)
    out = g * rx.filter_transmission * rx.area
    return float(out) if np.ndim(out) == 0 else out
