"""Von-Mises-Fisher scatterer statistics on the (azimuth, elevation) domain.

The density is written in angle coordinates, so the cos(beta) Jacobian of the
sphere is part of it and it integrates to one over
alpha in (-pi, pi], beta in (-pi/2, pi/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special, stats

from .geometry import AnglePair, KINDS, wrap_angle

SIDE_TAGS = ("left", "right")

_BETA_GRID = 20001
_ALPHA_GRID = 4097
_GL_NODES = 48


@dataclass(frozen=True)
class VmfField:
    """Scatterer population: mean direction, concentration ``k`` and count ``N``.

    ``planar`` collapses every elevation to zero (the 2D reduction).
    """

    mean: AnglePair = field(default_factory=lambda: AnglePair(math.radians(10), math.radians(2)))
    concentration: float = 30.0
    count: int = 100
    region: str = "tx-sphere"
    side: str = "left"
    planar: bool = False

    def __post_init__(self):
        if not self.concentration >= 0:
            raise ValueError("k >= 0 violated")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError("N >= 1 violated")
        if self.region not in KINDS:
            raise ValueError(f"region must be one of {KINDS}")
        if self.side not in SIDE_TAGS:
            raise ValueError(f"side must be one of {SIDE_TAGS}")
        if np.ndim(self.mean.azimuth) or np.ndim(self.mean.elevation):
            raise ValueError("mean direction must be scalar")

    @property
    def alpha0(self) -> float:
        return float(self.mean.azimuth)

    @property
    def beta0(self) -> float:
        return float(self.mean.elevation)

    def _key(self):
        return (self.alpha0, self.beta0, float(self.concentration), int(self.count))


@dataclass(frozen=True)
class ScattererSet:
    azimuth: np.ndarray
    elevation: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        if not (self.azimuth.shape == self.elevation.shape == self.weight.shape):
            raise ValueError("entry arrays must share a shape")
        if np.any(self.weight <= 0):
            raise ValueError("weights must be positive")
        if abs(self.weight.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    def __len__(self) -> int:
        return self.azimuth.size

    @property
    def angles(self) -> AnglePair:
        return AnglePair(self.azimuth, self.elevation)

    def expectation(self, fn) -> float:
        """Weighted sum of ``fn(AnglePair)`` over the entries."""
        return float(np.sum(self.weight * np.asarray(fn(self.angles), dtype=float)))


def vmf_pdf(fld: VmfField, at: AnglePair):
    """Density per rad^2 at ``at``."""
    a = np.asarray(at.azimuth, dtype=float)
    b = np.asarray(at.elevation, dtype=float)
    k = float(fld.concentration)
    if k == 0:
        out = np.cos(b) / (4 * math.pi)
    else:
        b0, a0 = fld.beta0, fld.alpha0
        t = math.cos(b0) * np.cos(b) * np.cos(a - a0) + math.sin(b0) * np.sin(b)
        # k / (4 pi sinh k) * exp(k t), rewritten so nothing overflows
        out = k * np.cos(b) / (2 * math.pi * -math.expm1(-2 * k)) * np.exp(k * (t - 1))
    return float(out) if np.ndim(out) == 0 else out


def elevation_marginal(fld: VmfField, beta):
    """Density of the elevation alone (azimuth integrated out analytically)."""
    b = np.asarray(beta, dtype=float)
    k = float(fld.concentration)
    if k == 0:
        out = np.cos(b) / 2
    else:
        b0 = fld.beta0
        kap = k * math.cos(b0) * np.cos(b)
        expo = k * math.sin(b0) * np.sin(b) + kap - k
        out = k * np.cos(b) / -math.expm1(-2 * k) * special.i0e(kap) * np.exp(expo)
    return float(out) if np.ndim(out) == 0 else out


def _elevation_table(fld: VmfField):
    beta = np.linspace(-math.pi / 2, math.pi / 2, _BETA_GRID)
    dens = elevation_marginal(fld, beta)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(beta))))
    return beta, cdf / cdf[-1]


def _band_counts(n: int) -> list[int]:
    nb = math.ceil(math.sqrt(n))
    base, extra = divmod(n, nb)
    counts = [base] * nb
    # spread the remainder from the middle outwards so the layout stays symmetric-ish
    order = sorted(range(nb), key=lambda i: abs(i - (nb - 1) / 2))
    for i in order[:extra]:
        counts[i] += 1
    return [c for c in counts if c > 0]


@lru_cache(maxsize=256)
def _mev_cached(alpha0: float, beta0: float, k: float, n: int):
    fld = VmfField(AnglePair(alpha0, beta0), k, n)
    if n == 1:
        return np.array([alpha0]), np.array([beta0 if k > 0 else 0.0])

    beta_grid, beta_cdf = _elevation_table(fld)
    counts = _band_counts(n)
    cum = np.concatenate(([0], np.cumsum(counts))) / n
    edges = np.interp(cum, beta_cdf, beta_grid)
    edges[0], edges[-1] = -math.pi / 2, math.pi / 2
    gl_x, gl_w = np.polynomial.legendre.leggauss(_GL_NODES)

    az_out, el_out = [], []
    for band, c in enumerate(counts):
        lo, hi = edges[band], edges[band + 1]
        bj = 0.5 * (hi - lo) * gl_x + 0.5 * (hi + lo)
        wj = 0.5 * (hi - lo) * gl_w * elevation_marginal(fld, bj)
        wj = wj / wj.sum()
        kap = k * math.cos(beta0) * np.cos(bj)
        kmin = float(kap.min())
        half = math.pi if kmin <= 0 else min(math.pi, 12.0 / math.sqrt(kmin))
        u = np.linspace(-half, half, _ALPHA_GRID)  # offset from alpha0
        pdf = stats.vonmises.pdf(u[None, :], kap[:, None]) if k > 0 else np.full((bj.size, u.size), 1 / (2 * math.pi))
        du = np.diff(u)
        mass = np.concatenate([np.zeros((bj.size, 1)),
                               np.cumsum(0.5 * (pdf[:, 1:] + pdf[:, :-1]) * du, axis=1)], axis=1)
        first = np.concatenate([np.zeros((bj.size, 1)),
                                np.cumsum(0.5 * (u[1:] * pdf[:, 1:] + u[:-1] * pdf[:, :-1]) * du, axis=1)],
                               axis=1)
        tot = mass[:, -1:]
        mass, first = mass / tot, first / tot
        mix = wj @ mass
        cuts = np.interp(np.arange(c + 1) / c, mix, u)
        cuts[0], cuts[-1] = u[0], u[-1]
        m_at = np.stack([np.interp(cuts, u, mass[j]) for j in range(bj.size)])
        f_at = np.stack([np.interp(cuts, u, first[j]) for j in range(bj.size)])
        dm = np.diff(m_at, axis=1) * wj[:, None]  # node x cell mass
        df = np.diff(f_at, axis=1) * wj[:, None]
        cell_mass = dm.sum(axis=0)
        az_out.append(alpha0 + df.sum(axis=0) / cell_mass)
        el_out.append((bj[:, None] * dm).sum(axis=0) / cell_mass)
    az = np.asarray(wrap_angle(np.concatenate(az_out)))
    return az, np.concatenate(el_out)


def mev_discretize(fld: VmfField) -> ScattererSet:
    """Equal-probability-mass discretisation into ``fld.count`` representative directions.

    Elevation is split into ceil(sqrt(N)) bands through the marginal CDF and
    each band into azimuth cells through the band's conditional CDF.  Each
    entry is the probability-weighted centroid of its cell and carries weight 1/N.
    """
    az, el = _mev_cached(*fld._key())
    az, el = az.copy(), el.copy()
    if fld.planar:
        el[:] = 0.0
    n = az.size
    return ScattererSet(az, el, np.full(n, 1.0 / n))


def vmf_sample(fld: VmfField, seed: int, n: int) -> AnglePair:
    """i.i.d. draws: tabulated inverse-CDF elevation, then conditional von Mises azimuth."""
    if n < 1:
        raise ValueError("n >= 1 required")
    rng = np.random.default_rng(seed)
    beta_grid, beta_cdf = _elevation_table(fld)
    keep = np.concatenate(([True], np.diff(beta_cdf) > 0))
    beta = np.interp(rng.random(n), beta_cdf[keep], beta_grid[keep])
    kap = float(fld.concentration) * math.cos(fld.beta0) * np.cos(beta)
    alpha = rng.vonmises(fld.alpha0, kap)
    alpha = np.asarray(wrap_angle(alpha))
    if fld.planar:
        beta = np.zeros_like(beta)
    return AnglePair(alpha, beta)


def mean_direction(angles: AnglePair, weights=None) -> tuple[float, float]:
    """Azimuth and elevation of the (weighted) resultant unit vector."""
    a = np.asarray(angles.azimuth, float)
    b = np.asarray(angles.elevation, float)
    w = np.ones_like(a) if weights is None else np.asarray(weights, float)
    v = np.array([np.sum(w * np.cos(b) * np.cos(a)), np.sum(w * np.cos(b) * np.sin(a)),
                  np.sum(w * np.sin(b))])
    return math.atan2(v[1], v[0]), math.atan2(v[2], math.hypot(v[0], v[1]))
