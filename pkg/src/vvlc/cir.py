"""Channel impulse responses, DC gains and received power for the two-headlight link.

Path classes: ``LoS`` plus the single-bounce classes ``SB1`` (Tx-sphere,
vehicles), ``SB2`` (Rx-sphere, vehicles) and ``SB3`` (elliptic cylinder,
roadside).  Every SB class of a headlight collects the left and the right
scatterer populations.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate

from . import geometry as geo
from .config import MotionState, POPULATIONS, REGION_OF, SUBMODELS
from .noise import NoiseBreakdown, noise_breakdown, snr
from .optics import collection_factor, lambertian_intensity
from .scatterfield import ScattererSet, mev_discretize, vmf_pdf, vmf_sample

if TYPE_CHECKING:
    from .config import ScenarioConfig

C_LIGHT = 299_792_458.0
CLASSES = ("LoS",) + SUBMODELS
HEADLIGHTS = ("LSH", "RSH")
_SIDE = {"LSH": "L", "RSH": "R", "L": "L", "R": "R"}
METHODS = ("mev-sum", "quadrature", "monte-carlo")

__all__ = ["MotionState", "ScenarioEnded", "CirComponent", "LinkResult", "los_distance", "los_cir",
           "dc_gain_los", "sb_cir", "sb_rays", "dc_gain_sb", "received_power", "reduce_to_2d", "link_ellipse"]


class ScenarioEnded(RuntimeError):
    """The requested time lies beyond the stop time of the motion scenario."""


def _headlight(side: str) -> str:
    try:
        return _SIDE[side]
    except KeyError:
        raise ValueError(f"side must be LSH or RSH, got {side!r}") from None


@dataclass(frozen=True)
class CirComponent:
    source: str
    path_class: str
    delay: float
    gain: float

    def __post_init__(self):
        if not self.delay > 0:
            raise ValueError("delay must be positive")
        if not self.gain >= 0:
            raise ValueError("gain must be non-negative")


@dataclass(frozen=True)
class LinkResult:
    """Received power breakdown at one time step.

    ``power`` maps (class, headlight) to watts with the lens gain applied;
    ``power_bare`` is the same without the concentrator.
    """

    time: float
    distance: float
    power: dict
    power_bare: dict
    dc_gain: dict
    noise: NoiseBreakdown
    snr_db: float
    excluded: dict = field(default_factory=dict)

    @property
    def power_total(self) -> float:
        return math.fsum(self.power.values())

    @property
    def power_total_bare(self) -> float:
        return math.fsum(self.power_bare.values())

    def class_power(self, path_class: str) -> float:
        return math.fsum(v for (c, _), v in self.power.items() if c == path_class)

    def headlight_power(self, source: str) -> float:
        return math.fsum(v for (_, s), v in self.power.items() if s == source)


def los_distance(motion: MotionState, t: float) -> float:
    """Tx-Rx separation after ``t`` seconds of same-direction travel."""
    if t < 0:
        raise ValueError("t must be >= 0")
    stop = motion.stop_time
    if t > stop * (1 + 1e-12):
        raise ScenarioEnded(f"t={t:g} s is past the stop time {stop:g} s")
    if t >= stop:
        return motion.stop_distance
    eps_tx = motion.v_tx * t * math.cos(motion.gamma_tx)
    eps_rx = motion.v_rx * t * math.cos(motion.gamma_rx)
    return motion.d0 - (eps_tx - eps_rx)


def link_ellipse(scn: "ScenarioConfig", distance: float) -> geo.EllipseGeometry:
    """Ellipse for a given separation: foci at the link ends, semi-minor axis kept."""
    if distance == scn.ellipse.D:
        return scn.ellipse
    return geo.ellipse_from_link(scn.ellipse.b, distance)


def _los_angles(scn, horizontal):
    dh = scn.rx_height - scn.tx_height
    beta_t = math.atan2(dh, horizontal)
    return beta_t, abs(beta_t)


def _los_geometry(scn, t, side, distance):
    d = los_distance(scn.motion, t) if distance is None else distance
    delta = scn.layout.offset(_headlight(side))
    d_los = math.hypot(delta, d)
    beta_t, beta_r = _los_angles(scn, d_los)
    return d, d_los, beta_t, beta_r


def los_cir(scn: "ScenarioConfig", t: float, side: str, *, distance: float | None = None,
            concentrated: bool = True) -> CirComponent:
    """LoS impulse of one headlight: (m+1) G T A_r cos^m(beta_T) cos(beta_R) / (2 pi D^2)."""
    _, d_los, beta_t, beta_r = _los_geometry(scn, t, side, distance)
    m = scn.lamp.mode_number
    gta = collection_factor(scn.receiver, beta_r, concentrated)
    gain = (m + 1) * gta / (2 * math.pi * d_los ** 2) * math.cos(beta_t) ** m * math.cos(beta_r)
    return CirComponent("LSH" if _headlight(side) == "L" else "RSH", "LoS", d_los / C_LIGHT, gain)


def dc_gain_los(scn: "ScenarioConfig", t: float, side: str, *, distance: float | None = None) -> float:
    """LoS DC gain with the pi normalisation (no mode-number factor)."""
    _, d_los, beta_t, beta_r = _los_geometry(scn, t, side, distance)
    gta = collection_factor(scn.receiver, beta_r)
    return gta / (math.pi * d_los ** 2) * math.cos(beta_t) * math.cos(beta_r)


@dataclass(frozen=True)
class SbRays:
    """Per-scatterer gains (unweighted) and delays for one class, headlight and angle batch."""

    gain: np.ndarray
    delay: np.ndarray
    kept: np.ndarray
    intensity: np.ndarray

    @property
    def dc(self) -> np.ndarray:
        """Integrand of the DC gain: source intensity times impulse gain."""
        return self.intensity * self.gain

    @property
    def excluded(self) -> int:
        return int(np.count_nonzero(~self.kept))


def sb_rays(scn: "ScenarioConfig", distance: float, side: str, submodel: str, angles: geo.AnglePair,
            concentrated: bool = True) -> SbRays:
    """Single-bounce impulse gain of each scatterer direction, before the population weight.

    The returned ``intensity`` is the Lambertian pattern of the headlamp at the
    departure direction (off-axis angle from +x); the DC gain integrates
    ``intensity * gain`` against the VMF density.

    ``angles`` are departures at OTx for SB1 and arrivals at ORx otherwise.
    Scatterers removed by the realism filter, outside the FoV or on the
    singular set get gain 0 and ``kept`` False.
    """
    if submodel not in SUBMODELS:
        raise ValueError(f"submodel must be one of {SUBMODELS}")
    ell = link_ellipse(scn, distance)
    rg = geo.single_bounce(REGION_OF[submodel], ell, scn.spheres, scn.layout, _headlight(side), angles,
                           backend=scn.backend)
    at, bt = np.asarray(rg.departure.azimuth, float), np.asarray(rg.departure.elevation, float)
    ar, br = np.asarray(rg.arrival.azimuth, float), np.asarray(rg.arrival.elevation, float)
    incidence = np.arccos(np.clip(np.cos(ar) * np.cos(br), -1.0, 1.0))
    kept = rg.kept & scn.receiver.in_fov(incidence)
    if concentrated and scn.receiver.lens_mode == "paper-form":
        kept &= incidence >= 1e-6
    inc = np.where(kept, incidence, 0.0)
    gta = np.where(kept, collection_factor(scn.receiver, np.where(kept, inc, scn.receiver.fov), concentrated),
                   0.0)
    d1 = np.asarray(rg.paths.d_tx_to_scatterer, float)
    d2 = np.asarray(rg.paths.d_scatterer_to_rx, float)
    total = d1 + d2
    cosines = np.cos(at) * np.cos(bt) * np.cos(ar) * np.cos(br)
    rho = scn.reflectivity(submodel)
    with np.errstate(invalid="ignore", divide="ignore"):
        if submodel == "SB1":
            g = rho * gta * cosines / (math.pi ** 2 * d1 ** 2 * d2 ** 2)
        else:
            g = rho * gta * cosines / (math.pi * total ** 2)
    g = np.where(kept, np.clip(g, 0.0, None), 0.0)
    delay = np.where(kept, total / C_LIGHT, np.nan)
    off_axis = np.arccos(np.clip(np.cos(at) * np.cos(bt), -1.0, 1.0))
    inten = np.where(kept, lambertian_intensity(scn.lamp.mode_number, np.where(kept, off_axis, 0.0)), 0.0)
    return SbRays(np.atleast_1d(g), np.atleast_1d(delay), np.atleast_1d(kept), np.atleast_1d(inten))


def _distance(scn, t, distance):
    return los_distance(scn.motion, t) if distance is None else distance


def sb_cir(scn: "ScenarioConfig", t: float, side: str, submodel: str, scatterers: ScattererSet, *,
           distance: float | None = None) -> list[CirComponent]:
    """Weighted impulses of one scatterer population; excluded scatterers are dropped."""
    rays = sb_rays(scn, _distance(scn, t, distance), side, submodel, scatterers.angles)
    src = "LSH" if _headlight(side) == "L" else "RSH"
    return [CirComponent(src, submodel, float(d), float(g * w))
            for g, d, w, k in zip(rays.gain, rays.delay, scatterers.weight, rays.kept) if k]


def _populations(population):
    if population in (None, "both"):
        return POPULATIONS
    if population not in POPULATIONS:
        raise ValueError(f"population must be 'left', 'right' or 'both', got {population!r}")
    return (population,)


def dc_gain_sb(scn: "ScenarioConfig", side: str, submodel: str, method: str = "mev-sum", *, t: float = 0.0,
               distance: float | None = None, population: str = "both", seed: int | None = None,
               n: int = 1_000_000, rtol: float = 1e-7, atol: float = 1e-20,
               concentrated: bool = True) -> float:
    """DC gain of one SB class: source intensity x impulse gain averaged over the VMF field(s).

    ``mev-sum`` uses the equal-mass scatterer set, ``quadrature`` integrates
    gain x density adaptively and ``monte-carlo`` averages over ``n`` draws.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    d = _distance(scn, t, distance)
    total = 0.0
    for pop in _populations(population):
        fld = scn.vmf[(submodel, pop)]
        if method == "mev-sum":
            s = mev_discretize(fld)
            total += float(np.sum(s.weight * sb_rays(scn, d, side, submodel, s.angles, concentrated).dc))
        elif method == "monte-carlo":
            base = scn.seed if seed is None else seed
            sub_seed = np.random.SeedSequence([base, SUBMODELS.index(submodel), POPULATIONS.index(pop)])
            ang = vmf_sample(fld, sub_seed, n)
            total += float(np.mean(sb_rays(scn, d, side, submodel, ang, concentrated).dc))
        else:
            total += _quadrature(scn, d, side, submodel, fld, rtol, atol, concentrated)
    return total


def _quadrature(scn, d, side, submodel, fld, rtol, atol, concentrated):
    a0 = fld.alpha0

    def integrand(x):
        ang = geo.AnglePair(np.asarray(geo.wrap_angle(x[:, 0])), x[:, 1])
        g = sb_rays(scn, d, side, submodel, ang, concentrated).dc
        return g * vmf_pdf(fld, ang)

    lim = math.pi / 2 - 1e-9
    res = integrate.cubature(integrand, [a0 - math.pi, -lim], [a0 + math.pi, lim], rtol=rtol, atol=atol,
                             max_subdivisions=5000)
    if res.status != "converged":
        warnings.warn(f"quadrature did not converge: estimate {res.estimate:.6e}, error {res.error:.2e}",
                      RuntimeWarning, stacklevel=3)
    return float(res.estimate)


def received_power(scn: "ScenarioConfig", t: float, *, distance: float | None = None) -> LinkResult:
    """Per-class, per-headlight received power, totals, noise budget and SNR at time ``t``."""
    d = _distance(scn, t, distance)
    p = scn.lamp.tx_power
    power, bare, gains, excluded = {}, {}, {}, {}
    for hl in HEADLIGHTS:
        c = los_cir(scn, t, hl, distance=d)
        gains[("LoS", hl)] = c.gain
        power[("LoS", hl)] = p * c.gain
        bare[("LoS", hl)] = p * los_cir(scn, t, hl, distance=d, concentrated=False).gain
        for sub in SUBMODELS:
            g = g_bare = 0.0
            n_ex = 0
            for pop in POPULATIONS:
                s = mev_discretize(scn.vmf[(sub, pop)])
                rays = sb_rays(scn, d, hl, sub, s.angles)
                g += float(np.sum(s.weight * rays.dc))
                g_bare += float(np.sum(s.weight * sb_rays(scn, d, hl, sub, s.angles, False).dc))
                n_ex += rays.excluded
            gains[(sub, hl)] = g
            power[(sub, hl)] = p * g
            bare[(sub, hl)] = p * g_bare
            excluded[(sub, hl)] = n_ex
    p_rx = math.fsum(power.values())
    nb = noise_breakdown(scn.noise, scn.receiver.responsivity, p_rx, scn.receiver.area)
    _, snr_db = snr(scn.noise, scn.receiver.responsivity, p_rx, scn.receiver.area)
    return LinkResult(t, d, power, bare, gains, nb, snr_db, excluded)


def reduce_to_2d(scn: "ScenarioConfig") -> "ScenarioConfig":
    """Planar counterpart: zero elevation means, collapsed elevations, no headlight tilt,
    equal mounting heights."""
    vmf = {key: dataclasses.replace(fld, mean=geo.AnglePair(fld.alpha0, 0.0), planar=True)
           for key, fld in scn.vmf.items()}
    lay = dataclasses.replace(scn.layout, tilt_elevation=0.0)
    return dataclasses.replace(scn, vmf=vmf, layout=lay, rx_height=scn.tx_height)
