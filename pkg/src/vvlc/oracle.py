"""Independent verifiers: brute-force Cartesian geometry, Monte-Carlo and
adaptive-quadrature integration against the VMF density, and the
large-concentration limit check.

Nothing here calls the primary geometry, sampling or MEV code; the only
shared pieces are the domain dataclasses.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .geometry import AnglePair, EllipseGeometry, HeadlampLayout, SphereGeometry

REL_FLOOR = 1e-30


@dataclass(frozen=True)
class DeviationRecord:
    quantity: str
    paper_value: float
    oracle_value: float
    fingerprint: str = ""

    @property
    def abs_dev(self) -> float:
        return abs(self.paper_value - self.oracle_value)

    @property
    def rel_dev(self) -> float:
        return self.abs_dev / max(abs(self.oracle_value), REL_FLOOR)


def fingerprint(scn) -> str:
    from .config import emit_scenario
    return hashlib.sha256(emit_scenario(scn).encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Brute-force geometry
# ---------------------------------------------------------------------------

def _rz(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rx(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _unit(az, el):
    """Rotate +x by elevation then azimuth, element by element."""
    az = np.atleast_1d(np.asarray(az, float))
    el = np.atleast_1d(np.asarray(el, float))
    out = np.empty(az.shape + (3,))
    ex = np.array([1.0, 0.0, 0.0])
    for idx in np.ndindex(az.shape):
        ry = np.array([[math.cos(el[idx]), 0.0, -math.sin(el[idx])], [0.0, 1.0, 0.0],
                       [math.sin(el[idx]), 0.0, math.cos(el[idx])]])
        out[idx] = _rz(az[idx]) @ ry @ ex
    return out


def headlight_position(lay: HeadlampLayout, side: str) -> np.ndarray:
    u = _rz(lay.tilt_azimuth) @ _rx(lay.tilt_elevation) @ np.array([0.0, 1.0, 0.0])
    return lay.delta_left * u if side == "L" else -lay.delta_right * u


def _cylinder_range(ell: EllipseGeometry, horiz: np.ndarray, iters: int = 200) -> np.ndarray:
    """Horizontal range from ORx to the wall, by bisection on the focal sum."""
    rx = np.array([ell.D, 0.0])
    lo = np.zeros(horiz.shape[:-1])
    hi = np.full(lo.shape, 2 * ell.a + ell.D)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        p = rx + mid[..., None] * horiz
        g = np.linalg.norm(p, axis=-1) + mid - 2 * ell.a
        lo = np.where(g < 0, mid, lo)
        hi = np.where(g < 0, hi, mid)
    return 0.5 * (lo + hi)


def brute_force_point(kind: str, ell: EllipseGeometry, sph: SphereGeometry, angle: AnglePair) -> np.ndarray:
    az = np.atleast_1d(np.asarray(angle.azimuth, float))
    el = np.atleast_1d(np.asarray(angle.elevation, float))
    rx = np.array([ell.D, 0.0, 0.0])
    mirror = np.diag([-1.0, 1.0, 1.0])
    if kind == "tx-sphere":
        return sph.radius_tx * _unit(az, el)
    if kind == "rx-sphere":
        return rx + sph.radius_rx * (_unit(az, el) @ mirror.T)
    horiz = np.stack([-np.cos(az), np.sin(az)], axis=-1)
    r = _cylinder_range(ell, horiz)
    return np.stack([ell.D - r * np.cos(az), r * np.sin(az), r * np.tan(el)], axis=-1)


def brute_force_paths(kind, ell, sph, lay, side, angle):
    """(Tx leg, Rx leg) arrays from explicit 3D coordinates."""
    p = brute_force_point(kind, ell, sph, angle)
    h = headlight_position(lay, side)
    rx = np.array([ell.D, 0.0, 0.0])
    return np.linalg.norm(p - h, axis=-1), np.linalg.norm(rx - p, axis=-1)


def brute_force_coupled(kind, ell, sph, angle) -> tuple[np.ndarray, np.ndarray]:
    """Angle pair at the other end: arrival for the Tx-sphere, departure otherwise."""
    p = brute_force_point(kind, ell, sph, angle)
    if kind == "tx-sphere":
        v = p - np.array([ell.D, 0.0, 0.0])
        v[..., 0] *= -1
    else:
        v = p
    return np.arctan2(v[..., 1], v[..., 0]), np.arctan2(v[..., 2], np.hypot(v[..., 0], v[..., 1]))


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    converged: bool = True


def _density(fld, a, b):
    k = float(fld.concentration)
    if k == 0:
        return np.cos(b) / (4 * np.pi)
    a0, b0 = fld.alpha0, fld.beta0
    dot = np.cos(b0) * np.cos(b) * np.cos(a - a0) + np.sin(b0) * np.sin(b)
    return k * np.cos(b) / (4 * np.pi * np.sinh(k)) * np.exp(k * dot) if k < 500 else \
        k * np.cos(b) / (2 * np.pi) * np.exp(k * (dot - 1))


def sample_directions(fld, rng: np.random.Generator, n: int) -> AnglePair:
    """Exact S^2 von-Mises-Fisher draws, rotated onto the mean direction."""
    k = float(fld.concentration)
    u = rng.random(n)
    if k == 0:
        w = 2 * u - 1
    else:
        w = 1 + np.log(u + (1 - u) * np.exp(-2 * k)) / k
    phi = 2 * np.pi * rng.random(n)
    s = np.sqrt(np.clip(1 - w * w, 0, None))
    local = np.stack([w, s * np.cos(phi), s * np.sin(phi)], axis=-1)  # mean along +x
    a0, b0 = fld.alpha0, fld.beta0
    rot = _rz(a0) @ np.array([[math.cos(b0), 0, -math.sin(b0)], [0, 1, 0], [math.sin(b0), 0, math.cos(b0)]])
    v = local @ rot.T
    az = np.arctan2(v[:, 1], v[:, 0])
    az = np.where(az <= -np.pi, np.pi, az)
    el = np.arcsin(np.clip(v[:, 2], -1, 1))
    el = np.clip(el, -np.pi / 2 + 1e-15, np.pi / 2 - 1e-15)
    if getattr(fld, "planar", False):
        el = np.zeros_like(el)
    return AnglePair(az, el)


def mc_integrate(f, fld, seed: int, n: int, batches: int = 8) -> Estimate:
    """Mean of ``f(AnglePair)`` over VMF draws, with its standard error.

    Batches use sub-seeds spawned from ``seed`` so the result does not depend
    on how the work is split across workers.
    """
    if n < 1000:
        raise ValueError("n >= 1000 required")
    sizes = [n // batches + (1 if i < n % batches else 0) for i in range(batches)]
    s1 = s2 = 0.0
    for child, m in zip(np.random.SeedSequence(seed).spawn(batches), sizes):
        vals = np.asarray(f(sample_directions(fld, np.random.default_rng(child), m)), float)
        s1 += float(np.sum(vals))
        s2 += float(np.sum(vals * vals))
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return Estimate(mean, math.sqrt(var / n))


def quad_integrate(f, fld, tol: float = 1e-8, limit: int = 200) -> Estimate:
    """Adaptive iterated quadrature of f x density over the angle domain.

    Breakpoints at the mean direction help the peaked integrands.  ``error``
    is the sum of the reported absolute error estimates.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a0, b0 = fld.alpha0, fld.beta0
    k = float(fld.concentration)
    width = min(math.pi, 6.0 / math.sqrt(k)) if k > 0 else math.pi
    a_pts = [x for x in (a0 - width, a0, a0 + width) if abs(x - a0) < math.pi]
    b_pts = [x for x in (b0 - width, b0, b0 + width) if abs(x) < math.pi / 2]

    def g(a, b):
        wrapped = (a + math.pi) % (2 * math.pi) - math.pi
        if wrapped <= -math.pi:
            wrapped += 2 * math.pi
        val = float(np.asarray(f(AnglePair(np.array([wrapped]), np.array([b]))), float).ravel()[0])
        return val * float(_density(fld, a, b))

    lim = math.pi / 2 - 1e-12
    opts = [{"points": a_pts, "limit": limit, "epsabs": tol, "epsrel": tol},
            {"points": b_pts, "limit": limit, "epsabs": tol, "epsrel": tol}]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val, err = integrate.nquad(g, [[a0 - math.pi, a0 + math.pi], [-lim, lim]], opts=opts)
    converged = not any(issubclass(w.category, integrate.IntegrationWarning) for w in caught)
    return Estimate(float(val), float(err), converged)


def concentration_limit_check(submodel: str, scn, k_large: float = 1000.0, *, side: str = "LSH",
                              distance: float = 10.0, population: str = "left") -> DeviationRecord:
    """dc_gain_sb at a large concentration against the single scatterer at the mean direction."""
    from .cir import dc_gain_sb, sb_rays
    s = scn.with_vmf(submodel, population, concentration=float(k_large))
    fld = s.vmf[(submodel, population)]
    spread = dc_gain_sb(s, side, submodel, distance=distance, population=population)
    point = float(sb_rays(s, distance, side, submodel,
                          AnglePair(np.array([fld.alpha0]), np.array([fld.beta0]))).dc[0])
    return DeviationRecord(f"{submodel}.concentration_limit.k={k_large:g}", spread, point, fingerprint(s))
