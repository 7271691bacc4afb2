"""Path lengths and AoD/AoA coupling for the Tx-sphere, Rx-sphere and
elliptic-cylinder single-bounce geometries.

Frame: OTx (midpoint between the headlights) at the origin, ORx at (D, 0, 0),
z vertical, the left headlight (LSH) on the +y side.  Departure azimuths are
measured at OTx from +x; arrival azimuths are measured at ORx from -x, i.e.
from the receiver boresight that looks back at the transmitter.  Both are
positive toward +y.  Elevations are measured from the x-y plane.

Two backends compute the same quantities:

* ``paper`` evaluates the closed-form trigonometric expressions term by term,
  including their known inconsistencies (kept for auditing).
* ``oracle`` places the scatterer and the headlights in 3D and takes
  Euclidean norms.  This is the default used downstream.

All functions broadcast over numpy arrays of angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

SINGULAR_TOL = 1e-12
KINDS = ("tx-sphere", "rx-sphere", "cylinder")
SIDES = ("L", "R")
BACKENDS = ("paper", "oracle")


class GeometryError(ValueError):
    """Raised for inputs outside the admissible angular domain."""


@dataclass(frozen=True)
class AnglePair:
    """Azimuth in (-pi, pi] and elevation in (-pi/2, pi/2), radians."""

    azimuth: ArrayLike
    elevation: ArrayLike

    def __post_init__(self):
        a = np.asarray(self.azimuth, dtype=float)
        b = np.asarray(self.elevation, dtype=float)
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
            raise GeometryError("angles must be finite")
        if np.any(a <= -math.pi) or np.any(a > math.pi):
            raise GeometryError("azimuth outside (-pi, pi]")
        if np.any(np.abs(b) >= math.pi / 2):
            raise GeometryError("elevation outside (-pi/2, pi/2)")

    @classmethod
    def from_degrees(cls, azimuth_deg, elevation_deg) -> "AnglePair":
        return cls(np.radians(azimuth_deg) if np.ndim(azimuth_deg) else math.radians(azimuth_deg),
                   np.radians(elevation_deg) if np.ndim(elevation_deg) else math.radians(elevation_deg))


def wrap_angle(x: ArrayLike) -> ArrayLike:
    """Wrap to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi
    y = np.where(y <= -math.pi, y + 2 * math.pi, y)
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class EllipseGeometry:
    """Ellipse with foci at OTx and ORx: semi-axes a > b, focal half-distance f, D = 2f."""

    a: float
    b: float
    f: float
    D: float

    def __post_init__(self):
        if not (self.a > self.b > 0):
            raise GeometryError("a > b violated" if self.b > 0 else "b > 0 violated")
        if abs(self.a ** 2 - self.b ** 2 - self.f ** 2) > 1e-12 * self.a ** 2:
            raise GeometryError("a^2 = b^2 + f^2 violated")
        if self.D != 2 * self.f:
            raise GeometryError("D = 2f violated")


def ellipse_from_axes(a: float, b: float) -> EllipseGeometry:
    if not (a > b):
        raise GeometryError("a > b violated")
    if not b > 0:
        raise GeometryError("b > 0 violated")
    f = math.sqrt(a * a - b * b)
    return EllipseGeometry(a=a, b=b, f=f, D=2 * f)


def ellipse_from_link(b: float, distance: float) -> EllipseGeometry:
    """Ellipse whose foci sit at the ends of a link of the given length, semi-minor axis held at b."""
    if distance <= 0:
        raise GeometryError("link distance must be positive")
    f = distance / 2
    a = math.sqrt(b * b + f * f)
    return EllipseGeometry(a=a, b=b, f=f, D=2 * f)


@dataclass(frozen=True)
class SphereGeometry:
    radius_tx: float
    radius_rx: float

    def __post_init__(self):
        if not (self.radius_tx > 0 and self.radius_rx > 0):
            raise GeometryError("sphere radii must be positive")

    def check_fits(self, ell: EllipseGeometry) -> None:
        if self.radius_tx >= ell.D or self.radius_rx >= ell.D:
            raise GeometryError("sphere radius must be smaller than the Tx-Rx distance")


@dataclass(frozen=True)
class HeadlampLayout:
    """Headlight pair around OTx.

    The LSH sits at ``delta_left * u`` and the RSH at ``-delta_right * u`` where
    ``u`` is the unit baseline vector: perpendicular to the road axis for zero
    tilt, rotated by ``tilt_azimuth`` about z and raised by ``tilt_elevation``.
    """

    half_separation: float = 0.6
    delta_left: float | None = None
    delta_right: float | None = None
    tilt_azimuth: float = 0.0
    tilt_elevation: float = 0.0

    def __post_init__(self):
        if self.delta_left is None:
            object.__setattr__(self, "delta_left", self.half_separation)
        if self.delta_right is None:
            object.__setattr__(self, "delta_right", self.half_separation)
        if not self.half_separation > 0:
            raise GeometryError("half_separation > 0 violated")
        if self.delta_left < 0 or self.delta_right < 0:
            raise GeometryError("side offsets must be >= 0")
        if not (-math.pi < self.tilt_azimuth <= math.pi):
            raise GeometryError("tilt_azimuth outside (-pi, pi]")
        if not (abs(self.tilt_elevation) < math.pi / 2):
            raise GeometryError("tilt_elevation outside (-pi/2, pi/2)")

    @property
    def orientation(self) -> float:
        """Azimuth of the OTx -> LSH vector (the theta_T of the closed forms)."""
        return math.pi / 2 + self.tilt_azimuth

    def offset(self, side: str) -> float:
        _check_side(side)
        return self.delta_left if side == "L" else self.delta_right

    def baseline(self) -> np.ndarray:
        # written with the tilt itself rather than cos/sin(pi/2 + tilt) so zero tilt is exact
        tz, ph = self.tilt_azimuth, self.tilt_elevation
        return np.array([-math.cos(ph) * math.sin(tz), math.cos(ph) * math.cos(tz), math.sin(ph)])

    def position(self, side: str) -> np.ndarray:
        sign = 1.0 if side == "L" else -1.0
        return sign * self.offset(side) * self.baseline()


@dataclass(frozen=True)
class PathLengths:
    d_tx_to_scatterer: ArrayLike
    d_scatterer_to_rx: ArrayLike

    @property
    def total(self) -> ArrayLike:
        return self.d_tx_to_scatterer + self.d_scatterer_to_rx


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise GeometryError(f"side must be one of {SIDES}, got {side!r}")


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise GeometryError(f"geometry kind must be one of {KINDS}, got {kind!r}")


def _singular(beta: ArrayLike) -> np.ndarray:
    return np.abs(np.asarray(beta, dtype=float)) >= math.pi / 2 - SINGULAR_TOL


def _reject_or_mask(mask: np.ndarray, strict: bool, what: str) -> None:
    if strict and np.any(mask):
        raise GeometryError(f"singular {what}: |elevation| within {SINGULAR_TOL} of pi/2")


def _safe_arcsin(x: np.ndarray) -> np.ndarray:
    # arguments are <= 1 by construction; allow rounding only
    if np.any(np.abs(x[np.isfinite(x)]) > 1 + 1e-9):
        raise AssertionError("arcsin argument outside [-1, 1]")
    return np.arcsin(np.clip(x, -1.0, 1.0))


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


_EL_EDGE = np.nextafter(math.pi / 2, 0.0)


def _open_elevation(el):
    # near-vertical rays round to exactly pi/2; keep them inside the open range
    return np.clip(el, -_EL_EDGE, _EL_EDGE)


# ---------------------------------------------------------------------------
# Closed-form (paper) backend
# ---------------------------------------------------------------------------

def txsphere_arrival(ell: EllipseGeometry, sph: SphereGeometry, dep: AnglePair) -> AnglePair:
    """Arrival angles of a Tx-sphere scatterer from its departure angles (closed form).

    The denominator keeps the ``+4 f Q1 cos(alpha_T)`` sign of the closed form; the
    matching path-length expression uses ``-``.
    """
    at, bt = np.asarray(dep.azimuth, float), np.asarray(dep.elevation, float)
    rt, f = sph.radius_tx, ell.f
    q1 = rt * np.cos(bt)
    root = np.sqrt(q1 ** 2 + 4 * f * f + 4 * f * q1 * np.cos(at))
    ar = _safe_arcsin(rt * np.cos(bt) * np.sin(at) / root)
    br = np.arctan(rt * np.sin(bt) / root)
    return AnglePair(_out(ar), _out(_open_elevation(br)))


def txsphere_paths(ell: EllipseGeometry, sph: SphereGeometry, lay: HeadlampLayout, side: str,
                   dep: AnglePair, strict: bool = True) -> PathLengths:
    _check_side(side)
    at, bt = np.asarray(dep.azimuth, float), np.asarray(dep.elevation, float)
    rt, f = sph.radius_tx, ell.f
    q1 = rt * np.cos(bt)
    q2 = np.sqrt(q1 ** 2 + 4 * f * f - 4 * f * q1 * np.cos(at))
    br = np.asarray(txsphere_arrival(ell, sph, dep).elevation, float)
    bad = _singular(br)
    _reject_or_mask(bad, strict, "arrival elevation")
    d_rx = np.where(bad, np.nan, q2 / np.cos(br))

    phi = lay.tilt_elevation
    if side == "L":
        d, th = lay.delta_left, lay.orientation
        rad = (rt ** 2 + d ** 2
               - 2 * d * rt * math.cos(phi) * np.cos(bt) * np.cos(th - at)
               - 2 * d * rt * math.sin(phi) * np.sin(bt))
    else:
        d, th = lay.delta_right, lay.orientation + math.pi
        a1 = 2 * rt * d * math.sin(phi) * np.sin(bt)
        b1 = 2 * rt * d * math.cos(phi) * np.cos(bt) * np.cos(th - at)
        rad = rt ** 2 + d ** 2 + a1 - b1
    d_tx = np.sqrt(rad)
    return PathLengths(_out(d_tx), _out(d_rx))


def rxsphere_departure(ell: EllipseGeometry, sph: SphereGeometry, arr: AnglePair) -> AnglePair:
    ar, br = np.asarray(arr.azimuth, float), np.asarray(arr.elevation, float)
    rr, f = sph.radius_rx, ell.f
    c3 = np.cos(br) * np.cos(ar)
    bt = _safe_arcsin(rr * np.sin(br) / np.sqrt(rr ** 2 + 4 * f * f + 4 * f * rr * c3))
    q1 = _rx_q1(ell, sph, ar, br)
    at = _safe_arcsin(rr * np.cos(br) * np.sin(ar) / q1)
    return AnglePair(_out(at), _out(_open_elevation(bt)))


def _rx_q1(ell, sph, ar, br):
    q2 = sph.radius_rx * np.cos(br)
    return np.sqrt(4 * ell.f ** 2 + q2 ** 2 - 4 * ell.f * q2 * np.cos(ar))


def rxsphere_xi(ell: EllipseGeometry, sph: SphereGeometry, arr: AnglePair) -> ArrayLike:
    """Distance OTx -> Rx-sphere scatterer from the projected leg (computed for audit, unused downstream)."""
    ar, br = np.asarray(arr.azimuth, float), np.asarray(arr.elevation, float)
    q1 = _rx_q1(ell, sph, ar, br)
    return _out(np.sqrt(q1 ** 2 + sph.radius_rx ** 2 * np.sin(br) ** 2))


def rxsphere_paths(ell: EllipseGeometry, sph: SphereGeometry, lay: HeadlampLayout, side: str,
                   arr: AnglePair, strict: bool = True) -> PathLengths:
    _check_side(side)
    ar, br = np.asarray(arr.azimuth, float), np.asarray(arr.elevation, float)
    bad = _singular(br)
    _reject_or_mask(bad, strict, "arrival elevation")
    rr = sph.radius_rx
    q1 = _rx_q1(ell, sph, ar, br)
    at = np.asarray(rxsphere_departure(ell, sph, arr).azimuth, float)
    d, th, phi = lay.offset(side), lay.orientation, lay.tilt_elevation
    if side == "L":
        a2 = np.sqrt(d ** 2 * math.cos(phi) ** 2 + q1 ** 2
                     - 2 * d * q1 * math.cos(phi) * np.cos(th - at))
        b2 = (rr ** 2 * np.sin(br) ** 2 - 2 * d * rr * np.sin(br) * math.sin(th)
              + d ** 2 * math.sin(phi) ** 2)
        d_tx = np.sqrt(a2 ** 2 + b2 ** 2)
    else:
        a3 = d ** 2 * math.cos(phi) ** 2 + q1 ** 2 + 2 * d * q1 * math.cos(phi) * np.cos(th - at)
        b3 = 2 * d * rr * math.sin(phi) * np.cos(br)
        d_tx = np.sqrt(rr ** 2 * np.sin(br) ** 2 + d ** 2 * math.sin(phi) ** 2 + a3 + b3)
    d_tx = np.where(bad, np.nan, d_tx)
    d_rx = np.where(bad, np.nan, np.full_like(d_tx, rr))
    return PathLengths(_out(d_tx), _out(d_rx))


def _cyl_terms(ell, ar, br):
    a, f = ell.a, ell.f
    q = (a * a + f * f + 2 * a * f * np.cos(ar)) / (a + f * np.cos(ar))
    with np.errstate(divide="ignore", invalid="ignore"):
        d_rx = (2 * a - q) / np.cos(br)
    d_otx = np.sqrt(q ** 2 + d_rx ** 2 * np.sin(br) ** 2)
    q2 = d_rx * np.cos(br)
    q1 = np.sqrt(q2 ** 2 + ell.D ** 2 - 2 * q2 * ell.D * np.cos(ar))
    return q, d_rx, d_otx, q1


def cylinder_departure(ell: EllipseGeometry, arr: AnglePair) -> AnglePair:
    ar, br = np.asarray(arr.azimuth, float), np.asarray(arr.elevation, float)
    _, d_rx, d_otx, q1 = _cyl_terms(ell, ar, br)
    bt = _safe_arcsin(d_rx * np.sin(br) / d_otx)
    at = _safe_arcsin(d_rx * np.cos(br) * np.sin(ar) / q1)
    return AnglePair(_out(at), _out(_open_elevation(bt)))


def cylinder_paths(ell: EllipseGeometry, lay: HeadlampLayout, side: str, arr: AnglePair,
                   strict: bool = True) -> PathLengths:
    _check_side(side)
    ar, br = np.asarray(arr.azimuth, float), np.asarray(arr.elevation, float)
    bad = _singular(br)
    _reject_or_mask(bad, strict, "arrival elevation")
    _, d_rx, _, q1 = _cyl_terms(ell, ar, br)
    d, th, phi = lay.offset(side), lay.orientation, lay.tilt_elevation
    if side == "L":
        at = np.asarray(cylinder_departure(ell, arr).azimuth, float)
        a4 = d ** 2 + q1 ** 2 - 2 * d * q1 * math.cos(phi) * np.cos(th - at)
        b4 = d ** 2 + d_rx ** 2 * np.sin(br) ** 2 - 2 * d * d_rx * np.sin(br) * math.sin(phi)
        d_tx = np.sqrt(a4 ** 2 + b4 ** 2)
    else:
        big_d = ell.D
        a5 = big_d ** 2 + d_rx ** 2 - 2 * big_d * d_rx * np.cos(br) * np.cos(ar)
        b5 = 2 * big_d * d * d_rx * math.sin(phi) * np.cos(ar)
        d_tx = np.sqrt(d ** 2 * math.sin(phi) ** 2 + a5 - b5)
    d_tx = np.where(bad, np.nan, d_tx)
    d_rx = np.where(bad, np.nan, d_rx)
    return PathLengths(_out(d_tx), _out(d_rx))


# ---------------------------------------------------------------------------
# Cartesian (oracle) backend
# ---------------------------------------------------------------------------

def _direction(az, el, sign_x=1.0):
    return np.stack([sign_x * np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def scatterer_position(kind: str, ell: EllipseGeometry, sph: SphereGeometry, angle: AnglePair) -> np.ndarray:
    """3D scatterer position, shape ``angle.shape + (3,)``.

    Tx-sphere scatterers are parametrised by departure angles at OTx; Rx-sphere
    and cylinder scatterers by arrival angles at ORx.
    """
    _check_kind(kind)
    az, el = np.asarray(angle.azimuth, float), np.asarray(angle.elevation, float)
    rx = np.array([ell.D, 0.0, 0.0])
    if kind == "tx-sphere":
        return sph.radius_tx * _direction(az, el)
    if kind == "rx-sphere":
        return rx + sph.radius_rx * _direction(az, el, sign_x=-1.0)
    # horizontal range r from ORx to the wall along (-cos az, sin az):
    # ((f - r cos az)/a)^2 + (r sin az / b)^2 = 1
    a, b, f = ell.a, ell.b, ell.f
    ca, sa = np.cos(az), np.sin(az)
    qa = ca * ca / (a * a) + sa * sa / (b * b)
    qb = -2 * f * ca / (a * a)
    qc = f * f / (a * a) - 1.0
    r = (-qb + np.sqrt(qb * qb - 4 * qa * qc)) / (2 * qa)
    with np.errstate(invalid="ignore", over="ignore"):
        z = r * np.tan(el)
    return np.stack([ell.D - r * ca, r * sa, z], axis=-1)


def departure_angles(pos: np.ndarray) -> AnglePair:
    """Direction of ``pos`` seen from OTx."""
    x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
    az = np.arctan2(y, x)
    el = _open_elevation(np.arctan2(z, np.hypot(x, y)))
    return AnglePair(_out(az), _out(el))


def arrival_angles(pos: np.ndarray, ell: EllipseGeometry) -> AnglePair:
    """Direction of ``pos`` seen from ORx, azimuth measured from -x."""
    x, y, z = ell.D - pos[..., 0], pos[..., 1], pos[..., 2]
    az = np.arctan2(y, x)
    el = _open_elevation(np.arctan2(z, np.hypot(x, y)))
    az = np.where(az <= -math.pi, math.pi, az)
    return AnglePair(_out(az), _out(el))


def _singular_for(kind, ell, sph, angle):
    el = np.asarray(angle.elevation, float)
    if kind == "tx-sphere":
        pos = scatterer_position(kind, ell, sph, angle)
        return _singular(np.asarray(arrival_angles(pos, ell).elevation, float))
    return _singular(el)


def cartesian_oracle_paths(kind: str, ell: EllipseGeometry, sph: SphereGeometry, lay: HeadlampLayout,
                           side: str, angle: AnglePair, strict: bool = True) -> PathLengths:
    _check_kind(kind)
    _check_side(side)
    bad = _singular_for(kind, ell, sph, angle)
    _reject_or_mask(bad, strict, "elevation")
    pos = scatterer_position(kind, ell, sph, angle)
    head = lay.position(side)
    rx = np.array([ell.D, 0.0, 0.0])
    d_tx = np.linalg.norm(pos - head, axis=-1)
    d_rx = np.linalg.norm(rx - pos, axis=-1)
    d_tx = np.where(bad, np.nan, d_tx)
    d_rx = np.where(bad, np.nan, d_rx)
    return PathLengths(_out(d_tx), _out(d_rx))


def cartesian_coupled_angles(kind: str, ell: EllipseGeometry, sph: SphereGeometry,
                             angle: AnglePair) -> AnglePair:
    """The angle pair at the opposite end (arrival for tx-sphere, departure otherwise)."""
    pos = scatterer_position(kind, ell, sph, angle)
    if kind == "tx-sphere":
        return arrival_angles(pos, ell)
    return departure_angles(pos)


def forward_mask(kind: str, ell: EllipseGeometry, sph: SphereGeometry, angle: AnglePair) -> np.ndarray:
    """True where the scatterer is kept by the realism filter.

    Tx-sphere scatterers must lie ahead of OTx, Rx-sphere scatterers ahead of
    ORx (toward the transmitter), cylinder points between the two.
    """
    pos = scatterer_position(kind, ell, sph, angle)
    x = pos[..., 0]
    with np.errstate(invalid="ignore"):
        if kind == "tx-sphere":
            return x > 0
        if kind == "rx-sphere":
            return x - ell.D < 0
        return (x > 0) & (x < ell.D)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RayGeometry:
    """Legs and both angle pairs of a batch of single-bounce rays."""

    paths: PathLengths
    departure: AnglePair
    arrival: AnglePair
    kept: np.ndarray = field(repr=False)


def single_bounce(kind: str, ell: EllipseGeometry, sph: SphereGeometry, lay: HeadlampLayout, side: str,
                  angle: AnglePair, backend: str = "oracle") -> RayGeometry:
    """Legs and coupled angles for scatterers given by their parametrising angles.

    Singular inputs come back as NaN legs with ``kept`` False instead of raising.
    """
    if backend not in BACKENDS:
        raise GeometryError(f"backend must be one of {BACKENDS}, got {backend!r}")
    kept = np.asarray(forward_mask(kind, ell, sph, angle))
    if backend == "oracle":
        paths = cartesian_oracle_paths(kind, ell, sph, lay, side, angle, strict=False)
        other = cartesian_coupled_angles(kind, ell, sph, angle)
    elif kind == "tx-sphere":
        paths = txsphere_paths(ell, sph, lay, side, angle, strict=False)
        other = txsphere_arrival(ell, sph, angle)
    elif kind == "rx-sphere":
        paths = rxsphere_paths(ell, sph, lay, side, angle, strict=False)
        other = rxsphere_departure(ell, sph, angle)
    else:
        paths = cylinder_paths(ell, lay, side, angle, strict=False)
        other = cylinder_departure(ell, angle)
    dep, arr = (angle, other) if kind == "tx-sphere" else (other, angle)
    ok = np.isfinite(np.asarray(paths.total, float))
    return RayGeometry(paths=paths, departure=dep, arrival=arr, kept=kept & ok)
