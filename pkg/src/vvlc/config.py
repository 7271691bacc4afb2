"""Scenario configuration: dataclass, the built-in ``paper-table`` preset and a
flat dotted-key text format.

File format, one ``key = value`` per line, ``#`` comments::

    ellipse.a_m = 40
    lamp.mode_number = 1
    vmf.sb1.left.alpha0_deg = 10

Angles are written in degrees and stored in radians; every other quantity
is SI (speeds in m/s).  Unknown keys are rejected; missing keys take the
preset value.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field

import numpy as np
import tomli

from .geometry import (AnglePair, BACKENDS, EllipseGeometry, GeometryError, HeadlampLayout, SphereGeometry,
                       ellipse_from_axes)
from .noise import NoiseConfig
from .optics import DEFAULT_EFFICACY, LENS_MODES, Headlamp, OpticalReceiver, OpticsError
from .scatterfield import VmfField

SUBMODELS = ("SB1", "SB2", "SB3")
REGION_OF = {"SB1": "tx-sphere", "SB2": "rx-sphere", "SB3": "cylinder"}
POPULATIONS = ("left", "right")
KMH = 1 / 3.6


class ConfigError(ValueError):
    """Invalid configuration; ``line``/``col`` locate the offending text when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class MotionState:
    """Same-direction motion of Tx and Rx; the link closes at v_tx cos(g_tx) - v_rx cos(g_rx)."""

    v_tx: float = 21.6 * KMH
    v_rx: float = 14.4 * KMH
    gamma_tx: float = 0.0
    gamma_rx: float = 0.0
    d0: float = 70.0
    stop_distance: float = 6.0

    def __post_init__(self):
        if self.v_tx < 0 or self.v_rx < 0:
            raise ValueError("speeds must be >= 0")
        if not (self.d0 > self.stop_distance > 0):
            raise ValueError("d0 > stop_distance > 0 violated")

    @property
    def closing_speed(self) -> float:
        return self.v_tx * math.cos(self.gamma_tx) - self.v_rx * math.cos(self.gamma_rx)

    @property
    def stop_time(self) -> float:
        """Time at which the separation reaches the stopping distance (inf if never)."""
        v = self.closing_speed
        return (self.d0 - self.stop_distance) / v if v > 0 else math.inf


def _default_vmf():
    out = {}
    for sub in SUBMODELS:
        for pop in POPULATIONS:
            sign = 1.0 if pop == "left" else -1.0
            out[(sub, pop)] = VmfField(AnglePair(sign * math.radians(10.0), math.radians(2.0)), 30.0, 100,
                                       region=REGION_OF[sub], side=pop)
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    ellipse: EllipseGeometry = field(default_factory=lambda: ellipse_from_axes(40.0, 19.0))
    spheres: SphereGeometry = field(default_factory=lambda: SphereGeometry(4.0, 4.0))
    layout: HeadlampLayout = field(default_factory=HeadlampLayout)
    lamp: Headlamp = field(default_factory=Headlamp)
    receiver: OpticalReceiver = field(default_factory=OpticalReceiver)
    motion: MotionState = field(default_factory=MotionState)
    vmf: dict = field(default_factory=_default_vmf)
    reflectivity_vehicles: float = 0.8
    reflectivity_roadside: float = 0.4
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    backend: str = "oracle"
    time_step: float = 0.1
    seed: int = 0
    tx_height: float = 0.6
    rx_height: float = 0.6
    lane_width: float = 3.5
    roadside_width: float = 2.2

    def __post_init__(self):
        for name in ("reflectivity_vehicles", "reflectivity_roadside"):
            if not (0 <= getattr(self, name) <= 1):
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if not self.time_step > 0:
            raise ValueError("time_step must be > 0")
        if set(self.vmf) != {(s, p) for s in SUBMODELS for p in POPULATIONS}:
            raise ValueError("vmf must hold one field per sub-model and population")
        if self.tx_height < 0 or self.rx_height < 0:
            raise ValueError("mounting heights must be >= 0")
        if self.spheres.radius_tx >= self.motion.stop_distance or self.spheres.radius_rx >= self.motion.stop_distance:
            raise ValueError("sphere radii must be smaller than the stopping distance")

    def reflectivity(self, submodel: str) -> float:
        return self.reflectivity_roadside if submodel == "SB3" else self.reflectivity_vehicles

    def with_vmf(self, submodel=None, population=None, **changes) -> "ScenarioConfig":
        """Copy with VmfField attributes replaced (``alpha0``/``beta0`` in radians accepted).

        ``alpha0`` is mirrored for the right population.
        """
        new = dict(self.vmf)
        for (sub, pop), fld in self.vmf.items():
            if submodel not in (None, sub) or population not in (None, pop):
                continue
            ch = dict(changes)
            a0 = ch.pop("alpha0", None)
            b0 = ch.pop("beta0", None)
            if a0 is not None or b0 is not None:
                a = fld.alpha0 if a0 is None else (a0 if pop == "left" else -a0)
                b = fld.beta0 if b0 is None else b0
                ch["mean"] = AnglePair(a, b)
            new[(sub, pop)] = dataclasses.replace(fld, **ch)
        return dataclasses.replace(self, vmf=new)


PRESETS = {"paper-table": ScenarioConfig}


def preset(name: str = "paper-table") -> ScenarioConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}") from None


# ---------------------------------------------------------------------------
# Flat key schema
# ---------------------------------------------------------------------------

def _deg(x):
    return math.radians(x)


# key -> (getter on ScenarioConfig, file->internal converter or None, kind)
def _schema():
    s = {
        "ellipse.a_m": (lambda c: c.ellipse.a, None, float),
        "ellipse.b_m": (lambda c: c.ellipse.b, None, float),
        "spheres.radius_tx_m": (lambda c: c.spheres.radius_tx, None, float),
        "spheres.radius_rx_m": (lambda c: c.spheres.radius_rx, None, float),
        "layout.half_separation_m": (lambda c: c.layout.half_separation, None, float),
        "layout.delta_left_m": (lambda c: c.layout.delta_left, None, float),
        "layout.delta_right_m": (lambda c: c.layout.delta_right, None, float),
        "layout.tilt_azimuth_deg": (lambda c: c.layout.tilt_azimuth, _deg, float),
        "layout.tilt_elevation_deg": (lambda c: c.layout.tilt_elevation, _deg, float),
        "mounting.tx_height_m": (lambda c: c.tx_height, None, float),
        "mounting.rx_height_m": (lambda c: c.rx_height, None, float),
        "lamp.mode_number": (lambda c: c.lamp.mode_number, None, float),
        "lamp.tx_power_w": (lambda c: c.lamp.tx_power, None, float),
        "lamp.luminous_intensity_cd": (lambda c: c.lamp.luminous_intensity_peak, None, float),
        "lamp.luminous_efficacy_lm_per_w": (lambda c: c.lamp.luminous_efficacy, None, float),
        "receiver.area_m2": (lambda c: c.receiver.area, None, float),
        "receiver.fov_deg": (lambda c: c.receiver.fov, _deg, float),
        "receiver.refractive_index": (lambda c: c.receiver.refractive_index, None, float),
        "receiver.filter_transmission": (lambda c: c.receiver.filter_transmission, None, float),
        "receiver.responsivity_a_per_w": (lambda c: c.receiver.responsivity, None, float),
        "receiver.lens_mode": (lambda c: c.receiver.lens_mode, None, str),
        "motion.v_tx_mps": (lambda c: c.motion.v_tx, None, float),
        "motion.v_rx_mps": (lambda c: c.motion.v_rx, None, float),
        "motion.gamma_tx_deg": (lambda c: c.motion.gamma_tx, _deg, float),
        "motion.gamma_rx_deg": (lambda c: c.motion.gamma_rx, _deg, float),
        "motion.initial_distance_m": (lambda c: c.motion.d0, None, float),
        "motion.stop_distance_m": (lambda c: c.motion.stop_distance, None, float),
        "reflectivity.vehicles": (lambda c: c.reflectivity_vehicles, None, float),
        "reflectivity.roadside": (lambda c: c.reflectivity_roadside, None, float),
        "road.lane_width_m": (lambda c: c.lane_width, None, float),
        "road.roadside_width_m": (lambda c: c.roadside_width, None, float),
        "noise.bandwidth_hz": (lambda c: c.noise.bandwidth, None, float),
        "noise.bg_current_a": (lambda c: c.noise.bg_current, None, float),
        "noise.dark_current_a": (lambda c: c.noise.dark_current, None, float),
        "noise.i2": (lambda c: c.noise.i2, None, float),
        "noise.i3": (lambda c: c.noise.i3, None, float),
        "noise.fet_noise_factor": (lambda c: c.noise.fet_noise_factor, None, float),
        "noise.open_loop_gain": (lambda c: c.noise.open_loop_gain, None, float),
        "noise.transconductance_s": (lambda c: c.noise.transconductance, None, float),
        "noise.pd_capacitance_f_per_m2": (lambda c: c.noise.pd_capacitance_per_area, None, float),
        "noise.temperature_k": (lambda c: c.noise.temperature, None, float),
        "sim.geometry_backend": (lambda c: c.backend, None, str),
        "sim.time_step_s": (lambda c: c.time_step, None, float),
        "sim.seed": (lambda c: c.seed, None, int),
    }
    for sub in SUBMODELS:
        for pop in POPULATIONS:
            base = f"vmf.{sub.lower()}.{pop}."
            s[base + "alpha0_deg"] = ((lambda c, k=(sub, pop): c.vmf[k].alpha0), _deg, float)
            s[base + "beta0_deg"] = ((lambda c, k=(sub, pop): c.vmf[k].beta0), _deg, float)
            s[base + "k"] = ((lambda c, k=(sub, pop): c.vmf[k].concentration), None, float)
            s[base + "count"] = ((lambda c, k=(sub, pop): c.vmf[k].count), None, int)
            s[base + "planar"] = ((lambda c, k=(sub, pop): c.vmf[k].planar), None, bool)
    return s


SCHEMA = _schema()


def _flatten(tree, prefix=""):
    for key, val in tree.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            yield from _flatten(val, name + ".")
        else:
            yield name, val


def _locate(text: str, key: str) -> tuple[int | None, int | None]:
    pat = re.compile(r"^\s*" + r"\s*\.\s*".join(re.escape(p) for p in key.split(".")) + r"\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i, len(line) - len(line.lstrip()) + 1
    return None, None


def _coerce(key, val, kind, text):
    line, col = _locate(text, key)
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{key}: expected a number", line, col)
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{key}: expected an integer", line, col)
        return val
    if kind is bool:
        if not isinstance(val, bool):
            raise ConfigError(f"{key}: expected true or false", line, col)
        return val
    if not isinstance(val, str):
        raise ConfigError(f"{key}: expected a quoted string", line, col)
    return val


def parse_scenario(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    try:
        tree = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ConfigError(f"parse error: {exc.msg if hasattr(exc, 'msg') else exc}", line, col) from None
    values = {}
    for key, val in _flatten(tree):
        if key not in SCHEMA:
            line, col = _locate(text, key)
            raise ConfigError(f"unknown key {key!r}", line, col)
        _, conv, kind = SCHEMA[key]
        val = _coerce(key, val, kind, text)
        values[key] = conv(val) if conv else val
    try:
        return _build(values, base or preset())
    except (GeometryError, OpticsError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"validation error: {exc}") from None


def _build(v: dict, base: ScenarioConfig) -> ScenarioConfig:
    def g(key):
        return v[key] if key in v else SCHEMA[key][0](base)

    ell = ellipse_from_axes(g("ellipse.a_m"), g("ellipse.b_m"))
    sph = SphereGeometry(g("spheres.radius_tx_m"), g("spheres.radius_rx_m"))
    half = g("layout.half_separation_m")
    # side offsets follow the half separation unless given explicitly
    same = "layout.half_separation_m" in v
    dl = v.get("layout.delta_left_m", half if same else base.layout.delta_left)
    dr = v.get("layout.delta_right_m", half if same else base.layout.delta_right)
    lay = HeadlampLayout(half, dl, dr, g("layout.tilt_azimuth_deg"), g("layout.tilt_elevation_deg"))
    photometric = {"lamp.luminous_intensity_cd", "lamp.luminous_efficacy_lm_per_w", "lamp.mode_number"}
    if "lamp.tx_power_w" in v:
        p_tx = v["lamp.tx_power_w"]
    elif photometric & set(v):
        p_tx = None  # re-derive from the photometric figures
    else:
        p_tx = base.lamp.tx_power
    lamp = Headlamp(g("lamp.mode_number"), p_tx, g("lamp.luminous_intensity_cd"),
                    g("lamp.luminous_efficacy_lm_per_w"))
    rx = OpticalReceiver(g("receiver.area_m2"), g("receiver.fov_deg"), g("receiver.refractive_index"),
                         g("receiver.filter_transmission"), g("receiver.responsivity_a_per_w"),
                         g("receiver.lens_mode"))
    mot = MotionState(g("motion.v_tx_mps"), g("motion.v_rx_mps"), g("motion.gamma_tx_deg"),
                      g("motion.gamma_rx_deg"), g("motion.initial_distance_m"), g("motion.stop_distance_m"))
    noise = NoiseConfig(g("noise.bandwidth_hz"), g("noise.bg_current_a"), g("noise.dark_current_a"),
                        g("noise.i2"), g("noise.i3"), g("noise.fet_noise_factor"), g("noise.open_loop_gain"),
                        g("noise.transconductance_s"), g("noise.pd_capacitance_f_per_m2"),
                        g("noise.temperature_k"))
    vmf = {}
    for sub in SUBMODELS:
        for pop in POPULATIONS:
            b = f"vmf.{sub.lower()}.{pop}."
            vmf[(sub, pop)] = VmfField(AnglePair(g(b + "alpha0_deg"), g(b + "beta0_deg")), g(b + "k"),
                                       g(b + "count"), region=REGION_OF[sub], side=pop,
                                       planar=g(b + "planar"))
    return ScenarioConfig(ell, sph, lay, lamp, rx, mot, vmf, g("reflectivity.vehicles"),
                          g("reflectivity.roadside"), noise, g("sim.geometry_backend"), g("sim.time_step_s"),
                          g("sim.seed"), g("mounting.tx_height_m"), g("mounting.rx_height_m"),
                          g("road.lane_width_m"), g("road.roadside_width_m"))


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"not UTF-8 (byte {exc.start})") from None
    return parse_scenario(text)


def _shortest_degrees(x: float) -> str:
    """Shortest decimal degree string that converts back to exactly ``x`` radians."""
    d = math.degrees(x)
    for digits in range(1, 18):
        s = f"{d:.{digits}g}"
        if math.radians(float(s)) == x:
            return _as_toml_float(s)
    # degrees() and radians() are not exact inverses; search neighbouring doubles
    cand = d
    for _ in range(64):
        for c in (np.nextafter(cand, math.inf), np.nextafter(cand, -math.inf)):
            if math.radians(float(c)) == x:
                return _as_toml_float(repr(float(c)))
        cand = float(np.nextafter(cand, math.inf if math.radians(cand) < x else -math.inf))
    raise ConfigError(f"angle {x!r} has no exact degree representation")


def _as_toml_float(s: str) -> str:
    f = float(s)
    r = repr(f)
    if "e" in r or "E" in r:
        return r if "." in r.split("e")[0] else r.replace("e", ".0e")
    return r


def emit_scenario(scn: ScenarioConfig) -> str:
    """Serialise every key; ``parse_scenario(emit_scenario(c)) == c``."""
    lines = ["# vvlc scenario (angles in degrees, everything else SI)"]
    section = None
    for key, (getter, conv, kind) in SCHEMA.items():
        head = key.rsplit(".", 1)[0]
        if head.split(".")[0] != section:
            section = head.split(".")[0]
            lines.append("")
        val = getter(scn)
        if kind is str:
            text = '"' + val + '"'
        elif kind is bool:
            text = "true" if val else "false"
        elif kind is int:
            text = str(int(val))
        elif conv is _deg:
            text = _shortest_degrees(val)
        else:
            text = _as_toml_float(repr(float(val)))
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
