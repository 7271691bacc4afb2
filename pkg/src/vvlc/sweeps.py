"""Parameter sweeps, the 2D/3D comparison and the discrepancy report.

CSV conventions: header row, fixed column order, LF line endings, numbers in
``%.8e`` (nine significant digits).  A sweep that runs past the end of the
motion scenario is truncated and a ``# note`` line is appended.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import oracle
from .cir import (CLASSES, HEADLIGHTS, LinkResult, ScenarioEnded, dc_gain_los, dc_gain_sb, los_cir, received_power,
                  reduce_to_2d, sb_rays)
from .config import REGION_OF, SUBMODELS, ScenarioConfig
from .noise import snr, thermal_terms

VARIABLES = ("distance", "k", "alpha0", "mode_number")


def power_columns() -> list[str]:
    cols = []
    for c in CLASSES:
        cols += [f"{c.lower()}_lsh_W", f"{c.lower()}_rsh_W", f"{c.lower()}_W"]
    return cols


NOISE_COLUMNS = ["noise_shot_A2", "noise_background_A2", "noise_dark_A2", "noise_thermal_A2", "noise_total_A2"]
SNR_COLUMNS = ["snr_db"] + [f"snr_{c.lower()}_db" for c in CLASSES]
ALL_COLUMNS = ["time_s", "distance_m"] + power_columns() + ["total_W", "total_bare_W"] + NOISE_COLUMNS + SNR_COLUMNS


@dataclass(frozen=True)
class SweepSpec:
    """What to vary.  For ``distance`` the values are times in seconds; otherwise
    they are k, alpha0 (radians) or the mode number, evaluated at ``at_distance``."""

    variable: str
    values: tuple
    at_distance: float = 10.0
    outputs: tuple | None = None

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("values must be non-empty")
        if self.variable == "distance" and any(v < 0 for v in self.values):
            raise ValueError("times must be >= 0")
        if self.variable == "k" and any(v < 0 for v in self.values):
            raise ValueError("k must be >= 0")
        if self.variable == "alpha0" and any(not (-math.pi < v <= math.pi) for v in self.values):
            raise ValueError("alpha0 must lie in (-pi, pi]")
        if self.variable == "mode_number" and any(v < 1 for v in self.values):
            raise ValueError("mode number must be >= 1")
        if self.outputs is not None:
            unknown = set(self.outputs) - set(ALL_COLUMNS)
            if unknown:
                raise ValueError(f"unknown output columns: {sorted(unknown)}")

    @classmethod
    def distance_grid(cls, scn: ScenarioConfig, outputs=None) -> "SweepSpec":
        """Every time step from t=0 up to the stop time."""
        n = int(math.floor(scn.motion.stop_time / scn.time_step + 1e-9))
        return cls("distance", tuple(i * scn.time_step for i in range(n + 1)), outputs=outputs)


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.8e" % x


def _apply(scn: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    if variable == "k":
        return scn.with_vmf(concentration=value)
    if variable == "alpha0":
        return scn.with_vmf(alpha0=value)
    if variable == "mode_number":
        return dataclasses.replace(scn, lamp=dataclasses.replace(scn.lamp, mode_number=value))
    return scn


def row_values(scn: ScenarioConfig, r: LinkResult) -> dict:
    row = {"time_s": r.time, "distance_m": r.distance}
    for c in CLASSES:
        for hl in HEADLIGHTS:
            row[f"{c.lower()}_{hl.lower()}_W"] = r.power[(c, hl)]
        row[f"{c.lower()}_W"] = r.class_power(c)
    row["total_W"] = r.power_total
    row["total_bare_W"] = r.power_total_bare
    nb = r.noise
    row.update(noise_shot_A2=nb.shot, noise_background_A2=nb.background, noise_dark_A2=nb.dark,
               noise_thermal_A2=nb.thermal, noise_total_A2=nb.total, snr_db=r.snr_db)
    for c in CLASSES:
        row[f"snr_{c.lower()}_db"] = snr(scn.noise, scn.receiver.responsivity, r.class_power(c),
                                         scn.receiver.area)[1]
    return row


def _time_at(scn, distance):
    v = scn.motion.closing_speed
    return (scn.motion.d0 - distance) / v if v > 0 else 0.0


def sweep_rows(scn: ScenarioConfig, spec: SweepSpec) -> tuple[list[dict], list[str]]:
    rows, notes = [], []
    for value in spec.values:
        if spec.variable == "distance":
            try:
                r = received_power(scn, value)
            except ScenarioEnded as exc:
                notes.append(f"sweep truncated at t={value:g} s: {exc}")
                break
            rows.append(row_values(scn, r))
        else:
            s = _apply(scn, spec.variable, value)
            t = max(_time_at(s, spec.at_distance), 0.0)
            row = {spec.variable: value}
            row.update(row_values(s, received_power(s, t, distance=spec.at_distance)))
            rows.append(row)
    return rows, notes


def to_csv(rows: list[dict], columns: list[str], notes=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(float(row[c])) for c in columns])
    for note in notes:
        buf.write(f"# note: {note}\n")
    return buf.getvalue()


def run_sweep(scn: ScenarioConfig, spec: SweepSpec) -> str:
    """CSV document with one row per sweep value (per time step for distance sweeps)."""
    rows, notes = sweep_rows(scn, spec)
    cols = list(spec.outputs) if spec.outputs else list(ALL_COLUMNS)
    for base in ("time_s", "distance_m")[::-1]:
        if base not in cols:
            cols.insert(0, base)
    if spec.variable != "distance":
        cols.insert(0, spec.variable)
    return to_csv(rows, cols, notes)


def _ratio(p2, p3):
    if p3 > 0:
        return p2 / p3
    return 1.0 if p2 == 0 else math.inf


COMPARE_COLUMNS = ["time_s", "distance_m"] + [f"{c}_{k}" for c in [x.lower() for x in CLASSES] + ["total"]
                                              for k in ("3d_W", "2d_W", "ratio")]


def compare_rows(scn: ScenarioConfig, times=None) -> tuple[list[dict], list[str]]:
    flat = reduce_to_2d(scn)
    times = SweepSpec.distance_grid(scn).values if times is None else times
    rows, notes = [], []
    for t in times:
        try:
            r3, r2 = received_power(scn, t), received_power(flat, t)
        except ScenarioEnded as exc:
            notes.append(f"comparison truncated at t={t:g} s: {exc}")
            break
        row = {"time_s": t, "distance_m": r3.distance}
        for c in CLASSES:
            p3, p2 = r3.class_power(c), r2.class_power(c)
            row.update({f"{c.lower()}_3d_W": p3, f"{c.lower()}_2d_W": p2, f"{c.lower()}_ratio": _ratio(p2, p3)})
        p3, p2 = r3.power_total, r2.power_total
        row.update(total_3d_W=p3, total_2d_W=p2, total_ratio=_ratio(p2, p3))
        rows.append(row)
    return rows, notes


def compare_2d3d(scn: ScenarioConfig, times=None) -> str:
    """Side-by-side 3D and reduced-2D powers on the same time grid, with 2D/3D ratios.

    A ratio of exactly 0/0 is written as 1.
    """
    rows, notes = compare_rows(scn, times)
    return to_csv(rows, COMPARE_COLUMNS, notes)


# ---------------------------------------------------------------------------
# Discrepancy report
# ---------------------------------------------------------------------------

GEOMETRY_TOL = 1e-9


def _random_angles(rng, n):
    az = rng.uniform(-math.pi, math.pi, n)
    az = np.where(az <= -math.pi, math.pi, az)
    el = rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, n)
    return geo.AnglePair(az, el)


def _paper_paths(kind, ell, sph, lay, side, ang):
    if kind == "tx-sphere":
        p = geo.txsphere_paths(ell, sph, lay, side, ang, strict=False)
        other = geo.txsphere_arrival(ell, sph, ang)
    elif kind == "rx-sphere":
        p = geo.rxsphere_paths(ell, sph, lay, side, ang, strict=False)
        other = geo.rxsphere_departure(ell, sph, ang)
    else:
        p = geo.cylinder_paths(ell, lay, side, ang, strict=False)
        other = geo.cylinder_departure(ell, ang)
    return p, other


def geometry_deviations(scn: ScenarioConfig, seed: int, n: int = 1000, centred: bool = True) -> dict:
    """Closed forms (``paper`` backend) and the Cartesian backend against brute-force coordinates."""
    rng = np.random.default_rng(seed)
    lay = geo.HeadlampLayout(scn.layout.half_separation, 0.0, 0.0) if centred else scn.layout
    out = {}
    for sub in SUBMODELS:
        kind = REGION_OF[sub]
        ang = _random_angles(rng, n)
        for side in ("L", "R"):
            bt, br = oracle.brute_force_paths(kind, scn.ellipse, scn.spheres, lay, side, ang)
            pp, _ = _paper_paths(kind, scn.ellipse, scn.spheres, lay, side, ang)
            cp = geo.cartesian_oracle_paths(kind, scn.ellipse, scn.spheres, lay, side, ang, strict=False)
            for name, got, want in (("paper.total", pp.total, bt + br), ("paper.tx_leg", pp.d_tx_to_scatterer, bt),
                                    ("paper.rx_leg", pp.d_scatterer_to_rx, br),
                                    ("cartesian.total", cp.total, bt + br)):
                dev = np.abs(np.asarray(got, float) - (np.asarray(want, float)))
                dev = np.where(np.isfinite(dev), dev, np.inf)
                out[(sub, side, name)] = dev
        _, other = _paper_paths(kind, scn.ellipse, scn.spheres, lay, "L", ang)
        oa, oe = oracle.brute_force_coupled(kind, scn.ellipse, scn.spheres, ang)
        ca = geo.cartesian_coupled_angles(kind, scn.ellipse, scn.spheres, ang)
        out[(sub, "-", "paper.coupled_azimuth")] = _angdiff(other.azimuth, oa)
        out[(sub, "-", "paper.coupled_elevation")] = _angdiff(other.elevation, oe)
        out[(sub, "-", "cartesian.coupled_azimuth")] = _angdiff(ca.azimuth, oa)
        out[(sub, "-", "cartesian.coupled_elevation")] = _angdiff(ca.elevation, oe)
    return out


def _angdiff(a, b):
    d = np.abs(np.asarray(geo.wrap_angle(np.asarray(a, float) - np.asarray(b, float))))
    return np.where(np.isfinite(d), d, np.inf)


def validate(scn: ScenarioConfig, seed: int | None = None, n_draws: int = 1000, mc_samples: int = 1_000_000,
             distance: float = 10.0) -> str:
    """Line-oriented ``key = value`` discrepancy report; deterministic for a given seed."""
    seed = scn.seed if seed is None else seed
    fp = oracle.fingerprint(scn)
    lines = [f"scenario.fingerprint = {fp}", f"seed = {seed}", f"geometry.draws = {n_draws}",
             f"geometry.tolerance_m = {GEOMETRY_TOL:g}",
             f"receiver.responsivity_a_per_w = {scn.receiver.responsivity:g}  # assumed default, not tabulated"]
    for centred in (True, False):
        tag = "delta0" if centred else "layout"
        devs = geometry_deviations(scn, seed, n_draws, centred)
        for (sub, side, name), dev in devs.items():
            key = f"geometry.{tag}.{sub}.{side}.{name}"
            fin = dev[np.isfinite(dev)]
            lines.append(f"{key}.max = {_fmt(float(fin.max()) if fin.size else math.nan)}")
            lines.append(f"{key}.mean = {_fmt(float(fin.mean()) if fin.size else math.nan)}")
            lines.append(f"{key}.count_over_tol = {int(np.count_nonzero(dev > GEOMETRY_TOL))}")
    for sub in SUBMODELS:
        fld = scn.vmf[(sub, "left")]
        mev = dc_gain_sb(scn, "LSH", sub, distance=distance, population="left")

        def f(ang, sub=sub):
            return sb_rays(scn, distance, "LSH", sub, ang).dc

        mc = oracle.mc_integrate(f, fld, seed, mc_samples)
        q = dc_gain_sb(scn, "LSH", sub, "quadrature", distance=distance, population="left")
        rec = oracle.DeviationRecord(f"{sub}.dc_gain.mev_vs_mc", mev, mc.value, fp)
        lines += [f"dc_gain.{sub}.mev_sum = {_fmt(mev)}", f"dc_gain.{sub}.monte_carlo = {_fmt(mc.value)}",
                  f"dc_gain.{sub}.monte_carlo_stderr = {_fmt(mc.error)}", f"dc_gain.{sub}.quadrature = {_fmt(q)}",
                  f"dc_gain.{sub}.mev_vs_mc_rel_dev = {_fmt(rec.rel_dev)}",
                  f"dc_gain.{sub}.quad_vs_mc_sigma = {_fmt(abs(q - mc.value) / mc.error if mc.error > 0 else 0.0)}"]
    t0 = 0.0
    ratio = los_cir(scn, t0, "LSH").gain / dc_gain_los(scn, t0, "LSH")
    lines.append(f"los.cir_over_dc_gain_ratio = {_fmt(ratio)}  # (m+1)/2 normalisation difference")
    first, second = thermal_terms(scn.noise, scn.receiver.area)
    textbook = second * scn.noise.pd_capacitance_per_area  # (C_PD A_r)^2 instead of C_PD A_r^2
    lines += [f"noise.thermal_first_A2 = {_fmt(first)}", f"noise.thermal_second_A2 = {_fmt(second)}",
              f"noise.thermal_second_textbook_A2 = {_fmt(textbook)}"]
    return "\n".join(lines) + "\n"
