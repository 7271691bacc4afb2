import csv
import io
import math

import numpy as np
import pytest

from vvlc import sweeps
from vvlc.sweeps import ALL_COLUMNS, SweepSpec, compare_2d3d, run_sweep


def _read(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_distance_grid(table):
    spec = SweepSpec.distance_grid(table)
    assert spec.values[0] == 0.0 and spec.values[-1] == pytest.approx(32.0)
    assert len(spec.values) == 321


def test_csv_schema(table):
    text = run_sweep(table, SweepSpec("distance", (0.0, 10.0, 20.0)))
    header = text.splitlines()[0].split(",")
    assert header == ALL_COLUMNS
    rows = _read(text)
    assert [float(r["distance_m"]) for r in rows] == [70.0, 50.0, 30.0]
    assert "\r" not in text
    # 9 significant digits in scientific notation
    assert rows[0]["total_W"].count("e") == 1 and len(rows[0]["total_W"].split("e")[0].replace(".", "")) == 9


def test_total_power_decreasing_in_distance(table):
    rows = _read(run_sweep(table, SweepSpec("distance", tuple(np.arange(0, 32.1, 4.0)))))
    total = [float(r["total_W"]) for r in rows]
    assert np.all(np.diff(total) > 0)  # time runs toward the receiver


def test_truncation_note(table):
    text = run_sweep(table, SweepSpec("distance", (30.0, 40.0)))
    assert len(_read(text)) == 1
    assert "# note: sweep truncated" in text


def test_k_sweep_columns(table):
    text = run_sweep(table, SweepSpec("k", (3.0, 30.0), outputs=("sb1_W",)))
    assert text.splitlines()[0] == "k,time_s,distance_m,sb1_W"
    rows = _read(text)
    assert float(rows[1]["sb1_W"]) > float(rows[0]["sb1_W"])
    assert all(float(r["distance_m"]) == 10.0 for r in rows)


def test_determinism(table):
    spec = SweepSpec("distance", (0.0, 15.0))
    assert run_sweep(table, spec) == run_sweep(table, spec)


@pytest.mark.parametrize("kw", [dict(variable="speed", values=(1,)), dict(variable="k", values=()),
                                dict(variable="k", values=(-1,)), dict(variable="mode_number", values=(0.5,)),
                                dict(variable="distance", values=(1,), outputs=("nope",))])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SweepSpec(**kw)


def test_compare_2d3d_los_only_centred(table):
    import dataclasses
    from vvlc.geometry import HeadlampLayout
    s = dataclasses.replace(table, layout=HeadlampLayout(0.6, 0.0, 0.0))
    rows = _read(compare_2d3d(s, times=(0.0, 20.0)))
    assert all(float(r["los_ratio"]) == 1.0 for r in rows)
    assert set(rows[0]) == set(sweeps.COMPARE_COLUMNS)


def test_ratio_helper():
    assert sweeps._ratio(0.0, 0.0) == 1.0
    assert sweeps._ratio(1.0, 0.0) == math.inf
    assert sweeps._ratio(2.0, 1.0) == 2.0


def test_validate_report(table):
    text = sweeps.validate(table, n_draws=200, mc_samples=20_000)
    kv = dict(l.split(" = ", 1) for l in text.splitlines())
    assert kv["seed"] == "0"
    for sub in ("SB1", "SB2", "SB3"):
        assert f"dc_gain.{sub}.mev_sum" in kv
        assert float(kv[f"geometry.delta0.{sub}.L.cartesian.total.count_over_tol"]) == 0
    assert float(kv["geometry.delta0.SB1.L.paper.tx_leg.max"]) < 1e-9
    assert text == sweeps.validate(table, n_draws=200, mc_samples=20_000)
