import json
import math

import numpy as np
import pytest

import magarray


def test_version_and_constants():
    assert magarray.__version__ == "0.1.0"
    assert magarray.MU0 == pytest.approx(4e-7 * math.pi, rel=1e-9)


def test_grid_and_demag():
    assert magarray.dsv_grid().shape == (4224, 3)
    assert magarray.demag_factor([1.0, 1.0, 1.0]) == 1.0 / 3.0


def test_bar_field_far_limit():
    h = magarray.bar_field([0.006, 0.006, 0.006], 1.4, [0.0, 0.5, 0.0])
    m = 1.4 * 8 * 0.006**3 / magarray.MU0
    assert h[1] == pytest.approx(2 * m / (4 * math.pi * 0.125), rel=1e-3)


def test_simulate_small_array():
    a = magarray.synthetic_halbach(rings=1, per_layer=12)
    assert a.size == 72
    r = magarray.simulate(a, mode="linear", diameter=0.1, step=0.02)
    m = r["metrics"]
    assert m["count"] == len(r["bx"])
    assert abs(m["dis2"]) <= abs(m["dis1"])
    assert r["isocenter_b"][0] > 0


def test_field_matches_simulation():
    a = magarray.synthetic_halbach(rings=1, per_layer=12)
    r = magarray.simulate(a, mode="ideal", diameter=0.1, step=0.02)
    pts = magarray.dsv_grid(0.1, 0.02)
    b = magarray.field(a, r["jv"], pts)
    assert np.allclose(b[:, 0], r["bx"], rtol=0, atol=1e-15)


def test_metrics_by_hand():
    m = magarray.metrics([0.049, 0.050, 0.051])
    assert m["dis1"] == pytest.approx(40000.0)


def test_torque_and_mc():
    a = magarray.synthetic_halbach(rings=1, per_layer=12)
    signs = magarray.torque_signs(a)
    assert len(signs) == a.size
    cfg = {"draws": 3, "seed": 5, "mode": "linear", "grid": {"diameter": 0.1, "step": 0.02},
           "sources": {"orientation": {}}}
    r1 = magarray.run_mc(a, json.dumps(cfg), signs)
    r2 = magarray.run_mc(a, json.dumps(cfg), signs)
    assert r1["draws"] == 3 and r1["failed"] == 0
    assert r1["dis1"] == r2["dis1"]


def test_errors_map_to_python_exceptions():
    with pytest.raises(magarray.ParseError):
        magarray.parse_array("not a geometry")
    with pytest.raises(ValueError):
        magarray.demag_factor([1.0, 0.0, 1.0])
