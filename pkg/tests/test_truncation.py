import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbox.qmodel import atomic_to_table
from qbox.truncation import (
    PointCloud,
    emit,
    from_csv,
    hull2d,
    parse_coord,
    recertify,
    sample_pure,
    scan,
    to_csv,
)


def test_sample_pure_examples():
    assert sample_pure(0.5, 0, 0).atoms[0].bloch == (0.0, 0.0, 1.0)
    b = sample_pure(0.5, math.pi / 4, 0).atoms[0].bloch
    np.testing.assert_allclose(b, (1.0, 0.0, 0.0), atol=1e-15)
    with pytest.raises(ValueError):
        sample_pure(1.5, 0, 0)


@given(st.floats(0, 1), st.floats(-10, 10), st.floats(-10, 10))
def test_sample_pure_unit_norm(t0, theta, lam):
    a = sample_pure(t0, theta, lam).atoms[0]
    assert a.w == 1.0 and a.t == t0
    assert sum(x * x for x in a.bloch) == pytest.approx(1.0, abs=1e-12)


def test_parse_coord():
    assert parse_coord("a:01") == ("a", "01")
    for bad in ("c:01", "a:", "a:012", "01"):
        with pytest.raises(ValueError):
            parse_coord(bad)


def test_grid_scan_sizes_and_ranges():
    cloud = scan(["a:00", "a:11"], "grid")
    assert len(cloud) == 33 * 33 * 17
    assert cloud.rows.min() >= 0 and cloud.rows.max() <= 1
    assert cloud.provenance[0]["atoms"][0]["t0"] == 0.0


def test_grid_consistency_with_full_table():
    cloud = scan(["a:00", "a:01", "a:10", "a:11"], "grid", count=500)
    np.testing.assert_allclose(cloud.rows.sum(axis=1), 1.0, atol=1e-12)


def test_sum_rule_corollary_on_cloud():
    cloud = scan(["a:01", "a:10", "b:01", "b:10"], "random", seed=3, count=2000, mixtures=2)
    lhs = cloud.column("a:01") + cloud.column("a:10")
    rhs = cloud.column("b:01") + cloud.column("b:10")
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_scan_deterministic_and_seeded():
    a = scan(["a:00", "b:01"], "random", seed=1, count=300, mixtures=3)
    b = scan(["a:00", "b:01"], "random", seed=1, count=300, mixtures=3)
    c = scan(["a:00", "b:01"], "random", seed=2, count=300, mixtures=3)
    assert to_csv(a) == to_csv(b)
    assert to_csv(a) != to_csv(c)


def test_scan_threads_do_not_change_output(monkeypatch):
    monkeypatch.setenv("QBOX_THREADS", "1")
    a = to_csv(scan(["a:010", "b:11"], "random", seed=5, count=1000))
    monkeypatch.setenv("QBOX_THREADS", "4")
    b = to_csv(scan(["a:010", "b:11"], "random", seed=5, count=1000))
    assert a == b


def test_scan_argument_errors():
    with pytest.raises(ValueError):
        scan(["a:00"], "random")
    with pytest.raises(ValueError):
        scan(["a:00"], "sobol", count=3)
    with pytest.raises(ValueError):
        scan(["a:00"], "grid", mixtures=0)


def test_provenance_rebuilds_rows():
    cloud = scan(["a:01", "b:110"], "random", seed=4, count=50, mixtures=2)
    for k in range(0, 50, 7):
        t = atomic_to_table(cloud.state(k), 3)
        assert cloud.rows[k].tolist() == [t["a", "01"], t["b", "110"]]


def test_switch_groups_constant_on_cloud():
    cloud = scan(["a:001", "a:011", "a:0010", "a:0110", "a:0100"], "random", seed=8, count=500)
    assert np.max(np.abs(cloud.column("a:001") - cloud.column("a:011"))) <= 1e-12
    assert np.max(np.abs(cloud.column("a:0010") - cloud.column("a:0100"))) <= 1e-12


def test_mixture_is_convex_combination():
    cloud = scan(["a:00", "b:01"], "random", seed=6, count=40, mixtures=2)
    for k in range(40):
        prov = cloud.provenance[k]
        parts = []
        for a in prov["atoms"]:
            t = atomic_to_table(sample_pure(a["t0"], a["theta"], a["lambda"]), 2)
            parts.append((a["w"], np.array([t["a", "00"], t["b", "01"]])))
        combo = sum(w * p for w, p in parts)
        np.testing.assert_allclose(cloud.rows[k], combo, atol=1e-15)


def test_recertify_no_violation():
    cloud = scan(["a:00", "b:01"], "random", seed=9, count=300, mixtures=2)
    rep = recertify(cloud, depth=4)
    assert rep.ok and rep.checked == 300


def test_hull_examples():
    h = hull2d([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])
    assert len(h) == 4
    assert len(hull2d([[0, 0], [1, 1], [2, 2]])) == 2
    assert hull2d([[0.3, 0.4]]).tolist() == [[0.3, 0.4]]
    assert len(hull2d([[1, 1], [1, 1]])) == 1
    with pytest.raises(ValueError):
        hull2d([[0, 0, 0]])


def signed_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def test_hull_properties():
    rng = np.random.default_rng(2)
    for _ in range(50):
        pts = rng.normal(size=(rng.integers(3, 60), 2))
        h = hull2d(pts)
        assert signed_area(h) > 0
        np.testing.assert_array_equal(hull2d(h), h)
        n = len(h)
        for k in range(n):
            o, a = h[k], h[(k + 1) % n]
            # every point on the left of (or on) every edge; no collinear vertices kept
            cross = (a[0] - o[0]) * (pts[:, 1] - o[1]) - (a[1] - o[1]) * (pts[:, 0] - o[0])
            assert cross.min() >= -1e-12
            b = h[(k + 2) % n]
            assert (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) > 0


def test_csv_three_points_and_roundtrip():
    cloud = PointCloud(["a:0", "b:01"], [[0.5, 0.25], [0.125, 1.0], [0.0, 0.75]])
    data = emit(cloud, format="csv")
    assert data.decode().count("\n") == 4
    assert data.decode().splitlines()[0] == "a:0,b:01"
    assert to_csv(from_csv(data)) == data


def test_svg_output(tmp_path):
    cloud = scan(["a:00", "b:01"], "random", seed=1, count=20)
    out = tmp_path / "c.svg"
    data = emit(cloud, hull2d(cloud.rows), "svg", out)
    assert out.read_bytes() == data
    text = data.decode()
    assert 'viewBox="0 0 800 800"' in text and "<polyline" in text
    assert text.count("<circle") == 20
    with pytest.raises(ValueError):
        emit(cloud, format="png")
