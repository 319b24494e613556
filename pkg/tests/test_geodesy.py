import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtkar.geodesy import (
    DegenerateBearingError,
    GeoPoint,
    LocalPoint,
    OffsetRangeError,
    destination_point,
    geo_to_local,
    haversine_distance,
    initial_bearing,
    local_to_geo,
    mean_position,
    overlay_position,
    rotate_about_up,
)

MERIDIAN_DEG_M = 6_371_000.0 * math.pi / 180.0  # closed-form one-degree arc

REF = GeoPoint(49.5, 6.36)

geo_points = st.builds(
    GeoPoint,
    st.floats(-80.0, 80.0),
    st.floats(-179.0, 179.0),
)


class TestHaversine:
    def test_identity(self):
        assert haversine_distance(REF, REF) == 0.0

    def test_meridian_arc(self):
        d = haversine_distance(GeoPoint(0, 0), GeoPoint(1, 0))
        assert d == pytest.approx(MERIDIAN_DEG_M, abs=0.01)

    def test_equatorial_arc_equals_meridian(self):
        d = haversine_distance(GeoPoint(0, 0), GeoPoint(0, 1))
        assert d == pytest.approx(MERIDIAN_DEG_M, abs=0.01)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GeoPoint(float("nan"), 0.0)

    @given(geo_points, geo_points)
    def test_symmetry(self, a, b):
        assert haversine_distance(a, b) == haversine_distance(b, a)

    @given(geo_points, geo_points, geo_points)
    @settings(max_examples=200)
    def test_triangle_inequality(self, a, b, c):
        assert (haversine_distance(a, c)
                <= haversine_distance(a, b) + haversine_distance(b, c) + 1e-6)


class TestInitialBearing:
    @pytest.mark.parametrize("target,expected", [
        (GeoPoint(1, 0), 0.0),
        (GeoPoint(0, 1), 90.0),
        (GeoPoint(-1, 0), 180.0),
    ])
    def test_cardinal(self, target, expected):
        assert initial_bearing(GeoPoint(0, 0), target) == pytest.approx(expected, abs=1e-9)

    def test_coincident_raises(self):
        with pytest.raises(DegenerateBearingError):
            initial_bearing(REF, REF)

    @given(geo_points, geo_points)
    def test_range(self, a, b):
        try:
            brg = initial_bearing(a, b)
        except DegenerateBearingError:
            return
        assert 0.0 <= brg < 360.0


class TestGeoToLocal:
    def test_identity(self):
        assert geo_to_local(REF, REF) == LocalPoint(0, 0, 0)

    def test_north_offset(self):
        # target generated by the forward-geodesic oracle, bearing 0
        target = destination_point(REF, 0.0, 100.0)
        p = geo_to_local(REF, target)
        assert p.east_m == pytest.approx(0.0, abs=0.01)
        assert p.north_m == pytest.approx(100.0, abs=0.01)
        assert p.up_m == 0.0

    def test_east_offset(self):
        target = destination_point(REF, 90.0, 100.0)
        p = geo_to_local(REF, target)
        assert p.east_m == pytest.approx(100.0, abs=0.01)
        assert p.north_m == pytest.approx(0.0, abs=0.01)

    def test_out_of_range(self):
        with pytest.raises(OffsetRangeError):
            geo_to_local(GeoPoint(0, 0), GeoPoint(0, 10))

    @given(geo_points, st.floats(0, 360, exclude_max=True), st.floats(1.0, 10_000.0))
    @settings(max_examples=300)
    def test_round_trip_against_forward_geodesic(self, ref, bearing, delta):
        target = destination_point(ref, bearing, delta)
        p = geo_to_local(ref, target)
        assert p.east_m == pytest.approx(delta * math.sin(math.radians(bearing)),
                                         abs=1e-3 * delta)
        assert p.north_m == pytest.approx(delta * math.cos(math.radians(bearing)),
                                          abs=1e-3 * delta)

    @given(geo_points, st.floats(0, 360, exclude_max=True), st.floats(1.0, 10_000.0))
    @settings(max_examples=200)
    def test_bearing_offset_consistency(self, ref, bearing, delta):
        target = destination_point(ref, bearing, delta)
        p = geo_to_local(ref, target)
        brg = initial_bearing(ref, target)
        recovered = math.degrees(math.atan2(p.east_m, p.north_m)) % 360.0
        diff = abs(recovered - brg) % 360.0
        assert min(diff, 360.0 - diff) < 0.01


class TestLocalToGeo:
    @given(st.floats(-5000, 5000), st.floats(-5000, 5000))
    @settings(max_examples=100)
    def test_inverts_geo_to_local(self, east, north):
        moved = local_to_geo(REF, LocalPoint(east, north, 0))
        back = geo_to_local(REF, moved)
        assert back.east_m == pytest.approx(east, abs=0.01)
        assert back.north_m == pytest.approx(north, abs=0.01)


class TestOverlayPosition:
    def test_zero_reference(self):
        assert overlay_position(LocalPoint(0, 0, 0), LocalPoint(10, 0, 0)) == LocalPoint(10, 0, 0)

    def test_zero_delta(self):
        assert overlay_position(LocalPoint(1, 2, 0), LocalPoint(0, 0, 0)) == LocalPoint(1, 2, 0)

    def test_componentwise(self):
        assert overlay_position(LocalPoint(1, 2, 0), LocalPoint(3, 4, 0)) == LocalPoint(4, 6, 0)

    @given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)),
                    min_size=2, max_size=5))
    def test_commutative_associative(self, pts):
        pts = [LocalPoint(e, n, 0) for e, n in pts]
        a, b = pts[0], pts[1]
        assert overlay_position(a, b) == overlay_position(b, a)
        total_left = pts[0]
        for p in pts[1:]:
            total_left = overlay_position(total_left, p)
        total_right = pts[-1]
        for p in reversed(pts[:-1]):
            total_right = overlay_position(p, total_right)
        assert total_left.east_m == pytest.approx(total_right.east_m, rel=1e-12, abs=1e-9)
        assert total_left.north_m == pytest.approx(total_right.north_m, rel=1e-12, abs=1e-9)


class TestRotateAboutUp:
    def test_yaw_90_north_becomes_west(self):
        p = rotate_about_up(LocalPoint(0, 10, 0), 90.0)
        assert p.east_m == pytest.approx(-10.0, abs=1e-9)
        assert p.north_m == pytest.approx(0.0, abs=1e-9)


class TestMeanPosition:
    def test_identical_fixes(self):
        fixes = [REF] * 1000
        assert mean_position(fixes) == REF

    def test_midpoint(self):
        m = mean_position([GeoPoint(49.5000, 6.36), GeoPoint(49.5002, 6.36)])
        assert m.latitude_deg == pytest.approx(49.5001)
        assert m.longitude_deg == pytest.approx(6.36)

    def test_statistical_recovery(self):
        # 10k Gaussian fixes, sigma 3 m/axis: standard error 0.03 m
        import numpy as np
        from rtkar.sensors import NoiseModel, sample_fix
        rng = np.random.default_rng(7)
        model = NoiseModel(sigma_east_m=3.0, sigma_north_m=3.0)
        fixes = [sample_fix(REF, model, rng) for _ in range(10_000)]
        m = mean_position(fixes)
        off = geo_to_local(REF, m)
        assert math.hypot(off.east_m, off.north_m) < 0.1

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            mean_position([])

    def test_wide_span_rejected(self):
        with pytest.raises(OffsetRangeError):
            mean_position([GeoPoint(0, 0), GeoPoint(0, 2)])


def test_longitude_normalized():
    assert GeoPoint(0, 180.0).longitude_deg == -180.0
    assert GeoPoint(0, 359.0).longitude_deg == -1.0
