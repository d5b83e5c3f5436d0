import numpy as np
import numpy.testing as npt
import pytest

from prefscan.analysis import (
    AngleConfig,
    characteristic_angle,
    characteristic_angle_map,
    loop_area,
    loop_area_map,
    wall_charge_character,
    wall_charge_map,
)
from prefscan.errors import ConfigurationError, InputError, InsufficientSupportError
from prefscan.synthetic import (
    loops_for_areas,
    make_band_vector_dataset,
    make_half_plane_vector_dataset,
    make_stripe_dataset,
)


def _rotation_matrix(rng):
    # QR of a random matrix gives a uniform-ish orthogonal matrix
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


class TestLoopArea:
    def test_unit_square(self):
        pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert loop_area(pts) == 1.0

    def test_constant_response(self):
        v = np.linspace(-1, 1, 8)
        pts = np.column_stack([v, np.full(8, 0.3)])
        assert loop_area(pts) == 0.0

    def test_random_loops_match_fan_triangulation(self, rng):
        """Oracle: fan triangulation from the centroid."""
        for _ in range(100):
            n = int(rng.integers(4, 24))
            pts = rng.normal(size=(n, 2))
            centroid = pts.mean(axis=0)
            tri = 0.0
            for i in range(n):
                a = pts[i] - centroid
                b = pts[(i + 1) % n] - centroid
                tri += a[0] * b[1] - a[1] * b[0]
            expected = abs(tri) / 2.0
            npt.assert_allclose(loop_area(pts), expected, atol=1e-9)

    def test_cyclic_rotation_invariance(self, rng):
        pts = rng.normal(size=(10, 2))
        base = loop_area(pts)
        for k in (1, 3, 7):
            npt.assert_allclose(loop_area(np.roll(pts, k, axis=0)), base,
                                rtol=1e-12)

    def test_reversal_invariance(self, rng):
        pts = rng.normal(size=(12, 2))
        npt.assert_allclose(loop_area(pts[::-1]), loop_area(pts), rtol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(InputError):
            loop_area(np.zeros((3, 2)))

    def test_loop_area_map_matches_pointwise(self, rng):
        ds = make_stripe_dataset(6, 6, smooth=True)
        amap = loop_area_map(ds)
        for cid in (0, 17, 35):
            r, c = divmod(cid, 6)
            npt.assert_allclose(amap[r, c], loop_area(ds.loop_at(cid)),
                                rtol=1e-12)

    def test_synthesized_loops_hit_target_areas(self, rng):
        areas = rng.uniform(0.05, 1.0, size=(4, 5))
        v, resp = loops_for_areas(areas)
        for r in range(4):
            for c in range(5):
                pts = np.column_stack([v, resp[r, c]])
                npt.assert_allclose(loop_area(pts), areas[r, c], rtol=1e-12)


class TestCharacteristicAngle:
    def test_uniform_field_zero_bin(self):
        field = np.tile([1.0, 0.2, -0.3], (16, 16, 1))
        a = characteristic_angle(field, (8, 8), AngleConfig(radius=4))
        assert a == 2.5     # center of the 0-degree bin

    def test_antiparallel_wall_180(self):
        ds = make_half_plane_vector_dataset(24, 24, 180.0)
        a = characteristic_angle(ds.vectors, (12, 12), AngleConfig(radius=5))
        assert abs(a - 180.0) <= 5.0

    def test_71_degree_wall(self):
        """Oracle: vectors constructed with dot product cos(71 deg)."""
        ds = make_half_plane_vector_dataset(24, 24, 71.0)
        left = ds.vectors[12, 0]
        right = ds.vectors[12, -1]
        dot = left @ right / (np.linalg.norm(left) * np.linalg.norm(right))
        npt.assert_allclose(np.degrees(np.arccos(dot)), 71.0, atol=1e-9)
        a = characteristic_angle(ds.vectors, (12, 12), AngleConfig(radius=5))
        assert abs(a - 71.0) <= 5.0

    def test_exhaustive_enumeration_oracle(self):
        """Brute-force recount of symmetric pairs at one point."""
        ds = make_band_vector_dataset(16, 16)
        cfg = AngleConfig(radius=3, bin_width=5.0)
        point = (8, 4)
        counts = np.zeros(cfg.n_bins)
        for dr in range(-3, 4):
            for dc in range(-3, 4):
                if dr * dr + dc * dc > 9 or (dr, dc) == (0, 0):
                    continue
                if not (dr > 0 or (dr == 0 and dc > 0)):
                    continue
                p1 = (point[0] + dr, point[1] + dc)
                p2 = (point[0] - dr, point[1] - dc)
                if not all(0 <= x < 16 for x in (*p1, *p2)):
                    continue
                v1, v2 = ds.vectors[p1], ds.vectors[p2]
                cosang = v1 @ v2 / (np.linalg.norm(v1) * np.linalg.norm(v2))
                ang = np.degrees(np.arccos(np.clip(cosang, -1, 1)))
                counts[min(int(ang // 5.0), cfg.n_bins - 1)] += 1
        expected = (np.argmax(counts) + 0.5) * 5.0
        assert characteristic_angle(ds.vectors, point, cfg) == expected

    def test_rotation_invariance(self, rng):
        ds = make_band_vector_dataset(16, 16)
        cfg = AngleConfig(radius=4)
        R = _rotation_matrix(rng)
        rotated = ds.vectors @ R.T
        for point in ((8, 7), (8, 12), (4, 3)):
            npt.assert_allclose(characteristic_angle(rotated, point, cfg),
                                characteristic_angle(ds.vectors, point, cfg))

    def test_negation_invariance(self):
        ds = make_band_vector_dataset(16, 16)
        cfg = AngleConfig(radius=4)
        a1, _ = characteristic_angle_map(ds.vectors, cfg)
        a2, _ = characteristic_angle_map(-ds.vectors, cfg)
        npt.assert_array_equal(a1, a2)

    def test_range_always_valid(self, rng):
        field = rng.normal(size=(12, 12, 3))
        amap, support = characteristic_angle_map(field, AngleConfig(radius=3))
        valid = support > 0
        assert np.all(amap[valid] >= 0.0)
        assert np.all(amap[valid] <= 180.0)

    def test_insufficient_support(self):
        field = np.tile([1.0, 0.0, 0.0], (3, 3, 1))
        with pytest.raises(InsufficientSupportError):
            characteristic_angle(field, (0, 0), AngleConfig(radius=5))

    def test_map_matches_pointwise(self, rng):
        field = rng.normal(size=(10, 10, 3))
        cfg = AngleConfig(radius=3)
        amap, support = characteristic_angle_map(field, cfg)
        for point in ((5, 5), (0, 0), (9, 3), (2, 8)):
            if support[point] > 0:
                assert amap[point] == characteristic_angle(field, point, cfg)

    def test_bin_width_validation(self):
        with pytest.raises(ConfigurationError):
            AngleConfig(radius=5, bin_width=0.0)
        with pytest.raises(ConfigurationError):
            AngleConfig(radius=0)


class TestWallCharge:
    def _vertical_wall(self, inward: bool):
        field = np.zeros((24, 24, 3))
        sign = 1.0 if inward else -1.0
        field[:, :12] = [sign, 0.0, 0.0]
        field[:, 12:] = [-sign, 0.0, 0.0]
        return field

    def test_uniform_field_flagged_neutral(self):
        field = np.tile([0.4, 0.6, 0.0], (16, 16, 1))
        res = wall_charge_character(field, (8, 8), radius=5)
        assert res.value == 0.0
        assert not res.wall_detected

    def test_converging_is_head_to_head(self):
        """Oracle: analytic divergence sign of the constructed field.

        Vectors pointing into the wall from both sides converge (negative
        divergence), which is the head-to-head configuration: -1.
        """
        field = self._vertical_wall(inward=True)
        res = wall_charge_character(field, (12, 12), radius=5)
        assert res.wall_detected
        npt.assert_allclose(res.value, -1.0, atol=1e-12)

    def test_diverging_is_tail_to_tail(self):
        field = self._vertical_wall(inward=False)
        res = wall_charge_character(field, (12, 12), radius=5)
        assert res.wall_detected
        npt.assert_allclose(res.value, 1.0, atol=1e-12)

    def test_negating_field_flips_sign(self, rng):
        field = rng.normal(size=(20, 20, 3))
        for point in ((10, 10), (5, 14), (15, 3)):
            a = wall_charge_character(field, point, radius=4)
            b = wall_charge_character(-field, point, radius=4)
            npt.assert_allclose(a.value, -b.value, atol=1e-12)
            assert a.wall_detected == b.wall_detected

    def test_values_bounded(self, rng):
        field = rng.normal(size=(16, 16, 3))
        cmap = wall_charge_map(field, radius=3)
        assert np.all(cmap >= -1.0) and np.all(cmap <= 1.0)

    def test_horizontal_wall_orientation(self):
        field = np.zeros((24, 24, 3))
        field[:12, :] = [0.0, 1.0, 0.0]
        field[12:, :] = [0.0, -1.0, 0.0]
        res = wall_charge_character(field, (12, 12), radius=5)
        assert res.wall_detected
        npt.assert_allclose(abs(res.value), 1.0, atol=1e-12)
