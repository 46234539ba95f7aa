"""Tests for the track generator."""

import math

from hypothesis import given, strategies as st
import numpy as np
from numpy.testing import assert_allclose

from markerrally import const
from markerrally.data.models import NoiseConfig, SegmentSpec, wrap_angle
from markerrally.exceptions import ConfigurationError, InvalidSegment
from markerrally.track_gen import (
    DEFAULT_ENTRY_POSE, arc_center, basic_variants, draw_specs,
    generate_segment, oval_specs, segment_length, segment_variants,
    two_segment_combinations,
)
from . import FastTestCase

angles = st.sampled_from(list(range(-90, 91, 15)))


class TestSegmentSpec(FastTestCase):

    def test_variants(self):
        variants = segment_variants()
        assert len(variants) == 13
        assert [s.turn_angle_deg for s in variants] == list(range(-90, 91, 15))

    def test_basic_variants(self):
        assert [s.turn_angle_deg for s in basic_variants()] == [0, 90, -90]

    def test_combinations(self):
        combos = two_segment_combinations()
        assert len(combos) == const.SEGMENT_SUITE_SIZE
        assert len(set(combos)) == 169
        assert combos[0] == (SegmentSpec(-90), SegmentSpec(-90))
        assert combos[1] == (SegmentSpec(-90), SegmentSpec(-75))
        assert combos[-1] == (SegmentSpec(90), SegmentSpec(90))

    def test_invalid_angles(self):
        for angle in (20, 105, -105, 45.5, True, "45"):
            with self.assertRaises(InvalidSegment):
                SegmentSpec(angle)

    def test_invalid_segment_is_a_configuration_error(self):
        """The command line turns it into exit code 2."""
        with self.assertRaises(ConfigurationError):
            SegmentSpec(7)


class TestGenerateSegment(FastTestCase):

    def segment(self, angle, first_pair_index=1):
        return generate_segment(
            angle, DEFAULT_ENTRY_POSE, first_pair_index, NoiseConfig(),
            np.random.default_rng(0))

    def test_straight(self):
        markers, centerline, exit_pose = self.segment(0)
        assert len(markers) == 30
        assert [m.id for m in markers] == list(range(1, 31))
        assert_allclose(exit_pose[:2], (0, 14), atol=1e-9)
        assert_allclose(centerline[-1], (0, 14), atol=1e-9)
        left, right = markers[0], markers[1]
        assert left.is_left and not right.is_left
        assert_allclose((left.x, left.y), (-1, 0), atol=1e-9)
        assert_allclose((right.x, right.y), (1, 0), atol=1e-9)

    def test_pair_width_is_two(self):
        for spec in segment_variants():
            markers, _, _ = self.segment(spec)
            for left, right in zip(markers[::2], markers[1::2]):
                assert abs(math.hypot(left.x - right.x, left.y - right.y)
                           - 2.0) < 1e-9

    def test_turn_radii(self):
        """A left turn keeps left markers at 10 and right markers at 12."""
        for angle, inner_is_left in ((90, True), (-90, False), (45, True)):
            markers, _, _ = self.segment(angle)
            cx, cy = arc_center(SegmentSpec(angle), DEFAULT_ENTRY_POSE)
            for marker in markers:
                radius = math.hypot(marker.x - cx, marker.y - cy)
                inner = marker.is_left == inner_is_left
                assert abs(radius - (10.0 if inner else 12.0)) < 1e-9

    def test_exit_heading(self):
        _, _, exit_pose = self.segment(-90)
        assert abs(exit_pose.heading - 0.0) < 1e-9
        assert_allclose(exit_pose[:2], (11, 11), atol=1e-9)

    def test_ids_continue_from_first_pair_index(self):
        markers, _, _ = self.segment(30, first_pair_index=16)
        assert markers[0].id == 31
        assert markers[-1].id == 60

    def test_elevation_tiers_alternate(self):
        markers, _, _ = self.segment(0)
        tiers = [m.elevation_tier for m in markers[::2]]
        assert tiers[:4] == [0, 1, 0, 1]
        assert all(m.elevation_tier == n.elevation_tier
                   for m, n in zip(markers[::2], markers[1::2]))

    def test_marker_yaw_faces_the_robot(self):
        markers, _, _ = self.segment(0)
        # heading 90°: facing back is 270°, turned 20° inward
        assert abs(markers[0].yaw_deg - (-70.0)) < 1e-9
        assert abs(markers[1].yaw_deg - (-110.0)) < 1e-9

    def test_first_pair_index_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            self.segment(0, first_pair_index=0)

    def test_segment_length(self):
        assert segment_length(SegmentSpec(0)) == 14
        assert abs(segment_length(SegmentSpec(-90)) - 11 * math.pi / 2) < 1e-12

    @given(angles)
    def test_exit_heading_adds_the_turn(self, angle):
        _, centerline, exit_pose = self.segment(angle)
        expected = math.pi / 2 + math.radians(angle)
        assert abs(math.remainder(exit_pose.heading - expected, 2 * math.pi)) < 1e-9
        assert_allclose(centerline[-1], exit_pose[:2], atol=1e-9)
        assert_allclose(centerline[0], (0, 0), atol=1e-12)


class TestGenerateTrack(FastTestCase):

    def test_two_segments(self):
        track = self.make_track((90, -90))
        assert len(track.markers) == 60
        assert sorted(m.id for m in track.markers) == list(range(1, 61))
        assert track.finish.id == const.FINISH_ID
        assert_allclose((track.finish.x, track.finish.y), track.centerline[-1])
        assert track.meta["specs"] == [90, -90]
        assert track.pair_count == 30

    def test_total_length(self):
        assert abs(self.make_track((0,)).total_length - 14) < 1e-9
        assert abs(self.make_track((0, 0)).total_length - 28) < 1e-9
        turn = self.make_track((90,))
        assert abs(turn.total_length - 11 * math.pi / 2) < 1e-3

    def test_centerline_is_dense(self):
        track = self.make_track((45, -15))
        edges = np.hypot(*np.diff(track.centerline, axis=0).T)
        assert edges.max() <= const.CENTERLINE_STEP + 1e-9
        assert edges.min() > 0

    def test_segments_join(self):
        track = self.make_track((0, 90))
        # the second segment starts where the first pair of it stands
        left = track.markers[30]
        assert left.id == 31
        assert_allclose((left.x, left.y), (-1, 14), atol=1e-9)

    def test_empty(self):
        with self.assertRaises(ConfigurationError):
            self.make_track(())

    def test_oval_closes(self):
        for direction in const.DIRECTIONS:
            oval = self.make_oval(direction)
            assert len(oval.markers) == 180
            assert oval.pair_count == 90
            gap = np.hypot(*(oval.centerline[-1] - oval.centerline[0]))
            assert gap < 1e-6
            assert_allclose((oval.finish.x, oval.finish.y), (0, 0), atol=1e-6)

    def test_oval_heading_closes(self):
        for direction in const.DIRECTIONS:
            pose, first = DEFAULT_ENTRY_POSE, 1
            for spec in oval_specs(direction):
                markers, _, pose = generate_segment(
                    spec, pose, first, NoiseConfig(), np.random.default_rng(0))
                first += len(markers) // 2
            assert first == 91
            turn = wrap_angle(pose.heading - DEFAULT_ENTRY_POSE.heading)
            assert abs(turn) < 1e-9
            assert_allclose((pose.x, pose.y), (0, 0), atol=1e-6)

    def test_oval_directions_mirror(self):
        acw, cw = self.make_oval("acw"), self.make_oval("cw")
        assert_allclose(acw.centerline[:, 0], -cw.centerline[:, 0], atol=1e-9)
        assert_allclose(acw.centerline[:, 1], cw.centerline[:, 1], atol=1e-9)

    def test_oval_bad_direction(self):
        with self.assertRaises(ConfigurationError):
            self.make_oval("sideways")

    def test_noise_is_deterministic(self):
        one = self.make_track((30, -60), noise=True, seed=11)
        two = self.make_track((30, -60), noise=True, seed=11)
        other = self.make_track((30, -60), noise=True, seed=12)
        assert one.markers == two.markers
        assert one.markers != other.markers

    def test_noise_is_bounded(self):
        clean = self.make_track((30, -60))
        noisy = self.make_track((30, -60), noise=True, seed=5)
        for a, b in zip(clean.markers, noisy.markers):
            assert a.id == b.id
            assert abs(a.x - b.x) <= 0.05 + 1e-12
            assert abs(a.y - b.y) <= 0.05 + 1e-12
            turn = wrap_angle(math.radians(a.yaw_deg - b.yaw_deg))
            assert abs(math.degrees(turn)) <= 15 + 1e-9
        # centre-line and finish stay noiseless
        assert_allclose(clean.centerline, noisy.centerline)
        assert clean.finish == noisy.finish

    def test_noisy_yaw_stays_wrapped(self):
        for direction in const.DIRECTIONS:
            for seed in range(20):
                oval = self.make_oval(direction, noise=True, seed=seed)
                for marker in oval.markers:
                    assert -180.0 < marker.yaw_deg <= 180.0, marker

    def test_seed_is_ignored_without_noise(self):
        assert self.make_track((15,), seed=1).markers == \
            self.make_track((15,), seed=2).markers

    def test_draw_specs(self):
        pool = segment_variants()
        first = draw_specs(np.random.default_rng(3), 4, pool)
        second = draw_specs(np.random.default_rng(3), 4, pool)
        assert first == second
        assert len(first) == 4
        assert all(s in pool for s in first)
