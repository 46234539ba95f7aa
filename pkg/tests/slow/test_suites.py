"""Whole evaluation suites driven by the scripted policies."""

from markerrally import const
from markerrally.harness import PolicySource, eval_oval, eval_segments
from tests.slow import SlowTestBase, extended

FOLLOWER = PolicySource(scripted="follower")


class TestOval(SlowTestBase):

    def test_follower_full_suite(self):
        report = eval_oval(FOLLOWER, "both", self.make_settings(workers=2))
        assert len(report.episodes) == 180
        adict = report.to_dict()
        for direction in const.DIRECTIONS:
            section = adict["directions"][direction]
            assert section["episodes"] == 90
            assert section["finished"] == 90
            assert section["start_offsets"] == {"L": 30, "C": 30, "R": 30}

    @extended
    def test_follower_with_noise(self):
        report = eval_oval(FOLLOWER, "both", self.make_settings(), noise=True)
        adict = report.to_dict()
        for direction in const.DIRECTIONS:
            section = adict["directions"][direction]
            assert sum(section["start_offsets"].values()) == section["finished"]
        assert 0.0 <= report.avg_distance_pct <= 100.0


class TestSegments(SlowTestBase):

    def test_worker_count_is_irrelevant(self):
        straight = PolicySource(scripted="straight")
        one = eval_segments(straight, self.make_settings(workers=1), noise=True)
        four = eval_segments(straight, self.make_settings(workers=4), noise=True)
        assert one.rows() == four.rows()
        assert one.to_dict() == four.to_dict()
