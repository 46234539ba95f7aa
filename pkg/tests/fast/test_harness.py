"""Unit tests for the harness: summaries, seeds and evaluation jobs."""

from hypothesis import given, strategies as st

from markerrally import const
from markerrally.exceptions import ConfigurationError, EmptyResults
from markerrally.harness import (
    EpisodeResult, EvalEpisode, EvalJob, EvalReport, PolicySource,
    episode_rng, episode_seed, load_policy, oval_jobs, segment_jobs,
    summarize,
)
from markerrally.agents.scripted import CenterlineFollower
from . import FastTestCase


def result(finished, progress):
    return EpisodeResult(
        finished, progress, 10, 0.0,
        const.FINISHED if finished else const.COLLISION)


results = st.lists(
    st.builds(result, st.booleans(), st.floats(0, 1)), min_size=1, max_size=30)


class TestSummarize(FastTestCase):

    def test_all_finished(self):
        assert summarize([result(True, 1.0)] * 4) == (100.0, 100.0)

    def test_half(self):
        summary = summarize([result(True, 1.0), result(False, 0.2)])
        assert summary.finish_pct == 50.0
        assert abs(summary.avg_distance_pct - 60.0) < 1e-9

    def test_none_finished(self):
        summary = summarize([result(False, 0.1), result(False, 0.5)])
        assert summary.finish_pct == 0.0
        assert abs(summary.avg_distance_pct - 30.0) < 1e-9

    def test_empty(self):
        with self.assertRaises(EmptyResults):
            summarize([])

    @given(results, st.randoms())
    def test_order_does_not_matter(self, episodes, random):
        shuffled = list(episodes)
        random.shuffle(shuffled)
        assert summarize(episodes) == summarize(shuffled)

    @given(results)
    def test_bounds(self, episodes):
        finish_pct, avg_distance_pct = summarize(episodes)
        assert 0 <= finish_pct <= 100
        assert 0 <= avg_distance_pct <= 100


class TestSeeds(FastTestCase):

    def test_episode_seed(self):
        assert episode_seed(0, 1, 0) == episode_seed(0, 1, 0)
        seeds = {episode_seed(0, e, s) for e in range(50) for s in range(3)}
        assert len(seeds) == 150
        assert episode_seed(1, 1, 0) != episode_seed(0, 1, 0)

    def test_episode_rng(self):
        one = episode_rng(7, 3, const.TRACK_STREAM).integers(1000, size=5)
        two = episode_rng(7, 3, const.TRACK_STREAM).integers(1000, size=5)
        assert one.tolist() == two.tolist()


class TestJobs(FastTestCase):

    def test_segment_jobs(self):
        jobs = segment_jobs(0)
        assert len(jobs) == 169
        assert [j.episode_id for j in jobs] == list(range(1, 170))
        assert jobs[0].specs == (-90, -90)
        assert jobs[-1].specs == (90, 90)
        assert len({j.specs for j in jobs}) == 169
        assert all(j.start_offset == 0.0 and j.direction == "" for j in jobs)
        assert jobs == segment_jobs(0)
        assert jobs[0].track_seed != segment_jobs(1)[0].track_seed

    def test_oval_jobs(self):
        jobs = oval_jobs("both", 0)
        assert len(jobs) == 180
        for direction in const.DIRECTIONS:
            mine = [j for j in jobs if j.direction == direction]
            assert len(mine) == 90
            for offset in (-0.5, 0.0, 0.5):
                assert sum(1 for j in mine if j.start_offset == offset) == 30
        assert [j.episode_id for j in jobs] == list(range(1, 181))
        assert len(oval_jobs("cw", 0, runs_per_start=2)) == 6

    def test_oval_bad_direction(self):
        with self.assertRaises(ConfigurationError):
            oval_jobs("up", 0)


class TestEvalReport(FastTestCase):

    def episode(self, number, specs, finished, offset=0.0, direction=""):
        return EvalEpisode(
            EvalJob(number, specs, offset, direction, 0),
            result(finished, 1.0 if finished else 0.25))

    def test_segments_document(self):
        report = EvalReport("segments", [
            self.episode(2, (90, 0), False),
            self.episode(1, (-90, 0), True),
            self.episode(3, (90, 15), True),
        ])
        assert [e.job.episode_id for e in report.episodes] == [1, 2, 3]
        adict = report.to_dict()
        assert adict["episodes"] == 3
        assert adict["finished"] == 2
        assert adict["by_first_turn"]["90"]["finish_pct"] == 50.0
        assert adict["by_first_turn"]["-90"]["episodes"] == 1
        row = report.rows()[1]
        assert row["track_spec"] == "90;0"
        assert row["direction"] == ""
        assert row["finished"] is False

    def test_oval_document(self):
        episodes = [
            self.episode(1, (0,), True, -0.5, "acw"),
            self.episode(2, (0,), True, 0.0, "acw"),
            self.episode(3, (0,), False, 0.5, "acw"),
            self.episode(4, (0,), True, 0.5, "cw"),
        ]
        adict = EvalReport("oval", episodes).to_dict()
        assert adict["directions"]["acw"]["start_offsets"] == {
            "L": 1, "C": 1, "R": 0}
        assert adict["directions"]["cw"]["start_offsets"] == {
            "L": 0, "C": 0, "R": 1}
        acw = adict["directions"]["acw"]
        assert sum(acw["start_offsets"].values()) == acw["finished"]

    def test_empty_report(self):
        with self.assertRaises(EmptyResults):
            EvalReport("oval", []).to_dict()


class TestLoadPolicy(FastTestCase):

    def test_scripted(self):
        policy = load_policy(PolicySource(scripted="follower"), {})
        assert isinstance(policy, CenterlineFollower)

    def test_unknown_scripted(self):
        with self.assertRaises(ConfigurationError):
            load_policy(PolicySource(scripted="teleport"), {})

    def test_nothing(self):
        with self.assertRaises(ConfigurationError):
            load_policy(PolicySource(), {})

    def test_label(self):
        assert PolicySource(scripted="straight").label == "scripted:straight"
        assert PolicySource(checkpoint="a/manifest.json").label == \
            "a/manifest.json"
