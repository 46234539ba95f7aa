"""The **action** layer: the training protocol and the evaluation suites.

Actions stand between the command line and the simulator. They know
the experiment protocol and write their results through a
FileRepository; they know nothing about argv or exit codes.
"""

import logging
import math
from multiprocessing import Pool
from pathlib import Path
from typing import (
    Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple,
)

from bag.reify import reify
from bag.settings import SettingsReader
import numpy as np

from markerrally import const
from markerrally.agents import agent_class, build_agent
from markerrally.agents.replay import Transition, as_state
from markerrally.data.models import Track
from markerrally.data.repository import FileRepository
from markerrally.events import CheckpointSavedEvent, EpisodeEndedEvent
from markerrally.exceptions import (
    ConfigurationError, DataFileError, EmptyResults,
)
from markerrally.settings import (
    camera_config, noise_config, resolve_settings, reward_config,
    training_digest,
)
from markerrally.sim_env import RaceEnv
from markerrally.strings import MessagesBase, get_strings
from markerrally.track_gen import (
    basic_variants, draw_specs, generate_track, oval_specs,
    segment_variants, two_segment_combinations,
)

LOG = logging.getLogger(__name__)

OFFSET_LABELS = {-0.5: "L", 0.0: "C", 0.5: "R"}
# Ending kinds after which nothing follows; a timeout is bootstrapped.
TERMINAL_KINDS = (const.FINISHED, const.COLLISION, const.BLIND)


def episode_seed(master: int, episode: int, stream: int) -> int:
    """Derive an independent 32-bit seed for one episode and stream."""
    sequence = np.random.SeedSequence([master, episode, stream])
    return int(sequence.generate_state(1)[0])


def episode_rng(master: int, episode: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([master, episode, stream]))


class EpisodeResult(NamedTuple):
    finished: bool
    max_progress: float
    steps: int
    total_reward: float
    termination: str


class Summary(NamedTuple):
    finish_pct: float
    avg_distance_pct: float


def summarize(results: Iterable[EpisodeResult]) -> Summary:
    """Return Finish % and AVG Distance % of some episodes.

    ``math.fsum`` makes the average independent of episode order.
    """
    results = list(results)
    if not results:
        raise EmptyResults(MessagesBase.empty_results)
    finished = sum(1 for r in results if r.finished)
    return Summary(
        100.0 * finished / len(results),
        100.0 * math.fsum(r.max_progress for r in results) / len(results),
    )


def make_env(settings: Dict[str, Any], max_steps: int) -> RaceEnv:
    return RaceEnv(camera_config(settings), reward_config(settings), max_steps)


def run_episode(
    policy,
    env: RaceEnv,
    track: Track,
    start_offset: float = 0.0,
    on_step: Optional[Callable] = None,
) -> EpisodeResult:
    """Drive one deterministic episode with ``policy.act``.

    ``on_step(env, action_w, reward, termination)`` is called after
    every step.
    """
    observation = env.reset(track, start_offset)
    policy.reset(env)
    total = 0.0
    while True:
        w = policy.act(observation)
        observation, gain, termination = env.step(w)
        total += gain
        if on_step is not None:
            on_step(env, w, gain, termination)
        if termination.done:
            break
    return EpisodeResult(
        termination.kind == const.FINISHED,
        env.max_progress,
        termination.step_index,
        total,
        termination.kind,
    )


def train_episode(agent, env: RaceEnv, track: Track) -> EpisodeResult:
    """Drive one exploring episode, storing and learning at every step."""
    observation = env.reset(track, 0.0)
    agent.reset(env)
    total = 0.0
    while True:
        state = as_state(observation)
        stored, w = agent.explore(observation)
        observation, gain, termination = env.step(w)
        total += gain
        agent.remember(Transition(
            state, stored, gain, as_state(observation),
            termination.kind in TERMINAL_KINDS,
        ))
        agent.learn()
        if termination.done:
            break
    return EpisodeResult(
        termination.kind == const.FINISHED,
        env.max_progress,
        termination.step_index,
        total,
        termination.kind,
    )


def trace_record(env: RaceEnv, w: float, gain: float, termination) -> Dict:
    return {
        "step": env.step_index,
        "x": env.pose.x,
        "y": env.pose.y,
        "heading": env.pose.heading,
        "action_w": float(w),
        "reward": gain,
        "theta_deg": env.theta_deg,
        "progress": env.progress,
        "termination": termination.kind,
    }


# Policies
# ========


class PolicySource(NamedTuple):
    """Where a policy comes from: a checkpoint manifest or a scripted name."""

    checkpoint: Optional[str] = None
    scripted: Optional[str] = None

    @property
    def label(self) -> str:
        return self.checkpoint or "scripted:{}".format(self.scripted)


def load_policy(source: PolicySource, settings: Dict[str, Any]):
    """Return a ready IPolicy for ``source``."""
    utilities = settings.get("utilities", {})
    if source.scripted:
        if source.scripted not in const.SCRIPTED_POLICIES:
            raise ConfigurationError(MessagesBase.unknown_scripted.format(
                source.scripted, ", ".join(sorted(const.SCRIPTED_POLICIES))))
        cls = SettingsReader(utilities).resolve(
            key="{} policy".format(source.scripted),
            default=const.SCRIPTED_POLICIES[source.scripted],
        )
        return cls()
    if not source.checkpoint:
        raise ConfigurationError(MessagesBase.checkpoint_needed)

    path = Path(source.checkpoint)
    repo = FileRepository(path.parent)
    manifest = repo.load_manifest(path)
    cls = agent_class(manifest["algo"], settings)
    try:
        agent = cls(
            cls.config_class.from_settings(manifest["config"]),
            seed=manifest["master_seed"],
        )
    except (TypeError, ValueError) as e:
        raise DataFileError(
            MessagesBase.corrupt_file.format(path, e), path=path)
    repo.restore_agent(agent, path, optimizer=False)
    LOG.info("Loaded %s from %s (episode %d)",
             manifest["algo"], path, manifest["episode"])
    return agent


# Evaluation
# ==========


class EvalJob(NamedTuple):
    episode_id: int
    specs: Tuple[int, ...]
    start_offset: float
    direction: str  # empty for the segment suite
    track_seed: int


class EvalEpisode(NamedTuple):
    job: EvalJob
    result: EpisodeResult

    def row(self) -> Dict[str, Any]:
        """One line of the evaluation CSV."""
        return {
            "episode_id": self.job.episode_id,
            "track_spec": ";".join(str(a) for a in self.job.specs),
            "start_offset": self.job.start_offset,
            "direction": self.job.direction,
            "finished": self.result.finished,
            "max_progress": self.result.max_progress,
            "steps": self.result.steps,
            "termination": self.result.termination,
        }


def segment_jobs(seed: int) -> List[EvalJob]:
    """All 169 ordered two-segment tracks, centre start, one noise draw each."""
    return [
        EvalJob(
            episode_id=number,
            specs=(first.turn_angle_deg, second.turn_angle_deg),
            start_offset=0.0,
            direction="",
            track_seed=episode_seed(seed, number, const.EVAL_STREAM),
        )
        for number, (first, second) in enumerate(
            two_segment_combinations(), start=1)
    ]


def oval_directions(direction: str) -> List[str]:
    if direction == "both":
        return list(const.DIRECTIONS)
    if direction not in const.DIRECTIONS:
        raise ConfigurationError(MessagesBase.invalid_config.format(
            "direction must be cw, acw or both"))
    return [direction]


def oval_jobs(
    direction: str, seed: int, runs_per_start: int = const.OVAL_RUNS_PER_START
) -> List[EvalJob]:
    """Runs per start offset (left, centre, right) for each direction."""
    jobs = []
    for way in oval_directions(direction):
        specs = tuple(s.turn_angle_deg for s in oval_specs(way))
        for offset in const.OVAL_START_OFFSETS:
            for _ in range(runs_per_start):
                number = len(jobs) + 1
                jobs.append(EvalJob(
                    number, specs, offset, way,
                    episode_seed(seed, number, const.EVAL_STREAM),
                ))
    return jobs


def run_jobs(
    source: PolicySource, settings: Dict[str, Any], jobs: Sequence[EvalJob]
) -> List[EvalEpisode]:
    """Evaluate ``jobs`` in order; this is what each worker process runs."""
    policy = load_policy(source, settings)
    env = make_env(settings, settings["eval"]["max_steps"])
    noise = noise_config(settings, settings["eval"]["noise"])
    episodes = []
    tracks: Dict[Tuple[int, ...], Track] = {}
    for job in jobs:
        if noise.enabled:
            track = generate_track(job.specs, noise, job.track_seed)
        else:
            # Without noise the seed has no effect on the track.
            track = tracks.get(job.specs)
            if track is None:
                track = tracks[job.specs] = generate_track(
                    job.specs, noise, job.track_seed)
        episodes.append(EvalEpisode(job, run_episode(
            policy, env, track, job.start_offset)))
    return episodes


def run_suite(
    source: PolicySource, settings: Dict[str, Any], jobs: Sequence[EvalJob]
) -> List[EvalEpisode]:
    """Spread ``jobs`` over ``settings["workers"]`` processes.

    Results are merged by episode ID, so the worker count never changes
    the outcome.
    """
    workers = min(settings["workers"], len(jobs))
    if workers <= 1:
        episodes = run_jobs(source, settings, jobs)
    else:
        chunks = [jobs[i::workers] for i in range(workers)]
        with Pool(processes=workers) as pool:
            parts = pool.starmap(
                run_jobs, [(source, settings, chunk) for chunk in chunks])
        episodes = [e for part in parts for e in part]
    return sorted(episodes, key=lambda e: e.job.episode_id)


def _counts(episodes: Sequence[EvalEpisode]) -> Dict[str, Any]:
    finish_pct, avg_distance_pct = summarize(e.result for e in episodes)
    return {
        "episodes": len(episodes),
        "finished": sum(1 for e in episodes if e.result.finished),
        "finish_pct": finish_pct,
        "avg_distance_pct": avg_distance_pct,
    }


class EvalReport:
    """Per-episode results of one suite and their aggregates."""

    def __init__(
        self,
        suite: str,
        episodes: Sequence[EvalEpisode],
        info: Optional[Dict[str, Any]] = None,
    ):
        self.suite = suite
        self.episodes = sorted(episodes, key=lambda e: e.job.episode_id)
        self.info = info or {}

    def __repr__(self):
        return "<EvalReport: {} {} episodes, finish {:.2f}%>".format(
            self.suite, len(self.episodes), self.finish_pct)

    @property
    def results(self) -> List[EpisodeResult]:
        return [e.result for e in self.episodes]

    @reify
    def summary(self) -> Summary:
        return summarize(self.results)

    @property
    def finish_pct(self) -> float:
        return self.summary.finish_pct

    @property
    def avg_distance_pct(self) -> float:
        return self.summary.avg_distance_pct

    def rows(self) -> List[Dict[str, Any]]:
        return [e.row() for e in self.episodes]

    def for_direction(self, direction: str) -> List[EvalEpisode]:
        return [e for e in self.episodes if e.job.direction == direction]

    @property
    def directions(self) -> List[str]:
        seen = []
        for e in self.episodes:
            if e.job.direction and e.job.direction not in seen:
                seen.append(e.job.direction)
        return seen

    @staticmethod
    def start_offset_finishes(episodes: Sequence[EvalEpisode]) -> Dict[str, int]:
        """Finished runs per start position: L, C and R."""
        counts = {label: 0 for label in OFFSET_LABELS.values()}
        for e in episodes:
            if e.result.finished:
                counts[OFFSET_LABELS[e.job.start_offset]] += 1
        return counts

    def by_first_turn(self) -> Dict[str, Dict[str, Any]]:
        """Aggregates grouped by the turn angle of the first segment."""
        groups: Dict[int, List[EvalEpisode]] = {}
        for e in self.episodes:
            groups.setdefault(e.job.specs[0], []).append(e)
        return {str(angle): _counts(groups[angle]) for angle in sorted(groups)}

    def to_dict(self) -> Dict[str, Any]:
        """The summary JSON document."""
        adict = {"suite": self.suite}
        adict.update(self.info)
        adict.update(_counts(self.episodes))
        if self.suite == "segments":
            adict["by_first_turn"] = self.by_first_turn()
        else:
            adict["directions"] = {}
            for direction in self.directions:
                episodes = self.for_direction(direction)
                section = _counts(episodes)
                section["start_offsets"] = self.start_offset_finishes(episodes)
                adict["directions"][direction] = section
        return adict


def _eval_settings(
    settings: Optional[Dict[str, Any]], noise: Optional[bool], seed: Optional[int]
) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if noise is not None:
        overrides["eval"] = {"noise": noise}
    if seed is not None:
        overrides["seed"] = seed
    return resolve_settings(settings, overrides)


def eval_segments(
    source: PolicySource,
    settings: Optional[Dict[str, Any]] = None,
    noise: Optional[bool] = None,
    seed: Optional[int] = None,
) -> EvalReport:
    """One deterministic centre-start episode on each of the 169 tracks."""
    settings = _eval_settings(settings, noise, seed)
    episodes = run_suite(source, settings, segment_jobs(settings["seed"]))
    return EvalReport("segments", episodes, {
        "policy": source.label,
        "noise": settings["eval"]["noise"],
        "seed": settings["seed"],
    })


def eval_oval(
    source: PolicySource,
    direction: str = "both",
    settings: Optional[Dict[str, Any]] = None,
    noise: Optional[bool] = None,
    seed: Optional[int] = None,
) -> EvalReport:
    """Runs from three start offsets around the oval, per direction."""
    settings = _eval_settings(settings, noise, seed)
    jobs = oval_jobs(
        direction, settings["seed"], settings["eval"]["runs_per_start"])
    episodes = run_suite(source, settings, jobs)
    return EvalReport("oval", episodes, {
        "policy": source.label,
        "noise": settings["eval"]["noise"],
        "seed": settings["seed"],
        "runs_per_start": settings["eval"]["runs_per_start"],
    })


# Actions
# =======


class HarnessAction:
    """Base class for our actions."""

    def __init__(self, repo: FileRepository, settings: Dict[str, Any]):
        self.repo = repo
        self.settings = settings

    @reify
    def _strings(self):
        return get_strings(self.settings)


class TrainOutcome(NamedTuple):
    agent: Any
    reward_log: Path
    manifests: List[Path]
    episodes_run: int


class Train(HarnessAction):
    """Run the training protocol, writing the reward log and checkpoints.

    Every episode draws its segments and its noise from a track stream
    and its exploration from an agent stream, both split off the master
    seed by episode number, so a run is reproducible end to end.
    """

    def __init__(self, repo, settings, subscribers: Sequence[Callable] = ()):
        super(Train, self).__init__(repo, settings)
        self.subscribers = list(subscribers)

    def notify(self, event) -> None:
        for subscriber in self.subscribers:
            subscriber(event)

    def __call__(self) -> TrainOutcome:
        cfg = self.settings["train"]
        master = self.settings["seed"]
        digest = training_digest(self.settings)
        agent = build_agent(
            cfg["algo"], self.settings,
            seed=episode_seed(master, 0, const.AGENT_STREAM))
        start = self._prepare(agent, digest)
        self.repo.store_resolved_config(self.settings)

        env = make_env(self.settings, cfg["max_steps"])
        noise = noise_config(self.settings, cfg["noise"])
        pool = segment_variants() if cfg["segment_pool"] == "all" \
            else basic_variants()
        manifests = []
        for episode in range(start + 1, cfg["episodes"] + 1):
            track_rng = episode_rng(master, episode, const.TRACK_STREAM)
            specs = draw_specs(track_rng, cfg["segments_per_episode"], pool)
            track = generate_track(
                specs, noise, int(track_rng.integers(2 ** 32)))
            agent.begin_episode(
                episode - 1, episode_rng(master, episode, const.AGENT_STREAM))
            result = train_episode(agent, env, track)
            self.repo.append_reward_row({
                "episode": episode,
                "total_reward": result.total_reward,
                "steps": result.steps,
                "termination": result.termination,
                "progress": result.max_progress,
            })
            LOG.debug("Episode %d on %s: %r", episode, track.meta["specs"], result)
            self.notify(EpisodeEndedEvent(episode, result))

            if episode % cfg["checkpoint_interval"] == 0:
                path = self.repo.store_checkpoint(agent, episode, digest, master)
                manifests.append(path)
                LOG.info(self._strings.checkpoint_saved.format(
                    episode=episode, path=path))
                self.notify(CheckpointSavedEvent(episode, path))
        return TrainOutcome(
            agent, self.repo.path(const.REWARD_LOG_FILE), manifests,
            cfg["episodes"] - start)

    def _prepare(self, agent, digest: str) -> int:
        """Start or continue the run; return the episodes already done."""
        self.repo.ensure_writable()
        latest = self.repo.latest_checkpoint()
        if not self.settings["train"]["resume"]:
            if latest or self.repo.path(const.REWARD_LOG_FILE).exists():
                raise ConfigurationError(
                    self._strings.resume_conflict.format(self.repo.root))
            self.repo.start_reward_log()
            return 0

        if latest is None:
            raise ConfigurationError(
                self._strings.nothing_to_resume.format(self.repo.root))
        manifest = self.repo.load_manifest(latest)
        if manifest["train_config_digest"] != digest:
            raise ConfigurationError(
                self._strings.digest_mismatch.format(latest))
        self.repo.restore_agent(agent, latest)
        self.repo.start_reward_log(keep_through=manifest["episode"])
        LOG.info("Resuming from %s at episode %d", latest, manifest["episode"])
        return manifest["episode"]


class Evaluate(HarnessAction):
    """Run an evaluation suite and write its CSV and summary JSON."""

    def __call__(self, source: PolicySource) -> EvalReport:
        suite = self.settings["eval"]["suite"]
        if suite == "segments":
            report = eval_segments(source, self.settings)
        elif suite == "oval":
            report = eval_oval(
                source, self.settings["eval"]["direction"], self.settings)
        else:
            raise ConfigurationError(self._strings.unknown_suite.format(suite))
        self.repo.ensure_writable()
        self.repo.store_eval_rows(suite, report.rows())
        self.repo.store_summary(suite, report.to_dict())
        LOG.info(self._strings.eval_done.format(
            suite=suite, finish=report.finish_pct,
            distance=report.avg_distance_pct, count=len(report.episodes)))
        return report


class Trace(HarnessAction):
    """Record every step of one deterministic episode as JSON lines."""

    def __call__(
        self, source: PolicySource, track: Track, start_offset: float = 0.0
    ) -> Tuple[Path, EpisodeResult]:
        policy = load_policy(source, self.settings)
        env = make_env(self.settings, self.settings["eval"]["max_steps"])
        records: List[Dict[str, Any]] = [{
            "record": "header",
            "policy": source.label,
            "track_specs": list(track.meta["specs"]),
            "total_length": track.total_length,
            "start_offset": start_offset,
        }]

        def on_step(env, w, gain, termination):
            records.append(trace_record(env, w, gain, termination))

        result = run_episode(policy, env, track, start_offset, on_step)
        self.repo.ensure_writable()
        return self.repo.store_trace(records), result


def train(
    settings: Dict[str, Any],
    out: Optional[str] = None,
    subscribers: Sequence[Callable] = (),
) -> TrainOutcome:
    """Train per ``settings`` (a resolved configuration) into ``out``."""
    return Train(FileRepository(out or settings["out"]), settings, subscribers)()
