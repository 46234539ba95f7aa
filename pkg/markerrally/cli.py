"""The ``marker-rally`` command: gen-track, train, eval and trace.

Exit codes: 0 on success, 2 for invalid flags or configuration
(including a checkpoint path that does not exist), 3 for files that
cannot be read or written.
"""

import argparse
import logging
from pathlib import Path
import sys
from typing import Any, Dict, List, Optional, Sequence

from markerrally import const
from markerrally.data.models import SegmentSpec
from markerrally.data.repository import FileRepository
from markerrally.events import CheckpointSavedEvent, EpisodeEndedEvent
from markerrally.exceptions import (
    ConfigurationError, InvalidSegment, MarkerRallyError,
)
from markerrally.harness import Evaluate, PolicySource, Trace, Train
from markerrally.settings import (
    deep_merge, get_default_settings, noise_config, resolve_settings,
)
from markerrally.strings import MessagesBase, get_strings
from markerrally.track_gen import generate_oval, generate_track

LOG = logging.getLogger(__name__)


def parse_segments(text: str) -> List[int]:
    """Turn ``"90,-90"`` into turn angles; name any value that is invalid."""
    angles = []
    for item in text.split(","):
        item = item.strip()
        try:
            angle = int(item)
        except ValueError:
            raise InvalidSegment(MessagesBase.invalid_turn_angle.format(item))
        SegmentSpec(angle)
        angles.append(angle)
    return angles


def build_track(settings: Dict[str, Any]):
    """Generate the track described by the ``track`` settings section."""
    section = settings["track"]
    noise = noise_config(settings, section["noise"])
    if section["oval"]:
        return generate_oval(noise, settings["seed"], section["direction"])
    return generate_track(section["segments"], noise, settings["seed"])


class ProgressReporter:
    """Prints checkpoints and a running mean of episode rewards."""

    def __init__(self, strings, every: int = 100, stream=None):
        self.strings = strings
        self.every = every
        self.stream = stream or sys.stdout
        self.rewards: List[float] = []

    def __call__(self, event) -> None:
        if isinstance(event, EpisodeEndedEvent):
            self.rewards.append(event.result.total_reward)
            if len(self.rewards) == self.every:
                LOG.info("Episode %d: mean reward %.3f over the last %d",
                         event.episode, sum(self.rewards) / self.every,
                         self.every)
                self.rewards = []
        elif isinstance(event, CheckpointSavedEvent):
            print(self.strings.checkpoint_saved.format(
                episode=event.episode, path=event.path), file=self.stream)


# Commands
# ========


def _policy_source(args) -> PolicySource:
    if args.scripted:
        return PolicySource(scripted=args.scripted)
    if not args.checkpoint:
        raise ConfigurationError(MessagesBase.checkpoint_needed)
    return PolicySource(checkpoint=args.checkpoint)


def cmd_gen_track(args, settings: Dict[str, Any]) -> int:
    track = build_track(settings)
    path = Path(args.file or Path(settings["out"]) / const.TRACK_FILE)
    repo = FileRepository(path.parent)
    repo.ensure_writable()
    repo.store_track(track, path)
    repo.store_resolved_config(settings)
    print(get_strings(settings).track_written.format(
        path=path, length=track.total_length, count=len(track.markers)))
    return const.EXIT_OK


def cmd_train(args, settings: Dict[str, Any]) -> int:
    strings = get_strings(settings)
    repo = FileRepository(settings["out"])
    action = Train(repo, settings, subscribers=[ProgressReporter(strings)])
    outcome = action()
    print(strings.training_done.format(
        episodes=outcome.episodes_run, log=outcome.reward_log))
    return const.EXIT_OK


def cmd_eval(args, settings: Dict[str, Any]) -> int:
    strings = get_strings(settings)
    repo = FileRepository(settings["out"])
    report = Evaluate(repo, settings)(_policy_source(args))
    repo.store_resolved_config(settings)
    print(strings.eval_done.format(
        suite=report.suite, finish=report.finish_pct,
        distance=report.avg_distance_pct, count=len(report.episodes)))
    return const.EXIT_OK


def cmd_trace(args, settings: Dict[str, Any]) -> int:
    source = _policy_source(args)
    repo = FileRepository(settings["out"])
    if args.track:
        track = repo.load_track(args.track)
    else:
        track = build_track(settings)
    path, result = Trace(repo, settings)(source, track, args.start_offset)
    repo.store_resolved_config(settings)
    print(get_strings(settings).trace_written.format(
        steps=result.steps, path=path, termination=result.termination))
    return const.EXIT_OK


# Parsing
# =======


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument(
        "--out", help="output directory (default ${} or ./runs)".format(
            const.OUT_ENV_VAR))
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument(
        "--workers", type=int, help="processes for evaluation episodes")
    common.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="-v for progress, -vv for debugging output")

    parser = argparse.ArgumentParser(
        prog="marker-rally",
        description="Procedural marker tracks, a camera-driven robot "
        "simulator, and DQN/TD3 agents that learn to race on them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "gen-track", parents=[common], help="write a track JSON file")
    gen.add_argument("--segments", help="turn angles, e.g. 90,-90")
    gen.add_argument("--oval", action="store_true", default=None)
    gen.add_argument("--direction", choices=const.DIRECTIONS)
    gen.add_argument("--noise", action="store_true", default=None)
    gen.add_argument("--file", help="track file to write")
    gen.set_defaults(handler=cmd_gen_track)

    train = sub.add_parser(
        "train", parents=[common], help="train an agent, saving checkpoints")
    train.add_argument("--algo", help="dqn or td3")
    train.add_argument("--episodes", type=int)
    train.add_argument("--max-steps", type=int)
    train.add_argument("--checkpoint-interval", type=int)
    train.add_argument("--noise", action="store_true", default=None)
    train.add_argument("--segments-per-episode", type=int)
    train.add_argument("--segment-pool", choices=("all", "basic"))
    train.add_argument("--resume", action="store_true", default=None)
    train.set_defaults(handler=cmd_train)

    evaluate = sub.add_parser(
        "eval", parents=[common], help="evaluate a checkpoint on a suite")
    evaluate.add_argument("checkpoint", nargs="?", help="manifest.json")
    evaluate.add_argument("--scripted", choices=sorted(const.SCRIPTED_POLICIES))
    evaluate.add_argument("--suite", choices=("segments", "oval"))
    evaluate.add_argument("--direction", choices=const.DIRECTIONS + ("both",))
    evaluate.add_argument("--noise", action="store_true", default=None)
    evaluate.add_argument("--runs-per-start", type=int)
    evaluate.add_argument("--max-steps", type=int)
    evaluate.set_defaults(handler=cmd_eval)

    trace = sub.add_parser(
        "trace", parents=[common], help="record one episode step by step")
    trace.add_argument("checkpoint", nargs="?", help="manifest.json")
    trace.add_argument("--scripted", choices=sorted(const.SCRIPTED_POLICIES))
    trace.add_argument("--track", help="track file (default: generate one)")
    trace.add_argument("--start-offset", type=float, default=0.0)
    trace.add_argument("--max-steps", type=int)
    trace.set_defaults(handler=cmd_trace)
    return parser


def _put(adict: Dict[str, Any], section: Optional[str], key: str, value) -> None:
    if value is None:
        return
    if section is None:
        adict[key] = value
    else:
        adict.setdefault(section, {})[key] = value


def overrides_from(args) -> Dict[str, Any]:
    """Collect the flags that were given into a settings-shaped dict."""
    overrides: Dict[str, Any] = {}
    for key in ("seed", "out", "workers"):
        _put(overrides, None, key, getattr(args, key))
    command = args.command
    if command == "gen-track":
        if args.segments is not None:
            _put(overrides, "track", "segments", parse_segments(args.segments))
        _put(overrides, "track", "oval", args.oval)
        _put(overrides, "track", "direction", args.direction)
        _put(overrides, "track", "noise", args.noise)
    elif command == "train":
        if args.algo is not None and args.algo not in const.ALGORITHMS:
            raise ConfigurationError(MessagesBase.unknown_algorithm.format(
                args.algo, ", ".join(sorted(const.ALGORITHMS))))
        for key in ("algo", "episodes", "max_steps", "checkpoint_interval",
                    "noise", "segments_per_episode", "segment_pool", "resume"):
            _put(overrides, "train", key, getattr(args, key))
    elif command == "eval":
        for key in ("suite", "direction", "noise", "runs_per_start",
                    "max_steps"):
            _put(overrides, "eval", key, getattr(args, key))
    elif command == "trace":
        _put(overrides, "eval", "max_steps", args.max_steps)
    return overrides


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s")


def fit_checkpoint_interval(
    file_dict: Optional[Dict[str, Any]], overrides: Dict[str, Any]
) -> None:
    """With ``--episodes`` alone, save at the end if the interval won't divide.

    ``train --episodes 10`` then writes a single checkpoint at episode
    10 instead of failing on the default interval of 500.
    """
    train = overrides.get("train", {})
    if "episodes" not in train or "checkpoint_interval" in train:
        return
    interval = deep_merge(get_default_settings(), file_dict)["train"][
        "checkpoint_interval"]
    if isinstance(interval, int) and interval > 0 \
            and train["episodes"] % interval:
        train["checkpoint_interval"] = train["episodes"]


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse has already printed the problem
        return int(e.code or 0)
    configure_logging(args.verbose)
    try:
        file_dict = None
        if args.config:
            file_dict = FileRepository(".").load_config_file(args.config)
        overrides = overrides_from(args)
        fit_checkpoint_interval(file_dict, overrides)
        settings = resolve_settings(file_dict, overrides)
        return args.handler(args, settings)
    except MarkerRallyError as e:
        LOG.debug("Command failed", exc_info=True)
        print("marker-rally: {}".format(e), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
