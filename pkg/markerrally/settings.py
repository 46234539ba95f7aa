"""Provides the default run configuration and resolves overrides onto it."""

from copy import deepcopy
from hashlib import sha256
import json
import os
from typing import Any, Dict, Optional

import colander as c

from markerrally import const
from markerrally.agents.dqn import DqnConfig
from markerrally.agents.td3 import Td3Config
from markerrally.data.models import CameraConfig, NoiseConfig, RewardConfig
from markerrally.exceptions import ConfigurationError
from markerrally.schemas import RunConfigSchema
from markerrally.strings import MessagesBase

DictStr = Dict[str, Any]


def _config_section(config) -> DictStr:
    adict = dict(vars(config))
    if "hidden_sizes" in adict:
        adict["hidden_sizes"] = list(adict["hidden_sizes"])
    return adict


def get_default_settings() -> DictStr:
    """Return the default run configuration.

    Commands resolve the config file and their flags onto a copy of
    this dictionary, so every field always has a value and all of them
    end up in ``config_resolved.json``.
    """
    noise = NoiseConfig()
    return {
        "seed": 0,
        "out": os.environ.get(const.OUT_ENV_VAR) or "runs",
        "workers": 1,
        "utilities": {
            const.DQN_CLASS: "markerrally.agents.dqn:DqnAgent",
            const.TD3_CLASS: "markerrally.agents.td3:Td3Agent",
            const.STRING_CLASS: "markerrally.strings:MessagesBase",
        },
        "train": {
            "algo": "td3",
            "episodes": 5000,
            "max_steps": const.MAX_STEPS,
            "checkpoint_interval": 500,
            "noise": False,
            "segments_per_episode": 2,
            "segment_pool": "all",
            "resume": False,
        },
        "eval": {
            "suite": "segments",
            "noise": False,
            "direction": "both",
            "runs_per_start": const.OVAL_RUNS_PER_START,
            "max_steps": const.MAX_STEPS,
        },
        "track": {
            "segments": [0, 0],
            "oval": False,
            "direction": const.ANTICLOCKWISE,
            "noise": False,
        },
        "noise": {
            "pos_jitter": noise.pos_jitter,
            "yaw_jitter_deg": noise.yaw_jitter_deg,
        },
        "camera": _config_section(CameraConfig()),
        "reward": _config_section(RewardConfig()),
        "dqn": _config_section(DqnConfig()),
        "td3": _config_section(Td3Config()),
    }


def deep_merge(base: DictStr, override: Optional[DictStr]) -> DictStr:
    """Return a copy of ``base`` with ``override`` merged in; override wins."""
    merged = deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = deepcopy(value)
    return merged


def resolve_settings(
    file_dict: Optional[DictStr] = None, overrides: Optional[DictStr] = None
) -> DictStr:
    """Merge defaults, a config file and flag overrides, then validate.

    Raise ConfigurationError listing every invalid or unknown key.
    """
    merged = deep_merge(deep_merge(get_default_settings(), file_dict), overrides)
    try:
        return RunConfigSchema().deserialize(merged)
    except c.Invalid as e:
        errors = e.asdict()
        detail = "; ".join(
            "{}: {}".format(k, v) for k, v in sorted(errors.items()))
        raise ConfigurationError(
            MessagesBase.invalid_config.format(detail), errors=errors)


def config_digest(resolved: DictStr) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, no whitespace)."""
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return sha256(canonical.encode("utf-8")).hexdigest()


def noise_config(settings: DictStr, enabled: bool) -> NoiseConfig:
    return NoiseConfig(enabled=enabled, **settings["noise"])


def camera_config(settings: DictStr) -> CameraConfig:
    return CameraConfig(**settings["camera"])


def reward_config(settings: DictStr) -> RewardConfig:
    return RewardConfig(**settings["reward"])


def training_digest(settings: DictStr) -> str:
    """Digest of everything that shapes a training run.

    The episode count, the checkpoint interval and the resume flag are
    left out so that a run can be continued, or extended, from its
    checkpoints.
    """
    algo = settings["train"]["algo"]
    train = {
        k: v for k, v in settings["train"].items()
        if k not in ("episodes", "checkpoint_interval", "resume")
    }
    return config_digest({
        "seed": settings["seed"],
        "train": train,
        "noise": settings["noise"],
        "camera": settings["camera"],
        "reward": settings["reward"],
        algo: settings[algo],
    })
