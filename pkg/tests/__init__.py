"""Tests for *markerrally*."""

from unittest import TestCase

from markerrally.data.models import NoiseConfig
from markerrally.settings import resolve_settings
from markerrally.sim_env import RaceEnv
from markerrally.track_gen import generate_oval, generate_track

# Small networks so that agents are cheap to build in tests.
SMALL_NETWORKS = {
    "dqn": {"hidden_sizes": [8], "batch_size": 4, "buffer_capacity": 1000},
    "td3": {
        "hidden_sizes": [8, 8], "batch_size": 4, "buffer_capacity": 1000,
        "warmup_steps": 10,
    },
}


class UnitTestCase(TestCase):
    """Base class for all our tests, especially unit tests."""

    def make_track(self, specs=(0, 0), noise=False, seed=0):
        """Return a generated track; noiseless unless ``noise`` is true."""
        return generate_track(list(specs), NoiseConfig(enabled=noise), seed)

    def make_oval(self, direction="acw", noise=False, seed=0):
        return generate_oval(NoiseConfig(enabled=noise), seed, direction)

    def make_env(self, specs=(0, 0), offset=0.0, **kw):
        """Return a reset environment and its first observation."""
        env = RaceEnv(**kw)
        observation = env.reset(self.make_track(specs), offset)
        return env, observation

    def make_settings(self, small=True, **overrides):
        """Return a resolved configuration, with tiny networks by default."""
        file_dict = dict(SMALL_NETWORKS) if small else None
        return resolve_settings(file_dict, overrides)
