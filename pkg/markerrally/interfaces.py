"""Interfaces that policies and learning agents provide."""

from zope.interface import Attribute, Interface


class IPolicy(Interface):
    """Drives the robot by choosing an angular velocity each step."""

    name = Attribute("Short name used in reports and traces")

    def reset(env):
        """Prepare for a new episode on ``env`` (a reset RaceEnv)."""

    def act(observation):
        """Return the deterministic angular velocity (rad/s)."""


class ILearner(IPolicy):
    """A policy that improves from its own experience."""

    algo = Attribute("Algorithm name: dqn or td3")

    def begin_episode(episode, rng):
        """Set the exploration schedule and random stream for an episode."""

    def explore(observation):
        """Return ``(stored_action, angular_velocity)`` with exploration."""

    def remember(transition):
        """Store one Transition."""

    def learn():
        """Run the per-step update; return a loss, or None when idle."""

    def networks():
        """Return a dict of network name to MlpParams."""

    def optimizers():
        """Return a dict of network name to AdamState."""

    def config_dict():
        """Return the agent hyperparameters as plain JSON types."""

    def counters():
        """Return the step counters a resumed run must restore."""

    def restore_counters(counters):
        """Set the counters returned by ``counters()`` on a fresh agent."""
