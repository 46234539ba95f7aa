"""Hand-written policies used as evaluation baselines."""

import math

import numpy as np
from zope.interface import implementer

from markerrally import const
from markerrally.data.models import wrap_angle
from markerrally.interfaces import IPolicy


@implementer(IPolicy)
class CenterlineFollower:
    """Pure pursuit on the true centre-line; reads the robot pose directly.

    This is the upper bound any learned policy can be compared against.
    """

    name = "follower"

    def __init__(self, lookahead: float = 2.0, gain: float = 2.0):
        self.lookahead = lookahead
        self.gain = gain
        self.env = None

    def reset(self, env) -> None:
        self.env = env

    def act(self, observation) -> float:
        pose, track = self.env.pose, self.env.track
        wanted = self.env.progress * track.total_length + self.lookahead
        ahead = min(
            int(np.searchsorted(track.cumulative_length, wanted)),
            len(track.centerline) - 1,
        )
        tx, ty = track.centerline[ahead]
        error = wrap_angle(math.atan2(ty - pose.y, tx - pose.x) - pose.heading)
        limit = const.MAX_ANGULAR_SPEED
        return float(np.clip(self.gain * error, -limit, limit))


@implementer(IPolicy)
class NeverTurn:
    """Drives straight ahead whatever it sees."""

    name = "straight"

    def reset(self, env) -> None:
        pass

    def act(self, observation) -> float:
        return 0.0
