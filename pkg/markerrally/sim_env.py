"""A 5 Hz unicycle robot driving a marker track with a virtual camera."""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from markerrally import const
from markerrally.data.models import (
    Action, CameraConfig, Marker, Observation, Pose, RewardConfig,
    Termination, Track, wrap_angle,
)
from markerrally.data.typing import Point
from markerrally.exceptions import (
    ConfigurationError, EpisodeOver, InvalidAction,
)
from markerrally.strings import MessagesBase

LOG = logging.getLogger(__name__)

Pair = Tuple[Marker, Marker]
LINEAR_SPEED = const.LINEAR_SPEED_MPS / const.UNIT_TO_METER  # units/s


def integrate_unicycle(
    pose: Pose, linear_v: float, angular_w: float, dt: float
) -> Pose:
    """Advance ``pose`` under a constant twist for ``dt`` seconds.

    The result is the exact circular arc (or straight line when
    ``|angular_w| < 1e-9``). Lengths come out in whatever unit
    ``linear_v`` uses.
    """
    if dt <= 0:
        raise ConfigurationError(
            MessagesBase.invalid_config.format("dt must be positive"))
    x, y, heading = pose
    if abs(angular_w) < 1e-9:
        return Pose(
            x + linear_v * dt * math.cos(heading),
            y + linear_v * dt * math.sin(heading),
            wrap_angle(heading),
        )
    half_turn = 0.5 * angular_w * dt
    # chord of the arc: length v*dt*sin(a)/a, pointing along heading + a
    chord = linear_v * dt * math.sin(half_turn) / half_turn
    return Pose(
        x + chord * math.cos(heading + half_turn),
        y + chord * math.sin(heading + half_turn),
        wrap_angle(heading + 2 * half_turn),
    )


def camera_frame(pose: Pose, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return lateral ``x`` (positive right) and forward ``z`` in units."""
    d = points - (pose.x, pose.y)
    cos_h, sin_h = math.cos(pose.heading), math.sin(pose.heading)
    z = d[:, 0] * cos_h + d[:, 1] * sin_h
    x = d[:, 0] * sin_h - d[:, 1] * cos_h
    return x, z


def observe(pose: Pose, track: Track, cam: CameraConfig) -> Observation:
    """Report the six nearest visible markers as the camera would.

    A marker is visible when it is in front of the robot, within the
    camera range and inside the horizontal field of view. Markers do
    not occlude each other.
    """
    x, z = camera_frame(pose, track.marker_xy)
    distance = np.hypot(x, z)
    visible = (
        (z > 0)
        & (distance >= cam.min_range)
        & (distance <= cam.max_range)
        & (np.abs(np.arctan2(x, z)) <= math.radians(cam.horizontal_fov_deg / 2))
    )
    indices = np.flatnonzero(visible)
    indices = indices[np.argsort(z[indices], kind="stable")]
    scale = const.UNIT_TO_METER
    visible_xz = tuple(
        (float(x[i]) * scale, float(z[i]) * scale) for i in indices
    )
    seen = tuple(track.all_markers[i] for i in indices)
    slots = list(visible_xz[:const.OBSERVED_MARKERS])
    padding = (0.0, cam.max_range * scale)
    slots.extend([padding] * (const.OBSERVED_MARKERS - len(slots)))
    return Observation(
        slots=tuple(slots),
        visible_count=min(len(indices), const.OBSERVED_MARKERS),
        pair_visible=lowest_pair(seen) is not None,
        visible=seen,
        visible_xz=visible_xz,
    )


def lowest_pair(visible: Sequence[Marker]) -> Optional[Pair]:
    """Return the lowest-ID odd and lowest-ID even markers, if both exist.

    The finish marker does not belong to any pair.
    """
    odd = [m for m in visible if m.id % 2 == 1]
    even = [m for m in visible if m.id % 2 == 0 and m.id != const.FINISH_ID]
    if not odd or not even:
        return None
    return (min(odd, key=lambda m: m.id), min(even, key=lambda m: m.id))


def consecutive_pair(visible: Sequence[Marker]) -> Optional[Pair]:
    """Return the lowest pair whose IDs are 2k-1 and 2k, if any."""
    by_id = {m.id: m for m in visible}
    for marker_id in sorted(by_id):
        if marker_id % 2 == 1 and marker_id + 1 in by_id:
            return by_id[marker_id], by_id[marker_id + 1]
    return None


def midpoint(pair: Pair) -> Point:
    left, right = pair
    return ((left.x + right.x) / 2, (left.y + right.y) / 2)


def compute_theta(pose: Pose, target: Point) -> float:
    """Return the absolute angle (degrees) between heading and ``target``."""
    dx, dy = target[0] - pose.x, target[1] - pose.y
    cos_h, sin_h = math.cos(pose.heading), math.sin(pose.heading)
    cross = cos_h * dy - sin_h * dx
    dot = cos_h * dx + sin_h * dy
    return abs(math.degrees(math.atan2(cross, dot)))


def reward(theta_deg: float, cfg: RewardConfig) -> float:
    """``scale * cos(drop_off * theta)``, zero once that angle reaches 90°."""
    angle = cfg.drop_off * theta_deg
    if angle >= 90.0:
        return 0.0
    return max(0.0, cfg.scale * math.cos(math.radians(angle)))


def locate(
    pose: Pose, track: Track, near: Optional[int] = None
) -> Tuple[int, float]:
    """Return the centre-line edge closest to ``pose`` and the arc length
    covered at the projection onto it.

    With ``near`` only edges starting within PROGRESS_WINDOW of arc from
    edge ``near`` are candidates. On a closed track the end of the lap
    coincides with its start; the window keeps the projection on the
    side of the seam the robot is actually on.
    """
    start = track.centerline[:-1]
    edge = track.centerline[1:] - start
    sq_length = np.einsum("ij,ij->i", edge, edge)
    rel = np.array((pose.x, pose.y)) - start
    t = np.clip(
        np.einsum("ij,ij->i", rel, edge) / np.where(sq_length > 0, sq_length, 1),
        0.0, 1.0,
    )
    gap = rel - t[:, None] * edge
    sq_gap = np.einsum("ij,ij->i", gap, gap)
    if near is not None:
        starts = track.cumulative_length[:-1]
        far = np.abs(starts - starts[near]) > const.PROGRESS_WINDOW
        sq_gap = np.where(far, np.inf, sq_gap)
    nearest = int(np.argmin(sq_gap))
    covered = track.cumulative_length[nearest] + t[nearest] * math.sqrt(
        sq_length[nearest]
    )
    return nearest, float(covered)


def progress(pose: Pose, track: Track, near: Optional[int] = None) -> float:
    """Fraction of the centre-line covered at the closest point to ``pose``."""
    _, covered = locate(pose, track, near)
    return float(min(1.0, max(0.0, covered / track.total_length)))


class RaceEnv:
    """One robot on one track; reset() then step() until termination.

    Geometry is kept in track units. The robot drives at a constant
    0.5 m/s and is commanded only through its angular velocity.
    """

    def __init__(
        self,
        camera: CameraConfig = CameraConfig(),
        reward_config: RewardConfig = RewardConfig(),
        max_steps: int = const.MAX_STEPS,
    ):
        self.camera = camera
        self.reward_config = reward_config
        self.max_steps = max_steps
        self.track: Optional[Track] = None
        self.pose: Optional[Pose] = None
        self.termination: Optional[Termination] = None
        self.step_index = 0
        self.blind_steps = 0
        self.max_progress = 0.0
        self.progress = 0.0
        self.progress_edge = 0
        self.theta_deg: Optional[float] = None
        self.observation: Optional[Observation] = None

    def reset(self, track: Track, start_lateral_offset: float = 0.0) -> Observation:
        """Place the robot at the track entry, shifted right by the offset."""
        if abs(start_lateral_offset) >= const.TRACK_HALF_WIDTH:
            raise ConfigurationError(
                MessagesBase.offset_outside_track.format(start_lateral_offset))
        entry = track.entry_pose
        self.track = track
        self.pose = Pose(
            entry.x + start_lateral_offset * math.sin(entry.heading),
            entry.y - start_lateral_offset * math.cos(entry.heading),
            entry.heading,
        )
        self.termination = Termination(const.RUNNING, 0)
        self.step_index = 0
        self.blind_steps = 0
        self.progress_edge = 0
        self.progress = self.max_progress = self._track_progress()
        self.theta_deg = None
        self.observation = observe(self.pose, track, self.camera)
        return self.observation

    def _track_progress(self) -> float:
        """Project the pose near the previous projection; remember where."""
        self.progress_edge, covered = locate(
            self.pose, self.track, near=self.progress_edge)
        return min(1.0, max(0.0, covered / self.track.total_length))

    def reward_pair(self, observation: Observation) -> Optional[Pair]:
        if self.reward_config.pair_mode == "consecutive":
            return consecutive_pair(observation.visible)
        return lowest_pair(observation.visible)

    def step(self, action) -> Tuple[Observation, float, Termination]:
        """Apply ``action`` for one 0.2 s control period."""
        if self.termination is None:
            raise EpisodeOver(MessagesBase.environment_not_reset)
        if self.termination.done:
            raise EpisodeOver(
                MessagesBase.step_after_termination.format(self.termination.kind))
        w = float(action.angular_velocity if isinstance(action, Action) else action)
        if not abs(w) <= const.MAX_ANGULAR_SPEED + 1e-9:
            raise InvalidAction(MessagesBase.action_out_of_range.format(w))

        self.pose = integrate_unicycle(self.pose, LINEAR_SPEED, w, const.CONTROL_PERIOD)
        self.step_index += 1
        obs = self.observation = observe(self.pose, self.track, self.camera)

        pair = self.reward_pair(obs)
        if pair is None:
            self.theta_deg = None
            gain = 0.0
        else:
            self.theta_deg = compute_theta(self.pose, midpoint(pair))
            gain = reward(self.theta_deg, self.reward_config)
        self.blind_steps = 0 if obs.pair_visible else self.blind_steps + 1
        self.progress = self._track_progress()
        self.max_progress = max(self.max_progress, self.progress)

        kind = self._check_termination(obs)
        if kind == const.FINISHED:
            self.max_progress = 1.0
        self.termination = Termination(kind, self.step_index)
        if kind != const.RUNNING:
            LOG.debug("Episode ended: %s at step %d", kind, self.step_index)
        return obs, gain, self.termination

    def _check_termination(self, obs: Observation) -> str:
        finish_z = obs.z_of(const.FINISH_ID)
        if finish_z is not None and finish_z <= const.FINISH_DETECTION_Z:
            return const.FINISHED
        gaps = self.track.boundary_xy - (self.pose.x, self.pose.y)
        if np.min(np.hypot(gaps[:, 0], gaps[:, 1])) <= const.COLLISION_DISTANCE:
            return const.COLLISION
        if self.blind_steps >= const.BLIND_STEP_LIMIT:
            return const.BLIND
        if self.step_index >= self.max_steps:
            return const.TIMEOUT
        return const.RUNNING
