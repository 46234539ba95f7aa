"""Value types shared by the track generator, simulator and harness."""

from dataclasses import dataclass
import math
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple

from bag.reify import reify
import numpy as np

from markerrally import const
from markerrally.data.typing import Array, Point, Polyline
from markerrally.exceptions import ConfigurationError, InvalidSegment
from markerrally.strings import MessagesBase


class Pose(NamedTuple):
    """Planar position (track units) and heading (radians, CCW from +x)."""

    x: float
    y: float
    heading: float


class Marker(NamedTuple):
    """One boundary marker. Odd IDs are on the left, even on the right."""

    id: int
    x: float
    y: float
    elevation_tier: int = 0
    yaw_deg: float = 0.0

    @property
    def is_left(self) -> bool:
        return self.id % 2 == 1


def valid_turn_angle(angle: Any) -> bool:
    """Return True if ``angle`` is a multiple of 15 within [-90, 90]."""
    if isinstance(angle, bool) or not isinstance(angle, (int, np.integer)):
        return False
    return (
        angle % const.TURN_STEP_DEG == 0
        and -const.MAX_TURN_DEG <= angle <= const.MAX_TURN_DEG
    )


@dataclass(frozen=True)
class SegmentSpec:
    """A straight (0) or a constant-radius turn; positive turns left."""

    turn_angle_deg: int

    def __post_init__(self):
        if not valid_turn_angle(self.turn_angle_deg):
            raise InvalidSegment(
                MessagesBase.invalid_turn_angle.format(self.turn_angle_deg)
            )


@dataclass(frozen=True)
class NoiseConfig:
    """Uniform placement noise applied to every boundary marker."""

    enabled: bool = False
    pos_jitter: float = 0.05
    yaw_jitter_deg: float = 15.0

    def __post_init__(self):
        if self.pos_jitter < 0 or self.yaw_jitter_deg < 0:
            raise ConfigurationError(
                MessagesBase.invalid_config.format(
                    "noise jitter must not be negative"
                )
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "enabled": self.enabled,
            "pos_jitter": self.pos_jitter,
            "yaw_jitter_deg": self.yaw_jitter_deg,
        }


class Track:
    """Ordered boundary markers, the centre-line and a finish marker.

    ``markers`` excludes the finish marker. ``meta`` holds ``specs``
    (turn angles), ``noise`` (dict), ``seed`` and ``unit_to_meter``.
    """

    def __init__(
        self,
        markers: Sequence[Marker],
        centerline: Polyline,
        finish: Marker,
        entry_pose: Pose,
        meta: Dict[str, Any],
    ):
        self.markers = tuple(markers)
        self.centerline = np.asarray(centerline, dtype=float)
        self.finish = finish
        self.entry_pose = entry_pose
        self.meta = meta
        self.total_length = float(self.cumulative_length[-1])

    def __repr__(self):
        return "<Track: {} segments, {} markers, {:.3f} units>".format(
            len(self.meta.get("specs", ())), len(self.markers),
            self.total_length,
        )

    @reify
    def cumulative_length(self) -> Array:
        """Arc length at each centre-line vertex, starting at 0."""
        edges = np.diff(self.centerline, axis=0)
        return np.concatenate(([0.0], np.cumsum(np.hypot(*edges.T))))

    @reify
    def all_markers(self) -> Tuple[Marker, ...]:
        """Boundary markers followed by the finish marker."""
        return self.markers + (self.finish,)

    @reify
    def marker_ids(self) -> Array:
        return np.array([m.id for m in self.all_markers], dtype=int)

    @reify
    def marker_xy(self) -> Array:
        """Positions of ``all_markers``, shape (n, 2)."""
        return np.array([(m.x, m.y) for m in self.all_markers], dtype=float)

    @reify
    def boundary_xy(self) -> Array:
        """Positions of ``markers`` (finish excluded), shape (n, 2)."""
        return self.marker_xy[:-1]

    @property
    def pair_count(self) -> int:
        return len(self.markers) // 2


@dataclass(frozen=True)
class CameraConfig:
    """Virtual marker camera; ranges in track units."""

    horizontal_fov_deg: float = 69.0
    max_range: float = 8.0
    min_range: float = 0.05

    def __post_init__(self):
        if not 0 < self.min_range < self.max_range:
            raise ConfigurationError(MessagesBase.invalid_config.format(
                "camera needs 0 < min_range < max_range"))
        if not 0 < self.horizontal_fov_deg <= 180:
            raise ConfigurationError(MessagesBase.invalid_config.format(
                "camera field of view must be in (0, 180]"))


@dataclass(frozen=True)
class RewardConfig:
    """``scale`` is the maximum reward, ``drop_off`` multiplies the angle."""

    scale: float = 10.0
    drop_off: float = 6.0
    pair_mode: str = "lowest"

    def __post_init__(self):
        if self.scale <= 0 or self.drop_off <= 0:
            raise ConfigurationError(MessagesBase.invalid_config.format(
                "reward scale and drop-off must be positive"))
        if self.pair_mode not in ("lowest", "consecutive"):
            raise ConfigurationError(MessagesBase.invalid_config.format(
                "pair_mode must be lowest or consecutive"))


class Observation(NamedTuple):
    """What the virtual camera reports.

    ``slots`` holds six (x lateral, z forward) pairs in meters, real
    entries first in ascending z. ``visible`` holds every visible marker
    (finish included) in ascending z, with its (x, z) in ``visible_xz``.
    """

    slots: Tuple[Point, ...]
    visible_count: int
    pair_visible: bool
    visible: Tuple[Marker, ...] = ()
    visible_xz: Tuple[Point, ...] = ()

    def as_vector(self) -> Array:
        """Return the 12 numbers fed to the networks (float32)."""
        return np.asarray(self.slots, dtype=np.float32).reshape(-1)

    def z_of(self, marker_id: int) -> Optional[float]:
        """Return the forward distance (m) of a visible marker, or None."""
        for marker, (_, z) in zip(self.visible, self.visible_xz):
            if marker.id == marker_id:
                return z
        return None


class Action(NamedTuple):
    angular_velocity: float  # rad/s


class Termination(NamedTuple):
    kind: str
    step_index: int

    @property
    def done(self) -> bool:
        return self.kind != const.RUNNING


def wrap_angle(angle: float) -> float:
    """Normalize ``angle`` (radians) into (-pi, pi]."""
    wrapped = math.atan2(math.sin(angle), math.cos(angle))
    return math.pi if wrapped == -math.pi else wrapped
