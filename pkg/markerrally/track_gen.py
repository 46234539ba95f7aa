"""Procedural marker tracks: segments, chained training tracks, the oval.

All geometry is in track units. Left markers carry odd IDs and right
markers even IDs; ID 0 is reserved for the finish marker.
"""

from itertools import product
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from markerrally import const
from markerrally.data.models import (
    Marker, NoiseConfig, Pose, SegmentSpec, Track, wrap_angle,
)
from markerrally.data.typing import Polyline
from markerrally.exceptions import ConfigurationError
from markerrally.strings import MessagesBase

LOG = logging.getLogger(__name__)

SpecLike = Union[SegmentSpec, int]
DEFAULT_ENTRY_POSE = Pose(0.0, 0.0, const.DEFAULT_ENTRY_HEADING)


def segment_variants() -> List[SegmentSpec]:
    """Return the 13 segment kinds in ascending turn angle."""
    return [
        SegmentSpec(angle)
        for angle in range(
            -const.MAX_TURN_DEG, const.MAX_TURN_DEG + 1, const.TURN_STEP_DEG
        )
    ]


def basic_variants() -> List[SegmentSpec]:
    """Straight, 90° left and 90° right: the single-segment curriculum."""
    return [SegmentSpec(0), SegmentSpec(90), SegmentSpec(-90)]


def two_segment_combinations() -> List[Tuple[SegmentSpec, SegmentSpec]]:
    """Return all 169 ordered pairs of segment variants, first-major."""
    return list(product(segment_variants(), repeat=2))


def as_spec(spec: SpecLike) -> SegmentSpec:
    return spec if isinstance(spec, SegmentSpec) else SegmentSpec(spec)


def segment_length(spec: SegmentSpec) -> float:
    """Centre-line arc length of one segment."""
    if spec.turn_angle_deg == 0:
        return (const.PAIRS_PER_SEGMENT - 1) * const.PAIR_SPACING
    return const.CENTER_TURN_RADIUS * math.radians(abs(spec.turn_angle_deg))


def centerline_pose(
    spec: SegmentSpec, entry_pose: Pose, distance: float
) -> Pose:
    """Return the noiseless centre-line pose ``distance`` into a segment."""
    x0, y0, heading = entry_pose
    if spec.turn_angle_deg == 0:
        return Pose(
            x0 + distance * math.cos(heading),
            y0 + distance * math.sin(heading),
            heading,
        )
    sign = 1.0 if spec.turn_angle_deg > 0 else -1.0
    radius = const.CENTER_TURN_RADIUS
    turned = sign * distance / radius
    # The arc centre sits on the inner side of the entry pose.
    cx = x0 - sign * radius * math.sin(heading)
    cy = y0 + sign * radius * math.cos(heading)
    new_heading = heading + turned
    return Pose(
        cx + sign * radius * math.sin(new_heading),
        cy - sign * radius * math.cos(new_heading),
        wrap_angle(new_heading),
    )


def arc_center(spec: SegmentSpec, entry_pose: Pose) -> Optional[Tuple[float, float]]:
    """Return the centre of a turn segment's arc; None for a straight."""
    if spec.turn_angle_deg == 0:
        return None
    sign = 1.0 if spec.turn_angle_deg > 0 else -1.0
    radius = const.CENTER_TURN_RADIUS
    return (
        entry_pose.x - sign * radius * math.sin(entry_pose.heading),
        entry_pose.y + sign * radius * math.cos(entry_pose.heading),
    )


def _boundary_marker(
    centre: Pose, side: int, marker_id: int, tier: int
) -> Marker:
    """Place a marker one half-width to the left (+1) or right (-1)."""
    offset = side * const.TRACK_HALF_WIDTH
    # Markers face the oncoming robot, turned inward toward the centre-line.
    yaw = math.degrees(centre.heading) + 180.0 + side * const.MARKER_INWARD_YAW_DEG
    return Marker(
        id=marker_id,
        x=centre.x - offset * math.sin(centre.heading),
        y=centre.y + offset * math.cos(centre.heading),
        elevation_tier=tier,
        yaw_deg=math.degrees(wrap_angle(math.radians(yaw))),
    )


def _jitter(marker: Marker, noise: NoiseConfig, rng: np.random.Generator) -> Marker:
    dx, dy = rng.uniform(-noise.pos_jitter, noise.pos_jitter, size=2)
    dyaw = rng.uniform(-noise.yaw_jitter_deg, noise.yaw_jitter_deg)
    return marker._replace(
        x=marker.x + float(dx),
        y=marker.y + float(dy),
        yaw_deg=math.degrees(
            wrap_angle(math.radians(marker.yaw_deg + float(dyaw)))),
    )


def _sample_centerline(
    spec: SegmentSpec, entry_pose: Pose, length: float
) -> Polyline:
    edges = max(1, int(math.ceil(length / const.CENTERLINE_STEP - 1e-9)))
    distances = np.linspace(0.0, length, edges + 1)
    return np.array(
        [centerline_pose(spec, entry_pose, s)[:2] for s in distances]
    )


def generate_segment(
    spec: SpecLike,
    entry_pose: Pose,
    first_pair_index: int,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> Tuple[List[Marker], Polyline, Pose]:
    """Lay 15 marker pairs along one segment.

    Pairs are equidistant in centre-line arc length from the segment
    start to its end, so a straight spans 14 units. Pair ``k`` gets
    IDs ``2(first_pair_index + k) - 1`` (left) and ``2(first_pair_index + k)``
    (right). Noise, when enabled, is drawn per marker, left before right,
    after nominal placement.

    Return ``(markers, centerline, exit_pose)``; the exit pose is on the
    noiseless centre-line.
    """
    if first_pair_index < 1:
        raise ConfigurationError(MessagesBase.invalid_config.format(
            "first_pair_index must be at least 1"))
    spec = as_spec(spec)
    length = segment_length(spec)
    last = const.PAIRS_PER_SEGMENT - 1
    markers = []
    for k in range(const.PAIRS_PER_SEGMENT):
        centre = centerline_pose(spec, entry_pose, length * k / last)
        pair_index = first_pair_index + k
        tier = (pair_index + 1) % 2
        pair = (
            _boundary_marker(centre, +1, 2 * pair_index - 1, tier),
            _boundary_marker(centre, -1, 2 * pair_index, tier),
        )
        for marker in pair:
            markers.append(_jitter(marker, noise, rng) if noise.enabled else marker)
    exit_pose = centerline_pose(spec, entry_pose, length)
    return markers, _sample_centerline(spec, entry_pose, length), exit_pose


def generate_track(
    specs: Sequence[SpecLike],
    noise: NoiseConfig,
    seed: int,
    entry_pose: Pose = DEFAULT_ENTRY_POSE,
) -> Track:
    """Chain segments exit-to-entry and close with a finish marker."""
    if not specs:
        raise ConfigurationError(MessagesBase.empty_segment_list)
    specs = [as_spec(s) for s in specs]
    rng = np.random.default_rng(seed)
    markers: List[Marker] = []
    pieces = []
    pose = entry_pose
    for number, spec in enumerate(specs):
        seg_markers, centerline, pose = generate_segment(
            spec,
            pose,
            first_pair_index=number * const.PAIRS_PER_SEGMENT + 1,
            noise=noise,
            rng=rng,
        )
        markers.extend(seg_markers)
        pieces.append(centerline if number == 0 else centerline[1:])
    centerline = np.concatenate(pieces)
    end = centerline[-1]
    finish = Marker(
        id=const.FINISH_ID,
        x=float(end[0]),
        y=float(end[1]),
        elevation_tier=0,
        yaw_deg=math.degrees(wrap_angle(pose.heading + math.pi)),
    )
    track = Track(
        markers=markers,
        centerline=centerline,
        finish=finish,
        entry_pose=entry_pose,
        meta={
            "seed": seed,
            "noise": noise.to_dict(),
            "specs": [s.turn_angle_deg for s in specs],
            "unit_to_meter": const.UNIT_TO_METER,
        },
    )
    LOG.debug("Generated %r (seed %s)", track, seed)
    return track


def oval_specs(direction: str) -> List[SegmentSpec]:
    """Straight, two 90° turns, straight, two 90° turns, all one way."""
    if direction not in const.DIRECTIONS:
        raise ConfigurationError(MessagesBase.invalid_config.format(
            "direction must be one of {}".format(", ".join(const.DIRECTIONS))))
    turn = 90 if direction == const.ANTICLOCKWISE else -90
    return [SegmentSpec(a) for a in (0, turn, turn, 0, turn, turn)]


def generate_oval(
    noise: NoiseConfig,
    seed: int,
    direction: str,
    entry_pose: Pose = DEFAULT_ENTRY_POSE,
) -> Track:
    """Return the closed six-segment oval (90 marker pairs)."""
    return generate_track(oval_specs(direction), noise, seed, entry_pose)


def draw_specs(
    rng: np.random.Generator, count: int, pool: Iterable[SegmentSpec]
) -> List[SegmentSpec]:
    """Draw ``count`` specs uniformly, with replacement, from ``pool``."""
    pool = list(pool)
    return [pool[int(i)] for i in rng.integers(len(pool), size=count)]
