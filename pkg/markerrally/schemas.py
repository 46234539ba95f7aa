"""Colander schemas for the run configuration and every file we read."""

import math

import colander as c
import numpy as np

from markerrally import const
from markerrally.nn_core import ACTIVATIONS


class StrictMapping(c.MappingSchema):
    """A mapping schema that rejects keys it does not know."""

    @staticmethod
    def schema_type():
        return c.Mapping(unknown="raise")


class OpenMapping(c.MappingSchema):
    """A mapping schema that keeps whatever keys it is given."""

    @staticmethod
    def schema_type():
        return c.Mapping(unknown="preserve")


class FloatRows(c.SchemaType):
    """A list of 1-D float arrays, converted in bulk (checkpoint weights)."""

    def serialize(self, node, appstruct):
        if appstruct is c.null:
            return c.null
        return [list(map(float, row)) for row in appstruct]

    def deserialize(self, node, cstruct):
        if cstruct is c.null:
            return c.null
        if not isinstance(cstruct, list):
            raise c.Invalid(node, "{!r} is not a list".format(cstruct))
        rows = []
        for row in cstruct:
            try:
                array = np.asarray(row, dtype=np.float32)
            except (TypeError, ValueError):
                raise c.Invalid(node, "rows must contain only numbers")
            if array.ndim != 1 or not np.all(np.isfinite(array)):
                raise c.Invalid(node, "rows must be flat lists of finite numbers")
            rows.append(array)
        return rows


class WholeNumber(c.Int):
    """Like colander.Int, except that 45.5 is an error instead of 45."""

    def deserialize(self, node, cstruct):
        if isinstance(cstruct, float) and not cstruct.is_integer():
            raise c.Invalid(node, "{!r} is not a whole number".format(cstruct))
        return super(WholeNumber, self).deserialize(node, cstruct)


def natural():
    return c.SchemaNode(WholeNumber(), validator=c.Range(min=1))


class IntList(c.SequenceSchema):
    value = c.SchemaNode(WholeNumber())


class StringList(c.SequenceSchema):
    value = c.SchemaNode(c.String())


# Run configuration
# -----------------


def checkpoint_interval_divides(node, value):
    if value["episodes"] % value["checkpoint_interval"]:
        raise c.Invalid(
            node["checkpoint_interval"],
            "{} does not divide episodes ({})".format(
                value["checkpoint_interval"], value["episodes"]),
        )


class TrainSchema(StrictMapping):
    algo = c.SchemaNode(c.String(), validator=c.OneOf(sorted(const.ALGORITHMS)))
    episodes = natural()
    max_steps = natural()
    checkpoint_interval = natural()
    noise = c.SchemaNode(c.Boolean())
    segments_per_episode = c.SchemaNode(
        WholeNumber(), validator=c.Range(min=1, max=6))
    segment_pool = c.SchemaNode(c.String(), validator=c.OneOf(["all", "basic"]))
    resume = c.SchemaNode(c.Boolean())

    def validator(self, node, value):
        checkpoint_interval_divides(node, value)


class EvalSchema(StrictMapping):
    suite = c.SchemaNode(c.String(), validator=c.OneOf(["segments", "oval"]))
    noise = c.SchemaNode(c.Boolean())
    direction = c.SchemaNode(
        c.String(), validator=c.OneOf(list(const.DIRECTIONS) + ["both"]))
    runs_per_start = natural()
    max_steps = natural()


class TrackSchema(StrictMapping):
    segments = IntList()
    oval = c.SchemaNode(c.Boolean())
    direction = c.SchemaNode(c.String(), validator=c.OneOf(list(const.DIRECTIONS)))
    noise = c.SchemaNode(c.Boolean())


class NoiseSchema(StrictMapping):
    pos_jitter = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    yaw_jitter_deg = c.SchemaNode(c.Float(), validator=c.Range(min=0))


class CameraSchema(StrictMapping):
    horizontal_fov_deg = c.SchemaNode(
        c.Float(), validator=c.Range(min=1e-9, max=180))
    max_range = c.SchemaNode(c.Float(), validator=c.Range(min=1e-9))
    min_range = c.SchemaNode(c.Float(), validator=c.Range(min=1e-9))

    def validator(self, node, value):
        if value["min_range"] >= value["max_range"]:
            raise c.Invalid(node["min_range"], "must be below max_range")


class RewardSchema(StrictMapping):
    scale = c.SchemaNode(c.Float(), validator=c.Range(min=1e-9))
    drop_off = c.SchemaNode(c.Float(), validator=c.Range(min=1e-9))
    pair_mode = c.SchemaNode(
        c.String(), validator=c.OneOf(["lowest", "consecutive"]))


class DqnSchema(StrictMapping):
    learning_rate = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    batch_size = natural()
    gamma = c.SchemaNode(c.Float(), validator=c.Range(min=0, max=1))
    epsilon_start = c.SchemaNode(c.Float(), validator=c.Range(min=0, max=1))
    epsilon_end = c.SchemaNode(c.Float(), validator=c.Range(min=0, max=1))
    epsilon_decay_episodes = c.SchemaNode(WholeNumber(), validator=c.Range(min=0))
    target_sync_steps = natural()
    buffer_capacity = natural()
    turn_speed = c.SchemaNode(
        c.Float(), validator=c.Range(min=0, max=const.MAX_ANGULAR_SPEED))
    hidden_sizes = IntList()
    state_size = natural()


class Td3Schema(StrictMapping):
    actor_learning_rate = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    critic_learning_rate = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    batch_size = natural()
    gamma = c.SchemaNode(c.Float(), validator=c.Range(min=0, max=1))
    tau = c.SchemaNode(c.Float(), validator=c.Range(min=1e-12, max=1))
    policy_delay = natural()
    target_noise = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    target_noise_clip = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    exploration_noise = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    warmup_steps = c.SchemaNode(WholeNumber(), validator=c.Range(min=0))
    buffer_capacity = natural()
    action_scale = c.SchemaNode(
        c.Float(), validator=c.OneOf([const.MAX_ANGULAR_SPEED]))
    hidden_sizes = IntList()
    state_size = natural()


class RunConfigSchema(StrictMapping):
    """Everything a command needs; defaults come from ``settings``."""

    seed = c.SchemaNode(WholeNumber(), validator=c.Range(min=0))
    out = c.SchemaNode(c.String())
    workers = natural()
    utilities = OpenMapping()
    train = TrainSchema()
    eval = EvalSchema()
    track = TrackSchema()
    noise = NoiseSchema()
    camera = CameraSchema()
    reward = RewardSchema()
    dqn = DqnSchema()
    td3 = Td3Schema()


# Track files
# -----------


class NoiseFileSchema(StrictMapping):
    enabled = c.SchemaNode(c.Boolean())
    pos_jitter = c.SchemaNode(c.Float(), validator=c.Range(min=0))
    yaw_jitter_deg = c.SchemaNode(c.Float(), validator=c.Range(min=0))


class TrackMetaSchema(StrictMapping):
    seed = c.SchemaNode(WholeNumber())
    noise = NoiseFileSchema()
    specs = IntList(validator=c.Length(min=1))
    unit_to_meter = c.SchemaNode(
        c.Float(), validator=c.OneOf([const.UNIT_TO_METER]))


class MarkerSchema(StrictMapping):
    id = c.SchemaNode(WholeNumber(), validator=c.Range(min=1))
    x = c.SchemaNode(c.Float())
    y = c.SchemaNode(c.Float())
    elevation_tier = c.SchemaNode(WholeNumber(), validator=c.OneOf([0, 1]))
    yaw_deg = c.SchemaNode(c.Float())


class MarkerList(c.SequenceSchema):
    marker = MarkerSchema()


class PointSchema(StrictMapping):
    x = c.SchemaNode(c.Float())
    y = c.SchemaNode(c.Float())


class PointList(c.SequenceSchema):
    point = PointSchema()


class FinishSchema(StrictMapping):
    id = c.SchemaNode(WholeNumber(), validator=c.OneOf([const.FINISH_ID]))
    x = c.SchemaNode(c.Float())
    y = c.SchemaNode(c.Float())


class PoseSchema(StrictMapping):
    x = c.SchemaNode(c.Float())
    y = c.SchemaNode(c.Float())
    heading = c.SchemaNode(
        c.Float(), validator=c.Range(min=-math.pi, max=math.pi))


class TrackFileSchema(StrictMapping):
    meta = TrackMetaSchema()
    markers = MarkerList()
    centerline = PointList(validator=c.Length(min=2))
    finish = FinishSchema()
    total_length = c.SchemaNode(c.Float(), validator=c.Range(min=1e-9))
    entry_pose = PoseSchema()


# Checkpoints
# -----------


class NetworkFileSchema(StrictMapping):
    format_version = c.SchemaNode(
        c.Int(), validator=c.OneOf([const.CHECKPOINT_FORMAT_VERSION]))
    algo = c.SchemaNode(c.String(), validator=c.OneOf(sorted(const.ALGORITHMS)))
    layer_sizes = IntList(validator=c.Length(min=2))
    activations = StringList(
        validator=c.Length(min=1),
    )
    weights = c.SchemaNode(FloatRows())
    biases = c.SchemaNode(FloatRows())
    episode = c.SchemaNode(WholeNumber(), validator=c.Range(min=0))
    train_config_digest = c.SchemaNode(c.String())

    def validator(self, node, value):
        unknown = set(value["activations"]) - set(ACTIVATIONS)
        if unknown:
            raise c.Invalid(node["activations"], "unknown: {}".format(unknown))
        sizes = value["layer_sizes"]
        expected = [n_out * n_in for n_in, n_out in zip(sizes, sizes[1:])]
        if [len(w) for w in value["weights"]] != expected:
            raise c.Invalid(node["weights"], "do not match layer_sizes")
        if [len(b) for b in value["biases"]] != sizes[1:]:
            raise c.Invalid(node["biases"], "do not match layer_sizes")


class ManifestSchema(StrictMapping):
    format_version = c.SchemaNode(
        c.Int(), validator=c.OneOf([const.CHECKPOINT_FORMAT_VERSION]))
    algo = c.SchemaNode(c.String(), validator=c.OneOf(sorted(const.ALGORITHMS)))
    episode = c.SchemaNode(WholeNumber(), validator=c.Range(min=0))
    train_config_digest = c.SchemaNode(c.String())
    master_seed = c.SchemaNode(WholeNumber())
    networks = OpenMapping()
    optimizer = c.SchemaNode(c.String())
    config = OpenMapping()
    counters = OpenMapping()
