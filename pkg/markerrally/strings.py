"""Strings shown to people, kept in one replaceable class."""

from typing import Any, Dict, Optional, Type

from bag.settings import SettingsReader

from markerrally import const


def get_strings(settings: Optional[Dict[str, Any]] = None) -> Type["MessagesBase"]:
    """Return the configured strings class.

    ``settings`` is a resolved run configuration; its ``utilities``
    section may point ``string class`` to a subclass of MessagesBase.
    """
    utilities = (settings or {}).get("utilities", {})
    return SettingsReader(utilities).resolve(
        key=const.STRING_CLASS, default="markerrally.strings:MessagesBase"
    )


class MessagesBase:
    """A class containing all user-facing messages.

    Applications can simply subclass and change whatever text they want.
    """

    invalid_turn_angle = (
        "Invalid turn angle {!r}: it must be a multiple of 15 "
        "between -90 and 90."
    )
    empty_segment_list = "At least one track segment is required."
    offset_outside_track = (
        "Start offset {} is outside the track (half width is 1 unit)."
    )
    action_out_of_range = (
        "Angular velocity {} rad/s exceeds the 0.4 rad/s limit."
    )
    step_after_termination = (
        "The episode already ended ({}); call reset() before step()."
    )
    environment_not_reset = "Call reset() before step()."

    shape_mismatch = "Expected {} values but got {}."
    activation_count = "{} activations given for {} layers."
    unknown_activation = "Unknown activation {!r}."
    stale_cache = "This cache was produced before the parameters changed."
    buffer_too_small = "Cannot sample {} transitions from a buffer of {}."
    empty_results = "Cannot summarize an empty list of episodes."

    invalid_config = "Invalid configuration: {}"
    unknown_algorithm = "Unknown algorithm {!r}; supported: {}."
    unknown_suite = "Unknown suite {!r}; supported: segments, oval."
    interval_must_divide = (
        "checkpoint_interval ({}) must divide the number of episodes ({})."
    )
    output_not_writable = "Cannot write to the output directory {}: {}"
    resume_conflict = (
        "{} already holds a training run; pass --resume to continue it "
        "or choose another --out directory."
    )
    nothing_to_resume = "There is no checkpoint to resume from in {}."
    digest_mismatch = (
        "The checkpoint {} was trained with another configuration; "
        "resume with the same settings or choose another --out directory."
    )
    unknown_scripted = "Unknown scripted policy {!r}; supported: {}."
    checkpoint_missing = "Checkpoint file not found: {}"
    file_missing = "File not found: {}"
    checkpoint_needed = "Give a checkpoint manifest or --scripted."
    corrupt_file = "Cannot read {}: {}"
    track_written = "Wrote {path}: total length {length:.3f} units, {count} markers."
    training_done = "Trained {episodes} episodes; log at {log}."
    checkpoint_saved = "Episode {episode}: checkpoint saved to {path}."
    eval_done = (
        "{suite}: finish {finish:.2f}%, average distance {distance:.2f}% "
        "over {count} episodes."
    )
    trace_written = "Wrote {steps} steps to {path} ({termination})."
