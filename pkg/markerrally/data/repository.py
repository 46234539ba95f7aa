"""File persistence for tracks, checkpoints, logs and reports.

Every file the system reads or writes goes through FileRepository,
so the formats live in one place and errors are reported uniformly:
a file that is absent raises ConfigurationError (the user named the
wrong path) and a file that cannot be parsed raises DataFileError.
"""

import csv
import json
import logging
import zipfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import colander as c
import numpy as np

from markerrally import const
from markerrally.data.models import Marker, Pose, Track
from markerrally.exceptions import (
    ConfigurationError, DataFileError, MarkerRallyError,
)
from markerrally.nn_core import MlpParams, params_from_dict, params_to_dict
from markerrally.schemas import ManifestSchema, NetworkFileSchema, TrackFileSchema
from markerrally.strings import MessagesBase

LOG = logging.getLogger(__name__)

PathLike = Union[str, Path]


def track_to_dict(track: Track) -> Dict[str, Any]:
    """Return the JSON document of ``track``."""
    return {
        "meta": {
            "seed": track.meta["seed"],
            "noise": dict(track.meta["noise"]),
            "specs": list(track.meta["specs"]),
            "unit_to_meter": track.meta["unit_to_meter"],
        },
        "markers": [
            {
                "id": m.id,
                "x": m.x,
                "y": m.y,
                "elevation_tier": m.elevation_tier,
                "yaw_deg": m.yaw_deg,
            }
            for m in track.markers
        ],
        "centerline": [
            {"x": float(x), "y": float(y)} for x, y in track.centerline
        ],
        "finish": {
            "id": track.finish.id, "x": track.finish.x, "y": track.finish.y,
        },
        "total_length": track.total_length,
        "entry_pose": {
            "x": float(track.entry_pose.x),
            "y": float(track.entry_pose.y),
            "heading": float(track.entry_pose.heading),
        },
    }


def track_from_dict(adict: Dict[str, Any]) -> Track:
    """Validate a track document and rebuild the Track."""
    data = TrackFileSchema().deserialize(adict)
    centerline = np.array([(p["x"], p["y"]) for p in data["centerline"]])
    entry = data["entry_pose"]
    entry_pose = Pose(entry["x"], entry["y"], entry["heading"])
    finish = data["finish"]
    return Track(
        markers=[Marker(**m) for m in data["markers"]],
        centerline=centerline,
        finish=Marker(finish["id"], finish["x"], finish["y"]),
        entry_pose=entry_pose,
        meta=data["meta"],
    )


def _number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class FileRepository:
    """Reads and writes the files of one output directory."""

    def __init__(self, root: PathLike):
        self.root = Path(root)

    def __repr__(self):
        return "<FileRepository: {}>".format(self.root)

    def path(self, *parts: str) -> Path:
        return self.root.joinpath(*parts)

    def ensure_writable(self) -> None:
        """Create the output directory; raise if we cannot write there."""
        scratch = self.path(".write_check")
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            scratch.write_text("")
            scratch.unlink()
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(self.root, e),
                path=self.root)

    # Generic JSON
    # ============

    def write_json(self, path: PathLike, adict: Any) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as stream:
                json.dump(adict, stream, indent=1)
                stream.write("\n")
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(path, e), path=path)
        LOG.debug("Wrote %s", path)
        return path

    def read_json(
        self, path: PathLike, missing: str = MessagesBase.file_missing
    ) -> Any:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(missing.format(path))
        try:
            with open(path, encoding="utf-8") as stream:
                return json.load(stream)
        except (OSError, UnicodeDecodeError, ValueError) as e:
            raise DataFileError(
                MessagesBase.corrupt_file.format(path, e), path=path)

    def _validated(self, path: Path, schema: c.SchemaNode, adict) -> Dict:
        try:
            return schema.deserialize(adict)
        except c.Invalid as e:
            raise DataFileError(
                MessagesBase.corrupt_file.format(path, e.asdict()), path=path)

    # Configuration
    # =============

    def store_resolved_config(self, settings: Dict[str, Any]) -> Path:
        return self.write_json(self.path(const.RESOLVED_CONFIG_FILE), settings)

    def load_config_file(self, path: PathLike) -> Dict[str, Any]:
        """Read a JSON config file given on the command line."""
        adict = self.read_json(path)
        if not isinstance(adict, dict):
            raise ConfigurationError(MessagesBase.invalid_config.format(
                "{} must hold a JSON object".format(path)))
        return adict

    # Tracks
    # ======

    def store_track(self, track: Track, path: PathLike) -> Path:
        return self.write_json(path, track_to_dict(track))

    def load_track(self, path: PathLike) -> Track:
        path = Path(path)
        adict = self.read_json(path)
        try:
            return track_from_dict(adict)
        except c.Invalid as e:
            raise DataFileError(
                MessagesBase.corrupt_file.format(path, e.asdict()), path=path)
        except (MarkerRallyError, TypeError, ValueError, IndexError) as e:
            raise DataFileError(
                MessagesBase.corrupt_file.format(path, e), path=path)

    # Reward log
    # ==========

    def start_reward_log(self, keep_through: Optional[int] = None) -> Path:
        """Begin the reward log; when resuming keep rows up to an episode."""
        path = self.path(const.REWARD_LOG_FILE)
        kept = []
        if keep_through is not None and path.exists():
            kept = [
                row for row in self.read_reward_log()
                if int(row["episode"]) <= keep_through
            ]
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as stream:
                writer = csv.DictWriter(
                    stream, fieldnames=const.REWARD_LOG_FIELDS,
                    lineterminator="\n")
                writer.writeheader()
                writer.writerows(kept)
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(path, e), path=path)
        return path

    def append_reward_row(self, row: Dict[str, Any]) -> None:
        path = self.path(const.REWARD_LOG_FILE)
        try:
            with open(path, "a", newline="", encoding="utf-8") as stream:
                csv.DictWriter(
                    stream, fieldnames=const.REWARD_LOG_FIELDS,
                    lineterminator="\n",
                ).writerow(
                    {k: _number(row[k]) for k in const.REWARD_LOG_FIELDS})
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(path, e), path=path)

    def read_reward_log(self) -> List[Dict[str, str]]:
        path = self.path(const.REWARD_LOG_FILE)
        try:
            with open(path, newline="", encoding="utf-8") as stream:
                return list(csv.DictReader(stream))
        except OSError as e:
            raise DataFileError(
                MessagesBase.corrupt_file.format(path, e), path=path)

    # Checkpoints
    # ===========

    def checkpoint_dir(self, episode: int) -> Path:
        return self.path("checkpoints", "ep{:05d}".format(episode))

    def store_checkpoint(
        self, agent, episode: int, digest: str, master_seed: int
    ) -> Path:
        """Write one file per network, the optimizer moments and a manifest.

        Return the manifest path.
        """
        folder = self.checkpoint_dir(episode)
        networks = {}
        for name, params in agent.networks().items():
            filename = "{}.json".format(name)
            self.write_json(
                folder / filename,
                params_to_dict(params, agent.algo, episode, digest))
            networks[name] = filename

        arrays = {}
        for name, state in agent.optimizers().items():
            for key, array in state.to_arrays().items():
                arrays["{}.{}".format(name, key)] = array
        try:
            with open(folder / const.OPTIMIZER_FILE, "wb") as stream:
                np.savez(stream, **arrays)
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(folder, e), path=folder)

        return self.write_json(folder / const.MANIFEST_FILE, {
            "format_version": const.CHECKPOINT_FORMAT_VERSION,
            "algo": agent.algo,
            "episode": episode,
            "train_config_digest": digest,
            "master_seed": master_seed,
            "networks": networks,
            "optimizer": const.OPTIMIZER_FILE,
            "config": agent.config_dict(),
            "counters": agent.counters(),
        })

    def checkpoint_manifests(self) -> List[Path]:
        """Return the manifests of this run in episode order."""
        return sorted(self.path("checkpoints").glob(
            "ep*/" + const.MANIFEST_FILE))

    def latest_checkpoint(self) -> Optional[Path]:
        manifests = self.checkpoint_manifests()
        return manifests[-1] if manifests else None

    def load_manifest(self, path: PathLike) -> Dict[str, Any]:
        path = Path(path)
        adict = self.read_json(path, MessagesBase.checkpoint_missing)
        return self._validated(path, ManifestSchema(), adict)

    def load_networks(
        self, path: PathLike
    ) -> Tuple[Dict[str, Any], Dict[str, MlpParams]]:
        """Return the manifest at ``path`` and the networks it names."""
        path = Path(path)
        manifest = self.load_manifest(path)
        networks = {}
        for name, filename in manifest["networks"].items():
            network_path = path.parent / filename
            adict = self.read_json(network_path)
            data = self._validated(network_path, NetworkFileSchema(), adict)
            if data["algo"] != manifest["algo"]:
                raise DataFileError(MessagesBase.corrupt_file.format(
                    network_path, "algo differs from the manifest"),
                    path=network_path)
            networks[name] = params_from_dict(data)
        return manifest, networks

    def restore_agent(self, agent, path: PathLike, optimizer: bool = True):
        """Load saved parameters (and optimizer moments) into ``agent``."""
        path = Path(path)
        manifest, networks = self.load_networks(path)
        live = agent.networks()
        if set(live) != set(networks):
            raise DataFileError(MessagesBase.corrupt_file.format(
                path, "networks {} do not match {}".format(
                    sorted(networks), sorted(live))), path=path)
        try:
            for name, params in networks.items():
                if params.layer_sizes != live[name].layer_sizes:
                    raise ValueError("{} has layers {}".format(
                        name, params.layer_sizes))
                live[name].load(params)
            if optimizer:
                self._restore_optimizers(
                    agent, path.parent / manifest["optimizer"])
        except (KeyError, ValueError, OSError, zipfile.BadZipFile) as e:
            raise DataFileError(
                MessagesBase.corrupt_file.format(path, e), path=path)
        agent.restore_counters(manifest["counters"])
        return manifest

    def _restore_optimizers(self, agent, path: Path) -> None:
        with np.load(path) as archive:
            for name, state in agent.optimizers().items():
                prefix = name + "."
                state.restore({
                    key[len(prefix):]: archive[key]
                    for key in archive.files if key.startswith(prefix)
                })

    # Evaluation and traces
    # =====================

    def store_eval_rows(self, suite: str, rows: Iterable[Dict[str, Any]]) -> Path:
        path = self.path(const.EVAL_CSV_FILE.format(suite=suite))
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as stream:
                writer = csv.DictWriter(
                    stream, fieldnames=const.EVAL_CSV_FIELDS,
                    lineterminator="\n")
                writer.writeheader()
                for row in rows:
                    writer.writerow(
                        {k: _number(row[k]) for k in const.EVAL_CSV_FIELDS})
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(path, e), path=path)
        LOG.debug("Wrote %s", path)
        return path

    def read_eval_rows(self, suite: str) -> List[Dict[str, str]]:
        path = self.path(const.EVAL_CSV_FILE.format(suite=suite))
        with open(path, newline="", encoding="utf-8") as stream:
            return list(csv.DictReader(stream))

    def store_summary(self, suite: str, summary: Dict[str, Any]) -> Path:
        return self.write_json(
            self.path(const.SUMMARY_FILE.format(suite=suite)), summary)

    def store_trace(self, records: Iterable[Dict[str, Any]]) -> Path:
        """Write one JSON object per line; the header record comes first."""
        path = self.path(const.TRACE_FILE)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as stream:
                for record in records:
                    stream.write(json.dumps(record, separators=(",", ":")))
                    stream.write("\n")
        except OSError as e:
            raise DataFileError(
                MessagesBase.output_not_writable.format(path, e), path=path)
        LOG.debug("Wrote %s", path)
        return path

    def read_trace(self) -> List[Dict[str, Any]]:
        path = self.path(const.TRACE_FILE)
        with open(path, encoding="utf-8") as stream:
            return [json.loads(line) for line in stream if line.strip()]
