"""Tests for the run configuration, its schema and the strings class."""

import os
from unittest.mock import patch

from markerrally import const
from markerrally.exceptions import ConfigurationError
from markerrally.settings import (
    config_digest, deep_merge, get_default_settings, noise_config,
    resolve_settings, training_digest,
)
from markerrally.strings import MessagesBase, get_strings
from . import FastTestCase


class CustomMessages(MessagesBase):
    track_written = "Track saved."


class TestResolveSettings(FastTestCase):

    def test_defaults_are_valid(self):
        settings = resolve_settings()
        assert settings["seed"] == 0
        assert settings["train"]["algo"] == "td3"
        assert settings["dqn"]["hidden_sizes"] == [1024, 512]
        assert settings["td3"]["hidden_sizes"] == [64, 64, 32]
        assert settings["td3"]["action_scale"] == 0.4
        assert settings["eval"]["runs_per_start"] == 30
        assert settings["reward"] == {
            "scale": 10.0, "drop_off": 6.0, "pair_mode": "lowest"}

    def test_precedence(self):
        """Flags override the file, which overrides the defaults."""
        settings = resolve_settings(
            {"seed": 3, "train": {"episodes": 1000}},
            {"seed": 4},
        )
        assert settings["seed"] == 4
        assert settings["train"]["episodes"] == 1000
        assert settings["train"]["max_steps"] == 2000

    def test_unknown_key(self):
        for file_dict in ({"colour": "red"}, {"train": {"epochs": 3}},
                          {"td3": {"learning_rate": 0.1}}):
            with self.assertRaises(ConfigurationError):
                resolve_settings(file_dict)

    def test_errors_name_the_key(self):
        with self.assertRaises(ConfigurationError) as cm:
            resolve_settings({"eval": {"suite": "desert"}})
        assert "eval.suite" in cm.exception.errors
        assert "eval.suite" in str(cm.exception)

    def test_interval_must_divide_episodes(self):
        with self.assertRaises(ConfigurationError):
            resolve_settings({"train": {"episodes": 1000,
                                        "checkpoint_interval": 300}})
        settings = resolve_settings({"train": {"episodes": 1000,
                                               "checkpoint_interval": 250}})
        assert settings["train"]["checkpoint_interval"] == 250

    def test_invalid_values(self):
        for file_dict in (
            {"train": {"algo": "ppo"}},
            {"train": {"episodes": 0}},
            {"train": {"segments_per_episode": 7}},
            {"track": {"segments": [45.5]}},
            {"seed": -1},
            {"camera": {"min_range": 9.0}},
            {"td3": {"action_scale": 0.5}},
            {"eval": {"direction": "up"}},
        ):
            with self.assertRaises(ConfigurationError):
                resolve_settings(file_dict)

    def test_out_from_environment(self):
        with patch.dict(os.environ, {const.OUT_ENV_VAR: "/tmp/rally"}):
            assert resolve_settings()["out"] == "/tmp/rally"
            assert resolve_settings(overrides={"out": "x"})["out"] == "x"

    def test_deep_merge_copies(self):
        base = {"a": {"b": [1]}}
        merged = deep_merge(base, {"a": {"c": 2}})
        merged["a"]["b"].append(2)
        assert base == {"a": {"b": [1]}}
        assert merged == {"a": {"b": [1, 2], "c": 2}}

    def test_noise_config(self):
        settings = resolve_settings({"noise": {"pos_jitter": 0.1}})
        noise = noise_config(settings, True)
        assert noise.enabled
        assert noise.pos_jitter == 0.1
        assert noise.yaw_jitter_deg == 15.0


class TestDigests(FastTestCase):

    def test_config_digest(self):
        one = config_digest({"a": 1, "b": [1, 2]})
        assert one == config_digest({"b": [1, 2], "a": 1})
        assert one != config_digest({"a": 2, "b": [1, 2]})
        assert len(one) == 64

    def test_training_digest_allows_extending_a_run(self):
        short = resolve_settings({"train": {"episodes": 500}})
        longer = resolve_settings({"train": {
            "episodes": 3000, "checkpoint_interval": 1000, "resume": True}})
        assert training_digest(short) == training_digest(longer)

    def test_training_digest_sees_what_matters(self):
        base = training_digest(resolve_settings())
        assert base != training_digest(resolve_settings({"seed": 1}))
        assert base != training_digest(
            resolve_settings({"td3": {"tau": 0.01}}))
        assert base != training_digest(
            resolve_settings({"train": {"noise": True}}))
        # the other algorithm's section is irrelevant
        assert base == training_digest(
            resolve_settings({"dqn": {"batch_size": 8}}))
        assert base == training_digest(
            resolve_settings({"eval": {"suite": "oval"}}))


class TestStrings(FastTestCase):

    def test_default(self):
        assert get_strings() is MessagesBase
        assert get_strings(get_default_settings()) is MessagesBase

    def test_replaced(self):
        settings = resolve_settings(overrides={"utilities": {
            const.STRING_CLASS: "tests.fast.test_settings:CustomMessages"}})
        strings = get_strings(settings)
        assert strings is CustomMessages
        assert strings.track_written == "Track saved."
        assert strings.resume_conflict == MessagesBase.resume_conflict
