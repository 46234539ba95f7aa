"""DQN and TD3 learners, replay memory and scripted baselines."""

from typing import Any, Dict, Optional

from bag.settings import SettingsReader

from markerrally import const
from markerrally.exceptions import ConfigurationError
from markerrally.strings import MessagesBase

DEFAULT_CLASSES = {
    const.DQN_CLASS: "markerrally.agents.dqn:DqnAgent",
    const.TD3_CLASS: "markerrally.agents.td3:Td3Agent",
}


def agent_class(algo: str, settings: Optional[Dict[str, Any]] = None):
    """Return the learner class configured for ``algo``."""
    if algo not in const.ALGORITHMS:
        raise ConfigurationError(MessagesBase.unknown_algorithm.format(
            algo, ", ".join(sorted(const.ALGORITHMS))))
    key = const.ALGORITHMS[algo]
    utilities = (settings or {}).get("utilities", {})
    return SettingsReader(utilities).resolve(key=key, default=DEFAULT_CLASSES[key])


def build_agent(algo: str, settings: Dict[str, Any], seed: int):
    """Instantiate the learner for ``algo`` from the run configuration."""
    cls = agent_class(algo, settings)
    return cls(cls.config_class.from_settings(settings.get(algo, {})), seed=seed)
