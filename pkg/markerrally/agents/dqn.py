"""Deep Q-network with two actions: turn right or turn left at 0.2 rad/s."""

from dataclasses import asdict, dataclass, fields
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
from zope.interface import implementer

from markerrally import const
from markerrally.agents.replay import (
    Batch, ReplayBuffer, Transition, as_state, replay_push, replay_sample,
)
from markerrally.data.typing import Array
from markerrally.interfaces import ILearner
from markerrally.nn_core import (
    LINEAR, RELU, AdamState, MlpParams, adam_step, backward, forward,
    mlp_init, mse_loss,
)

LOG = logging.getLogger(__name__)

DQN_ACTIONS = (-const.DQN_TURN_SPEED, const.DQN_TURN_SPEED)


@dataclass(frozen=True)
class DqnConfig:
    learning_rate: float = 1e-4
    batch_size: int = 64
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_episodes: int = 2500
    target_sync_steps: int = 1000
    buffer_capacity: int = 100000
    turn_speed: float = const.DQN_TURN_SPEED
    hidden_sizes: Tuple[int, ...] = (1024, 512)
    state_size: int = const.OBSERVATION_SIZE

    @classmethod
    def from_settings(cls, section: Dict[str, Any]) -> "DqnConfig":
        known = {f.name for f in fields(cls)}
        values = {k: v for k, v in section.items() if k in known}
        if "hidden_sizes" in values:
            values["hidden_sizes"] = tuple(values["hidden_sizes"])
        return cls(**values)

    def epsilon(self, episode: int) -> float:
        """Linear decay over the first episodes, then constant."""
        if self.epsilon_decay_episodes <= 0:
            return self.epsilon_end
        fraction = min(1.0, episode / self.epsilon_decay_episodes)
        return self.epsilon_start + fraction * (self.epsilon_end - self.epsilon_start)


def dqn_select(
    qnet: MlpParams,
    obs,
    epsilon: float,
    rng: Optional[np.random.Generator],
) -> int:
    """Epsilon-greedy action index; ties go to index 0."""
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(len(DQN_ACTIONS)))
    q, _ = forward(qnet, obs)
    return int(np.argmax(q))


def dqn_targets(target_net: MlpParams, batch: Batch, gamma: float) -> Array:
    """``r + gamma * (1 - done) * max_a' Q_target(s', a')``."""
    q_next, _ = forward(target_net, batch.next_states)
    return batch.rewards + gamma * (1 - batch.dones) * q_next.max(axis=1)


def dqn_update(
    qnet: MlpParams,
    target_net: MlpParams,
    batch: Batch,
    cfg: DqnConfig,
    optimizer: AdamState,
) -> float:
    """One Adam step on the TD error of the taken actions.

    ``target_net`` is overwritten with ``qnet`` every
    ``cfg.target_sync_steps`` gradient steps.
    """
    targets = dqn_targets(target_net, batch, cfg.gamma)
    q, cache = forward(qnet, batch.states)
    rows = np.arange(len(q))
    loss, grad = mse_loss(q[rows, batch.actions], targets)
    grad_q = np.zeros_like(q)
    grad_q[rows, batch.actions] = grad
    adam_step(qnet, backward(qnet, cache, grad_q), optimizer)
    if optimizer.step % cfg.target_sync_steps == 0:
        target_net.load(qnet)
        LOG.debug("Target network synced at gradient step %d", optimizer.step)
    return loss


@implementer(ILearner)
class DqnAgent:
    """Owns the Q-network, its target copy, the optimizer and replay."""

    algo = "dqn"
    name = "dqn"
    config_class = DqnConfig

    def __init__(self, config: DqnConfig = DqnConfig(), seed: int = 0):
        self.config = config
        sizes = [config.state_size, *config.hidden_sizes, len(DQN_ACTIONS)]
        activations = [RELU] * len(config.hidden_sizes) + [LINEAR]
        self.qnet = mlp_init(sizes, activations, seed)
        self.target = self.qnet.copy()
        self.optimizer = AdamState(self.qnet, config.learning_rate)
        self.buffer = ReplayBuffer(
            config.buffer_capacity, config.state_size, discrete=True)
        self.rng = np.random.default_rng(seed)
        self.epsilon = config.epsilon_start
        self.actions = (-config.turn_speed, config.turn_speed)

    def __repr__(self):
        return "<DqnAgent: {!r}, epsilon {:.3f}>".format(self.qnet, self.epsilon)

    def begin_episode(self, episode: int, rng: np.random.Generator) -> None:
        self.epsilon = self.config.epsilon(episode)
        self.rng = rng

    def reset(self, env) -> None:
        pass

    def act(self, observation) -> float:
        return self.actions[dqn_select(self.qnet, as_state(observation), 0.0, None)]

    def explore(self, observation) -> Tuple[int, float]:
        index = dqn_select(self.qnet, as_state(observation), self.epsilon, self.rng)
        return index, self.actions[index]

    def remember(self, transition: Transition) -> None:
        replay_push(self.buffer, transition)

    def learn(self) -> Optional[float]:
        if len(self.buffer) < self.config.batch_size:
            return None
        batch = replay_sample(self.buffer, self.config.batch_size, self.rng)
        return dqn_update(self.qnet, self.target, batch, self.config, self.optimizer)

    def networks(self) -> Dict[str, MlpParams]:
        return {"qnet": self.qnet, "target": self.target}

    def optimizers(self) -> Dict[str, AdamState]:
        return {"qnet": self.optimizer}

    def config_dict(self) -> Dict[str, Any]:
        adict = asdict(self.config)
        adict["hidden_sizes"] = list(self.config.hidden_sizes)
        return adict

    def counters(self) -> Dict[str, int]:
        return {}  # the gradient step count lives in the optimizer

    def restore_counters(self, counters: Dict[str, int]) -> None:
        pass

