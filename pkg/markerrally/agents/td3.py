"""Twin delayed deep deterministic policy gradient (TD3).

The actor emits one value in [-1, 1], scaled by 0.4 rad/s. Two critics
score (state, normalized action); their minimum forms the target.
"""

from dataclasses import asdict, dataclass, fields
import logging
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
from zope.interface import implementer

from markerrally import const
from markerrally.agents.replay import (
    Batch, ReplayBuffer, Transition, as_state, replay_push, replay_sample,
)
from markerrally.data.models import Action
from markerrally.data.typing import Array
from markerrally.interfaces import ILearner
from markerrally.nn_core import (
    LINEAR, RELU, TANH, AdamState, MlpParams, adam_step, backward, forward,
    mlp_init, mse_loss,
)

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class Td3Config:
    actor_learning_rate: float = 1e-4
    critic_learning_rate: float = 1e-3
    batch_size: int = 32
    gamma: float = 0.99
    tau: float = 0.005
    policy_delay: int = 2
    target_noise: float = 0.2
    target_noise_clip: float = 0.5
    exploration_noise: float = 0.1
    warmup_steps: int = 1000
    buffer_capacity: int = 100000
    action_scale: float = const.MAX_ANGULAR_SPEED
    hidden_sizes: Tuple[int, ...] = (64, 64, 32)
    state_size: int = const.OBSERVATION_SIZE

    @classmethod
    def from_settings(cls, section: Dict[str, Any]) -> "Td3Config":
        known = {f.name for f in fields(cls)}
        values = {k: v for k, v in section.items() if k in known}
        if "hidden_sizes" in values:
            values["hidden_sizes"] = tuple(values["hidden_sizes"])
        return cls(**values)


class Td3Networks(NamedTuple):
    actor: MlpParams
    critic1: MlpParams
    critic2: MlpParams
    actor_target: MlpParams
    critic1_target: MlpParams
    critic2_target: MlpParams


class Td3Optimizers(NamedTuple):
    actor: AdamState
    critic1: AdamState
    critic2: AdamState


def td3_normalized(
    actor: MlpParams,
    obs,
    exploration_sigma: float,
    rng: Optional[np.random.Generator],
) -> float:
    """Actor output plus Gaussian noise, clipped to [-1, 1]."""
    out, _ = forward(actor, obs)
    value = float(out[0])
    if exploration_sigma > 0:
        value += float(rng.normal(0.0, exploration_sigma))
    return float(np.clip(value, -1.0, 1.0))


def td3_select(
    actor: MlpParams,
    obs,
    exploration_sigma: float,
    rng: Optional[np.random.Generator],
    action_scale: float = const.MAX_ANGULAR_SPEED,
) -> Action:
    """Return the commanded angular velocity; sigma 0 is deterministic."""
    return Action(td3_normalized(actor, obs, exploration_sigma, rng) * action_scale)


def _joined(states: Array, actions: Array) -> Array:
    return np.concatenate([states, actions.reshape(-1, 1)], axis=1)


def td3_targets(
    nets: Td3Networks, batch: Batch, cfg: Td3Config, rng: np.random.Generator
) -> Array:
    """``r + gamma * (1 - done) * min(Q1', Q2')`` at the smoothed target action."""
    noise = np.clip(
        rng.normal(0.0, cfg.target_noise, size=len(batch.rewards)),
        -cfg.target_noise_clip, cfg.target_noise_clip,
    )
    next_action, _ = forward(nets.actor_target, batch.next_states)
    next_action = np.clip(next_action[:, 0] + noise, -1.0, 1.0)
    joined = _joined(batch.next_states, next_action.astype(np.float32))
    q1, _ = forward(nets.critic1_target, joined)
    q2, _ = forward(nets.critic2_target, joined)
    return batch.rewards + cfg.gamma * (1 - batch.dones) * np.minimum(q1, q2)[:, 0]


def _critic_step(
    critic: MlpParams, optimizer: AdamState, joined: Array, targets: Array
) -> float:
    q, cache = forward(critic, joined)
    loss, grad = mse_loss(q[:, 0], targets)
    adam_step(critic, backward(critic, cache, grad[:, None]), optimizer)
    return loss


def td3_update(
    nets: Td3Networks,
    optimizers: Td3Optimizers,
    batch: Batch,
    step: int,
    cfg: Td3Config,
    rng: np.random.Generator,
) -> Tuple[Tuple[float, float], Optional[float]]:
    """Train both critics; every ``policy_delay`` steps also the actor.

    Return ``((critic1_loss, critic2_loss), actor_loss or None)``.
    Target networks move by Polyak averaging only on actor steps.
    """
    targets = td3_targets(nets, batch, cfg, rng)
    joined = _joined(batch.states, batch.actions)
    losses = (
        _critic_step(nets.critic1, optimizers.critic1, joined, targets),
        _critic_step(nets.critic2, optimizers.critic2, joined, targets),
    )
    if step % cfg.policy_delay != 0:
        return losses, None

    action, actor_cache = forward(nets.actor, batch.states)
    q, critic_cache = forward(nets.critic1, _joined(batch.states, action))
    n = len(q)
    critic_grads = backward(nets.critic1, critic_cache, np.full_like(q, -1.0 / n))
    actor_grads = backward(nets.actor, actor_cache, critic_grads.input[:, -1:])
    adam_step(nets.actor, actor_grads, optimizers.actor)
    for target, online in (
        (nets.actor_target, nets.actor),
        (nets.critic1_target, nets.critic1),
        (nets.critic2_target, nets.critic2),
    ):
        target.blend(online, cfg.tau)
    return losses, -float(np.mean(q))


def _network_shapes(cfg: Td3Config) -> Tuple[list, list, list, list]:
    hidden = list(cfg.hidden_sizes)
    relus = [RELU] * len(hidden)
    return (
        [cfg.state_size, *hidden, 1],
        [cfg.state_size + 1, *hidden, 1],
        relus + [TANH],
        relus + [LINEAR],
    )


@implementer(ILearner)
class Td3Agent:
    """Owns the actor, two critics, three target networks and replay."""

    algo = "td3"
    name = "td3"
    config_class = Td3Config

    def __init__(self, config: Td3Config = Td3Config(), seed: int = 0):
        self.config = config
        actor_sizes, critic_sizes, actor_acts, critic_acts = _network_shapes(config)
        seeds = np.random.SeedSequence(seed).generate_state(3)
        actor = mlp_init(actor_sizes, actor_acts, int(seeds[0]))
        critic1 = mlp_init(critic_sizes, critic_acts, int(seeds[1]))
        critic2 = mlp_init(critic_sizes, critic_acts, int(seeds[2]))
        self.nets = Td3Networks(
            actor, critic1, critic2, actor.copy(), critic1.copy(), critic2.copy())
        self.opts = Td3Optimizers(
            AdamState(actor, config.actor_learning_rate),
            AdamState(critic1, config.critic_learning_rate),
            AdamState(critic2, config.critic_learning_rate),
        )
        self.buffer = ReplayBuffer(
            config.buffer_capacity, config.state_size, discrete=False)
        self.rng = np.random.default_rng(seed)
        self.env_steps = 0
        self.updates = 0

    def __repr__(self):
        return "<Td3Agent: actor {!r}, {} updates>".format(
            self.nets.actor, self.updates)

    def begin_episode(self, episode: int, rng: np.random.Generator) -> None:
        self.rng = rng

    def reset(self, env) -> None:
        pass

    def act(self, observation) -> float:
        return td3_select(
            self.nets.actor, as_state(observation), 0.0, None,
            self.config.action_scale,
        ).angular_velocity

    def explore(self, observation) -> Tuple[float, float]:
        if self.env_steps < self.config.warmup_steps:
            value = float(self.rng.uniform(-1.0, 1.0))
        else:
            value = td3_normalized(
                self.nets.actor, as_state(observation),
                self.config.exploration_noise, self.rng,
            )
        return value, value * self.config.action_scale

    def remember(self, transition: Transition) -> None:
        replay_push(self.buffer, transition)
        self.env_steps += 1

    def learn(self) -> Optional[float]:
        cfg = self.config
        if self.env_steps < cfg.warmup_steps or len(self.buffer) < cfg.batch_size:
            return None
        self.updates += 1
        batch = replay_sample(self.buffer, cfg.batch_size, self.rng)
        (loss1, loss2), _ = td3_update(
            self.nets, self.opts, batch, self.updates, cfg, self.rng)
        return (loss1 + loss2) / 2

    def networks(self) -> Dict[str, MlpParams]:
        return self.nets._asdict()

    def optimizers(self) -> Dict[str, AdamState]:
        return self.opts._asdict()

    def config_dict(self) -> Dict[str, Any]:
        adict = asdict(self.config)
        adict["hidden_sizes"] = list(self.config.hidden_sizes)
        return adict

    def counters(self) -> Dict[str, int]:
        return {"env_steps": self.env_steps, "updates": self.updates}

    def restore_counters(self, counters: Dict[str, int]) -> None:
        self.env_steps = int(counters.get("env_steps", 0))
        self.updates = int(counters.get("updates", 0))
