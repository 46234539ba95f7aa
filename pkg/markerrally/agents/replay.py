"""Uniform experience replay in a fixed-size ring."""

from typing import NamedTuple, Union

import numpy as np

from markerrally.data.typing import Array
from markerrally.exceptions import BufferTooSmall
from markerrally.strings import MessagesBase


class Transition(NamedTuple):
    """One experience tuple; ``action`` is an index (DQN) or in [-1, 1]."""

    state: Array
    action: Union[int, float]
    reward: float
    next_state: Array
    done: bool


class Batch(NamedTuple):
    states: Array  # (n, state_size) float32
    actions: Array  # (n,) int64 for DQN, float32 for TD3
    rewards: Array  # (n,) float32
    next_states: Array
    dones: Array  # (n,) float32, 1.0 where the episode ended


class ReplayBuffer:
    """Holds the most recent ``capacity`` transitions."""

    def __init__(self, capacity: int, state_size: int, discrete: bool):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_size), dtype=np.float32)
        self.next_states = np.zeros((capacity, state_size), dtype=np.float32)
        self.actions = np.zeros(
            capacity, dtype=np.int64 if discrete else np.float32)
        self.rewards = np.zeros(capacity, dtype=np.float32)
        self.dones = np.zeros(capacity, dtype=np.float32)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def __repr__(self):
        return "<ReplayBuffer: {}/{}>".format(self.size, self.capacity)


def replay_push(buffer: ReplayBuffer, transition: Transition) -> None:
    """Store ``transition``, overwriting the oldest one when full."""
    i = buffer.cursor
    buffer.states[i] = transition.state
    buffer.actions[i] = transition.action
    buffer.rewards[i] = transition.reward
    buffer.next_states[i] = transition.next_state
    buffer.dones[i] = float(transition.done)
    buffer.cursor = (i + 1) % buffer.capacity
    buffer.size = min(buffer.size + 1, buffer.capacity)


def replay_sample(
    buffer: ReplayBuffer, n: int, rng: np.random.Generator
) -> Batch:
    """Draw ``n`` distinct stored transitions uniformly at random."""
    if n > buffer.size:
        raise BufferTooSmall(MessagesBase.buffer_too_small.format(n, buffer.size))
    rows = rng.choice(buffer.size, size=n, replace=False)
    return Batch(
        buffer.states[rows],
        buffer.actions[rows],
        buffer.rewards[rows],
        buffer.next_states[rows],
        buffer.dones[rows],
    )


def as_state(observation) -> Array:
    """Return the float32 state vector of an Observation or array."""
    if hasattr(observation, "as_vector"):
        return observation.as_vector()
    return np.asarray(observation, dtype=np.float32)
