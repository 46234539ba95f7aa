"""Marker Rally trains small robots to race between numbered markers.

A track generator lays out pairs of boundary markers; a simulator
drives a unicycle robot whose camera reports the markers it sees;
DQN and TD3 agents, built on a numpy multilayer perceptron, learn to
follow the track; a harness trains and evaluates them.
"""

from markerrally.strings import get_strings  # noqa

__version__ = "0.1.0"
