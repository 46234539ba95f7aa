"""Unit tests should be preferred because they are the quickest to run.

Unit tests go through only one function and they do not touch the disk.
"""

import numpy as np

from markerrally.nn_core import MlpParams
from .. import UnitTestCase


class FastTestCase(UnitTestCase):
    """Base for unit test cases."""

    def constant_net(self, biases, n_in=12, activation="linear"):
        """A one-layer net whose output ignores its input: ``biases``."""
        biases = np.asarray(biases, dtype=np.float32)
        return MlpParams(
            [n_in, len(biases)], [activation],
            [np.zeros((len(biases), n_in), dtype=np.float32)], [biases],
        )
