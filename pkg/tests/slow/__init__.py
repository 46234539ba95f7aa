"""A slow test trains or evaluates for thousands of steps.

It is the slowest kind of test. The longest of them, which repeat the
full training protocol, only run when MARKER_RALLY_EXTENDED is true.
"""

import os
import unittest

from bag.settings import SettingsReader

from markerrally import const
from tests.integration import IntegrationTestBase

EXTENDED = SettingsReader(dict(os.environ)).bool(
    const.EXTENDED_ENV_VAR, default=False)

extended = unittest.skipUnless(
    EXTENDED, "set {}=true to run".format(const.EXTENDED_ENV_VAR))


class SlowTestBase(IntegrationTestBase):
    """Base class for tests that learn or run whole suites."""
