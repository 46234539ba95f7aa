"""An integration test goes through several layers of production code.

It writes real files to a temporary directory and runs whole episodes,
so it is slower than a unit test.
"""

from pathlib import Path
from tempfile import TemporaryDirectory

from markerrally.data.repository import FileRepository
from tests import UnitTestCase


class IntegrationTestBase(UnitTestCase):
    """Give each test an empty output directory and a repository on it."""

    def setUp(self):
        """Set up each test."""
        self.tmp = TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.repo = FileRepository(self.root / "run")

    def tearDown(self):
        """Clean up after each test."""
        self.tmp.cleanup()
