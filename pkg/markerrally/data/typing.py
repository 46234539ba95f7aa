"""Type aliases so the numeric code can be written with type checking."""

from typing import Sequence, Tuple

import numpy as np

Point = Tuple[float, float]
Array = np.ndarray  # float arrays; shapes are stated in docstrings
Polyline = np.ndarray  # shape (n, 2), track units
PointSeq = Sequence[Point]
