"""Exact, interactive-speed booleans on triangle meshes.

The pipeline has two stages: an exact arrangement that subdivides the
input triangles along their mutual intersections, and an inside/outside
classification of the resulting surface patches by exact ray casting.
Results are always watertight and exact up to the final, audited rounding
of output coordinates to doubles.
"""

__version__ = "0.1.0"

from . import errors, kernel  # noqa: F401
from .booleans import OPS, BooleanResult, boolean, compose  # noqa: F401
from .meshio import MeshFile, load, save  # noqa: F401
from .report import RunReport  # noqa: F401
from .topology import check_topology, validate_input  # noqa: F401
