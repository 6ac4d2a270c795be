"""Schroedinger evolution on metric graphs, Gaussian-decay thresholds and Carleman checks."""

from ._qgraph import *  # noqa: F401,F403
from ._qgraph import NumericalGuard, LineSamples

__version__ = "0.1.0"
