"""Batch queues, Burke-type verification, and first-passage time constants."""

from . import distributions, percolation, queue_core, stats, tandem, timeconstants, verify
from .distributions import DistSpec
from .queue_core import QueueParams, StationaryLaw, Trace
from .streams import RandomStream

__version__ = "0.1.0"

__all__ = [
    "DistSpec",
    "QueueParams",
    "StationaryLaw",
    "Trace",
    "RandomStream",
    "distributions",
    "queue_core",
    "tandem",
    "percolation",
    "timeconstants",
    "stats",
    "verify",
]
