"""Computational toolkit for Gromov-hyperbolic spaces, group actions on them and small cancellation bookkeeping."""

from .errors import CoarseCancelError, HypothesisFailure, Inconclusive, InvalidInput, UnsoundLedger
from .metric_core import FiniteMetricSpace, GraphSpec, build_space, hyperbolicity_delta

__all__ = ["CoarseCancelError", "FiniteMetricSpace", "GraphSpec", "HypothesisFailure", "Inconclusive",
           "InvalidInput", "UnsoundLedger", "build_space", "hyperbolicity_delta"]
__version__ = "0.1.0"
