"""Unilateral branch tracing, degree computations and global alternative classification."""

from .continuation import (Branch, Classification, Event, EventKind, Side, StepControl,
                           base_crossings, classify, detect_events, tangent, trace)
from .degree import (MatrixPath, SliceCrossing, box_degree, degree_balance, is_balanced,
                     local_index, map_degree, parity)
from .errors import UnibranchError
from .problem_model import DomainSpec, ParameterizedSystem, Point, orientation, validate_consistency

__version__ = "0.1.0"

__all__ = [
    "Branch", "Classification", "DomainSpec", "Event", "EventKind", "MatrixPath",
    "ParameterizedSystem", "Point", "Side", "SliceCrossing", "StepControl", "UnibranchError",
    "base_crossings", "box_degree", "classify", "degree_balance", "detect_events",
    "is_balanced", "local_index", "map_degree", "orientation", "parity", "tangent", "trace",
    "validate_consistency",
]
