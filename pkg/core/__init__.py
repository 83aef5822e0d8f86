"""
核心模块
"""

from .config import config
from .models import *
from .events import (
    ScopedEvent, AtomicPermEvent, PermDisjunction,
    event_probability, perm_event_probability, related,
    restrict_bad_events, restricted_indices, sample,
)

__all__ = [
    'config',
    'VarSpace',
    'Assignment',
    'Permutation',
    'DepGraph',
    'Measure',
    'ClusterWeights',
    'RunResult',
    'SwapRunResult',
    'Estimate',
    'Verdict',
    'ExperimentConfig',
    'Report',
    'ScopedEvent',
    'AtomicPermEvent',
    'PermDisjunction',
    'event_probability',
    'perm_event_probability',
    'related',
    'restrict_bad_events',
    'restricted_indices',
    'sample',
]
