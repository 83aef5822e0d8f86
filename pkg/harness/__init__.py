"""
实验框架模块
"""

from .estimator import estimate, exact_interval, verdict, wilson_interval, mean_estimate, mean_verdict
from .reports import write_report

__all__ = [
    'estimate',
    'verdict',
    'wilson_interval',
    'exact_interval',
    'mean_estimate',
    'mean_verdict',
    'write_report',
]
