"""
界计算模块
"""

from .graph import (
    build_dependency_graph, independent_sets, shearer_measure,
    shearer_signed_sum, stable_seq_weight,
)
from .criteria import check_cluster_expansion, symmetric_criterion, asymmetric_to_cluster
from .psi import psi_theta, disjunction_bound, best_disjunction_order, singleton_bound
from .orderable import is_orderable, orderable_sets, psi_theta_prime, nib_bound, perm_disjunction_bound

__all__ = [
    'build_dependency_graph',
    'independent_sets',
    'shearer_measure',
    'shearer_signed_sum',
    'stable_seq_weight',
    'check_cluster_expansion',
    'symmetric_criterion',
    'asymmetric_to_cluster',
    'psi_theta',
    'disjunction_bound',
    'best_disjunction_order',
    'singleton_bound',
    'is_orderable',
    'orderable_sets',
    'psi_theta_prime',
    'nib_bound',
    'perm_disjunction_bound',
]
