"""
算法引擎模块
"""

from .resampling_table import ResamplingTable
from .mt_engine import RULES, default_max_steps, run_mt
from .witness_dag import WitnessDAG, full_witness_dag, project_dag, compatible, dag_weight
from .swap_engine import resample_perm_event, run_swapping
from .witness_tree import (
    TreeStructure, build_witness_tree, tree_weight, canonical_weight, appearing_trees, tree_appears,
)

__all__ = [
    'ResamplingTable',
    'RULES',
    'default_max_steps',
    'run_mt',
    'WitnessDAG',
    'full_witness_dag',
    'project_dag',
    'compatible',
    'dag_weight',
    'resample_perm_event',
    'run_swapping',
    'TreeStructure',
    'build_witness_tree',
    'tree_weight',
    'canonical_weight',
    'appearing_trees',
    'tree_appears',
]
