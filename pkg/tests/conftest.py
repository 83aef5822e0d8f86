"""
测试公共夹具
"""

import pytest

from core.events import AtomicPermEvent, ScopedEvent
from core.models import CNF, ExperimentConfig, VarSpace


@pytest.fixture
def cfg():
    """小规模、固定种子的实验配置"""
    return ExperimentConfig(seed=7, trials=200, level=0.99, jobs=1)


@pytest.fixture
def bits3():
    return VarSpace.bits(3)


@pytest.fixture
def chain_events():
    """X0X1、X1X2 全为0 的两个相关事件，以及只含 X3 的事件"""
    return [
        ScopedEvent.atomic([(0, 0), (1, 0)], label="E0"),
        ScopedEvent.atomic([(1, 0), (2, 0)], label="E1"),
        ScopedEvent.atomic([(3, 1)], label="E2"),
    ]


@pytest.fixture
def small_cnf():
    """8 个变量上的 4-CNF，每个变量至多出现一次"""
    return CNF(n=8, clauses=((1, -2, 3, 4), (-5, 6, -7, 8)))


@pytest.fixture
def perm_events():
    return [
        AtomicPermEvent.of([(0, 1), (1, 0)], label="B0"),
        AtomicPermEvent.of([(2, 0), (3, 3)], label="B1"),
        AtomicPermEvent.of([(1, 2), (4, 4)], label="B2"),
    ]


@pytest.fixture
def bit_chain():
    """7 个比特上的链 B0 - B1 - B2，每个事件为 3 个相邻比特全为 0（p = 1/8）"""
    events = [
        ScopedEvent.atomic([(i, 0) for i in range(start, start + 3)], label=f"B{idx}")
        for idx, start in enumerate((0, 2, 4))
    ]
    return VarSpace.bits(7), events
