"""
Moser-Tardos 算法 - 以重采样表驱动的变量模型重采样
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Union

from core.config import config
from core.events import ScopedEvent
from core.exceptions import InvalidParameter, InvariantViolation
from core.models import Assignment, ClusterWeights, RunResult, VarSpace
from core.rng import UniformBuffer, stream
from .resampling_table import ResamplingTable

logger = logging.getLogger(__name__)

# 选择规则：名称，或接收当前为真事件列表（按变为真的先后排列）并返回其一的函数
SelectionRule = Union[str, Callable[[List[int]], int]]

RULES = ('lowest', 'random', 'fifo')


def default_max_steps(weights: Optional[ClusterWeights] = None) -> int:
    """截断步数：有簇展开权重时为 factor·Σμ̃，否则取配置中的默认值"""
    if weights is None:
        return config.DEFAULT_MAX_STEPS
    return max(1, math.ceil(config.MAX_STEPS_FACTOR * weights.total()))


def make_selector(rule: SelectionRule, seed: int, trial: int = 0) -> Callable[[Dict[int, None]], int]:
    """把选择规则编译为作用在有序真事件集合上的函数"""
    if callable(rule):
        return lambda true: rule(list(true))
    if rule == 'lowest':
        return lambda true: min(true)
    if rule == 'fifo':
        return lambda true: next(iter(true))
    if rule == 'random':
        buf = UniformBuffer(stream(seed, "rule", trial))
        return lambda true: sorted(true)[buf.below(len(true))]
    raise InvalidParameter(f"未知的选择规则: {rule}，可选 {RULES}")


def run_mt(space: VarSpace, bad_events: Sequence[ScopedEvent], rule: SelectionRule = 'lowest',
           table: Optional[ResamplingTable] = None, max_steps: Optional[int] = None,
           seed: Optional[int] = None, weights: Optional[ClusterWeights] = None,
           stop_when: Optional[Callable[[List[int]], bool]] = None) -> RunResult:
    """
    运行 Moser-Tardos 算法

    Args:
        space: 概率空间
        bad_events: 坏事件列表
        rule: 选择规则 lowest / random / fifo 或自定义函数
        table: 重采样表，默认由 seed 新建
        max_steps: 最大重采样次数，默认见 default_max_steps
        seed: 未给出 table 时使用的种子
        weights: 簇展开权重，仅用于推导默认截断
        stop_when: 每个时刻对当前取值求值，为真时提前停止

    Returns:
        RunResult，terminated=False 表示达到截断
    """
    if table is None:
        table = ResamplingTable(space, config.SEED if seed is None else seed)
    if max_steps is None:
        max_steps = default_max_steps(weights)
    select = make_selector(rule, table.seed, table.trial)

    by_var: List[List[int]] = [[] for _ in range(space.n)]
    for idx, event in enumerate(bad_events):
        for i in event.scope:
            by_var[i].append(idx)

    positions = [1] * space.n
    values = [table.value(i, 1) for i in range(space.n)]

    # 有序集合：键的插入顺序即事件变为真的顺序
    true: Dict[int, None] = {}
    for idx, event in enumerate(bad_events):
        if event.holds(values):
            true[idx] = None

    log: List[int] = []
    stopped = False
    while True:
        if stop_when is not None and stop_when(values):
            stopped = True
            break
        if not true or len(log) >= max_steps:
            break
        b = select(true)
        log.append(b)
        scope = bad_events[b].scope
        for i in scope:
            positions[i] += 1
            values[i] = table.value(i, positions[i])
        affected = set()
        for i in scope:
            affected.update(by_var[i])
        for a in sorted(affected):
            if bad_events[a].holds(values):
                if a not in true:
                    true[a] = None
            else:
                true.pop(a, None)

    terminated = not true
    if terminated:
        for idx, event in enumerate(bad_events):
            if event.holds(values):
                raise InvariantViolation(f"终止时坏事件 {idx} 仍然成立")

    return RunResult(
        final=Assignment(values=tuple(values)),
        log=log,
        terminated=terminated,
        steps=len(log),
        stopped=stopped,
    )
