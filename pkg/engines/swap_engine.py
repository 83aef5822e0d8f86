"""
Swapping 算法 - 排列模型上的重采样（可附带单元格标记位）
"""

import logging
from collections import deque
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.config import config
from core.events import AtomicPermEvent
from core.exceptions import EventNotTrue, InvalidParameter, InvariantViolation
from core.models import ClusterWeights, Permutation, Snapshot, SwapRunResult
from core.rng import UniformBuffer, stream
from .mt_engine import SelectionRule, default_max_steps, make_selector

logger = logging.getLogger(__name__)

Rng = Union[UniformBuffer, np.random.Generator]


def _below(rng: Rng, m: int) -> int:
    if isinstance(rng, UniformBuffer):
        return rng.below(m)
    return int(rng.integers(m))


def _kth_free(k: int, used: Sequence[int]) -> int:
    """[n] − used 中第 k 小的元素（used 升序）"""
    candidate = k
    for u in used:
        if u <= candidate:
            candidate += 1
        else:
            break
    return candidate


def _swap_resample(forward: List[int], inverse: List[int], xs: Sequence[int], rng: Rng) -> List[int]:
    """依次对 x_i 选 x′_i ∈ [n] − {x_1..x_{i-1}} 并交换 π 的第 x_i 与 x′_i 项，返回被改动的位置"""
    n = len(forward)
    used: List[int] = []
    touched = set()
    for i, x in enumerate(xs):
        x_prime = _kth_free(_below(rng, n - i), used)
        if x_prime != x:
            y, y_prime = forward[x], forward[x_prime]
            forward[x], forward[x_prime] = y_prime, y
            inverse[y_prime], inverse[y] = x, x_prime
        touched.add(x)
        touched.add(x_prime)
        # 保持 used 升序
        pos = 0
        while pos < len(used) and used[pos] < x:
            pos += 1
        used.insert(pos, x)
    return sorted(touched)


def resample_perm_event(pi: Permutation, event: AtomicPermEvent, rng: Rng, strict: bool = False) -> Permutation:
    """
    对排列 π 执行事件 B 的交换子程序

    Args:
        pi: 当前排列
        event: 原子事件 B = {(x_1,y_1),…,(x_r,y_r)}
        rng: UniformBuffer 或 numpy Generator
        strict: 为 True 时要求 B 在 π 上成立

    Returns:
        新的排列（恰好执行 r 次交换）
    """
    if strict and not all(pi.forward[x] == y for x, y in event.pairs):
        raise EventNotTrue(f"事件 {event.pairs} 在当前排列上不成立")
    forward = list(pi.forward)
    inverse = list(pi.inverse)
    _swap_resample(forward, inverse, event.xs, rng)
    return Permutation(forward=tuple(forward), inverse=tuple(inverse))


def _mark_rate(bad_events: Sequence[AtomicPermEvent]) -> Optional[float]:
    rates = {e.mark_prob for e in bad_events if e.mark_prob is not None}
    if not rates:
        return None
    if len(rates) > 1:
        raise InvalidParameter(f"所有带标记事件必须使用同一标记概率，实际为 {sorted(rates)}")
    return rates.pop()


def _check_bijection(forward: List[int], inverse: List[int]) -> None:
    for x, y in enumerate(forward):
        if inverse[y] != x:
            raise InvariantViolation(f"交换后排列失效: π({x})={y}，但 π⁻¹({y})={inverse[y]}")


def run_swapping(n: int, bad_events: Sequence[AtomicPermEvent], rule: SelectionRule = 'lowest',
                 seed: Optional[int] = None, max_steps: Optional[int] = None,
                 weights: Optional[ClusterWeights] = None, snapshots: int = 0,
                 stop_when: Optional[Callable[[List[int]], bool]] = None,
                 trial: int = 0, debug: bool = False) -> SwapRunResult:
    """
    运行 Swapping 算法

    Args:
        n: 排列大小
        bad_events: 原子坏事件；带 mark_prob 的事件共享每个单元格上的 Bernoulli 标记位
        rule: 选择规则
        seed: 主种子
        max_steps: 截断步数
        weights: 簇展开权重，仅用于推导默认截断
        snapshots: 保留最近多少个时刻的 π^t；负数表示全部保留
        stop_when: 每个时刻对 π^t 求值，为真时提前停止
        trial: 试验编号（派生独立的流）
        debug: 每次交换后检查排列合法性

    Returns:
        SwapRunResult
    """
    seed = config.SEED if seed is None else seed
    if max_steps is None:
        max_steps = default_max_steps(weights)
    for e in bad_events:
        if any(x >= n or y >= n for x, y in e.pairs):
            raise InvalidParameter(f"事件 {e.pairs} 的坐标超出 [0, {n})")

    buf = UniformBuffer(stream(seed, "swapping", trial))
    select = make_selector(rule, seed, trial)

    forward = buf.shuffle(list(range(n)))
    inverse = [0] * n
    for x, y in enumerate(forward):
        inverse[y] = x
    initial = tuple(forward)

    rate = _mark_rate(bad_events)
    marks: Optional[List[List[int]]] = None
    if rate is not None:
        grid = stream(seed, "marks", trial).random((n, n)) < rate
        marks = grid.astype(int).tolist()

    def _cell_marks() -> Tuple[int, ...]:
        if marks is None:
            return ()
        return tuple(marks[x][forward[x]] for x in range(n))

    initial_marks = _cell_marks()

    by_cell: Dict[Tuple[int, int], List[int]] = {}
    for idx, e in enumerate(bad_events):
        for cell in e.pairs:
            by_cell.setdefault(cell, []).append(idx)

    true: Dict[int, None] = {}
    for idx, e in enumerate(bad_events):
        if e.holds(forward, marks):
            true[idx] = None

    history: deque = deque(maxlen=None if snapshots < 0 else snapshots)

    def _record(t: int) -> None:
        if snapshots != 0:
            history.append(Snapshot.model_construct(time=t, forward=tuple(forward), marks=_cell_marks()))

    log: List[int] = []
    stopped = False
    _record(0)
    while True:
        if stop_when is not None and stop_when(forward):
            stopped = True
            break
        if not true or len(log) >= max_steps:
            break
        b = select(true)
        log.append(b)
        event = bad_events[b]
        touched = _swap_resample(forward, inverse, event.xs, buf)
        if marks is not None and event.marked:
            for x, y in event.pairs:
                marks[x][y] = buf.bernoulli(rate)
        if debug:
            _check_bijection(forward, inverse)

        touched_set = set(touched)
        for a in [a for a in true if touched_set.intersection(bad_events[a].xs)]:
            if not bad_events[a].holds(forward, marks):
                del true[a]
        for a in sorted({a for x in touched for a in by_cell.get((x, forward[x]), ())}):
            if a not in true and bad_events[a].holds(forward, marks):
                true[a] = None
        _record(len(log))

    terminated = not true
    if terminated:
        for idx, e in enumerate(bad_events):
            if e.holds(forward, marks):
                raise InvariantViolation(f"终止时坏事件 {idx} 仍然成立")
    if not terminated and not stopped:
        logger.debug(f"Swapping 算法在 {max_steps} 步截断 (seed={seed}, trial={trial})")

    return SwapRunResult(
        final=Permutation(forward=tuple(forward), inverse=tuple(inverse)),
        initial=Permutation.from_forward(initial),
        log=log,
        terminated=terminated,
        steps=len(log),
        snapshots=list(history),
        initial_marks=initial_marks,
        final_marks=_cell_marks(),
    )
