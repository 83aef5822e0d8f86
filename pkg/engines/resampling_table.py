"""
重采样表 R(i, j) - 每个变量一条惰性扩展的取值流
"""

from typing import Dict, List, Optional, Sequence

import numpy as np

from core.models import Assignment, VarSpace
from core.rng import stream

# 每次扩展的条目数（固定值，保证同一 (seed, i, j) 得到同一取值）
_CHUNK = 64


class ResamplingTable:
    """
    重采样表

    条目 (i, j) 从 1 开始编号，由 (seed, trial, i) 派生的流按位置生成，
    一旦生成即不再改变。prefixes 可为部分变量指定开头若干条目（用于手工推演），
    其后的条目继续从派生流中取。
    """

    def __init__(self, space: VarSpace, seed: int, trial: int = 0,
                 prefixes: Optional[Dict[int, Sequence[int]]] = None):
        self.space = space
        self.seed = int(seed)
        self.trial = int(trial)
        self._columns: List[List[int]] = [[] for _ in range(space.n)]
        self._generators: List[Optional[np.random.Generator]] = [None] * space.n
        self._cdfs = [np.cumsum(np.asarray(vec, dtype=float)) for vec in space.probs]

        for i, prefix in (prefixes or {}).items():
            for value in prefix:
                if not 0 <= value < space.domains[i]:
                    raise ValueError(f"变量 {i} 的预置取值 {value} 超出值域")
            self._columns[i] = [int(v) for v in prefix]

    def _extend(self, i: int) -> None:
        gen = self._generators[i]
        if gen is None:
            gen = stream(self.seed, f"table:{self.trial}", i)
            self._generators[i] = gen
        u = gen.random(_CHUNK)
        draws = np.searchsorted(self._cdfs[i], u, side='right')
        np.minimum(draws, self.space.domains[i] - 1, out=draws)
        self._columns[i].extend(int(v) for v in draws)

    def value(self, i: int, j: int) -> int:
        """R(i, j)，j ≥ 1"""
        if j < 1:
            raise IndexError(f"重采样表位置从1开始: {j}")
        column = self._columns[i]
        while len(column) < j:
            self._extend(i)
        return column[j - 1]

    def row(self, j: int = 1) -> Assignment:
        """每个变量的第 j 个条目"""
        return Assignment(values=tuple(self.value(i, j) for i in range(self.space.n)))

    def materialized(self, i: int) -> int:
        """变量 i 已生成的条目数"""
        return len(self._columns[i])

    def snapshot(self) -> Dict[int, List[int]]:
        """已生成条目的拷贝，可作为 prefixes 复现同一张表"""
        return {i: list(col) for i, col in enumerate(self._columns)}
