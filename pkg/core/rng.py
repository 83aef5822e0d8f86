"""
随机数流 - 由 (主种子, 用途标签, 下标) 派生的可复现随机数生成器
"""

import zlib
from typing import Iterable

import numpy as np

_BUFFER_SIZE = 4096


def label_key(label: str) -> int:
    """用途标签 → 32位整数"""
    return zlib.crc32(label.encode('utf-8'))


def seed_sequence(seed: int, label: str, index: int = 0) -> np.random.SeedSequence:
    """派生种子序列，与调用顺序无关"""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(label_key(label), int(index)))


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """基于计数器的 Philox 生成器"""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, label, index)))


def derive_seed(seed: int, label: str, index: int = 0) -> int:
    """派生一个子种子（用于嵌套的流，例如每次试验的重采样表）"""
    return int(seed_sequence(seed, label, index).generate_state(1, dtype=np.uint64)[0])


class UniformBuffer:
    """批量取 [0,1) 均匀数，减少逐个调用生成器的开销"""

    def __init__(self, generator: np.random.Generator, size: int = _BUFFER_SIZE):
        self.generator = generator
        self.size = size
        self._values = generator.random(size)
        self._pos = 0

    def random(self) -> float:
        if self._pos >= self.size:
            self._values = self.generator.random(self.size)
            self._pos = 0
        u = self._values[self._pos]
        self._pos += 1
        return float(u)

    def below(self, m: int) -> int:
        """{0, ..., m-1} 上的均匀整数"""
        k = int(self.random() * m)
        return k if k < m else m - 1

    def bernoulli(self, p: float) -> int:
        return 1 if self.random() < p else 0

    def shuffle(self, items: list) -> list:
        """原地 Fisher-Yates 洗牌"""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def choice(self, items: Iterable):
        items = list(items)
        return items[self.below(len(items))]
