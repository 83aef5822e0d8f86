"""
有界出现次数 k-SAT - DIMACS 解析、LLL 实例、ε 近似 j 维独立性与蕴含子句
"""

import itertools
import logging
import math
import re
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import config
from core.events import ScopedEvent
from core.exceptions import (
    BudgetExceeded, CriterionViolated, DuplicateLiteral, InvalidParameter, InvariantViolation, ParseError,
)
from core.models import CNF, VarSpace
from core.parallel import run_trials
from core.rng import stream
from engines.mt_engine import run_mt
from engines.resampling_table import ResamplingTable

logger = logging.getLogger(__name__)

_HEADER = re.compile(r'^p\s+cnf\s+(\d+)\s+(\d+)\s*$')


class KsatInstance(BaseModel):
    """CNF 对应的 LLL 实例"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    space: VarSpace = Field(..., description="均匀比特空间")
    bad_events: List[ScopedEvent] = Field(..., description="每个子句一个坏事件：子句被违反")
    k: int = Field(..., description="最短子句长度")
    L: int = Field(..., description="最大出现次数")
    criterion_ok: bool = Field(..., description="L ≤ 2^k/(ek) 是否成立")


class JwiseDeviation(BaseModel):
    """经验 j 维分布与 2^{-j} 的最大偏差"""
    j: int = Field(..., description="维数")
    deviation: float = Field(..., description="max |频率 - 2^{-j}|")
    se: float = Field(..., description="单元格频率的标准误")
    tuples: int = Field(..., description="检查的下标组个数")
    exhaustive: bool = Field(..., description="是否枚举了全部下标组")
    worst_tuple: Tuple[int, ...] = Field(default=(), description="偏差最大的下标组")
    worst_pattern: int = Field(default=0, description="偏差最大的取值模式（二进制编码）")


# ==================== 解析 ====================

def load_dimacs(text: str) -> CNF:
    """
    解析 DIMACS CNF 文本

    Args:
        text: 以 "p cnf n m" 开头的 DIMACS 文本，c 开头的行为注释

    Returns:
        CNF
    """
    header: Optional[Tuple[int, int]] = None
    clauses: List[Tuple[int, ...]] = []
    pending: List[int] = []
    pending_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('c') or line.startswith('%'):
            continue
        if header is None:
            match = _HEADER.match(line)
            if match is None:
                raise ParseError(f"缺少文件头 'p cnf n m'，实际为 '{line}'", lineno)
            header = (int(match.group(1)), int(match.group(2)))
            continue
        if line.startswith('p'):
            raise ParseError("重复的文件头", lineno)

        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise ParseError(f"无法解析的文字 '{token}'", lineno)
            if not pending:
                pending_line = lineno
            if lit != 0:
                if abs(lit) > header[0]:
                    raise ParseError(f"变量 {abs(lit)} 超出声明的变量数 {header[0]}", lineno)
                pending.append(lit)
                continue
            if not pending:
                raise ParseError("空子句", lineno)
            variables = [abs(v) for v in pending]
            if len(set(variables)) != len(variables):
                raise DuplicateLiteral(f"子句 {pending} 中同一变量出现两次", pending_line)
            clauses.append(tuple(pending))
            pending = []

    if header is None:
        raise ParseError("缺少文件头 'p cnf n m'")
    if pending:
        raise ParseError("最后一个子句没有以 0 结束", pending_line)

    n, m = header
    if len(clauses) != m:
        logger.warning(f"文件头声明 {m} 个子句，实际解析到 {len(clauses)} 个")
    cnf = CNF(n=n, clauses=tuple(clauses))
    logger.info(f"DIMACS 解析完成: n={n}, 子句数={len(clauses)}, k_min={cnf.k_min}, L={cnf.L}")
    return cnf


def to_dimacs(cnf: CNF) -> str:
    """CNF → DIMACS 文本"""
    lines = [f"p cnf {cnf.n} {len(cnf.clauses)}"]
    lines.extend(' '.join(str(lit) for lit in clause) + ' 0' for clause in cnf.clauses)
    return '\n'.join(lines) + '\n'


# ==================== LLL 实例 ====================

def symmetric_threshold(k: int) -> float:
    """2^k/(ek)"""
    return 2.0 ** k / (math.e * k)


def cnf_to_instance(cnf: CNF) -> KsatInstance:
    """每个子句对应坏事件"所有文字为假"，即否定文字的合取"""
    space = VarSpace.bits(cnf.n)
    bad_events = [
        ScopedEvent.atomic(
            [(abs(lit) - 1, 0 if lit > 0 else 1) for lit in clause],
            label=f"C{idx + 1}",
        )
        for idx, clause in enumerate(cnf.clauses)
    ]
    k, L = cnf.k_min, cnf.L
    ok = L <= symmetric_threshold(k)
    if not ok:
        logger.warning(f"L={L} > 2^k/(ek)={symmetric_threshold(k):.4f}，对称LLL判据不满足")
    return KsatInstance(space=space, bad_events=bad_events, k=k, L=L, criterion_ok=ok)


def epsilon_bound(k: int, L: int) -> float:
    """ε = e·L·2^{-k}（要求 L ≤ 2^k/(ek)）"""
    if k < 1 or L < 0:
        raise InvalidParameter(f"参数不合法: k={k}, L={L}")
    if L == 0:
        return 0.0
    if L > symmetric_threshold(k):
        raise CriterionViolated(f"L={L} 超过 2^k/(ek)={symmetric_threshold(k):.4f}")
    return math.e * L * 2.0 ** (-k)


# ==================== j 维独立性 ====================

def _tuple_counts(samples: np.ndarray, tuples: np.ndarray, j: int) -> np.ndarray:
    """每个下标组上 2^j 个取值模式的出现次数，形状 (组数, 2^j)"""
    cells = 1 << j
    powers = (1 << np.arange(j - 1, -1, -1)).astype(np.int64)
    codes = samples[:, tuples].astype(np.int64) @ powers
    offsets = np.arange(len(tuples), dtype=np.int64) * cells
    flat = (codes + offsets).ravel()
    return np.bincount(flat, minlength=len(tuples) * cells).reshape(len(tuples), cells)


def _iter_tuple_chunks(n: int, j: int, exhaustive: bool, count: int, seed: int, chunk: int):
    if exhaustive:
        combos = itertools.combinations(range(n), j)
        while True:
            block = list(itertools.islice(combos, chunk))
            if not block:
                return
            yield np.asarray(block, dtype=np.int64)
    else:
        rng = stream(seed, "jwise")
        remaining = count
        while remaining > 0:
            size = min(chunk, remaining)
            block = np.sort(np.argsort(rng.random((size, n)), axis=1)[:, :j], axis=1)
            remaining -= size
            yield block


def jwise_deviation(samples, j: int, tuple_budget: Optional[int] = None,
                    sample_tuples: Optional[int] = None, seed: Optional[int] = None) -> JwiseDeviation:
    """
    max_{i_1<…<i_j, y} |P̂(X(i_1)=y_1 ∧ … ∧ X(i_j)=y_j) - 2^{-j}|

    Args:
        samples: 0/1 矩阵（试验 × 变量）或 Assignment 列表
        j: 维数，1 ≤ j ≤ 20
        tuple_budget: C(n,j)·2^j 不超过该值时枚举全部下标组
        sample_tuples: 否则随机抽取的下标组个数
        seed: 抽取下标组的种子
    """
    if isinstance(samples, np.ndarray):
        data = samples.astype(np.uint8, copy=False)
    else:
        data = np.asarray([getattr(s, 'values', s) for s in samples], dtype=np.uint8)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InvalidParameter("samples 必须是非空的二维 0/1 数据")
    trials, n = data.shape
    if not 1 <= j <= min(20, n):
        raise InvalidParameter(f"j={j} 必须在 [1, min(20, n={n})] 内")

    tuple_budget = config.get_budget('jwise_tuples', 1000000) if tuple_budget is None else tuple_budget
    sample_tuples = config.get_budget('jwise_sample', 100000) if sample_tuples is None else sample_tuples
    seed = config.SEED if seed is None else seed

    total = math.comb(n, j)
    exhaustive = total * (1 << j) <= tuple_budget
    count = total if exhaustive else sample_tuples
    target = 2.0 ** (-j)
    chunk = max(1, min(4096, 4_000_000 // max(1, trials * j)))

    worst = -1.0
    worst_tuple: Tuple[int, ...] = ()
    worst_pattern = 0
    for block in _iter_tuple_chunks(n, j, exhaustive, count, seed, chunk):
        freqs = _tuple_counts(data, block, j) / trials
        dev = np.abs(freqs - target)
        idx = int(np.argmax(dev))
        row, pattern = divmod(idx, 1 << j)
        if dev.flat[idx] > worst:
            worst = float(dev.flat[idx])
            worst_tuple = tuple(int(v) for v in block[row])
            worst_pattern = pattern

    se = math.sqrt(target * (1 - target) / trials)
    return JwiseDeviation(
        j=j, deviation=worst, se=se, tuples=count, exhaustive=exhaustive,
        worst_tuple=worst_tuple, worst_pattern=worst_pattern,
    )


# ==================== 蕴含子句 ====================

def implicate_clause(k: int, j: int) -> Tuple[int, ...]:
    """implicate_formula(k, j) 蕴含的子句 C：最后 j 个变量的正文字"""
    return tuple(range(k - j + 1, k + 1))


def implicate_formula(k: int, j: int) -> CNF:
    """
    Φ = ⋀_{y∈{0,1}^{k-j}} (C ∨ X(1)=y_1 ∨ … ∨ X(k-j)=y_{k-j})

    前 k-j 个变量为辅助变量，C 位于其后的 j 个新变量上
    """
    if not 1 <= j <= k:
        raise InvalidParameter(f"需要 1 ≤ j ≤ k，实际 j={j}, k={k}")
    aux = k - j
    c = implicate_clause(k, j)
    clauses = []
    for ys in itertools.product((0, 1), repeat=aux):
        clauses.append(c + tuple((i + 1) if y else -(i + 1) for i, y in enumerate(ys)))
    return CNF(n=k, clauses=tuple(clauses))


def implicate_lower_bound(k: int, L: int) -> int:
    """每个非平凡蕴含子句的长度至少为 k - ⌊log₂(eL)⌋"""
    if L < 1:
        raise InvalidParameter(f"L 必须为正: {L}")
    return k - math.floor(math.log2(math.e * L))


def _models(cnf: CNF) -> np.ndarray:
    n = cnf.n
    assignments = ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
    keep = np.ones(len(assignments), dtype=bool)
    for clause in cnf.clauses:
        sat = np.zeros(len(assignments), dtype=bool)
        for lit in clause:
            col = assignments[:, abs(lit) - 1]
            sat |= (col == 1) if lit > 0 else (col == 0)
        keep &= sat
    return assignments[keep]


def min_implicate_size(cnf: CNF) -> Optional[int]:
    """
    最短非平凡蕴含子句的长度

    Returns:
        长度；不可满足时为 0（空子句）；没有非平凡蕴含子句（恒真公式）时为 None
    """
    budget = config.get_budget('implicate', 20)
    if cnf.n > budget:
        raise BudgetExceeded(f"变量数 {cnf.n} 超过穷举预算 {budget}")
    models = _models(cnf)
    if len(models) == 0:
        return 0
    for s in range(1, cnf.n + 1):
        powers = (1 << np.arange(s)).astype(np.int64)
        for subset in itertools.combinations(range(cnf.n), s):
            codes = models[:, list(subset)].astype(np.int64) @ powers
            # 某个取值模式从未出现，则使该模式全假的子句被 Φ 蕴含
            if np.unique(codes).size < (1 << s):
                return s
    return None


# ==================== 随机实例与采样 ====================

def random_bounded_ksat(n: int, k: int, L: int, seed: Optional[int] = None) -> CNF:
    """
    ⌊nL/k⌋ 个 k 子句，每个变量至多出现 L 次，符号随机

    每个子句选剩余容量最大的 k 个变量（容量相同时随机），保证子句内变量互不相同
    """
    if k < 1 or L < 1 or n < k:
        raise InvalidParameter(f"需要 1 ≤ k ≤ n 且 L ≥ 1，实际 n={n}, k={k}, L={L}")
    rng = stream(config.SEED if seed is None else seed, "ksat")
    capacity = np.full(n, L, dtype=np.int64)
    clauses = []
    for _ in range((n * L) // k):
        order = rng.permutation(n)
        order = order[np.argsort(-capacity[order], kind='stable')]
        chosen = np.sort(order[:k])
        capacity[chosen] -= 1
        signs = rng.integers(0, 2, size=k)
        clauses.append(tuple(int(v + 1) if s else -int(v + 1) for v, s in zip(chosen, signs)))
    return CNF(n=n, clauses=tuple(clauses))


def mt_samples(cnf: CNF, trials: int, seed: Optional[int] = None, jobs: Optional[int] = None,
               rule: str = 'lowest', max_steps: Optional[int] = None) -> np.ndarray:
    """
    Moser-Tardos 输出的 0/1 矩阵（只含终止的试验）

    每个输出都必须满足 Φ
    """
    seed = config.SEED if seed is None else seed
    instance = cnf_to_instance(cnf)

    def _trial(t: int) -> Optional[Tuple[int, ...]]:
        table = ResamplingTable(instance.space, seed, trial=t)
        result = run_mt(instance.space, instance.bad_events, rule=rule, table=table, max_steps=max_steps)
        if not result.terminated:
            return None
        if not cnf.satisfied_by(result.final.values):
            raise InvariantViolation(f"试验 {t} 的输出不满足 Φ")
        return result.final.values

    outputs = run_trials(_trial, trials, jobs)
    rows = [row for row in outputs if row is not None]
    if len(rows) < trials:
        logger.warning(f"{trials - len(rows)} 次试验在截断前未终止，已从样本中排除")
    return np.asarray(rows, dtype=np.uint8).reshape(len(rows), cnf.n)
