"""
数据模型定义
"""

import math
from typing import List, Dict, Any, Optional, Tuple, FrozenSet, Literal
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, computed_field, field_validator, model_validator

from .config import config


# ==================== 概率空间 ====================

class VarSpace(BaseModel):
    """有限值域乘积概率空间 Ω"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="变量个数")
    domains: Tuple[int, ...] = Field(..., description="每个变量的值域大小")
    probs: Tuple[Tuple[float, ...], ...] = Field(..., description="每个变量在其值域上的概率向量")

    @model_validator(mode='after')
    def _check_distribution(self) -> 'VarSpace':
        if len(self.domains) != self.n or len(self.probs) != self.n:
            raise ValueError(f"domains/probs 长度必须等于 n={self.n}")
        for i, (size, vec) in enumerate(zip(self.domains, self.probs)):
            if size < 1:
                raise ValueError(f"变量 {i} 的值域为空")
            if len(vec) != size:
                raise ValueError(f"变量 {i} 的概率向量长度 {len(vec)} 与值域大小 {size} 不符")
            if any(p < 0 for p in vec):
                raise ValueError(f"变量 {i} 存在负概率")
            if abs(math.fsum(vec) - 1.0) > 1e-12:
                raise ValueError(f"变量 {i} 的概率之和不为1: {math.fsum(vec)}")
        return self

    @classmethod
    def uniform(cls, n: int, size: int) -> 'VarSpace':
        """n 个在 {0..size-1} 上均匀分布的变量"""
        vec = tuple([1.0 / size] * size)
        return cls(n=n, domains=tuple([size] * n), probs=tuple([vec] * n))

    @classmethod
    def bits(cls, n: int) -> 'VarSpace':
        """n 个均匀比特"""
        return cls.uniform(n, 2)

    def marginal(self, i: int, value: int) -> float:
        """P(X(i) = value)"""
        if not 0 <= value < self.domains[i]:
            return 0.0
        return self.probs[i][value]


class Assignment(BaseModel):
    """变量的一组取值 X"""
    model_config = ConfigDict(frozen=True)

    values: Tuple[int, ...] = Field(..., description="每个变量的取值")

    def check(self, space: VarSpace) -> bool:
        """检查是否属于给定空间"""
        return len(self.values) == space.n and all(
            0 <= v < d for v, d in zip(self.values, space.domains)
        )

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)


class Permutation(BaseModel):
    """[n] 上的双射 π 及其逆"""
    model_config = ConfigDict(frozen=True)

    forward: Tuple[int, ...] = Field(..., description="π(x)")
    inverse: Tuple[int, ...] = Field(..., description="π⁻¹(y)")

    @model_validator(mode='after')
    def _check_bijection(self) -> 'Permutation':
        n = len(self.forward)
        if len(self.inverse) != n or sorted(self.forward) != list(range(n)):
            raise ValueError("forward 不是 [n] 上的双射")
        for x, y in enumerate(self.forward):
            if self.inverse[y] != x:
                raise ValueError(f"inverse[forward[{x}]] != {x}")
        return self

    @classmethod
    def from_forward(cls, forward) -> 'Permutation':
        forward = tuple(int(y) for y in forward)
        inverse = [0] * len(forward)
        for x, y in enumerate(forward):
            if 0 <= y < len(forward):
                inverse[y] = x
        return cls(forward=forward, inverse=tuple(inverse))

    @classmethod
    def identity(cls, n: int) -> 'Permutation':
        return cls(forward=tuple(range(n)), inverse=tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.forward)

    def __getitem__(self, x: int) -> int:
        return self.forward[x]


# ==================== 依赖图与测度 ====================

class DepGraph(BaseModel):
    """坏事件上的对称依赖结构 G，邻域 N(B) 包含 B 自身"""
    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=0, description="坏事件个数")
    neighbors: Tuple[FrozenSet[int], ...] = Field(..., description="包含自身的邻域 N(B)")
    probs: Tuple[float, ...] = Field(..., description="每个坏事件的概率")

    _masks: Tuple[int, ...] = PrivateAttr(default=())

    @model_validator(mode='after')
    def _check_graph(self) -> 'DepGraph':
        if len(self.neighbors) != self.m or len(self.probs) != self.m:
            raise ValueError(f"neighbors/probs 长度必须等于 m={self.m}")
        for a, nbrs in enumerate(self.neighbors):
            if a not in nbrs:
                raise ValueError(f"事件 {a} 的邻域缺少自环")
            for b in nbrs:
                if not 0 <= b < self.m or a not in self.neighbors[b]:
                    raise ValueError(f"邻接关系不对称: {a} ~ {b}")
        if any(not 0 <= p < 1 for p in self.probs):
            raise ValueError("事件概率必须位于 [0, 1)")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._masks = tuple(sum(1 << b for b in nbrs) for nbrs in self.neighbors)

    @classmethod
    def from_edges(cls, m: int, edges, probs) -> 'DepGraph':
        """由无向边列表构造（自动补上自环）"""
        nbrs = [{a} for a in range(m)]
        for a, b in edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(m=m, neighbors=tuple(frozenset(s) for s in nbrs), probs=tuple(float(p) for p in probs))

    @property
    def masks(self) -> Tuple[int, ...]:
        """邻域的位掩码表示"""
        return self._masks

    def adjacent(self, a: int, b: int) -> bool:
        return b in self.neighbors[a]

    def is_independent(self, vertices) -> bool:
        """两两不相邻（忽略自环）"""
        items = sorted(vertices)
        for idx, a in enumerate(items):
            for b in items[idx + 1:]:
                if b in self.neighbors[a]:
                    return False
        return True

    def subgraph(self, vertices) -> 'DepGraph':
        """按给定顺序取诱导子图"""
        order = list(vertices)
        index = {v: i for i, v in enumerate(order)}
        nbrs = tuple(
            frozenset(index[b] for b in self.neighbors[v] if b in index) for v in order
        )
        return DepGraph(m=len(order), neighbors=nbrs, probs=tuple(self.probs[v] for v in order))


class Measure(BaseModel):
    """Shearer 的 Q 与 μ"""
    q_empty: float = Field(..., description="Q(∅)")
    mu_cache: Dict[FrozenSet[int], float] = Field(default_factory=dict, description="独立集 → μ(I)")
    satisfied: bool = Field(..., description="所有 Q(I) > 0")
    violation: Optional[FrozenSet[int]] = Field(default=None, description="第一个 Q(I) <= 0 的独立集")
    exact: bool = Field(default=False, description="是否使用有理数精确计算")

    def mu(self, subset) -> float:
        """μ(I)，非独立集返回 0"""
        return self.mu_cache.get(frozenset(subset), 0.0)


class ClusterWeights(BaseModel):
    """簇展开判据的权重函数 μ̃"""
    model_config = ConfigDict(frozen=True)

    mu_tilde: Tuple[float, ...] = Field(..., description="每个坏事件的 μ̃(B)")

    @field_validator('mu_tilde')
    @classmethod
    def _nonnegative(cls, v):
        if any(x < 0 for x in v):
            raise ValueError("μ̃ 必须非负")
        return v

    @classmethod
    def uniform(cls, m: int, value: float) -> 'ClusterWeights':
        return cls(mu_tilde=tuple([float(value)] * m))

    @classmethod
    def from_asymmetric(cls, xs) -> 'ClusterWeights':
        """非对称判据的 x(B) 转换为 μ̃ = x/(1-x)"""
        return cls(mu_tilde=tuple(x / (1.0 - x) for x in xs))

    def __getitem__(self, b: int) -> float:
        return self.mu_tilde[b]

    def total(self) -> float:
        return math.fsum(self.mu_tilde)


# ==================== 算法运行结果 ====================

class RunResult(BaseModel):
    """一次 Moser-Tardos 运行"""
    final: Assignment = Field(..., description="终止时的赋值")
    log: List[int] = Field(default_factory=list, description="依次重采样的坏事件下标 B_1..B_T")
    terminated: bool = Field(..., description="是否在截断前终止")
    steps: int = Field(..., ge=0, description="重采样次数 T")
    stopped: bool = Field(default=False, description="是否因 stop_when 提前停止")

    @model_validator(mode='after')
    def _check_log(self) -> 'RunResult':
        if len(self.log) != self.steps:
            raise ValueError("log 长度必须等于 steps")
        return self

    def resample_counts(self, m: int) -> List[int]:
        """每个坏事件被重采样的次数"""
        counts = [0] * m
        for b in self.log:
            counts[b] += 1
        return counts


class Snapshot(BaseModel):
    """Swapping 算法某一时刻的状态 π^t（含单元格标记）"""
    time: int = Field(..., ge=0, description="时刻 t")
    forward: Tuple[int, ...] = Field(..., description="π^t")
    marks: Tuple[int, ...] = Field(default=(), description="单元格 (x, π^t(x)) 上的标记")


class SwapRunResult(BaseModel):
    """一次 Swapping 算法运行"""
    final: Permutation = Field(..., description="π^final")
    initial: Permutation = Field(..., description="π^0")
    log: List[int] = Field(default_factory=list, description="依次重采样的坏事件下标")
    terminated: bool = Field(..., description="是否在截断前终止")
    steps: int = Field(..., ge=0, description="重采样次数")
    snapshots: List[Snapshot] = Field(default_factory=list, description="最近若干时刻的 π^t")
    initial_marks: Tuple[int, ...] = Field(default=(), description="单元格 (x, π^0(x)) 的初始标记")
    final_marks: Tuple[int, ...] = Field(default=(), description="单元格 (x, π^final(x)) 的最终标记")

    def resample_counts(self, m: int) -> List[int]:
        counts = [0] * m
        for b in self.log:
            counts[b] += 1
        return counts


# ==================== 蒙特卡洛估计 ====================

class Estimate(BaseModel):
    """概率的蒙特卡洛估计（Wilson 区间）"""
    successes: int = Field(..., ge=0, description="事件发生次数")
    trials: int = Field(..., ge=1, description="试验次数")
    p_hat: float = Field(..., ge=0, le=1, description="点估计")
    ci_low: float = Field(..., ge=0, le=1, description="置信下界")
    ci_high: float = Field(..., ge=0, le=1, description="置信上界")
    level: float = Field(..., description="置信水平")
    seed: int = Field(..., description="主种子")
    non_terminated: int = Field(default=0, ge=0, description="未终止的试验数")
    wall_time: float = Field(default=0.0, exclude=True, description="耗时(秒)，不写入报告")

    @model_validator(mode='after')
    def _check_order(self) -> 'Estimate':
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("必须满足 ci_low <= p_hat <= ci_high")
        return self


class MeanEstimate(BaseModel):
    """均值估计"""
    mean: float = Field(..., description="样本均值")
    se: float = Field(..., ge=0, description="标准误")
    count: int = Field(..., ge=0, description="样本数")


class Verdict(BaseModel):
    """界的一致性判定"""
    name: str = Field(default="", description="检查名称")
    status: Literal['consistent', 'violation'] = Field(..., description="判定结果")
    bound: float = Field(..., description="理论上界")
    ci_low: float = Field(..., description="经验置信下界")
    margin: float = Field(..., description="bound - ci_low")

    @property
    def ok(self) -> bool:
        return self.status == 'consistent'


class ExperimentConfig(BaseModel):
    """一次实验的参数"""
    seed: int = Field(default_factory=lambda: config.SEED, description="主种子")
    trials: int = Field(default_factory=lambda: config.DEFAULT_TRIALS, ge=1, description="试验次数")
    level: float = Field(default_factory=lambda: config.DEFAULT_LEVEL, description="置信水平")
    jobs: int = Field(default_factory=lambda: config.JOBS, ge=1, description="并行线程数")
    max_steps: Optional[int] = Field(default=None, ge=1, description="单次运行的最大重采样次数")
    format: Literal['json', 'csv'] = Field(default='json', description="输出格式")
    out: Optional[str] = Field(default=None, description="输出路径，为空时写到标准输出")
    params: Dict[str, Any] = Field(default_factory=dict, description="子命令参数")

    @field_validator('level')
    @classmethod
    def _check_level(cls, v):
        if v not in (0.95, 0.99):
            raise ValueError(f"置信水平只支持 0.95 或 0.99: {v}")
        return v


# ==================== 应用实例 ====================

class CNF(BaseModel):
    """合取范式 Φ（DIMACS 风格的有符号文字）"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0, description="变量个数")
    clauses: Tuple[Tuple[int, ...], ...] = Field(default=(), description="子句列表")

    @model_validator(mode='after')
    def _check_clauses(self) -> 'CNF':
        for idx, clause in enumerate(self.clauses):
            if not clause:
                raise ValueError(f"子句 {idx} 为空")
            variables = [abs(lit) for lit in clause]
            if any(v == 0 or v > self.n for v in variables):
                raise ValueError(f"子句 {idx} 含有越界变量")
            if len(set(variables)) != len(variables):
                raise ValueError(f"子句 {idx} 中同一变量出现两次")
        return self

    @computed_field
    @property
    def k_min(self) -> int:
        """最短子句长度（无子句时约定为1）"""
        return min((len(c) for c in self.clauses), default=1)

    @computed_field
    @property
    def L(self) -> int:
        """任一变量出现的最大次数"""
        counts: Dict[int, int] = {}
        for clause in self.clauses:
            for lit in clause:
                counts[abs(lit)] = counts.get(abs(lit), 0) + 1
        return max(counts.values(), default=0)

    def satisfied_by(self, values) -> bool:
        """values[v-1] ∈ {0,1}"""
        return all(
            any((values[abs(lit) - 1] == 1) == (lit > 0) for lit in clause)
            for clause in self.clauses
        )


class BlockGraph(BaseModel):
    """顶点被划分为 k 个大小为 b 的块的图"""
    model_config = ConfigDict(frozen=True)

    blocks: Tuple[Tuple[int, ...], ...] = Field(..., description="块划分 V_1..V_k")
    edges: Tuple[Tuple[int, int], ...] = Field(default=(), description="无向边")

    _block_of: Dict[int, Tuple[int, int]] = PrivateAttr(default_factory=dict)

    @model_validator(mode='after')
    def _check_partition(self) -> 'BlockGraph':
        if not self.blocks:
            raise ValueError("至少需要一个块")
        size = len(self.blocks[0])
        if size < 1 or any(len(block) != size for block in self.blocks):
            raise ValueError("每个块必须恰好有 b 个顶点")
        seen = set()
        for block in self.blocks:
            for v in block:
                if v in seen:
                    raise ValueError(f"顶点 {v} 出现在多个块中")
                seen.add(v)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"不允许自环: {u}")
            if u not in seen or v not in seen:
                raise ValueError(f"边 ({u}, {v}) 的端点不在任何块中")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._block_of = {
            v: (i, pos) for i, block in enumerate(self.blocks) for pos, v in enumerate(block)
        }

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def b(self) -> int:
        return len(self.blocks[0])

    @property
    def max_degree(self) -> int:
        """Δ"""
        degree: Dict[int, int] = {}
        for u, v in set(tuple(sorted(e)) for e in self.edges):
            degree[u] = degree.get(u, 0) + 1
            degree[v] = degree.get(v, 0) + 1
        return max(degree.values(), default=0)

    def locate(self, v: int) -> Tuple[int, int]:
        """顶点 → (块下标, 块内位置)"""
        return self._block_of[v]


class Transversal(BaseModel):
    """每块恰选一个顶点"""
    model_config = ConfigDict(frozen=True)

    choice: Tuple[int, ...] = Field(..., description="第 i 个元素为 V_i 中被选中的顶点")

    def vertices(self) -> FrozenSet[int]:
        return frozenset(self.choice)


class ColorMatrix(BaseModel):
    """n×n 着色矩阵 A 及可选权重 w"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="阶数")
    colors: Tuple[Tuple[int, ...], ...] = Field(..., description="A(i, j)")
    weights: Optional[Tuple[Tuple[float, ...], ...]] = Field(default=None, description="w(i, j)")

    @model_validator(mode='after')
    def _check_square(self) -> 'ColorMatrix':
        if len(self.colors) != self.n or any(len(row) != self.n for row in self.colors):
            raise ValueError(f"颜色矩阵必须是 {self.n}×{self.n}")
        if self.weights is not None:
            if len(self.weights) != self.n or any(len(row) != self.n for row in self.weights):
                raise ValueError("权重矩阵尺寸与颜色矩阵不符")
            if any(w < 0 for row in self.weights for w in row):
                raise ValueError("权重必须非负")
        return self

    @property
    def counts(self) -> Dict[int, int]:
        """每种颜色的出现次数 u_k"""
        counts: Dict[int, int] = {}
        for row in self.colors:
            for c in row:
                counts[c] = counts.get(c, 0) + 1
        return counts

    @property
    def delta(self) -> int:
        """Δ = max_k u_k"""
        return max(self.counts.values())

    def weight(self, x: int, y: int) -> float:
        return 1.0 if self.weights is None else self.weights[x][y]

    def total_weight(self) -> float:
        """w(A)"""
        if self.weights is None:
            return float(self.n * self.n)
        return math.fsum(w for row in self.weights for w in row)


class PartialLatinResult(BaseModel):
    """部分拉丁截线"""
    n: int = Field(..., ge=1, description="阶数")
    kept: Tuple[Tuple[int, int], ...] = Field(..., description="保留的单元格 (x, y)")
    removed: Dict[int, int] = Field(default_factory=dict, description="颜色 k → L_k")
    q_sizes: Dict[int, int] = Field(default_factory=dict, description="颜色 k → |Q_k|")
    mark_rate: float = Field(..., ge=0, le=1, description="标记概率 r")
    steps: int = Field(default=0, ge=0, description="重采样次数")
    terminated: bool = Field(default=True, description="是否终止")

    @model_validator(mode='after')
    def _check_size(self) -> 'PartialLatinResult':
        if len(self.kept) != self.n - sum(self.removed.values()):
            raise ValueError("size 必须等于 n - Σ L_k")
        rows = [x for x, _ in self.kept]
        cols = [y for _, y in self.kept]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("保留的单元格行列必须互不相同")
        return self

    @property
    def size(self) -> int:
        return len(self.kept)


# ==================== 报告 ====================

class Report(BaseModel):
    """子命令输出"""
    report_schema: str = Field(default_factory=lambda: config.REPORT_SCHEMA, alias="schema", description="报告格式版本")
    kind: str = Field(..., description="报告类型，例如 latin.table")
    params: Dict[str, Any] = Field(default_factory=dict, description="输入参数")
    results: Dict[str, Any] = Field(default_factory=dict, description="计算结果")
    verdicts: List[Verdict] = Field(default_factory=list, description="界的一致性判定")
    rows: Optional[List[Dict[str, Any]]] = Field(default=None, description="表格型结果（可输出CSV）")

    model_config = ConfigDict(populate_by_name=True)

    @property
    def has_violation(self) -> bool:
        return any(not v.ok for v in self.verdicts)


class ShearerRequest(BaseModel):
    """Shearer 测度计算请求"""
    m: int = Field(..., ge=1, le=25, description="坏事件个数")
    edges: List[Tuple[int, int]] = Field(default_factory=list, description="依赖边")
    probs: List[float] = Field(..., description="每个坏事件的概率")


class DisjunctionRequest(BaseModel):
    """变量模型析取界计算请求（每个变量在 domain 个值上均匀）"""
    n: int = Field(..., ge=1, description="变量个数")
    domain: int = Field(default=2, ge=2, description="每个变量的取值个数")
    bad: List[List[Tuple[int, int]]] = Field(default_factory=list, description="坏事件，每个为 (i, j) 的原子合取")
    members: List[List[Tuple[int, int]]] = Field(..., min_length=1, description="析取成员，每个为 (i, j) 的原子合取")
    order: Optional[List[int]] = Field(default=None, description="枚举顺序，默认输入顺序")
