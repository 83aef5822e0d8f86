"""
独立截线 - 分块图的 LLL 实例、簇展开参数、回避概率界与构造性回避
"""

import logging
import math
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from bounds.criteria import ClusterVerdict, check_cluster_expansion, uniform_weights
from bounds.graph import build_dependency_graph
from core.config import config
from core.events import ScopedEvent
from core.exceptions import (
    InputError, InvalidParameter, InvariantViolation, OutOfRange, ParseError, RestartsExhausted,
    SubcriticalBlockSize,
)
from core.models import BlockGraph, RunResult, Transversal, VarSpace
from core.rng import stream
from engines.mt_engine import run_mt
from engines.resampling_table import ResamplingTable

logger = logging.getLogger(__name__)


class TransversalInstance(BaseModel):
    """每块一个变量、每条跨块边一个坏事件"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    space: VarSpace = Field(..., description="每块上的均匀选择")
    bad_events: List[ScopedEvent] = Field(default_factory=list, description="两端点同时被选中")
    edges: List[Tuple[int, int]] = Field(default_factory=list, description="与坏事件一一对应的边")
    dropped: int = Field(default=0, description="被忽略的块内边数")


class AvoidanceBound(BaseModel):
    """P_MT(L ∩ T ≠ ∅) 的上界"""
    bound: float = Field(..., description="所用分支给出的上界")
    branch: str = Field(..., description="psi (b ≥ 4.5Δ) 或 mixed (4Δ ≤ b < 4.5Δ)")
    psi_value: float = Field(..., description="2ℓ/((b+ℓ) + (b-ℓ)√(1-4Δ/b))")
    exp_value: float = Field(..., description="2(1-e^{-ℓ/b})/(1+√(1-4Δ/b))")


class BlockGraphFile(BaseModel):
    """JSON 实例格式"""
    blocks: List[List[int]] = Field(..., description="块划分")
    edges: List[Tuple[int, int]] = Field(default_factory=list, description="无向边")
    avoid: List[int] = Field(default_factory=list, description="需要回避的顶点")


# ==================== 实例 ====================

def to_lll_instance(g: BlockGraph) -> TransversalInstance:
    """变量 X(i) ∈ [b] 表示块 V_i 中被选中的顶点；坏事件为边的两个端点同时被选中"""
    space = VarSpace.uniform(g.k, g.b)
    bad_events: List[ScopedEvent] = []
    edges: List[Tuple[int, int]] = []
    dropped = 0
    for u, v in sorted(set(tuple(sorted(e)) for e in g.edges)):
        (bu, pu), (bv, pv) = g.locate(u), g.locate(v)
        if bu == bv:
            dropped += 1
            continue
        bad_events.append(ScopedEvent.atomic([(bu, pu), (bv, pv)], label=f"{u}-{v}"))
        edges.append((u, v))
    if dropped:
        logger.warning(f"忽略了 {dropped} 条块内边（每块只选一个顶点，它们不会同时被选中）")
    return TransversalInstance(space=space, bad_events=bad_events, edges=edges, dropped=dropped)


def is_independent_transversal(g: BlockGraph, t: Transversal) -> bool:
    """每块恰选一个本块顶点，且所选顶点间没有边"""
    if len(t.choice) != g.k:
        return False
    if any(v not in block for v, block in zip(t.choice, g.blocks)):
        return False
    chosen = t.vertices()
    return not any(u in chosen and v in chosen for u, v in g.edges)


def random_block_graph(k: int, b: int, delta: int, seed: Optional[int] = None) -> BlockGraph:
    """
    k 个大小为 b 的块，只含跨块边，最大度不超过 Δ

    每个顶点放 Δ 个端点槽位，随机配对；同块或重复的配对被丢弃
    """
    if k < 1 or b < 1 or delta < 0:
        raise InvalidParameter(f"参数不合法: k={k}, b={b}, Δ={delta}")
    rng = stream(config.SEED if seed is None else seed, "block-graph")
    stubs = rng.permutation(k * b * delta) // delta if delta else []
    edges = set()
    for idx in range(0, len(stubs) - 1, 2):
        u, v = int(stubs[idx]), int(stubs[idx + 1])
        if u // b == v // b:
            continue
        edges.add((min(u, v), max(u, v)))
    blocks = tuple(tuple(range(i * b, (i + 1) * b)) for i in range(k))
    return BlockGraph(blocks=blocks, edges=tuple(sorted(edges)))


def load_block_graph(text: str) -> Tuple[BlockGraph, FrozenSet[int]]:
    """解析 {"blocks": [...], "edges": [...], "avoid": [...]}"""
    try:
        data = BlockGraphFile.model_validate_json(text)
    except ValidationError as e:
        raise ParseError(f"实例文件格式错误: {e}")
    try:
        g = BlockGraph(blocks=tuple(tuple(b) for b in data.blocks), edges=tuple(tuple(e) for e in data.edges))
    except ValidationError as e:
        raise InputError(f"分块图不合法: {e}")
    avoid = frozenset(data.avoid)
    unknown = [v for v in avoid if v not in {u for block in g.blocks for u in block}]
    if unknown:
        raise OutOfRange(f"回避集合含有不存在的顶点: {sorted(unknown)}")
    return g, avoid


# ==================== 界 ====================

def _root_term(b: float, delta: float) -> float:
    if delta < 1:
        raise InvalidParameter(f"Δ 必须至少为1: {delta}")
    if b < 4 * delta:
        raise SubcriticalBlockSize(f"b={b} < 4Δ={4 * delta}")
    return math.sqrt(1.0 - 4.0 * delta / b)


def alpha_cluster(b: int, delta: int) -> float:
    """μ̃(B) = α = (b - √(b(b-4Δ)) - 2Δ)/(2bΔ²)"""
    _root_term(b, delta)
    return (b - math.sqrt(b * (b - 4 * delta)) - 2 * delta) / (2.0 * b * delta ** 2)


def alpha_prime(b: int, delta: int, ell: int) -> float:
    """受限于 L 后的簇展开权重 2/(b²(1+√(1-4Δ/b)) - 2Δ(b-ℓ))"""
    s = _root_term(b, delta)
    return 2.0 / (b * b * (1.0 + s) - 2.0 * delta * (b - ell))


def block_psi_bound(b: int, delta: int, ell: int) -> float:
    """L 位于一个块内时 Ψ ≤ 2b/(b + (b-ℓ)√(1-4Δ/b) + ℓ)"""
    s = _root_term(b, delta)
    return 2.0 * b / (b + (b - ell) * s + ell)


def avoidance_bound(b: int, delta: int, ell: int) -> AvoidanceBound:
    """
    P_MT(L ∩ T ≠ ∅) 的上界（L 位于一个块内，ℓ = |L|）

    b ≥ 4.5Δ 时取 2ℓ/((b+ℓ) + (b-ℓ)√(1-4Δ/b))；4Δ ≤ b < 4.5Δ 时取它与 2(1-e^{-ℓ/b})/(1+√(1-4Δ/b)) 的较大者
    """
    s = _root_term(b, delta)
    if ell < 0 or ell >= b:
        raise OutOfRange(f"需要 0 ≤ ℓ < b，实际 ℓ={ell}, b={b}")
    psi_value = 2.0 * ell / ((b + ell) + (b - ell) * s)
    exp_value = 2.0 * (1.0 - math.exp(-ell / b)) / (1.0 + s)
    if b >= 4.5 * delta:
        return AvoidanceBound(bound=psi_value, branch="psi", psi_value=psi_value, exp_value=exp_value)
    return AvoidanceBound(bound=max(psi_value, exp_value), branch="mixed", psi_value=psi_value, exp_value=exp_value)


def spread_avoidance_bound(b: int, delta: int, counts: Iterable[int]) -> float:
    """
    L 分散在多个块时的析取界 Σ_i f(y_i) Π_{j<i}(1 - y_j/b)

    y_i 为 L 在各块中的顶点数（按降序处理），f(y) = 2y/(b + (b-y)√(1-4Δ/b) + y)
    """
    s = _root_term(b, delta)
    ys = sorted((int(y) for y in counts if y), reverse=True)
    if any(y >= b for y in ys):
        raise OutOfRange(f"每块中的回避顶点数必须小于 b={b}: {ys}")
    total = 0.0
    carry = 1.0
    for y in ys:
        total += carry * 2.0 * y / (b + (b - y) * s + y)
        carry *= 1.0 - y / b
    return total


def block_counts(g: BlockGraph, avoid: Iterable[int]) -> Dict[int, int]:
    """L 在各块中的顶点数"""
    counts: Dict[int, int] = {}
    for v in avoid:
        block, _ = g.locate(v)
        counts[block] = counts.get(block, 0) + 1
    return counts


def verify_alpha(g: BlockGraph) -> ClusterVerdict:
    """在实例上用统一的 α 检查簇展开判据"""
    instance = to_lll_instance(g)
    weights = uniform_weights(len(instance.bad_events), alpha_cluster(g.b, max(1, g.max_degree)))
    return check_cluster_expansion(build_dependency_graph(instance.bad_events, instance.space), weights)


# ==================== 构造 ====================

def to_transversal(g: BlockGraph, values: Sequence[int]) -> Transversal:
    return Transversal(choice=tuple(g.blocks[i][x] for i, x in enumerate(values)))


def run_transversal(g: BlockGraph, instance: TransversalInstance, seed: int, trial: int = 0,
                    max_steps: Optional[int] = None) -> RunResult:
    """一次 MT 运行；终止时检查输出是独立截线"""
    table = ResamplingTable(instance.space, seed, trial=trial)
    result = run_mt(instance.space, instance.bad_events, table=table, max_steps=max_steps)
    if result.terminated:
        t = to_transversal(g, result.final.values)
        if not is_independent_transversal(g, t):
            raise InvariantViolation(f"试验 {trial} 的输出不是独立截线: {t.choice}")
    return result


def sample_transversal(g: BlockGraph, instance: TransversalInstance, seed: int, trial: int = 0,
                       max_steps: Optional[int] = None) -> Optional[Transversal]:
    """一次 MT 运行的输出；截断时返回 None"""
    result = run_transversal(g, instance, seed, trial=trial, max_steps=max_steps)
    return to_transversal(g, result.final.values) if result.terminated else None


def find_avoiding_transversal(g: BlockGraph, avoid: Iterable[int], seed: Optional[int] = None,
                              max_restarts: Optional[int] = None, max_steps: Optional[int] = None) -> Transversal:
    """
    反复运行 MT，返回第一个与 L 不相交的独立截线

    Args:
        g: 分块图
        avoid: 需要回避的顶点集合 L
        seed: 主种子，第 t 次重启使用试验编号 t
        max_restarts: 最大重启次数，默认取配置

    Returns:
        Transversal
    """
    seed = config.SEED if seed is None else seed
    max_restarts = config.MAX_RESTARTS if max_restarts is None else max_restarts
    avoid = frozenset(avoid)
    counts = block_counts(g, avoid)
    if any(c >= g.b for c in counts.values()):
        raise OutOfRange("回避集合包含整个块，不存在与之不相交的截线")

    delta = g.max_degree
    if len(avoid) >= g.b:
        logger.warning(f"|L|={len(avoid)} ≥ b={g.b}，不在保证范围内，仍然尝试")
    if delta and g.b < math.e ** 2 / (math.e - 1) * delta:
        logger.warning(f"b={g.b} < e²/(e-1)·Δ={math.e ** 2 / (math.e - 1) * delta:.3f}，不在保证范围内，仍然尝试")

    instance = to_lll_instance(g)
    for restart in range(max_restarts):
        t = sample_transversal(g, instance, seed, trial=restart, max_steps=max_steps)
        if t is not None and avoid.isdisjoint(t.choice):
            logger.info(f"第 {restart + 1} 次运行得到回避 L 的独立截线")
            return t
    raise RestartsExhausted(f"{max_restarts} 次重启后仍未找到回避 L 的独立截线")
