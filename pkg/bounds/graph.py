"""
依赖图 - 独立集枚举、Shearer测度、稳定集序列
"""

import logging
import math
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Union

from core.config import config
from core.events import Event, probability_of, related
from core.exceptions import BudgetExceeded, ShearerViolated
from core.models import DepGraph, Measure, VarSpace

logger = logging.getLogger(__name__)

# 独立多项式记忆化表的上限
_MEMO_LIMIT = 1 << 20


def build_dependency_graph(events: Sequence[Event], space: Union[VarSpace, int]) -> DepGraph:
    """按规范的 ~ 关系构造依赖图，并填入事件概率"""
    m = len(events)
    nbrs = [{a} for a in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            if related(events[a], events[b]):
                nbrs[a].add(b)
                nbrs[b].add(a)
    probs = tuple(probability_of(e, space) for e in events)
    return DepGraph(m=m, neighbors=tuple(frozenset(s) for s in nbrs), probs=probs)


def independent_sets(g: DepGraph, vertices: Optional[Iterable[int]] = None,
                     max_size: Optional[int] = None) -> Iterator[FrozenSet[int]]:
    """
    枚举给定顶点集合上的全部独立集（含空集），每个恰好一次

    Args:
        g: 依赖图
        vertices: 顶点过滤，默认全部顶点
        max_size: 独立集大小上限；给出时不受顶点数预算限制
    """
    order = sorted(set(range(g.m) if vertices is None else vertices))
    budget = config.INDEPENDENT_SET_BUDGET
    if max_size is None and len(order) > budget:
        raise BudgetExceeded(f"独立集枚举的顶点数 {len(order)} 超过预算 {budget}")
    masks = g.masks

    def _extend(start: int, blocked: int, chosen: List[int]) -> Iterator[FrozenSet[int]]:
        yield frozenset(chosen)
        if max_size is not None and len(chosen) >= max_size:
            return
        for idx in range(start, len(order)):
            v = order[idx]
            if blocked >> v & 1:
                continue
            chosen.append(v)
            yield from _extend(idx + 1, blocked | masks[v], chosen)
            chosen.pop()

    yield from _extend(0, 0, [])


def independence_polynomial(g: DepGraph, vertices: Iterable[int], weights: Sequence,
                            sign: int = 1, memo: Optional[Dict[int, object]] = None):
    """
    Σ_{I ⊆ S 独立} sign^{|I|} Π_{v∈I} weights[v]

    按最低位顶点递推：P(S) = P(S - v) + sign·w_v·P(S \\ N[v])
    """
    masks = g.masks
    cache: Dict[int, object] = {} if memo is None else memo
    one = weights[0] * 0 + 1 if len(weights) else 1

    def _poly(mask: int):
        if mask == 0:
            return one
        hit = cache.get(mask)
        if hit is not None:
            return hit
        if len(cache) > _MEMO_LIMIT:
            raise BudgetExceeded("独立多项式的记忆化表超过预算")
        low = mask & -mask
        v = low.bit_length() - 1
        value = _poly(mask & ~low) + sign * weights[v] * _poly(mask & ~masks[v])
        cache[mask] = value
        return value

    start = 0
    for v in vertices:
        start |= 1 << v
    return _poly(start)


def _exact_probs(probs: Sequence[float]) -> Optional[List[Fraction]]:
    """概率均为小分母有理数时返回其精确形式"""
    result = []
    for p in probs:
        frac = Fraction(p).limit_denominator(10 ** 6)
        if float(frac) != p:
            return None
        result.append(frac)
    return result


def shearer_measure(g: DepGraph, strict: bool = False) -> Measure:
    """
    计算每个独立集的 Q(I) 与 μ(I) = Q(I)/Q(∅)

    Q(I) = Π_{B∈I} p_B · Z(V \\ N[I])，其中 Z 为在 -p 处取值的独立多项式

    Args:
        g: 依赖图（m ≤ SHEARER_BUDGET）
        strict: 判据不满足时抛出 ShearerViolated（测度仍附在异常上）
    """
    budget = config.SHEARER_BUDGET
    if g.m > budget:
        raise BudgetExceeded(f"Shearer测度只支持 m ≤ {budget}，当前 m={g.m}")

    exact_probs = _exact_probs(g.probs)
    exact = exact_probs is not None
    weights = exact_probs if exact else list(g.probs)
    memo: Dict[int, object] = {}
    full = (1 << g.m) - 1
    masks = g.masks

    q_empty = independence_polynomial(g, range(g.m), weights, sign=-1, memo=memo)
    violation: Optional[FrozenSet[int]] = None
    mu_cache: Dict[FrozenSet[int], float] = {}

    if q_empty <= 0:
        violation = frozenset()
    else:
        for subset in independent_sets(g):
            covered = 0
            weight = weights[0] * 0 + 1 if weights else 1
            for v in subset:
                covered |= masks[v]
                weight = weight * weights[v]
            q = weight * independence_polynomial(g, _bits(full & ~covered), weights, sign=-1, memo=memo)
            if q <= 0 and violation is None:
                violation = subset
            mu_cache[subset] = float(q / q_empty) if q > 0 else 0.0

    measure = Measure.model_construct(
        q_empty=float(q_empty),
        mu_cache=mu_cache if violation is None else {},
        satisfied=violation is None,
        violation=violation,
        exact=exact,
    )
    if violation is not None:
        logger.warning(f"Shearer判据不满足: Q({sorted(violation)}) <= 0")
        if strict:
            raise ShearerViolated(violation, measure)
    else:
        logger.debug(f"Shearer测度计算完成: m={g.m}, 独立集 {len(mu_cache)} 个, 精确={exact}")
    return measure


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask &= ~low


def shearer_signed_sum(g: DepGraph, subset: Iterable[int]) -> float:
    """直接按定义对独立超集做带符号求和（用 fsum 补偿误差）"""
    base = frozenset(subset)
    if not g.is_independent(base):
        return 0.0
    blocked = set()
    for v in base:
        blocked |= g.neighbors[v]
    free = [v for v in range(g.m) if v not in blocked]
    terms = []
    for extra in independent_sets(g, vertices=free):
        term = (-1.0) ** len(extra)
        for v in base | extra:
            term *= g.probs[v]
        terms.append(term)
    return math.fsum(terms)


def stable_seq_weight(subset: Iterable[int], g: DepGraph, depth: int) -> float:
    """
    Σ w(S) over 稳定集序列 ⟨J, S_2, ..., S_ℓ⟩，ℓ ≤ depth

    S_i 为非空独立集且 S_i ⊆ ∪_{B∈S_{i-1}} N(B)；w(S) 为全部集合中事件概率之积
    """
    limit = config.get_budget('stable_depth', 10)
    if not 1 <= depth <= limit:
        raise BudgetExceeded(f"稳定集序列深度必须在 [1, {limit}] 内: {depth}")
    start = frozenset(subset)
    if not g.is_independent(start):
        return 0.0

    memo: Dict[tuple, float] = {}

    def _weight(current: FrozenSet[int], remaining: int) -> float:
        key = (current, remaining)
        if key in memo:
            return memo[key]
        own = math.prod(g.probs[v] for v in current)
        if remaining <= 1 or not current:
            memo[key] = own
            return own
        reach = set()
        for v in current:
            reach |= g.neighbors[v]
        tail = math.fsum(
            _weight(nxt, remaining - 1) for nxt in independent_sets(g, vertices=reach) if nxt
        )
        memo[key] = own * (1.0 + tail)
        return memo[key]

    return _weight(start, depth)
