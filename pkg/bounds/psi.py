"""
Ψ/θ 与变量模型下 MT 分布的界（析取界、单变量事件界）
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel, Field

from core.config import config
from core.events import (
    Event, ScopedEvent, disjunction, joint_probability, probability_of,
    related, restricted_indices,
)
from core.exceptions import BudgetExceeded, NotSingleton, ShearerViolated
from core.models import ClusterWeights, DepGraph, Measure, VarSpace
from .graph import build_dependency_graph, independence_polynomial, independent_sets, shearer_measure

logger = logging.getLogger(__name__)


class PsiTheta(BaseModel):
    """Ψ(E) 与 θ(E) = P(E)Ψ(E)"""
    psi: float = Field(..., description="Ψ")
    theta: float = Field(..., description="θ")
    p_event: float = Field(..., description="P_Ω(E)")
    neighbors: List[int] = Field(default_factory=list, description="N(E) 在事件列表中的下标")
    method: str = Field(..., description="exact / measure / cluster")


class DisjunctionBound(BaseModel):
    """P_MT(∨𝓐) 的上界"""
    ordered: float = Field(..., description="Σ_j P(A_j ∧ ¬A_1..¬A_{j-1}) Ψ(A_j)")
    order_free: float = Field(..., description="P(∨𝓐) max_j Ψ(A_j)")
    p_union: float = Field(..., description="P_Ω(∨𝓐)")
    order: List[int] = Field(default_factory=list, description="使用的枚举顺序")
    psis: List[float] = Field(default_factory=list, description="按输入顺序的 Ψ(A_j)")


class SingletonBound(BaseModel):
    """P_MT(X(i) ∈ D) 的上界"""
    ordered: float = Field(..., description="P(A)(1 + Σ_j P(B_j ∧ ¬B_1..) Ψ(B_j))")
    order_free: float = Field(..., description="P(A)(1 + P(∨𝓑′) max Ψ)")
    symmetric: float = Field(..., description="P(A)(1 + e·P(∨𝓑′))")
    p_event: float = Field(..., description="P_Ω(A)")
    b_prime: List[int] = Field(default_factory=list, description="𝓑′ 的下标")
    psis: List[float] = Field(default_factory=list, description="Ψ_{𝓑[A]}(B_j)")


class NeighborhoodSum:
    """在受限事件族上对 N(E) 的独立子集求 μ 之和"""

    def __init__(self, events: Sequence[Event], space: Union[VarSpace, int], restriction: Sequence[int],
                 weights: Optional[ClusterWeights] = None, measure: Optional[Measure] = None):
        self.events = events
        self.space = space
        self.restriction = list(restriction)
        self.local = {b: idx for idx, b in enumerate(self.restriction)}
        self.weights = weights
        self.measure = measure
        self.graph: Optional[DepGraph] = None

        if weights is None:
            # 精确测度需要整个受限族的依赖图
            self.graph = build_dependency_graph([events[b] for b in self.restriction], space)
            if measure is None:
                self.measure = shearer_measure(self.graph)
                if not self.measure.satisfied:
                    raise ShearerViolated(self.measure.violation, self.measure)
            elif len(self.restriction) != self.graph.m:
                raise ValueError("测度与受限事件族的大小不符")

    @property
    def method(self) -> str:
        return "cluster" if self.weights is not None else "exact"

    def neighbors(self, e: Event) -> List[int]:
        """N(E) ∩ 受限族（原始下标）"""
        return [b for b in self.restriction if related(self.events[b], e)]

    def _local_graph(self, nbrs: List[int]) -> DepGraph:
        if self.graph is not None:
            return self.graph.subgraph([self.local[b] for b in nbrs])
        return build_dependency_graph([self.events[b] for b in nbrs], self.space)

    def total(self, nbrs: List[int]) -> float:
        """Σ_{J ⊆ nbrs 独立} μ(J)"""
        if not nbrs:
            return 1.0
        if self.weights is not None:
            local = self._local_graph(nbrs)
            return float(independence_polynomial(local, range(local.m), [self.weights[b] for b in nbrs], sign=1))
        sub = [self.local[b] for b in nbrs]
        return math.fsum(self.measure.mu(subset) for subset in independent_sets(self.graph, vertices=sub))

    def weight_of(self, subset: Sequence[int]) -> float:
        """μ(J)（精确）或 Π μ̃（簇展开）"""
        if self.weights is not None:
            return math.prod(self.weights[b] for b in subset)
        return self.measure.mu(self.local[b] for b in subset)


def psi_theta(e: Event, events: Sequence[Event], space: Union[VarSpace, int],
              weights: Optional[ClusterWeights] = None, measure: Optional[Measure] = None,
              restriction: Optional[Sequence[int]] = None) -> PsiTheta:
    """
    计算 Ψ_𝓑(E) 与 θ_𝓑(E)

    Args:
        e: 目标事件
        events: 全部坏事件
        space: VarSpace 或排列长度 n
        weights: 簇展开权重（给出时返回簇展开上界）
        measure: 受限族上已算好的精确测度（顺序与 restriction 一致）
        restriction: 受限事件族下标，默认 𝓑[E]
    """
    if restriction is None:
        restriction = restricted_indices(events, e, space)
    summer = NeighborhoodSum(events, space, restriction, weights=weights, measure=measure)
    nbrs = summer.neighbors(e)
    psi = summer.total(nbrs)
    p = probability_of(e, space)
    return PsiTheta(psi=psi, theta=p * psi, p_event=p, neighbors=nbrs, method=summer.method)


def _ordered_terms(space: VarSpace, members: Sequence[ScopedEvent], order: Sequence[int]) -> List[float]:
    """P(A_j ∧ ¬A_1 ... ∧ ¬A_{j-1})，按给定顺序"""
    terms = []
    for t, j in enumerate(order):
        prefix = [members[i] for i in order[:t]] + [members[j]]
        terms.append(joint_probability(space, prefix, lambda vals: vals[-1] and not any(vals[:-1])))
    return terms


def disjunction_bound(members: Sequence[ScopedEvent], space: VarSpace, bad_events: Sequence[ScopedEvent],
                      order: Optional[Sequence[int]] = None, weights: Optional[ClusterWeights] = None,
                      measure: Optional[Measure] = None) -> DisjunctionBound:
    """P_MT(∨𝓐) ≤ Σ_j P(A_j ∧ ¬A_1 ... ∧ ¬A_{j-1}) Ψ_{𝓑[∨𝓐]}(A_j)"""
    members = list(members)
    order = list(range(len(members))) if order is None else list(order)
    if sorted(order) != list(range(len(members))):
        raise ValueError(f"顺序 {order} 不是 0..{len(members) - 1} 的排列")

    union = disjunction(members)
    restriction = restricted_indices(bad_events, union, space)
    summer = NeighborhoodSum(bad_events, space, restriction, weights=weights, measure=measure)
    psis = [summer.total(summer.neighbors(a)) for a in members]

    terms = _ordered_terms(space, members, order)
    ordered = math.fsum(p * psis[j] for p, j in zip(terms, order))
    p_union = joint_probability(space, members, any) if members else 0.0
    order_free = p_union * max(psis, default=1.0)
    return DisjunctionBound(ordered=ordered, order_free=order_free, p_union=p_union, order=order, psis=psis)


def best_disjunction_order(members: Sequence[ScopedEvent], space: VarSpace, bad_events: Sequence[ScopedEvent],
                           weights: Optional[ClusterWeights] = None) -> DisjunctionBound:
    """穷举全部顺序（m ≤ 8），返回使有序析取界最小的结果"""
    limit = config.get_budget('disjunction_order', 8)
    if len(members) > limit:
        raise BudgetExceeded(f"析取事件个数 {len(members)} 超过穷举顺序的预算 {limit}")

    base = disjunction_bound(members, space, bad_events, weights=weights)
    best = base
    for order in itertools.permutations(range(len(members))):
        terms = _ordered_terms(space, members, order)
        value = math.fsum(p * base.psis[j] for p, j in zip(terms, order))
        if value < best.ordered:
            best = base.model_copy(update={'ordered': value, 'order': list(order)})
    return best


def symmetric_disjunction_bound(p_union: float, p: float, r: int) -> float:
    """对称情形：每个 A 至多有 r 个邻居、事件概率至多 p 时 P(∨𝓐)(1 + e·p)^r"""
    return p_union * (1.0 + math.e * p) ** r


def singleton_bound(event: ScopedEvent, space: VarSpace, bad_events: Sequence[ScopedEvent],
                    weights: Optional[ClusterWeights] = None, measure: Optional[Measure] = None,
                    order: Optional[Sequence[int]] = None) -> SingletonBound:
    """
    P_MT(A) 的上界，A 形如 X(i) ∈ D

    𝓑′ 为 𝓑[A] 中含变量 i 的事件；order 为 𝓑′ 内部的枚举顺序
    """
    form = event.singleton_form()
    if form is None:
        raise NotSingleton(f"事件 {event.label or event.scope} 不是 X(i) ∈ D 的形式")
    i, _ = form

    restriction = restricted_indices(bad_events, event, space)
    b_prime = [b for b in restriction if i in bad_events[b].scope]
    p_event = probability_of(event, space)
    if not b_prime:
        return SingletonBound(ordered=p_event, order_free=p_event, symmetric=p_event, p_event=p_event)

    order = list(range(len(b_prime))) if order is None else list(order)
    summer = NeighborhoodSum(bad_events, space, restriction, weights=weights, measure=measure)
    psis = [summer.total(summer.neighbors(bad_events[b])) for b in b_prime]
    members = [bad_events[b] for b in b_prime]
    terms = _ordered_terms(space, members, order)

    ordered = p_event * (1.0 + math.fsum(p * psis[j] for p, j in zip(terms, order)))
    p_union = joint_probability(space, members, any)
    order_free = p_event * (1.0 + p_union * max(psis))
    symmetric = p_event * (1.0 + math.e * p_union)
    return SingletonBound(
        ordered=ordered, order_free=order_free, symmetric=symmetric,
        p_event=p_event, b_prime=b_prime, psis=psis,
    )
