"""
排列模型 - 可排序集合 Ord(A)、Ψ′/θ′、n.i.b. 界与析取界
"""

import logging
import math
from functools import lru_cache
from typing import List, Optional, Sequence, Union, FrozenSet

from pydantic import BaseModel, Field

from core.config import config
from core.events import (
    AtomicPermEvent, PermDisjunction, perm_event_probability, perm_union_probability,
    related, restricted_indices,
)
from core.exceptions import BudgetExceeded
from core.models import ClusterWeights, Measure
from .graph import build_dependency_graph, independent_sets, shearer_measure
from .psi import NeighborhoodSum

logger = logging.getLogger(__name__)


class PsiThetaPrime(BaseModel):
    """Ψ′(A) 与 θ′(A) = P(A)Ψ′(A)"""
    psi_prime: float = Field(..., description="Σ_{I∈Ord(A)} μ(I)")
    theta_prime: float = Field(..., description="θ′")
    p_event: float = Field(..., description="P_Ω(A)")
    orderable: List[FrozenSet[int]] = Field(default_factory=list, description="Ord(A)（原始下标）")
    psi: Optional[float] = Field(default=None, description="对 N(A) 的全部独立子集求和的 Ψ")


def _pair_hits(pair, event: AtomicPermEvent) -> bool:
    return any(pair[0] == x or pair[1] == y for x, y in event.pairs)


def is_orderable(candidates: Sequence[AtomicPermEvent], event: AtomicPermEvent) -> bool:
    """
    是否存在顺序 B_1..B_ℓ 与 z_i ∈ A 使 z_i ~ B_i 且 z_i ≁ B_1..B_{i-1}

    按"选最后一个元素"递推，子集用位掩码记忆化
    """
    items = list(candidates)
    limit = config.ORDERABLE_BUDGET
    if len(items) > limit:
        raise BudgetExceeded(f"可排序性搜索的集合大小 {len(items)} 超过预算 {limit}")
    if not items:
        return True

    # rel[z]：与 A 的第 z 个对相关的候选事件掩码
    rel = [
        sum(1 << b for b, item in enumerate(items) if _pair_hits(pair, item))
        for pair in event.pairs
    ]

    @lru_cache(maxsize=None)
    def _ok(mask: int) -> bool:
        if mask == 0:
            return True
        for b in range(len(items)):
            if not mask >> b & 1:
                continue
            rest = mask & ~(1 << b)
            for hits in rel:
                if hits >> b & 1 and not hits & rest and _ok(rest):
                    return True
        return False

    return _ok((1 << len(items)) - 1)


def orderable_sets(event: AtomicPermEvent, events: Sequence[AtomicPermEvent], n: int,
                   restriction: Optional[Sequence[int]] = None) -> List[FrozenSet[int]]:
    """Ord(A)：受限族中 N(A) 的全部独立可排序子集（含空集）"""
    if restriction is None:
        restriction = restricted_indices(events, event, n)
    nbrs = [b for b in restriction if related(events[b], event)]
    local = build_dependency_graph([events[b] for b in nbrs], n)

    result = []
    # 可排序集合的大小不超过 |A|
    for subset in independent_sets(local, max_size=len(event.pairs)):
        members = sorted(subset)
        if is_orderable([events[nbrs[i]] for i in members], event):
            result.append(frozenset(nbrs[i] for i in members))
    return result


def psi_theta_prime(event: AtomicPermEvent, events: Sequence[AtomicPermEvent], n: int,
                    weights: Optional[ClusterWeights] = None, measure: Optional[Measure] = None,
                    restriction: Optional[Sequence[int]] = None, with_psi: bool = False) -> PsiThetaPrime:
    """
    Ψ′(A) = Σ_{I∈Ord(A)} μ_{𝓑[A]}(I)，θ′(A) = P(A)Ψ′(A)

    Args:
        weights: 簇展开权重（μ 用 Π μ̃ 代替）
        measure: 受限族上的精确测度（顺序与 restriction 一致）
        restriction: 受限事件族，默认 𝓑[A]
        with_psi: 同时计算 Ψ(A) 以便比较
    """
    if restriction is None:
        restriction = restricted_indices(events, event, n)
    summer = NeighborhoodSum(events, n, restriction, weights=weights, measure=measure)
    family = orderable_sets(event, events, n, restriction=restriction)
    psi_prime = math.fsum(summer.weight_of(sorted(subset)) for subset in family)
    p = perm_event_probability(n, event)

    psi = summer.total(summer.neighbors(event)) if with_psi else None
    return PsiThetaPrime(psi_prime=psi_prime, theta_prime=p * psi_prime, p_event=p, orderable=family, psi=psi)


def nib_bound(event: AtomicPermEvent, condition: Union[AtomicPermEvent, PermDisjunction],
              events: Sequence[AtomicPermEvent], n: int, weights: Optional[ClusterWeights] = None,
              measure: Optional[Measure] = None) -> float:
    """A 在 C 之前非初始地发生的概率上界 P(A)(Ψ′_{𝓑[C]}(A) - 1)"""
    restriction = restricted_indices(events, condition, n)
    result = psi_theta_prime(event, events, n, weights=weights, measure=measure, restriction=restriction)
    return result.p_event * (result.psi_prime - 1.0)


def perm_disjunction_bound(members: Sequence[AtomicPermEvent], events: Sequence[AtomicPermEvent], n: int,
                           weights: Optional[ClusterWeights] = None) -> float:
    """P_MT(∨𝓐) ≤ P(∨𝓐) + Σ_A (θ′_{𝓑[∨𝓐]}(A) - P(A))"""
    members = list(members)
    union = PermDisjunction(members=tuple(members))
    restriction = restricted_indices(events, union, n)
    measure = None
    if weights is None:
        measure = shearer_measure(build_dependency_graph([events[b] for b in restriction], n), strict=True)

    excess = []
    for a in members:
        result = psi_theta_prime(a, events, n, weights=weights, measure=measure, restriction=restriction)
        excess.append(result.theta_prime - result.p_event)
    return perm_union_probability(n, members) + math.fsum(excess)
