"""
LLL判据 - 簇展开判据、对称判据
"""

import logging
import math
from typing import List

from pydantic import BaseModel, Field

from core.models import ClusterWeights, DepGraph
from .graph import independence_polynomial

logger = logging.getLogger(__name__)

# 判等容差（相对）
_TOLERANCE = 1e-12


class EventCheck(BaseModel):
    """单个坏事件的判据检查"""
    event: int = Field(..., description="事件下标")
    lhs: float = Field(..., description="μ̃(B)")
    rhs: float = Field(..., description="P(B) Σ_{I⊆N(B)} Π μ̃")
    ok: bool = Field(..., description="是否满足")


class ClusterVerdict(BaseModel):
    """簇展开判据的整体结论"""
    satisfied: bool = Field(..., description="所有事件都满足")
    checks: List[EventCheck] = Field(default_factory=list, description="逐事件结果")

    @property
    def failures(self) -> List[int]:
        return [c.event for c in self.checks if not c.ok]


def neighborhood_weight(g: DepGraph, event: int, weights: ClusterWeights) -> float:
    """Σ_{I ⊆ N(B) 独立} Π_{B′∈I} μ̃(B′)"""
    return float(independence_polynomial(g, g.neighbors[event], list(weights.mu_tilde), sign=1))


def check_cluster_expansion(g: DepGraph, weights: ClusterWeights) -> ClusterVerdict:
    """μ̃(B) ≥ P(B) Σ_{I⊆N(B), I独立} Π μ̃(B′) 是否对每个 B 成立"""
    if len(weights.mu_tilde) != g.m:
        raise ValueError(f"权重个数 {len(weights.mu_tilde)} 与事件个数 {g.m} 不符")

    checks = []
    for b in range(g.m):
        p = g.probs[b]
        rhs = 0.0 if p == 0 else p * neighborhood_weight(g, b, weights)
        lhs = weights[b]
        ok = lhs >= rhs - _TOLERANCE * max(1.0, rhs)
        checks.append(EventCheck(event=b, lhs=lhs, rhs=rhs, ok=ok))

    verdict = ClusterVerdict(satisfied=all(c.ok for c in checks), checks=checks)
    if not verdict.satisfied:
        logger.info(f"簇展开判据不满足，失败事件: {verdict.failures[:10]}")
    return verdict


def symmetric_criterion(p: float, d: int) -> bool:
    """e·p·d ≤ 1，d 为包含自身的邻域大小上界"""
    return math.e * p * d <= 1.0


def symmetric_weights(g: DepGraph) -> ClusterWeights:
    """对称判据对应的均匀权重 μ̃ = e·p"""
    p = max(g.probs, default=0.0)
    return ClusterWeights.uniform(g.m, math.e * p)


def asymmetric_to_cluster(x: float) -> float:
    """非对称判据的 x(B) → μ̃(B) = x/(1-x)"""
    if not 0 <= x < 1:
        raise ValueError(f"x 必须位于 [0, 1): {x}")
    return x / (1.0 - x)


def uniform_weights(m: int, value: float) -> ClusterWeights:
    return ClusterWeights.uniform(m, value)
