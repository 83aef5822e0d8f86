"""
见证DAG - 完整见证DAG、G*A 投影、与重采样表的相容性
"""

import math
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from core.events import ScopedEvent, event_probability, related
from core.models import VarSpace
from .resampling_table import ResamplingTable


class WitnessDAG(BaseModel):
    """节点带事件标签的有向无环图，边 (u, v) 总满足 u < v"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    labels: Tuple[Any, ...] = Field(default=(), description="节点标签 L(v)")
    label_ids: Tuple[Optional[int], ...] = Field(default=(), description="标签在坏事件列表中的下标（根为 None）")
    edges: FrozenSet[Tuple[int, int]] = Field(default=frozenset(), description="有向边")
    root: Optional[int] = Field(default=None, description="投影后添加的根节点")

    @property
    def size(self) -> int:
        return len(self.labels)

    def predecessors(self) -> List[List[int]]:
        preds: List[List[int]] = [[] for _ in self.labels]
        for u, v in self.edges:
            preds[v].append(u)
        return preds

    def ancestors(self, v: int, preds: Optional[List[List[int]]] = None) -> Set[int]:
        """有路径到达 v 的全部节点（含 v）"""
        preds = self.predecessors() if preds is None else preds
        seen = {v}
        stack = [v]
        while stack:
            w = stack.pop()
            for u in preds[w]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    def prefix(self, t: int) -> 'WitnessDAG':
        """前 t 个节点的诱导子图（完整见证DAG的 Ĝ_t）"""
        return WitnessDAG(
            labels=self.labels[:t],
            label_ids=self.label_ids[:t],
            edges=frozenset((u, v) for u, v in self.edges if v < t),
        )


def full_witness_dag(log: Sequence[int], bad_events: Sequence[ScopedEvent]) -> WitnessDAG:
    """Ĝ_T：节点 v_1..v_T，当 i < j 且 B_i ~ B_j 时有边 v_i → v_j"""
    cache: Dict[Tuple[int, int], bool] = {}

    def _rel(a: int, b: int) -> bool:
        key = (a, b) if a <= b else (b, a)
        if key not in cache:
            cache[key] = related(bad_events[a], bad_events[b])
        return cache[key]

    edges = set()
    for j in range(len(log)):
        for i in range(j):
            if _rel(log[i], log[j]):
                edges.add((i, j))
    return WitnessDAG(
        labels=tuple(bad_events[b] for b in log),
        label_ids=tuple(log),
        edges=frozenset(edges),
    )


def project_dag(g: WitnessDAG, event: ScopedEvent) -> WitnessDAG:
    """G*A：保留有路径到达某个 L(w) ~ A 的节点 w 的节点，并加入标签为 A 的根"""
    preds = g.predecessors()
    hits = [v for v in range(g.size) if related(g.labels[v], event)]
    relevant: Set[int] = set()
    for w in hits:
        if w not in relevant:
            relevant |= g.ancestors(w, preds)

    keep = sorted(relevant)
    index = {v: i for i, v in enumerate(keep)}
    root = len(keep)
    edges = {(index[u], index[v]) for u, v in g.edges if u in index and v in index}
    edges |= {(index[w], root) for w in hits}
    return WitnessDAG(
        labels=tuple(g.labels[v] for v in keep) + (event,),
        label_ids=tuple(g.label_ids[v] for v in keep) + (None,),
        edges=frozenset(edges),
        root=root,
    )


def compatible(tau: WitnessDAG, table: ResamplingTable) -> bool:
    """每个节点 v 的标签在 X_{τ,v}(i) = R(i, ρ(τ,v,i)) 上成立"""
    preds = tau.predecessors()
    for v in range(tau.size):
        label = tau.labels[v]
        above = tau.ancestors(v, preds)
        values = {}
        for i in label.scope:
            rho = sum(1 for w in above if i in tau.labels[w].scope)
            values[i] = table.value(i, rho)
        if not label.holds(values):
            return False
    return True


def dag_weight(tau: WitnessDAG, space: VarSpace) -> float:
    """w(τ) = Π_v P_Ω(L(v))"""
    return math.prod(event_probability(space, label) for label in tau.labels)
