"""
见证树 - 以可排序性约束根节点子树的 τ̂^{T,A} 构造
"""

import math
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from bounds.orderable import is_orderable
from core.events import AtomicPermEvent, perm_event_probability, related
from core.models import Snapshot, SwapRunResult

# 根节点的标签
ROOT = -1

Canonical = Tuple[int, tuple]


class TreeStructure(BaseModel):
    """根标签为 A、非根节点标签为坏事件下标的有根树"""
    model_config = ConfigDict(frozen=True)

    root_event: AtomicPermEvent = Field(..., description="根标签 A")
    labels: Tuple[int, ...] = Field(default=(ROOT,), description="节点标签（根为 -1）")
    parents: Tuple[int, ...] = Field(default=(ROOT,), description="父节点（根为 -1）")
    depths: Tuple[int, ...] = Field(default=(0,), description="节点深度")

    @property
    def size(self) -> int:
        return len(self.labels)

    def children(self, v: int) -> List[int]:
        return [u for u, p in enumerate(self.parents) if p == v]

    def root_children(self) -> List[int]:
        return self.children(0)

    def canonical(self) -> Canonical:
        """与子节点顺序无关的嵌套元组表示"""
        kids: Dict[int, List[int]] = {}
        for u, p in enumerate(self.parents):
            if p >= 0:
                kids.setdefault(p, []).append(u)

        def _canon(v: int) -> Canonical:
            return (self.labels[v], tuple(sorted(_canon(u) for u in kids.get(v, ()))))

        return _canon(0)


def build_witness_tree(log: Sequence[int], event: AtomicPermEvent,
                       bad_events: Sequence[AtomicPermEvent]) -> TreeStructure:
    """
    由重采样记录 B_1..B_T 倒序构造 τ̂^{T,A}

    对每个 B_t：若有与之相关的非根节点，则挂到最深的那个下面（深度相同取标签小的，再取先建的）；
    否则当根的子节点标签加上 B_t 构成对 A 可排序的独立集时挂到根下；否则跳过。
    """
    labels = [ROOT]
    parents = [ROOT]
    depths = [0]
    root_kids: List[int] = []
    rel_cache: Dict[Tuple[int, int], bool] = {}

    def _rel(a: int, b: int) -> bool:
        key = (a, b) if a <= b else (b, a)
        if key not in rel_cache:
            rel_cache[key] = related(bad_events[a], bad_events[b])
        return rel_cache[key]

    for b in reversed(log):
        best: Optional[int] = None
        for v in range(1, len(labels)):
            if not _rel(labels[v], b):
                continue
            if best is None or (depths[v], -labels[v], -v) > (depths[best], -labels[best], -best):
                best = v
        if best is not None:
            labels.append(b)
            parents.append(best)
            depths.append(depths[best] + 1)
            continue

        # 没有相关的非根节点时，B_t 与根的子节点两两不相关
        candidates = [bad_events[labels[v]] for v in root_kids] + [bad_events[b]]
        if is_orderable(candidates, event):
            root_kids.append(len(labels))
            labels.append(b)
            parents.append(0)
            depths.append(1)

    return TreeStructure(root_event=event, labels=tuple(labels), parents=tuple(parents), depths=tuple(depths))


def tree_weight(tau: TreeStructure, n: int, bad_events: Sequence[AtomicPermEvent]) -> float:
    """w(τ) = P_Ω(A) · Π P_Ω(L(v))"""
    probs = {b: perm_event_probability(n, bad_events[b]) for b in set(tau.labels[1:])}
    return perm_event_probability(n, tau.root_event) * math.prod(probs[b] for b in tau.labels[1:])


def canonical_weight(tau: Canonical, n: int, event: AtomicPermEvent,
                     bad_events: Sequence[AtomicPermEvent]) -> float:
    """规范形式的 w(τ)"""
    weight = perm_event_probability(n, event)
    stack = list(tau[1])
    while stack:
        label, kids = stack.pop()
        weight *= perm_event_probability(n, bad_events[label])
        stack.extend(kids)
    return weight


def _holds_at(event: AtomicPermEvent, snapshot: Snapshot) -> bool:
    # 快照只记录当前单元格 (x, π^t(x)) 上的标记
    marks = None
    if snapshot.marks:
        marks = [{y: m} for y, m in zip(snapshot.forward, snapshot.marks)]
    return event.holds(snapshot.forward, marks)


def iter_trees(result: SwapRunResult, event: AtomicPermEvent,
               bad_events: Sequence[AtomicPermEvent]) -> Iterator[TreeStructure]:
    """对每个 A 在 π^t 上成立的时刻 t 生成 τ̂^{t,A}（需要完整快照）"""
    if len(result.snapshots) != result.steps + 1 or (result.snapshots and result.snapshots[0].time != 0):
        raise ValueError("重放见证树需要从 t=0 开始的完整快照，运行时请设置 snapshots=-1")
    for snapshot in result.snapshots:
        if _holds_at(event, snapshot):
            yield build_witness_tree(result.log[:snapshot.time], event, bad_events)


def appearing_trees(result: SwapRunResult, event: AtomicPermEvent,
                    bad_events: Sequence[AtomicPermEvent]) -> Set[Canonical]:
    """本次运行中出现过的全部树结构（规范形式）"""
    return {tau.canonical() for tau in iter_trees(result, event, bad_events)}


def tree_appears(tau: Canonical, result: SwapRunResult, event: AtomicPermEvent,
                 bad_events: Sequence[AtomicPermEvent]) -> bool:
    """τ 是否在本次运行中出现"""
    return any(t.canonical() == tau for t in iter_trees(result, event, bad_events))
