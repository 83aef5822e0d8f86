"""
事件模型 - 变量模型中的作用域事件与排列模型中的原子事件，以及依赖关系 ~
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import gammaln

from .config import config
from .exceptions import InvalidParameter, OutOfRange, ScopeTooLarge, SettingMismatch
from .models import Assignment, Permutation, VarSpace

logger = logging.getLogger(__name__)

# 完整枚举补全的自由位置上限（8! = 40320）
_COMPLETION_LIMIT = 8


# ==================== 变量模型 ====================

class ScopedEvent(BaseModel):
    """作用域事件：原子合取 (X(i)=j ∧ ...) 或作用域上的谓词"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scope: Tuple[int, ...] = Field(..., description="有序的变量下标集合 var(E)")
    literals: Optional[Tuple[Tuple[int, int], ...]] = Field(default=None, description="原子合取的 (i, j) 对")
    predicate: Optional[Callable[[Tuple[int, ...]], bool]] = Field(default=None, exclude=True, description="只接收作用域内取值的谓词")
    singleton_values: Optional[FrozenSet[int]] = Field(default=None, description="X(i) ∈ D 形式事件的 D")
    label: str = Field(default="", description="事件名称")

    @field_validator('scope', mode='before')
    @classmethod
    def _sort_scope(cls, v):
        return tuple(sorted(set(int(i) for i in v)))

    @model_validator(mode='after')
    def _check_kind(self) -> 'ScopedEvent':
        if (self.literals is None) == (self.predicate is None):
            raise ValueError("必须且只能指定 literals 或 predicate 之一")
        if self.literals is not None:
            variables = [i for i, _ in self.literals]
            if len(set(variables)) != len(variables):
                raise ValueError("原子合取中的变量必须互不相同")
            if set(variables) != set(self.scope):
                raise ValueError("原子合取的变量必须恰为作用域")
        if self.singleton_values is not None and len(self.scope) != 1:
            raise ValueError("单变量事件的作用域必须只有一个变量")
        return self

    @classmethod
    def atomic(cls, pairs, label: str = "") -> 'ScopedEvent':
        """X(i_1)=j_1 ∧ X(i_2)=j_2 ∧ ..."""
        literals = tuple(sorted((int(i), int(j)) for i, j in pairs))
        return cls(scope=[i for i, _ in literals], literals=literals, label=label)

    @classmethod
    def from_predicate(cls, scope, fn: Callable[[Tuple[int, ...]], bool], label: str = "") -> 'ScopedEvent':
        return cls(scope=scope, predicate=fn, label=label)

    @property
    def is_atomic(self) -> bool:
        return self.literals is not None

    def holds(self, values) -> bool:
        """values 可按变量下标取值（list / tuple / dict / Assignment）"""
        if self.literals is not None:
            return all(values[i] == j for i, j in self.literals)
        return bool(self.predicate(tuple(values[i] for i in self.scope)))

    def singleton_form(self) -> Optional[Tuple[int, FrozenSet[int]]]:
        """若事件形如 X(i) ∈ D，返回 (i, D)"""
        if self.singleton_values is not None:
            return self.scope[0], self.singleton_values
        if self.literals is not None and len(self.literals) == 1:
            i, j = self.literals[0]
            return i, frozenset([j])
        return None


def singleton(i: int, values, label: str = "") -> ScopedEvent:
    """X(i) ∈ D"""
    allowed = frozenset(int(v) for v in values)
    return ScopedEvent(
        scope=[i],
        predicate=lambda vals: vals[0] in allowed,
        singleton_values=allowed,
        label=label or f"X({i})∈{sorted(allowed)}",
    )


def disjunction(events: Sequence[ScopedEvent], label: str = "") -> ScopedEvent:
    """∨𝓐，作用域为各事件作用域之并"""
    members = list(events)
    scope = sorted(set().union(*(set(e.scope) for e in members))) if members else []

    def _any(vals: Tuple[int, ...]) -> bool:
        values = dict(zip(scope, vals))
        return any(e.holds(values) for e in members)

    return ScopedEvent(scope=scope, predicate=_any, label=label or "∨".join(e.label for e in members))


def _enumerate(space: VarSpace, scope: Sequence[int]) -> Iterator[Tuple[Dict[int, int], float]]:
    """穷举作用域上的全部赋值及其概率（跳过零概率赋值）"""
    budget = config.SCOPE_BUDGET
    if len(scope) > budget:
        raise ScopeTooLarge(f"作用域大小 {len(scope)} 超过预算 {budget}")
    cells = 1
    for i in scope:
        cells *= space.domains[i]
    if cells > 2 ** budget:
        raise ScopeTooLarge(f"作用域上的赋值个数 {cells} 超过预算 2^{budget}")

    supports = [[(j, p) for j, p in enumerate(space.probs[i]) if p > 0] for i in scope]
    for combo in itertools.product(*supports):
        weight = 1.0
        for _, p in combo:
            weight *= p
        yield {i: j for i, (j, _) in zip(scope, combo)}, weight


def event_probability(space: VarSpace, e: ScopedEvent) -> float:
    """P_Ω(E)"""
    if any(i >= space.n for i in e.scope):
        raise OutOfRange(f"事件 {e.label} 的作用域超出变量范围")
    if e.literals is not None:
        prob = 1.0
        for i, j in e.literals:
            prob *= space.marginal(i, j)
        return prob
    return math.fsum(w for values, w in _enumerate(space, e.scope) if e.holds(values))


def joint_probability(space: VarSpace, events: Sequence[ScopedEvent],
                      combine: Callable[[List[bool]], bool]) -> float:
    """对若干事件真值的任意布尔组合求概率"""
    scope = sorted(set().union(*(set(e.scope) for e in events))) if events else []
    return math.fsum(
        w for values, w in _enumerate(space, scope) if combine([e.holds(values) for e in events])
    )


# ==================== 排列模型 ====================

class AtomicPermEvent(BaseModel):
    """原子事件 π(x_1)=y_1 ∧ ... ∧ π(x_r)=y_r（可附带单元格标记条件）"""
    model_config = ConfigDict(frozen=True)

    pairs: Tuple[Tuple[int, int], ...] = Field(..., description="(x, y) 对，按 x 排序")
    mark_prob: Optional[float] = Field(default=None, ge=0, le=1, description="若设置，要求至少一个单元格标记为1")
    label: str = Field(default="", description="事件名称")

    @field_validator('pairs', mode='before')
    @classmethod
    def _canonical(cls, v):
        return tuple(sorted((int(x), int(y)) for x, y in v))

    @model_validator(mode='after')
    def _check_coordinates(self) -> 'AtomicPermEvent':
        xs = [x for x, _ in self.pairs]
        ys = [y for _, y in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise ValueError(f"原子事件的横纵坐标必须各自互不相同: {self.pairs}")
        if any(x < 0 or y < 0 for x, y in self.pairs):
            raise ValueError("坐标必须非负")
        return self

    @classmethod
    def of(cls, pairs, mark_prob: Optional[float] = None, label: str = "") -> 'AtomicPermEvent':
        return cls(pairs=pairs, mark_prob=mark_prob, label=label)

    @property
    def xs(self) -> Tuple[int, ...]:
        return tuple(x for x, _ in self.pairs)

    @property
    def ys(self) -> Tuple[int, ...]:
        return tuple(y for _, y in self.pairs)

    @property
    def marked(self) -> bool:
        return self.mark_prob is not None

    def holds(self, forward, marks=None) -> bool:
        """marks[x][y] 为单元格标记；未带标记条件的事件忽略 marks"""
        if not all(forward[x] == y for x, y in self.pairs):
            return False
        if self.mark_prob is None:
            return True
        if marks is None:
            return False
        return any(marks[x][y] for x, y in self.pairs)


class PermDisjunction(BaseModel):
    """排列模型中原子事件的析取 ∨𝓐"""
    model_config = ConfigDict(frozen=True)

    members: Tuple[AtomicPermEvent, ...] = Field(..., description="成员事件")

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(sorted(set(p for m in self.members for p in m.pairs)))

    def holds(self, forward, marks=None) -> bool:
        return any(m.holds(forward, marks) for m in self.members)


PermEvent = Union[AtomicPermEvent, PermDisjunction]
Event = Union[ScopedEvent, AtomicPermEvent, PermDisjunction]


def _check_pairs(n: int, a: AtomicPermEvent) -> None:
    if len(a.pairs) > n:
        raise OutOfRange(f"事件含 {len(a.pairs)} 个对，超过 n={n}")
    if any(x >= n or y >= n for x, y in a.pairs):
        raise OutOfRange(f"事件 {a.pairs} 的坐标超出 [0, {n})")


def _mark_factor(a: AtomicPermEvent) -> float:
    if a.mark_prob is None:
        return 1.0
    return 1.0 - (1.0 - a.mark_prob) ** len(a.pairs)


def perm_event_probability(n: int, a: AtomicPermEvent) -> float:
    """P_Ω(A) = (n-r)!/n!（带标记条件时再乘以至少一个标记为1的概率）"""
    _check_pairs(n, a)
    r = len(a.pairs)
    if n <= 170:
        base = math.factorial(n - r) / math.factorial(n)
    else:
        base = math.exp(gammaln(n - r + 1) - gammaln(n + 1))
    return base * _mark_factor(a)


def perm_event_probability_exact(n: int, a: AtomicPermEvent) -> Fraction:
    """无标记原子事件概率的有理数形式"""
    _check_pairs(n, a)
    if a.mark_prob is not None:
        raise InvalidParameter("带标记的事件没有有理数形式")
    r = len(a.pairs)
    return Fraction(math.factorial(n - r), math.factorial(n))


def perm_union_probability(n: int, events: Sequence[AtomicPermEvent]) -> float:
    """P_Ω(∨𝓐)，对子族做容斥（无标记事件）"""
    budget = config.get_budget('perm_union', 20)
    if len(events) > budget:
        raise ScopeTooLarge(f"析取中事件个数 {len(events)} 超过预算 {budget}")
    if any(e.mark_prob is not None for e in events):
        raise InvalidParameter("容斥只支持无标记事件")
    for e in events:
        _check_pairs(n, e)

    terms = []
    members = list(events)
    for size in range(1, len(members) + 1):
        sign = 1.0 if size % 2 == 1 else -1.0
        for family in itertools.combinations(members, size):
            union = set(p for e in family for p in e.pairs)
            xs = [x for x, _ in union]
            ys = [y for _, y in union]
            if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
                continue
            r = len(union)
            terms.append(sign * math.factorial(n - r) / math.factorial(n))
    return math.fsum(terms)


# ==================== 依赖关系与条件化 ====================

def _pair_related(p, q) -> bool:
    return p[0] == q[0] or p[1] == q[1]


def related(e1: Event, e2: Event) -> bool:
    """E ~ E′：变量模型中作用域相交；排列模型中存在共享行或列的对"""
    if isinstance(e1, ScopedEvent) and isinstance(e2, ScopedEvent):
        return not set(e1.scope).isdisjoint(e2.scope)
    if isinstance(e1, (AtomicPermEvent, PermDisjunction)) and isinstance(e2, (AtomicPermEvent, PermDisjunction)):
        return any(_pair_related(p, q) for p in e1.pairs for q in e2.pairs)
    raise SettingMismatch(f"无法比较 {type(e1).__name__} 与 {type(e2).__name__}")


def _scoped_forces(space: VarSpace, b: ScopedEvent, e: ScopedEvent) -> bool:
    """P(E | B) = 1 ?"""
    if b.literals is not None and e.literals is not None:
        fixed = dict(b.literals)
        for i, j in e.literals:
            if i in fixed:
                if fixed[i] != j:
                    return False
            elif space.marginal(i, j) < 1.0:
                return False
        # B 本身概率为0时条件概率无定义，保留 B
        return all(space.marginal(i, j) > 0 for i, j in b.literals)

    scope = sorted(set(b.scope) | set(e.scope))
    seen_b = False
    for values, _ in _enumerate(space, scope):
        if b.holds(values):
            seen_b = True
            if not e.holds(values):
                return False
    return seen_b


def _perm_forces(n: int, b: AtomicPermEvent, c: PermEvent) -> bool:
    """P(C | B) = 1 ?"""
    members = c.members if isinstance(c, PermDisjunction) else (c,)
    bpairs = set(b.pairs)
    plain = [m for m in members if m.mark_prob is None]
    # 带标记的成员只在与 B 完全相同时被 B 强制
    if any(m.mark_prob is not None and b.mark_prob is not None and set(m.pairs) == bpairs and m.mark_prob == b.mark_prob
           for m in members):
        return True
    if any(set(m.pairs) <= bpairs for m in plain):
        return True

    fixed = dict(b.pairs)
    free_x = [x for x in range(n) if x not in fixed]
    if not plain or len(free_x) > _COMPLETION_LIMIT:
        return False
    used_y = set(fixed.values())
    free_y = [y for y in range(n) if y not in used_y]
    forward = [0] * n
    for x, y in fixed.items():
        forward[x] = y
    for completion in itertools.permutations(free_y):
        for x, y in zip(free_x, completion):
            forward[x] = y
        if not any(m.holds(forward) for m in plain):
            return False
    return True


def restricted_indices(events: Sequence[Event], e: Event, space: Union[VarSpace, int]) -> List[int]:
    """𝓑[E] 在输入列表中的下标（保持原顺序）"""
    result = []
    for idx, b in enumerate(events):
        if isinstance(b, ScopedEvent) and isinstance(e, ScopedEvent):
            if not isinstance(space, VarSpace):
                raise SettingMismatch("变量模型需要 VarSpace")
            forced = _scoped_forces(space, b, e)
        elif isinstance(b, AtomicPermEvent) and isinstance(e, (AtomicPermEvent, PermDisjunction)):
            if isinstance(space, VarSpace):
                raise SettingMismatch("排列模型需要整数 n")
            forced = _perm_forces(int(space), b, e)
        else:
            raise SettingMismatch(f"无法比较 {type(b).__name__} 与 {type(e).__name__}")
        if not forced:
            result.append(idx)
    return result


def restrict_bad_events(events: Sequence[Event], e: Event, space: Union[VarSpace, int]) -> List[Event]:
    """𝓑[E] = {B ∈ 𝓑 : P_Ω(E | B) < 1}"""
    return [events[i] for i in restricted_indices(events, e, space)]


def probability_of(e: Event, space: Union[VarSpace, int]) -> float:
    """两种模型统一的 P_Ω(E)"""
    if isinstance(e, ScopedEvent):
        if not isinstance(space, VarSpace):
            raise SettingMismatch("变量模型需要 VarSpace")
        return event_probability(space, e)
    if isinstance(space, VarSpace):
        raise SettingMismatch("排列模型需要整数 n")
    if isinstance(e, PermDisjunction):
        return perm_union_probability(int(space), e.members)
    return perm_event_probability(int(space), e)


# ==================== 采样 ====================

def sample(space: Union[VarSpace, int], rng: np.random.Generator) -> Union[Assignment, Permutation]:
    """按 Ω 采样：变量赋值或均匀排列"""
    if isinstance(space, VarSpace):
        values = tuple(
            int(rng.choice(size, p=np.asarray(vec, dtype=float))) for size, vec in zip(space.domains, space.probs)
        )
        return Assignment(values=values)
    n = int(space)
    if n < 1:
        raise OutOfRange(f"排列长度必须为正: {n}")
    return Permutation.from_forward(rng.permutation(n))
