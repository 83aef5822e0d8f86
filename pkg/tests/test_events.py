"""
事件模型测试
"""

from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from core.events import (
    AtomicPermEvent, PermDisjunction, ScopedEvent, disjunction, event_probability, joint_probability,
    perm_event_probability, perm_event_probability_exact, perm_union_probability, probability_of,
    related, restrict_bad_events, restricted_indices, sample, singleton,
)
from core.exceptions import OutOfRange, SettingMismatch
from core.models import Permutation, VarSpace
from core.rng import derive_seed, stream


# ==================== 变量模型 ====================

def test_var_space_rejects_bad_distribution():
    with pytest.raises(ValidationError):
        VarSpace(n=1, domains=(2,), probs=((0.7, 0.7),))
    with pytest.raises(ValidationError):
        VarSpace(n=2, domains=(2,), probs=((0.5, 0.5),))


def test_atomic_event_probability(bits3):
    e = ScopedEvent.atomic([(2, 1), (0, 0), (1, 1)])
    assert e.scope == (0, 1, 2)
    assert event_probability(bits3, e) == pytest.approx(1 / 8)
    assert e.holds((0, 1, 1))
    assert not e.holds((1, 1, 1))


def test_atomic_event_rejects_repeated_variable():
    with pytest.raises(ValidationError):
        ScopedEvent.atomic([(0, 0), (0, 1)])


def test_nonuniform_marginal():
    space = VarSpace(n=2, domains=(3, 2), probs=((0.2, 0.3, 0.5), (0.9, 0.1)))
    e = ScopedEvent.atomic([(0, 2), (1, 1)])
    assert event_probability(space, e) == pytest.approx(0.05)


def test_singleton_event(bits3):
    e = singleton(1, [0, 1])
    assert e.singleton_form() == (1, frozenset({0, 1}))
    assert event_probability(bits3, e) == pytest.approx(1.0)
    assert ScopedEvent.atomic([(2, 1)]).singleton_form() == (2, frozenset({1}))
    assert ScopedEvent.atomic([(0, 1), (2, 1)]).singleton_form() is None


def test_disjunction_and_joint_probability(bits3):
    a = ScopedEvent.atomic([(0, 1)])
    b = ScopedEvent.atomic([(1, 1)])
    union = disjunction([a, b])
    assert union.scope == (0, 1)
    assert event_probability(bits3, union) == pytest.approx(0.75)
    # P(B ∧ ¬A)
    assert joint_probability(bits3, [a, b], lambda vals: vals[1] and not vals[0]) == pytest.approx(0.25)


def test_scoped_relation(chain_events):
    e0, e1, e2 = chain_events
    assert related(e0, e1)
    assert not related(e0, e2)
    assert related(e0, e0)


def test_restriction_in_variable_model(bits3):
    e = ScopedEvent.atomic([(0, 1)])
    forcing = ScopedEvent.atomic([(0, 1), (1, 1)])
    other = ScopedEvent.atomic([(0, 0), (1, 1)])
    assert restricted_indices([forcing, other], e, bits3) == [1]
    assert restrict_bad_events([forcing, other], e, bits3) == [other]


def test_mixed_settings_raise(bits3):
    with pytest.raises(SettingMismatch):
        related(ScopedEvent.atomic([(0, 1)]), AtomicPermEvent.of([(0, 0)]))
    with pytest.raises(SettingMismatch):
        probability_of(AtomicPermEvent.of([(0, 0)]), bits3)


# ==================== 排列模型 ====================

def test_perm_event_validation():
    with pytest.raises(ValidationError):
        AtomicPermEvent.of([(0, 1), (0, 2)])
    with pytest.raises(ValidationError):
        AtomicPermEvent.of([(0, 1), (2, 1)])


def test_perm_event_probability():
    assert perm_event_probability(5, AtomicPermEvent.of([(1, 1)])) == pytest.approx(0.2)
    assert perm_event_probability(5, AtomicPermEvent.of([(0, 1), (1, 0)])) == pytest.approx(1 / 20)
    assert perm_event_probability_exact(5, AtomicPermEvent.of([(0, 1), (1, 0)])) == Fraction(1, 20)
    n = 32
    assert perm_event_probability(n, AtomicPermEvent.of([(0, 3), (5, 7)])) == pytest.approx(1 / (n * (n - 1)))


def test_perm_event_probability_large_n():
    n = 400
    assert perm_event_probability(n, AtomicPermEvent.of([(0, 3), (5, 7)])) == pytest.approx(1 / (n * (n - 1)))


def test_perm_event_out_of_range():
    with pytest.raises(OutOfRange):
        perm_event_probability(3, AtomicPermEvent.of([(0, 3)]))


def test_marked_event_probability():
    e = AtomicPermEvent.of([(0, 1), (1, 0)], mark_prob=0.5)
    assert perm_event_probability(4, e) == pytest.approx(1 / 12 * 0.75)
    marks = [[0] * 4 for _ in range(4)]
    forward = (1, 0, 2, 3)
    assert not e.holds(forward, marks)
    marks[1][0] = 1
    assert e.holds(forward, marks)
    assert not e.holds(forward)


def test_perm_union_probability():
    a = AtomicPermEvent.of([(0, 0)])
    b = AtomicPermEvent.of([(1, 1)])
    c = AtomicPermEvent.of([(0, 1)])
    assert perm_union_probability(3, [a, b]) == pytest.approx(0.5)
    # π(0)=0 与 π(0)=1 互斥
    assert perm_union_probability(3, [a, c]) == pytest.approx(2 / 3)


def test_perm_relation():
    a = AtomicPermEvent.of([(0, 0)])
    assert related(a, AtomicPermEvent.of([(0, 2)]))
    assert related(a, AtomicPermEvent.of([(2, 0)]))
    assert not related(a, AtomicPermEvent.of([(1, 2)]))
    assert related(PermDisjunction(members=(AtomicPermEvent.of([(1, 1)]), a)), AtomicPermEvent.of([(3, 0)]))


def test_perm_restriction_by_containment_and_completion():
    c = AtomicPermEvent.of([(0, 1)])
    containing = AtomicPermEvent.of([(0, 1), (1, 0)])
    disjoint = AtomicPermEvent.of([(2, 2)])
    assert restricted_indices([containing, disjoint], c, 4) == [1]

    # n=3 时固定两项后第三项被强制
    forced_last = AtomicPermEvent.of([(0, 0), (1, 1)])
    assert restricted_indices([forced_last], AtomicPermEvent.of([(2, 2)]), 3) == []
    assert restricted_indices([forced_last], AtomicPermEvent.of([(2, 2)]), 4) == [0]


def test_sample_is_reproducible():
    space = VarSpace.bits(6)
    first = sample(space, stream(3, "test"))
    second = sample(space, stream(3, "test"))
    assert first == second
    pi = sample(5, stream(3, "perm"))
    assert isinstance(pi, Permutation)
    assert sorted(pi.forward) == list(range(5))


def test_streams_are_keyed():
    a = stream(1, "x", 0).random(4)
    b = stream(1, "x", 1).random(4)
    c = stream(1, "y", 0).random(4)
    assert not np.allclose(a, b)
    assert not np.allclose(a, c)
    assert np.allclose(a, stream(1, "x", 0).random(4))
    assert derive_seed(1, "x") == derive_seed(1, "x")
