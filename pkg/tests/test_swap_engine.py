"""
Swapping 引擎与见证树测试
"""

from collections import Counter

import numpy as np
import pytest

from core.events import AtomicPermEvent
from core.exceptions import EventNotTrue, InvalidParameter
from core.models import Permutation, Snapshot, SwapRunResult
from core.rng import UniformBuffer, stream
from engines.swap_engine import resample_perm_event, run_swapping
from engines.witness_tree import (
    ROOT, TreeStructure, appearing_trees, build_witness_tree, canonical_weight, iter_trees, tree_appears, tree_weight,
)


# ==================== 交换子程序 ====================

def test_resample_requires_true_event():
    pi = Permutation.identity(4)
    with pytest.raises(EventNotTrue):
        resample_perm_event(pi, AtomicPermEvent.of([(0, 1)]), np.random.default_rng(0), strict=True)


def test_resample_keeps_bijection():
    pi = Permutation.identity(6)
    buf = UniformBuffer(stream(0, "test"))
    event = AtomicPermEvent.of([(0, 0), (3, 3), (5, 5)])
    for _ in range(50):
        pi = resample_perm_event(pi, event, buf)
        assert sorted(pi.forward) == list(range(6))


def test_resample_single_pair_is_uniform():
    rng = np.random.default_rng(0)
    counts = Counter()
    for _ in range(3000):
        pi = resample_perm_event(Permutation.identity(3), AtomicPermEvent.of([(0, 0)]), rng)
        counts[pi.forward[0]] += 1
    assert set(counts) == {0, 1, 2}
    assert all(850 < c < 1150 for c in counts.values())


# ==================== 引擎 ====================

def test_run_terminates_and_avoids(perm_events):
    for trial in range(10):
        result = run_swapping(5, perm_events, seed=3, trial=trial, debug=True)
        assert result.terminated
        assert not any(e.holds(result.final.forward) for e in perm_events)
        assert result.steps == len(result.log)


def test_run_is_reproducible(perm_events):
    a = run_swapping(5, perm_events, seed=3, trial=4)
    b = run_swapping(5, perm_events, seed=3, trial=4)
    assert a.log == b.log
    assert a.final == b.final
    assert a.initial == b.initial


def test_snapshots(perm_events):
    full = run_swapping(5, perm_events, seed=1, snapshots=-1)
    assert len(full.snapshots) == full.steps + 1
    assert [s.time for s in full.snapshots] == list(range(full.steps + 1))
    assert full.snapshots[0].forward == full.initial.forward
    assert full.snapshots[-1].forward == full.final.forward

    recent = run_swapping(5, perm_events, seed=1, snapshots=1)
    assert len(recent.snapshots) == 1
    assert run_swapping(5, perm_events, seed=1).snapshots == []


def test_invalid_events():
    with pytest.raises(InvalidParameter):
        run_swapping(3, [AtomicPermEvent.of([(0, 3)])])
    mixed = [AtomicPermEvent.of([(0, 1)], mark_prob=0.5), AtomicPermEvent.of([(1, 0)], mark_prob=0.2)]
    with pytest.raises(InvalidParameter):
        run_swapping(3, mixed)


def test_marked_run():
    events = [
        AtomicPermEvent.of([(0, 1), (1, 0)], mark_prob=0.5),
        AtomicPermEvent.of([(2, 3), (3, 2)], mark_prob=0.5),
    ]
    result = run_swapping(4, events, seed=2, snapshots=-1)
    assert result.terminated
    assert len(result.initial_marks) == 4
    assert set(result.initial_marks) <= {0, 1}
    assert len(result.snapshots[0].marks) == 4


def test_stop_when(perm_events):
    result = run_swapping(5, perm_events, seed=0, stop_when=lambda forward: True)
    assert result.steps == 0


# ==================== 见证树 ====================

def test_orderability_limits_root_children():
    a = AtomicPermEvent.of([(1, 1)])
    bad = [AtomicPermEvent.of([(1, 2)]), AtomicPermEvent.of([(2, 1)])]
    tree = build_witness_tree([0, 1], a, bad)
    assert tree.labels == (ROOT, 1)
    assert tree.root_children() == [1]
    assert tree_weight(tree, 5, bad) == pytest.approx(0.04)


def test_tree_attaches_under_deepest_related_node():
    a = AtomicPermEvent.of([(1, 1)])
    bad = [AtomicPermEvent.of([(1, 2)]), AtomicPermEvent.of([(2, 1)]), AtomicPermEvent.of([(2, 3)])]
    tree = build_witness_tree([2, 1], a, bad)
    assert tree.labels == (ROOT, 1, 2)
    assert tree.parents == (ROOT, 0, 1)
    assert tree.depths == (0, 1, 2)
    assert tree.canonical() == (ROOT, ((1, ((2, ()),)),))
    assert canonical_weight(tree.canonical(), 5, a, bad) == pytest.approx(tree_weight(tree, 5, bad))


def test_singleton_tree_weight():
    tree = TreeStructure(root_event=AtomicPermEvent.of([(0, 0)]))
    assert tree.size == 1
    assert tree_weight(tree, 5, []) == pytest.approx(0.2)


def test_appearing_trees_need_full_snapshots(perm_events):
    a = AtomicPermEvent.of([(0, 0)])
    with pytest.raises(ValueError):
        appearing_trees(run_swapping(5, perm_events, seed=0), a, perm_events)


def test_appearing_trees(perm_events):
    a = AtomicPermEvent.of([(0, 0)])
    for trial in range(20):
        result = run_swapping(5, perm_events, seed=6, trial=trial, snapshots=-1)
        trees = appearing_trees(result, a, perm_events)
        held = any(s.forward[0] == 0 for s in result.snapshots)
        assert bool(trees) == held
        for tau in trees:
            assert tau[0] == ROOT
            assert tree_appears(tau, result, a, perm_events)


def _replayed_run(forwards, log) -> SwapRunResult:
    return SwapRunResult(
        final=Permutation.from_forward(forwards[-1]),
        initial=Permutation.from_forward(forwards[0]),
        log=list(log),
        terminated=True,
        steps=len(log),
        snapshots=[Snapshot(time=t, forward=f) for t, f in enumerate(forwards)],
    )


def test_iter_trees_one_per_time_event_holds():
    a = AtomicPermEvent.of([(0, 0)])
    bad = [AtomicPermEvent.of([(0, 1)])]
    # π^0 上 B0 成立，交换后 π^1 上 A 成立
    result = _replayed_run([(1, 0, 2), (0, 1, 2)], [0])
    trees = list(iter_trees(result, a, bad))
    assert len(trees) == 1
    assert trees[0].labels == (ROOT, 0)
    assert trees[0].canonical() == (ROOT, ((0, ()),))


def test_iter_trees_at_time_zero():
    a = AtomicPermEvent.of([(0, 0)])
    result = _replayed_run([(0, 1, 2)], [])
    trees = list(iter_trees(result, a, []))
    assert [tree.size for tree in trees] == [1]


def test_iter_trees_needs_snapshot_from_zero():
    a = AtomicPermEvent.of([(0, 0)])
    result = _replayed_run([(1, 0, 2), (0, 1, 2)], [0])
    truncated = result.model_copy(update={'snapshots': result.snapshots[1:]})
    with pytest.raises(ValueError):
        list(iter_trees(truncated, a, [AtomicPermEvent.of([(0, 1)])]))
