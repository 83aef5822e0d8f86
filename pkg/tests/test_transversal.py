"""
独立截线测试
"""

import json
import math

import pytest

from apps.transversal import (
    alpha_cluster, alpha_prime, avoidance_bound, block_counts, block_psi_bound, find_avoiding_transversal,
    is_independent_transversal, load_block_graph, random_block_graph, run_transversal, sample_transversal,
    spread_avoidance_bound, to_lll_instance, to_transversal, verify_alpha,
)
from core.exceptions import InputError, OutOfRange, ParseError, RestartsExhausted, SubcriticalBlockSize
from core.models import BlockGraph, Transversal


@pytest.fixture
def graph():
    return random_block_graph(4, 8, 2, seed=1)


# ==================== 参数与界 ====================

def test_alpha_cluster():
    assert alpha_cluster(4, 1) == pytest.approx(0.25)
    assert alpha_cluster(8, 2) == pytest.approx(0.0625)
    # α = (1 + bΔα)²/b²
    b, delta = 20, 3
    alpha = alpha_cluster(b, delta)
    assert alpha == pytest.approx((1 + b * delta * alpha) ** 2 / b ** 2)
    with pytest.raises(SubcriticalBlockSize):
        alpha_cluster(7, 2)


def test_alpha_prime():
    # ℓ = 0 时与 α 相同
    for b, delta in [(8, 2), (10, 2), (20, 3)]:
        assert alpha_prime(b, delta, 0) == pytest.approx(alpha_cluster(b, delta))
    # b = 4Δ：2/(b² - 2Δ(b-ℓ))
    assert alpha_prime(8, 2, 4) == pytest.approx(1 / 24)
    s = math.sqrt(0.2)
    assert alpha_prime(10, 2, 5) == pytest.approx(2 / (100 * (1 + s) - 20))
    assert alpha_prime(10, 2, 1) > alpha_prime(10, 2, 5) > alpha_prime(10, 2, 9)
    with pytest.raises(SubcriticalBlockSize):
        alpha_prime(7, 2, 1)


def test_avoidance_bound_psi_branch():
    bound = avoidance_bound(10, 2, 5)
    assert bound.branch == "psi"
    assert bound.bound == pytest.approx(0.5802, abs=1e-4)
    assert bound.bound == bound.psi_value


def test_avoidance_bound_mixed_branch():
    bound = avoidance_bound(21, 5, 10)
    assert bound.branch == "mixed"
    assert bound.psi_value == pytest.approx(0.5988, abs=1e-4)
    assert bound.bound == pytest.approx(0.6220, abs=1e-3)
    assert bound.bound == max(bound.psi_value, bound.exp_value)


def test_avoidance_bound_errors():
    with pytest.raises(OutOfRange):
        avoidance_bound(10, 2, 10)
    with pytest.raises(SubcriticalBlockSize):
        avoidance_bound(7, 2, 1)
    assert avoidance_bound(10, 2, 0).bound == 0.0


def test_block_psi_bound():
    s = math.sqrt(1 - 0.8)
    assert block_psi_bound(10, 2, 0) == pytest.approx(2 / (1 + s))
    assert block_psi_bound(10, 2, 5) == pytest.approx(20 / (15 + 5 * s))


def test_spread_avoidance_bound():
    assert spread_avoidance_bound(10, 2, [5]) == pytest.approx(avoidance_bound(10, 2, 5).psi_value)
    single = spread_avoidance_bound(10, 2, [1])
    assert spread_avoidance_bound(10, 2, [1, 1]) == pytest.approx(single * 1.9)
    assert spread_avoidance_bound(10, 2, [0, 0]) == 0.0
    with pytest.raises(OutOfRange):
        spread_avoidance_bound(10, 2, [10])


# ==================== 实例 ====================

def test_lll_instance_drops_intra_block_edges():
    g = BlockGraph(blocks=((0, 1), (2, 3)), edges=((0, 1), (1, 2)))
    instance = to_lll_instance(g)
    assert instance.dropped == 1
    assert instance.edges == [(1, 2)]
    assert instance.bad_events[0].literals == ((0, 1), (1, 0))


def test_independent_transversal_check():
    g = BlockGraph(blocks=((0, 1), (2, 3)), edges=((1, 2),))
    assert is_independent_transversal(g, Transversal(choice=(0, 2)))
    assert not is_independent_transversal(g, Transversal(choice=(1, 2)))
    assert not is_independent_transversal(g, Transversal(choice=(2, 0)))
    assert to_transversal(g, [1, 0]).choice == (1, 2)


def test_random_block_graph(graph):
    assert graph.k == 4
    assert graph.b == 8
    assert graph.max_degree <= 2
    assert all(graph.locate(u)[0] != graph.locate(v)[0] for u, v in graph.edges)
    assert random_block_graph(4, 8, 2, seed=1) == graph


def test_alpha_satisfies_cluster_expansion(graph):
    verdict = verify_alpha(graph)
    assert verdict.satisfied


def test_runs_output_independent_transversals(graph):
    instance = to_lll_instance(graph)
    for trial in range(20):
        result = run_transversal(graph, instance, seed=3, trial=trial)
        assert result.terminated
        assert is_independent_transversal(graph, to_transversal(graph, result.final.values))


def test_sample_transversal(graph):
    instance = to_lll_instance(graph)
    for trial in range(5):
        t = sample_transversal(graph, instance, seed=3, trial=trial)
        assert is_independent_transversal(graph, t)
        run = run_transversal(graph, instance, seed=3, trial=trial)
        assert t == to_transversal(graph, run.final.values)


def test_sample_transversal_truncated():
    # 每块只有一个顶点且两者相邻：任何截线都不独立
    g = BlockGraph(blocks=((0,), (1,)), edges=((0, 1),))
    assert sample_transversal(g, to_lll_instance(g), seed=0, max_steps=5) is None


def test_block_counts(graph):
    counts = block_counts(graph, [graph.blocks[0][0], graph.blocks[0][1], graph.blocks[2][0]])
    assert counts == {0: 2, 2: 1}


# ==================== 构造性回避 ====================

def test_find_avoiding_transversal(graph):
    avoid = frozenset(graph.blocks[0][:3])
    t = find_avoiding_transversal(graph, avoid, seed=2)
    assert is_independent_transversal(graph, t)
    assert avoid.isdisjoint(t.choice)


def test_find_rejects_whole_block(graph):
    with pytest.raises(OutOfRange):
        find_avoiding_transversal(graph, graph.blocks[1], seed=2)


def test_find_exhausts_restarts():
    # 回避 0 就必须选 1，而 1 与另一块的两个顶点都相邻
    g = BlockGraph(blocks=((0, 1), (2, 3)), edges=((1, 2), (1, 3)))
    with pytest.raises(RestartsExhausted):
        find_avoiding_transversal(g, {0}, seed=0, max_restarts=3)


# ==================== 文件格式 ====================

def test_load_block_graph():
    text = json.dumps({"blocks": [[0, 1], [2, 3]], "edges": [[1, 2]], "avoid": [0]})
    g, avoid = load_block_graph(text)
    assert g.k == 2
    assert g.edges == ((1, 2),)
    assert avoid == frozenset({0})


@pytest.mark.parametrize("text, error", [
    ("not json", ParseError),
    (json.dumps({"edges": []}), ParseError),
    (json.dumps({"blocks": [[0, 1], [2]], "edges": []}), InputError),
    (json.dumps({"blocks": [[0, 1], [2, 3]], "edges": [[0, 9]]}), InputError),
    (json.dumps({"blocks": [[0, 1], [2, 3]], "avoid": [7]}), OutOfRange),
])
def test_load_block_graph_errors(text, error):
    with pytest.raises(error):
        load_block_graph(text)
