"""
有界出现次数 k-SAT 测试
"""

import math

import numpy as np
import pytest

from apps.ksat import (
    cnf_to_instance, epsilon_bound, implicate_clause, implicate_formula, implicate_lower_bound, jwise_deviation,
    load_dimacs, min_implicate_size, mt_samples, random_bounded_ksat, symmetric_threshold, to_dimacs,
)
from core.exceptions import BudgetExceeded, CriterionViolated, DuplicateLiteral, InvalidParameter, ParseError
from core.models import CNF

DIMACS = """c example
p cnf 4 2
1 -2 3 0
-1 4
2 0
"""


# ==================== DIMACS ====================

def test_load_dimacs():
    cnf = load_dimacs(DIMACS)
    assert cnf.n == 4
    assert cnf.clauses == ((1, -2, 3), (-1, 4, 2))
    assert cnf.k_min == 3
    assert cnf.L == 2
    assert load_dimacs(to_dimacs(cnf)) == cnf


def test_load_dimacs_header_mismatch_is_tolerated():
    cnf = load_dimacs("p cnf 3 5\n1 2 0\n")
    assert len(cnf.clauses) == 1


@pytest.mark.parametrize("text, line", [
    ("1 2 0\n", 1),
    ("p cnf 2 1\n1 3 0\n", 2),
    ("p cnf 2 1\n1 x 0\n", 2),
    ("p cnf 2 1\n1 2\n", 2),
    ("p cnf 2 1\n0\n", 2),
])
def test_load_dimacs_errors(text, line):
    with pytest.raises(ParseError) as info:
        load_dimacs(text)
    assert info.value.line == line


def test_load_dimacs_duplicate_literal():
    with pytest.raises(DuplicateLiteral) as info:
        load_dimacs("p cnf 3 1\nc x\n1 -1 2 0\n")
    assert info.value.line == 3


def test_empty_cnf_defaults():
    cnf = CNF(n=3)
    assert cnf.k_min == 1
    assert cnf.L == 0


# ==================== 实例与 ε ====================

def test_cnf_to_instance(small_cnf):
    instance = cnf_to_instance(small_cnf)
    assert len(instance.bad_events) == 2
    assert instance.criterion_ok
    first = instance.bad_events[0]
    # (x1 ∨ ¬x2 ∨ x3 ∨ x4) 被违反：X0=0, X1=1, X2=0, X3=0
    assert first.literals == ((0, 0), (1, 1), (2, 0), (3, 0))


def test_epsilon_bound():
    assert epsilon_bound(6, 3) == pytest.approx(math.e * 3 / 64)
    assert epsilon_bound(6, 3) == pytest.approx(0.1274, abs=1e-4)
    assert epsilon_bound(10, 1) == pytest.approx(0.002655, abs=1e-6)
    assert epsilon_bound(6, 0) == 0.0
    assert symmetric_threshold(6) == pytest.approx(3.924, abs=1e-3)
    with pytest.raises(CriterionViolated):
        epsilon_bound(6, 4)
    with pytest.raises(InvalidParameter):
        epsilon_bound(0, 1)


def test_random_bounded_ksat():
    cnf = random_bounded_ksat(50, 5, 3, seed=1)
    assert len(cnf.clauses) == 50 * 3 // 5
    assert cnf.k_min == 5
    assert all(len(c) == 5 for c in cnf.clauses)
    assert cnf.L <= 3
    assert random_bounded_ksat(50, 5, 3, seed=1) == cnf
    with pytest.raises(InvalidParameter):
        random_bounded_ksat(3, 5, 1)


def test_mt_samples_satisfy_formula():
    cnf = random_bounded_ksat(30, 6, 3, seed=5)
    samples = mt_samples(cnf, 40, seed=2)
    assert samples.shape == (40, 30)
    assert all(cnf.satisfied_by(row) for row in samples)
    assert np.array_equal(samples, mt_samples(cnf, 40, seed=2, jobs=4))


# ==================== j 维独立性 ====================

def test_jwise_deviation_constant_samples():
    zeros = np.zeros((10, 3), dtype=np.uint8)
    assert jwise_deviation(zeros, 1).deviation == pytest.approx(0.5)
    dev = jwise_deviation(zeros, 2)
    assert dev.deviation == pytest.approx(0.75)
    assert dev.exhaustive
    assert dev.tuples == 3
    assert dev.worst_pattern == 0


def test_jwise_deviation_uniform_samples():
    rng = np.random.default_rng(0)
    samples = rng.integers(0, 2, size=(4000, 6))
    dev = jwise_deviation(samples, 2)
    assert dev.deviation < 0.05
    assert dev.se == pytest.approx(math.sqrt(0.25 * 0.75 / 4000))


def test_jwise_sampled_tuples():
    rng = np.random.default_rng(1)
    samples = rng.integers(0, 2, size=(200, 30))
    dev = jwise_deviation(samples, 3, tuple_budget=10, sample_tuples=50, seed=4)
    assert not dev.exhaustive
    assert dev.tuples == 50
    assert len(dev.worst_tuple) == 3


def test_jwise_invalid_j():
    samples = np.zeros((5, 3), dtype=np.uint8)
    with pytest.raises(InvalidParameter):
        jwise_deviation(samples, 4)
    with pytest.raises(InvalidParameter):
        jwise_deviation(samples, 0)
    with pytest.raises(InvalidParameter):
        jwise_deviation(np.zeros((0, 3)), 1)


# ==================== 蕴含子句 ====================

def test_implicate_formula():
    phi = implicate_formula(3, 2)
    assert len(phi.clauses) == 2
    assert all(len(c) == 3 for c in phi.clauses)
    assert implicate_clause(3, 2) == (2, 3)
    assert min_implicate_size(phi) == 2


def test_implicate_formula_larger():
    phi = implicate_formula(5, 2)
    assert len(phi.clauses) == 8
    assert phi.L == 8
    assert min_implicate_size(phi) == 2


def test_min_implicate_edge_cases():
    assert min_implicate_size(CNF(n=1, clauses=((1,), (-1,)))) == 0
    assert min_implicate_size(CNF(n=2)) is None
    assert min_implicate_size(CNF(n=2, clauses=((1, 2),))) == 2
    assert min_implicate_size(CNF(n=2, clauses=((1,),))) == 1
    with pytest.raises(BudgetExceeded):
        min_implicate_size(CNF(n=30))


def test_implicate_lower_bound():
    assert implicate_lower_bound(4, 2) == 2
    assert implicate_lower_bound(10, 1) == 9
    with pytest.raises(InvalidParameter):
        implicate_lower_bound(4, 0)


def test_random_formula_respects_lower_bound():
    for seed in range(5):
        cnf = random_bounded_ksat(12, 5, 2, seed=seed)
        size = min_implicate_size(cnf)
        assert size is not None
        assert size >= implicate_lower_bound(cnf.k_min, cnf.L)
