"""
估计器、报告与实验测试
"""

import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from core.events import ScopedEvent
from core.exceptions import InvalidParameter
from core.models import Estimate, MeanEstimate, Report
from harness import experiments
from harness.estimator import (
    estimate, exact_interval, exact_verdict, lower_verdict, mean_estimate, mean_verdict, verdict,
    wilson_interval, z_value,
)
from harness.reports import render_csv, render_json, write_report


# ==================== 估计器 ====================

def test_wilson_zero_successes():
    low, high = wilson_interval(0, 1000, 0.95)
    assert low == 0.0
    assert high == pytest.approx(0.00383, abs=1e-5)


@pytest.mark.parametrize("successes,trials", [(5, 3), (-1, 10), (0, 0)])
def test_wilson_invalid_counts(successes, trials):
    with pytest.raises(InvalidParameter):
        wilson_interval(successes, trials, 0.95)


def test_z_value():
    assert z_value(0.95) == pytest.approx(1.959964, abs=1e-5)
    with pytest.raises(InvalidParameter):
        z_value(1.0)


def test_wilson_coverage():
    """0.99 水平下区间覆盖真实概率的比例接近名义值"""
    rng = np.random.default_rng(0)
    p, trials = 0.3, 200
    draws = rng.binomial(trials, p, size=500)
    covered = 0
    for x in draws:
        low, high = wilson_interval(int(x), trials, 0.99)
        covered += low <= p <= high
    assert covered / len(draws) >= 0.97


def test_exact_interval_edges():
    low, high = exact_interval(0, 10, 0.95)
    assert low == 0.0
    assert high == pytest.approx(1 - 0.025 ** 0.1, abs=1e-9)
    low, high = exact_interval(10, 10, 0.95)
    assert high == 1.0
    assert low == pytest.approx(0.025 ** 0.1, abs=1e-9)


def test_exact_interval_wider_than_wilson():
    exact = exact_interval(50, 100, 0.95)
    score = wilson_interval(50, 100, 0.95)
    assert exact[0] < score[0] < 0.5 < score[1] < exact[1]
    with pytest.raises(InvalidParameter):
        exact_interval(3, 2, 0.95)


def test_estimate_counts():
    est = estimate(lambda t: t, lambda r: r % 4 == 0, trials=100, seed=1, jobs=1, level=0.95)
    assert est.successes == 25
    assert est.trials == 100
    assert est.p_hat == 0.25
    assert est.ci_low < 0.25 < est.ci_high
    assert est.non_terminated == 0


def test_estimate_independent_of_jobs():
    runner = lambda t: (t * 7919) % 13
    event = lambda r: r < 4
    one = estimate(runner, event, trials=300, seed=3, jobs=1, level=0.99)
    many = estimate(runner, event, trials=300, seed=3, jobs=4, level=0.99)
    assert one.model_dump() == many.model_dump()
    assert 'wall_time' not in one.model_dump()


def test_estimate_nonterminated_counted_as_event():
    runner = lambda t: SimpleNamespace(terminated=t % 2 == 0, hit=False)
    counted = estimate(runner, lambda r: r.hit, trials=100, seed=0, jobs=1, level=0.95)
    assert counted.successes == 50
    assert counted.trials == 100
    assert counted.non_terminated == 50

    excluded = estimate(runner, lambda r: r.hit, trials=100, seed=0, jobs=1, level=0.95,
                        count_nonterminated=False)
    assert excluded.successes == 0
    assert excluded.trials == 50


def test_estimate_all_nonterminated():
    runner = lambda t: SimpleNamespace(terminated=False)
    with pytest.raises(InvalidParameter):
        estimate(runner, bool, trials=10, seed=0, jobs=1, level=0.95, count_nonterminated=False)


def _est(ci_low: float) -> Estimate:
    return Estimate(successes=30, trials=100, p_hat=0.3, ci_low=ci_low, ci_high=0.4, level=0.99, seed=0)


def test_verdict():
    bad = verdict(_est(0.3), 0.25, name="too high")
    assert bad.status == 'violation'
    assert bad.margin == pytest.approx(-0.05)
    good = verdict(_est(0.2), 0.25)
    assert good.ok
    assert good.margin == pytest.approx(0.05)


def test_mean_estimate():
    m = mean_estimate([1.0, 2.0, 3.0])
    assert m.mean == pytest.approx(2.0)
    assert m.se == pytest.approx(1 / math.sqrt(3))
    assert m.count == 3
    assert mean_estimate([]).count == 0
    assert mean_estimate([5.0]).se == 0.0


def test_mean_and_lower_verdicts():
    m = MeanEstimate(mean=1.0, se=0.1, count=10)
    assert mean_verdict(m, 0.8).ok
    assert not mean_verdict(m, 0.6).ok
    assert lower_verdict(m, 1.2).ok
    low = lower_verdict(m, 1.5)
    assert not low.ok
    assert low.margin == pytest.approx(-0.2)


def test_exact_verdict():
    v = exact_verdict("x", False, 1.0, 2.0)
    assert v.status == 'violation'
    assert v.margin == pytest.approx(-1.0)
    assert exact_verdict("y", True, 0.0, 0.0, margin=3.0).margin == 3.0


# ==================== 报告 ====================

def _report(rows=None) -> Report:
    return Report(kind='test.kind', params={'b': 1, 'a': 2}, results={'value': 0.5}, rows=rows)


def test_render_json_sorted_and_stable():
    report = _report()
    text = render_json(report)
    data = json.loads(text)
    assert data['schema'] == "1"
    assert data['kind'] == 'test.kind'
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert render_json(report) == text


def test_render_csv():
    report = _report(rows=[{'b': 1, 'a': {'x': 2}}, {'b': 3, 'a': {'x': 4}}])
    assert render_csv(report) == "a.x,b\n2,1\n4,3\n"
    with pytest.raises(InvalidParameter):
        render_csv(_report())


def test_write_report(tmp_path):
    out = tmp_path / "sub" / "report.csv"
    text = write_report(_report(rows=[{'a': 1}]), 'csv', str(out))
    assert out.read_text(encoding='utf-8') == text
    with pytest.raises(InvalidParameter):
        write_report(_report(), 'xml')


# ==================== 实验 ====================

def test_bounds_epsilon(cfg):
    report = experiments.bounds_epsilon(cfg, 6, 4)
    assert report.results['criterion_ok'] is False
    assert report.results['epsilon'] is None
    assert report.results['implicate_lower_bound'] == 3
    ok = experiments.bounds_epsilon(cfg, 6, 3)
    assert ok.results['epsilon'] == pytest.approx(math.e * 3 / 64)
    with pytest.raises(InvalidParameter):
        experiments.bounds_epsilon(cfg, 0, 1)


def test_transversal_bound(cfg):
    report = experiments.transversal_bound(cfg, 10, 2, 5)
    assert report.results['avoidance']['bound'] == pytest.approx(0.5802, abs=1e-4)
    assert report.results['avoidance']['branch'] == 'psi'


def test_latin_table(cfg):
    report = experiments.latin_table(cfg, [0.15, 0.3])
    assert len(report.rows) == 2
    assert len(report.verdicts) == 1
    assert not report.has_violation


def test_ksat_implicates(cfg):
    report = experiments.ksat_implicates(cfg, random_instances=2)
    assert len(report.rows) == len(experiments.IMPLICATE_PAIRS) + 2
    assert not report.has_violation


def test_shearer_oracle(cfg):
    report = experiments.check_shearer_oracle(cfg, 10)
    assert not report.has_violation
    assert report.results['max_error'] <= 1e-10


def test_transversal_avoid_rows_and_jobs(cfg):
    report = experiments.transversal_avoid(cfg, k=4, b=10, delta=2, sizes=(1, 3))
    assert [row['case'] for row in report.rows] == ["block l=1", "block l=3", "spread l=3"]
    parallel = experiments.transversal_avoid(cfg.model_copy(update={'jobs': 3}), k=4, b=10, delta=2, sizes=(1, 3))
    assert render_json(parallel) == render_json(report)


def test_latin_stein(cfg):
    report = experiments.latin_stein(cfg, n=10, sizes=(5,), ps=(0.5,))
    assert len(report.rows) == 1
    assert report.rows[0]['bound'] == pytest.approx(math.exp(-0.25))
    with pytest.raises(InvalidParameter):
        experiments.latin_stein(cfg, n=3, sizes=(10,))


def test_swapping_bounds(cfg):
    report = experiments.check_swapping_bounds(cfg, 200, 5)
    assert report.results['theta_prime'] == pytest.approx(0.2229, abs=1e-3)
    assert report.results['psi_checked'] + report.results['psi_skipped'] == 5
    names = {v.name: v for v in report.verdicts}
    assert names["theta prime"].ok
    assert names["psi prime <= psi"].ok
    assert names["perm disjunction"].ok
    # P(A ∨ A2) = 1/5 + 1/5 - 1/20
    assert report.results['perm_disjunction'] >= 0.35


def test_witness_dags(cfg):
    report = experiments.check_witness_dags(cfg, runs=20, tables=3000)
    assert report.results['failures'] == 0
    assert report.verdicts[0].ok
    assert len(report.rows) == 5
    for row in report.rows:
        assert 0 <= row['exact_low'] <= row['p_hat'] <= row['exact_high'] <= 1


def test_mt_event_bounds(cfg):
    report = experiments.check_mt_event_bounds(cfg, 2000)
    results = report.results
    assert results['singleton']['ordered'] == pytest.approx(27 / 41)
    assert results['singleton']['order_free'] == pytest.approx(55 / 82)
    assert results['theta'] == pytest.approx(14 / 41)
    assert results['disjunction']['ordered'] == pytest.approx(73 / 82)
    assert results['disjunction']['order_free'] == pytest.approx(147 / 164)
    assert results['best_order'] == [1, 0]
    assert results['non_terminated'] == 0
    assert len(report.rows) == 6
    assert not report.has_violation
    for row in report.rows:
        assert row['ci_low'] <= row['p_hat'] <= row['ci_high']


def test_bounds_disjunction(cfg, bit_chain):
    space, events = bit_chain
    members = [ScopedEvent.atomic([(3, 1)]), ScopedEvent.atomic([(0, 1)])]
    report = experiments.bounds_disjunction(cfg, space, events, members, best_order=True)
    assert report.results['given']['order'] == [0, 1]
    assert report.results['best']['order'] == [1, 0]
    assert report.results['best']['ordered'] == pytest.approx(145 / 164)
    assert 'best' not in experiments.bounds_disjunction(cfg, space, events, members, order=[1, 0]).results
    with pytest.raises(InvalidParameter):
        experiments.bounds_disjunction(cfg, space, events, members, order=[0, 0])


def test_ksat_independence_records_instance(cfg, small_cnf):
    report = experiments.ksat_independence(cfg, cnf=small_cnf, js=(1,))
    assert report.params['source'] == 'file'
    assert report.params['k'] == 4
    assert report.params['L'] == 1
    assert report.results['non_terminated'] == 0
    assert report.results['samples'] == cfg.trials


def test_verify_unknown_suite(cfg):
    with pytest.raises(InvalidParameter):
        experiments.verify(cfg, suite='bogus')


@pytest.mark.slow
def test_verify_core(cfg):
    report = experiments.verify(cfg, 'core')
    assert report.kind == 'verify'
    assert report.results['checks'] == len(report.verdicts)
    assert report.results['violations'] == []
