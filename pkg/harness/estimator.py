"""
蒙特卡洛估计 - Wilson 置信区间、界的一致性判定
"""

import logging
import math
from datetime import datetime
from typing import Callable, Optional, Sequence, Tuple, TypeVar

import numpy as np
from scipy.stats import beta, norm

from core.config import config
from core.exceptions import InvalidParameter
from core.models import Estimate, MeanEstimate, Verdict
from core.parallel import run_trials

logger = logging.getLogger(__name__)

R = TypeVar('R')


def z_value(level: float) -> float:
    """双侧置信水平对应的正态分位数"""
    if not 0 < level < 1:
        raise InvalidParameter(f"置信水平必须在 (0, 1) 内: {level}")
    return float(norm.ppf(1.0 - (1.0 - level) / 2.0))


def wilson_interval(successes: int, trials: int, level: Optional[float] = None) -> Tuple[float, float]:
    """Wilson score 区间"""
    if trials < 1 or not 0 <= successes <= trials:
        raise InvalidParameter(f"不合法的计数: {successes}/{trials}")
    level = config.DEFAULT_LEVEL if level is None else level
    z = z_value(level)
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return min(max(0.0, center - half), p), max(min(1.0, center + half), p)


def exact_interval(successes: int, trials: int, level: Optional[float] = None) -> Tuple[float, float]:
    """Clopper-Pearson 精确区间（双侧）"""
    if trials < 1 or not 0 <= successes <= trials:
        raise InvalidParameter(f"不合法的计数: {successes}/{trials}")
    level = config.DEFAULT_LEVEL if level is None else level
    if not 0 < level < 1:
        raise InvalidParameter(f"置信水平必须在 (0, 1) 内: {level}")
    alpha = 1.0 - level
    low = float(beta.ppf(alpha / 2, successes, trials - successes + 1)) if successes > 0 else 0.0
    high = float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes)) if successes < trials else 1.0
    return low, high


def estimate(runner: Callable[[int], R], event: Callable[[R], bool], trials: Optional[int] = None,
             seed: Optional[int] = None, jobs: Optional[int] = None, level: Optional[float] = None,
             count_nonterminated: bool = True) -> Estimate:
    """
    估计 P(event) 并给出 Wilson 区间

    Args:
        runner: 以试验编号为参数的运行函数，随机性只能来自 (seed, 试验编号) 派生的流
        event: 在运行结果上判断事件是否发生
        trials: 试验次数
        seed: 主种子（记录在结果中）
        jobs: 并行线程数
        level: 置信水平
        count_nonterminated: 为 True 时未终止的运行计为事件发生，否则从计数中排除

    Returns:
        Estimate，与 jobs 无关
    """
    trials = config.DEFAULT_TRIALS if trials is None else trials
    seed = config.SEED if seed is None else seed
    level = config.DEFAULT_LEVEL if level is None else level
    start_time = datetime.now()

    def _trial(t: int) -> Tuple[bool, bool]:
        result = runner(t)
        terminated = bool(getattr(result, 'terminated', True))
        return terminated, (not terminated) or bool(event(result))

    outcomes = run_trials(_trial, trials, jobs)
    non_terminated = sum(1 for terminated, _ in outcomes if not terminated)
    if count_nonterminated:
        counted = trials
        successes = sum(1 for _, hit in outcomes if hit)
    else:
        counted = trials - non_terminated
        successes = sum(1 for terminated, hit in outcomes if terminated and hit)
        if counted < 1:
            raise InvalidParameter("所有试验都未终止，无法估计")

    low, high = wilson_interval(successes, counted, level)
    took = (datetime.now() - start_time).total_seconds()
    if non_terminated:
        logger.warning(f"{non_terminated}/{trials} 次运行达到截断")
    logger.info(f"估计完成: {successes}/{counted} = {successes / counted:.6f}, CI=[{low:.6f}, {high:.6f}], 耗时 {took * 1000:.0f}ms")
    return Estimate(
        successes=successes,
        trials=counted,
        p_hat=successes / counted,
        ci_low=low,
        ci_high=high,
        level=level,
        seed=seed,
        non_terminated=non_terminated,
        wall_time=took,
    )


def verdict(est: Estimate, bound: float, name: str = "") -> Verdict:
    """置信下界超过理论上界时判为 violation"""
    status = 'violation' if est.ci_low > bound else 'consistent'
    if status == 'violation':
        logger.warning(f"{name or '界检查'} 不一致: ci_low={est.ci_low:.6f} > bound={bound:.6f}")
    return Verdict(name=name, status=status, bound=bound, ci_low=est.ci_low, margin=bound - est.ci_low)


def mean_estimate(values: Sequence[float]) -> MeanEstimate:
    """样本均值与标准误"""
    data = np.asarray(values, dtype=float)
    count = int(data.size)
    if count == 0:
        return MeanEstimate(mean=0.0, se=0.0, count=0)
    se = float(data.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return MeanEstimate(mean=float(data.mean()), se=se, count=count)


def mean_verdict(mean: MeanEstimate, bound: float, name: str = "", sigmas: float = 3.0) -> Verdict:
    """均值的判定：mean - sigmas·SE 超过上界时为 violation"""
    low = mean.mean - sigmas * mean.se
    status = 'violation' if low > bound else 'consistent'
    return Verdict(name=name, status=status, bound=bound, ci_low=low, margin=bound - low)


def lower_verdict(mean: MeanEstimate, bound: float, name: str = "", sigmas: float = 3.0) -> Verdict:
    """下界型结论：mean + sigmas·SE 仍低于下界时为 violation（ci_low 字段记录 mean + sigmas·SE）"""
    high = mean.mean + sigmas * mean.se
    status = 'violation' if high < bound else 'consistent'
    if status == 'violation':
        logger.warning(f"{name or '下界检查'} 不一致: {high:.6f} < bound={bound:.6f}")
    return Verdict(name=name, status=status, bound=bound, ci_low=high, margin=high - bound)


def exact_verdict(name: str, ok: bool, bound: float, value: float, margin: Optional[float] = None) -> Verdict:
    """确定性检查（精确等式、不等式、零失败）"""
    if not ok:
        logger.warning(f"{name} 不成立: value={value}, bound={bound}")
    return Verdict(
        name=name,
        status='consistent' if ok else 'violation',
        bound=bound,
        ci_low=value,
        margin=bound - value if margin is None else margin,
    )
