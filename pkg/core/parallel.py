"""
并行试验 - 线程池执行按试验编号派生随机流的独立任务
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, TypeVar

from .config import config

logger = logging.getLogger(__name__)

T = TypeVar('T')


def run_trials(fn: Callable[[int], T], trials: int, jobs: Optional[int] = None) -> List[T]:
    """
    执行 fn(0..trials-1)

    Args:
        fn: 以试验编号为参数的函数，随机性只能来自该编号派生的流
        trials: 试验次数
        jobs: 并行线程数，默认取配置

    Returns:
        按试验编号排列的结果，与 jobs 无关
    """
    jobs = config.JOBS if jobs is None else jobs
    if jobs <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]

    results: List[Optional[T]] = [None] * trials
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        future_to_trial = {executor.submit(fn, t): t for t in range(trials)}
        for future in as_completed(future_to_trial):
            t = future_to_trial[future]
            try:
                results[t] = future.result()
            except Exception as e:
                logger.error(f"试验 {t} 失败: {e}")
                raise
    return results
