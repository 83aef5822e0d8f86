"""
界计算API路由 - 只读的数值计算接口
"""

import logging
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, HTTPException, Query
from pydantic import ValidationError

from core.exceptions import CriterionError, InputError
from core.models import DepGraph, ExperimentConfig, ShearerRequest
from harness.experiments import bounds_epsilon, bounds_shearer, latin_table, transversal_bound

logger = logging.getLogger(__name__)

router = APIRouter()


def _bad_request(e: Exception) -> HTTPException:
    logger.error(f"请求参数错误: {e}")
    return HTTPException(status_code=400, detail=str(e))


@router.get("/latin/table", summary="g(β) 数值表")
async def latin_table_rows(
    beta: Optional[List[float]] = Query(None, description="β 取值，可重复；为空时使用 0.11..0.25"),
) -> Dict[str, Any]:
    """每个 β 的 g(β)、(1-e^{-β})/β 与 1/2 + ∛(27/(2048β))"""
    try:
        report = latin_table(ExperimentConfig(), beta)
    except (InputError, CriterionError) as e:
        raise _bad_request(e)
    return report.model_dump(mode='json', by_alias=True)


@router.get("/transversal/avoidance", summary="独立截线回避概率界")
async def transversal_avoidance(
    b: int = Query(..., ge=1, description="块大小"),
    delta: int = Query(..., ge=1, description="最大度 Δ"),
    ell: int = Query(..., ge=0, description="回避集合大小 ℓ（位于一个块内）"),
) -> Dict[str, Any]:
    try:
        report = transversal_bound(ExperimentConfig(), b, delta, ell)
    except (InputError, CriterionError) as e:
        raise _bad_request(e)
    return report.model_dump(mode='json', by_alias=True)


@router.get("/ksat/epsilon", summary="k-SAT 的 ε 与判据")
async def ksat_epsilon(
    k: int = Query(..., ge=1, description="最短子句长度"),
    L: int = Query(..., ge=0, description="最大出现次数"),
) -> Dict[str, Any]:
    try:
        report = bounds_epsilon(ExperimentConfig(), k, L)
    except (InputError, CriterionError) as e:
        raise _bad_request(e)
    return report.model_dump(mode='json', by_alias=True)


@router.post("/shearer", summary="Shearer 测度")
async def shearer(request: ShearerRequest) -> Dict[str, Any]:
    """Q(∅)、是否满足 Shearer 判据，满足时给出全部独立集上的 μ"""
    bad = [e for e in request.edges if not (0 <= e[0] < request.m and 0 <= e[1] < request.m)]
    if bad:
        raise _bad_request(ValueError(f"边的端点超出 [0, {request.m}): {bad}"))
    try:
        g = DepGraph.from_edges(request.m, request.edges, request.probs)
        report = bounds_shearer(ExperimentConfig(), g)
    except (ValidationError, InputError) as e:
        raise _bad_request(e)
    logger.info(f"Shearer 测度: m={g.m}, satisfied={report.results['satisfied']}")
    return report.model_dump(mode='json', by_alias=True)
