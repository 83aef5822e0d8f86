"""
FastAPI主应用 - lllforge 界计算服务
"""

import logging
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from core.config import config
from .bounds_api import router as bounds_router

# 配置日志
logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)

VERSION = "1.0.0"

# 创建FastAPI应用
app = FastAPI(
    title="lllforge 界计算服务",
    description="""
    ## lllforge - Lovász 局部引理工具箱的只读计算接口

    ### 接口
    - `/api/bounds/latin/table`: g(β) 数值表
    - `/api/bounds/transversal/avoidance`: 独立截线回避概率界
    - `/api/bounds/ksat/epsilon`: k-SAT 的 ε = e·L·2^{-k}
    - `/api/bounds/shearer`: 小依赖图上的 Shearer 测度

    蒙特卡洛实验通过命令行 `lllforge` 运行
    """,
    version=VERSION,
    docs_url="/docs",
    redoc_url="/redoc"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# 注册路由
app.include_router(
    bounds_router,
    prefix="/api/bounds",
    tags=["界计算"]
)


@app.get("/", summary="根路径")
async def root():
    """根路径信息"""
    return {
        "name": "lllforge",
        "version": VERSION,
        "description": "Lovász 局部引理：MT/Swapping 输出分布的界与验证",
        "features": [
            "Shearer测度",
            "簇展开判据",
            "k-SAT独立性",
            "独立截线",
            "拉丁截线"
        ],
        "docs_url": "/docs",
        "api_prefix": "/api/bounds"
    }


@app.get("/version", summary="版本信息")
async def get_version():
    """获取版本信息与当前配置"""
    return {
        "version": VERSION,
        "name": "lllforge",
        "report_schema": config.REPORT_SCHEMA,
        "python_version": "3.10+",
        "config": config.as_dict(),
    }


@app.on_event("startup")
async def startup_event():
    """应用启动事件"""
    logger.info("lllforge 界计算服务启动中...")
    logger.info(f"  - API端口: {config.API_PORT}")
    logger.info(f"  - 默认种子: {config.SEED}")
    logger.info(f"  - 枚举预算: {config.BUDGETS}")
    logger.info("系统启动完成")


@app.on_event("shutdown")
async def shutdown_event():
    """应用关闭事件"""
    logger.info("lllforge 界计算服务已关闭")
