"""
配置管理
"""

import os
import json
from pathlib import Path
from typing import Optional, Dict, Any

try:
    from dotenv import load_dotenv
    DOTENV_AVAILABLE = True
except ImportError:
    DOTENV_AVAILABLE = False

class Config:
    """配置管理类"""

    def __init__(self):
        """初始化配置"""
        # 项目根目录
        self.PROJECT_ROOT = Path(__file__).parent.parent

        # 加载.env文件（如果存在且dotenv可用）
        if DOTENV_AVAILABLE:
            env_file = self.PROJECT_ROOT / '.env'
            if env_file.exists():
                load_dotenv(env_file)
            # 也尝试加载config.env（覆盖.env）
            config_env_file = self.PROJECT_ROOT / 'config.env'
            if config_env_file.exists():
                load_dotenv(config_env_file, override=True)

        # 随机种子与蒙特卡洛默认参数
        self.SEED = int(os.getenv('LLLFORGE_SEED', '0'))
        self.DEFAULT_TRIALS = int(os.getenv('LLLFORGE_TRIALS', '10000'))
        self.DEFAULT_LEVEL = float(os.getenv('LLLFORGE_LEVEL', '0.99'))
        self.JOBS = int(os.getenv('LLLFORGE_JOBS', '1'))

        # 算法截断配置
        self.DEFAULT_MAX_STEPS = int(os.getenv('LLLFORGE_MAX_STEPS', '1000000'))
        self.MAX_STEPS_FACTOR = float(os.getenv('LLLFORGE_MAX_STEPS_FACTOR', '1000'))
        self.MAX_RESTARTS = int(os.getenv('LLLFORGE_MAX_RESTARTS', '64'))

        # 枚举预算
        self.BUDGETS = self._load_budgets()

        # API配置
        self.API_HOST = os.getenv('API_HOST', '0.0.0.0')
        self.API_PORT = int(os.getenv('API_PORT', '8083'))

        # 日志配置
        self.LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

        # 报告格式版本
        self.REPORT_SCHEMA = "1"

    def _load_budgets(self) -> Dict[str, int]:
        """加载枚举预算"""
        budgets = {
            'scope': int(os.getenv('SCOPE_BUDGET', '24')),
            'independent_set': int(os.getenv('INDEPENDENT_SET_BUDGET', '30')),
            'shearer': int(os.getenv('SHEARER_BUDGET', '25')),
            'orderable': int(os.getenv('ORDERABLE_BUDGET', '12')),
            'implicate': int(os.getenv('IMPLICATE_BUDGET', '20')),
            'jwise_tuples': int(os.getenv('JWISE_TUPLE_BUDGET', '1000000')),
            'jwise_sample': int(os.getenv('JWISE_TUPLE_SAMPLE', '100000')),
            'disjunction_order': int(os.getenv('DISJUNCTION_ORDER_BUDGET', '8')),
            'perm_union': int(os.getenv('PERM_UNION_BUDGET', '20')),
            'stable_depth': int(os.getenv('STABLE_DEPTH_BUDGET', '10')),
        }

        # 从JSON覆盖（例如 {"scope": 20}）
        budgets_json = os.getenv('LLLFORGE_BUDGETS_JSON', '')
        if budgets_json:
            try:
                budgets.update({k: int(v) for k, v in json.loads(budgets_json).items()})
            except (json.JSONDecodeError, ValueError, AttributeError):
                pass

        return budgets

    @property
    def SCOPE_BUDGET(self) -> int:
        """单个事件作用域的最大变量数"""
        return self.BUDGETS['scope']

    @property
    def INDEPENDENT_SET_BUDGET(self) -> int:
        """独立集枚举的最大顶点数"""
        return self.BUDGETS['independent_set']

    @property
    def SHEARER_BUDGET(self) -> int:
        """Shearer测度计算的最大事件数"""
        return self.BUDGETS['shearer']

    @property
    def ORDERABLE_BUDGET(self) -> int:
        """可排序性搜索的最大集合大小"""
        return self.BUDGETS['orderable']

    def get_budget(self, name: str, default: Optional[int] = None) -> Optional[int]:
        """获取指定名称的预算"""
        return self.BUDGETS.get(name, default)

    def as_dict(self) -> Dict[str, Any]:
        """导出当前配置（用于报告和版本接口）"""
        return {
            'seed': self.SEED,
            'trials': self.DEFAULT_TRIALS,
            'level': self.DEFAULT_LEVEL,
            'jobs': self.JOBS,
            'max_steps': self.DEFAULT_MAX_STEPS,
            'max_restarts': self.MAX_RESTARTS,
            'budgets': dict(self.BUDGETS),
        }

# 全局配置实例
config = Config()
