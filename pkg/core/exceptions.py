"""
异常定义
"""

from typing import Any, FrozenSet, Optional


class LLLForgeError(Exception):
    """所有错误的基类"""


# ==================== 输入错误（CLI退出码2） ====================

class InputError(LLLForgeError, ValueError):
    """输入不合法"""


class ParseError(InputError):
    """文件解析错误"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"第 {line} 行: {message}"
        super().__init__(message)


class DuplicateLiteral(ParseError):
    """子句中同一变量出现两次"""


class OutOfRange(InputError):
    """参数超出允许范围"""


class SettingMismatch(InputError):
    """变量模型事件与排列模型事件混用"""


class NotSingleton(InputError):
    """事件不是 X(i) ∈ D 的形式"""


class InvalidParameter(InputError):
    """参数不满足前置条件"""


# ==================== 预算 ====================

class BudgetExceeded(LLLForgeError):
    """枚举规模超过预算"""


class ScopeTooLarge(BudgetExceeded):
    """事件作用域过大，无法穷举"""


# ==================== 判据 ====================

class CriterionError(LLLForgeError):
    """LLL判据不满足"""


class ShearerViolated(CriterionError):
    """Shearer判据不满足"""

    def __init__(self, independent_set: FrozenSet[int], measure: Any = None):
        self.independent_set = independent_set
        self.measure = measure
        super().__init__(f"Shearer判据不满足: Q({sorted(independent_set)}) <= 0")


class CriterionViolated(CriterionError):
    """对称LLL判据不满足"""


class SubcriticalBlockSize(CriterionError):
    """块大小 b < 4Δ"""


class SupercriticalColors(CriterionError):
    """颜色重数超过允许范围"""


# ==================== 运行期 ====================

class NoRoot(LLLForgeError):
    """方程在区间内无根"""


class RestartsExhausted(LLLForgeError):
    """重启次数用尽"""


class EventNotTrue(LLLForgeError):
    """重采样的事件在当前排列上不成立"""


class InvariantViolation(LLLForgeError, AssertionError):
    """运行结果违反硬性不变量"""
