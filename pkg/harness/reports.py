"""
报告输出 - 规范化 JSON 与表格型 CSV
"""

import io
import json
import logging
from pathlib import Path
from typing import Optional

import pandas as pd

from core.exceptions import InvalidParameter
from core.models import Report

logger = logging.getLogger(__name__)


def render_json(report: Report) -> str:
    """键排序、缩进2；耗时等字段由模型排除，相同 (配置, 种子) 得到逐字节相同的输出"""
    data = report.model_dump(mode='json', by_alias=True)
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(report: Report) -> str:
    """只有带 rows 的报告可以输出 CSV"""
    if not report.rows:
        raise InvalidParameter(f"报告 {report.kind} 不是表格型，无法输出 CSV")
    frame = pd.json_normalize(report.rows)
    frame = frame[sorted(frame.columns)]
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_report(report: Report, fmt: str = 'json', out: Optional[str] = None) -> str:
    """
    写出报告

    Args:
        report: 报告
        fmt: json 或 csv
        out: 输出路径，为空时只返回文本

    Returns:
        渲染后的文本
    """
    if fmt == 'json':
        text = render_json(report)
    elif fmt == 'csv':
        text = render_csv(report)
    else:
        raise InvalidParameter(f"不支持的输出格式: {fmt}")

    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
        logger.info(f"报告已写入: {path}")
    return text
