"""
API模块
"""

from .main import app
from .bounds_api import router as bounds_router

__all__ = [
    'app',
    'bounds_router'
]
