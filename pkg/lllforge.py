#!/usr/bin/env python3
"""
命令行启动脚本 - lllforge
"""

from harness.cli import cli

if __name__ == "__main__":
    cli()
