#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 路径工具

项目根 = src/ 的上一级；config.json、cache/、logs/ 都放在项目根下。
"""

import os
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[2]


def get_app_root() -> str:
    """项目根目录的绝对路径"""
    return str(PROJECT_ROOT)


def get_project_cache_dir() -> str:
    """
    结果缓存目录 <项目根>/cache/，不存在时创建

    返回:
        str: 目录绝对路径
    """
    cache_dir = PROJECT_ROOT / "cache"
    os.makedirs(cache_dir, exist_ok=True)
    return str(cache_dir)


def get_log_dir() -> str:
    """日志目录 <项目根>/logs/（由 main.setup_logging 按需创建）"""
    return str(PROJECT_ROOT / "logs")
