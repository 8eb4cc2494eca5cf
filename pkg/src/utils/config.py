#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 配置文件管理模块

本模块提供配置文件的读取功能，以及各类枚举上限、默认种子等参数的统一获取。

功能说明：
1. 加载配置 - 从 config.json 读取配置到字典（带内存缓存）
2. 参数获取 - get_setting() 按 运行时覆盖 > 配置文件 > 默认值 的顺序取值
3. 错误处理 - 文件不存在或格式错误时返回空字典，全部走默认值

配置文件格式（config.json）：
{
    "enumeration_cap": 10000000,
    "exact_search_cap": 20,
    "default_seed": 20240601,
    "workers": 1,
    "log_to_file": false
}

注意事项：
- 配置文件位于项目根目录（与 src/ 同级），可用 --config 指定其它路径
- 编码使用UTF-8
- 只读：运行时覆盖（--cap 等）不会写回文件
"""

# ============================================================================
# 标准库导入
# ============================================================================
import json           # JSON格式处理
import logging
import os             # 文件系统操作

from utils.paths import get_app_root

_logger = logging.getLogger("FlatRank")

# ============================================================================
# 配置常量
# ============================================================================
CONFIG_FILE = "config.json"

# 所有可配置项的默认值
DEFAULTS = {
    "enumeration_cap": 10_000_000,          # 候选平面 / 子集枚举上限
    "exact_search_cap": 20,                 # 矩形穷举时较短边的上限
    "kronecker_cap": 1_000_000,             # Kronecker 幂的下标空间上限
    "bit_length_cap": 4096,                 # 消元中分子/分母的最大位长
    "hypercube_cap": 40,                    # 超立方体计数的最大维数 ℓ
    "pairwise_incidence_cap": 20_000_000,   # 逐对关联计数允许的 n·m 上限
    "recursion_depth_cap": 64,              # 约化 / 协议递归深度上限
    "default_seed": 20240601,
    "workers": 1,
    "log_to_file": False,
    "result_cache_enabled": False,
    "result_cache_max_entries": 500,
}

# 内存缓存：避免频繁读磁盘
_cached_config = None
_config_path = None

# 运行时覆盖（CLI 参数，如 --cap），不落盘
_overrides = {}


def get_config_path():
    """返回当前使用的配置文件绝对路径"""
    if _config_path is not None:
        return _config_path
    return os.path.join(get_app_root(), CONFIG_FILE)


def set_config_path(path):
    """
    切换配置文件路径（--config），并清空内存缓存

    参数:
        path: 配置文件路径，None 表示恢复默认位置
    """
    global _config_path
    _config_path = os.path.abspath(path) if path else None
    invalidate_config_cache()


# ============================================================================
# 加载配置
# ============================================================================
def load_config():
    """
    加载配置文件

    返回:
        dict: 配置字典；文件缺失或损坏时返回空字典
    """
    global _cached_config
    if _cached_config is not None:
        return _cached_config

    path = get_config_path()
    if not os.path.exists(path):
        _cached_config = {}
        return _cached_config

    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        _cached_config = data if isinstance(data, dict) else {}
    except (OSError, json.JSONDecodeError) as e:
        _logger.warning(f"配置文件读取失败，使用默认值: {e}")
        _cached_config = {}
    return _cached_config


def invalidate_config_cache():
    """供外部修改 config.json 后手动刷新内存缓存"""
    global _cached_config
    _cached_config = None


# ============================================================================
# 参数获取
# ============================================================================
def get_setting(key):
    """
    读取单个配置项

    参数:
        key: DEFAULTS 中的键

    返回:
        运行时覆盖值 > 配置文件值 > 默认值

    异常:
        KeyError: 未知配置项
    """
    if key not in DEFAULTS:
        raise KeyError(f"未知配置项: {key}")
    if key in _overrides:
        return _overrides[key]
    return load_config().get(key, DEFAULTS[key])


def override_settings(**values):
    """设置本次运行的临时覆盖值（不写入 config.json）"""
    for key in values:
        if key not in DEFAULTS:
            raise KeyError(f"未知配置项: {key}")
    _overrides.update(values)


def clear_overrides():
    """清除全部运行时覆盖"""
    _overrides.clear()


# ============================================================================
# 跨进程传递
# ============================================================================
def settings_snapshot():
    """
    当前配置路径与运行时覆盖的快照（可 pickle）

    spawn / forkserver 启动的子进程会重新导入本模块，模块级状态丢失；
    run_chunked 把快照作为进程池 initializer 的参数传入子进程。
    """
    return _config_path, dict(_overrides)


def restore_settings(snapshot):
    """在子进程中还原 settings_snapshot() 的结果"""
    global _config_path
    path, overrides = snapshot
    _config_path = path
    invalidate_config_cache()
    _overrides.clear()
    _overrides.update(overrides)
