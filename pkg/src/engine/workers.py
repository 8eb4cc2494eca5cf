#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 分块任务执行

run_chunked: 把任务列表按块切分，workers > 1 时用进程池并发执行，
结果始终按输入顺序拼接，与调度顺序和进程数无关。
子进程启动时还原父进程的 --config 路径与 --cap 等运行时覆盖。
"""

import logging
from concurrent.futures import ProcessPoolExecutor

from utils.config import get_setting, restore_settings, settings_snapshot

_logger = logging.getLogger("FlatRank")

CHUNK_SIZE = 256   # 每块任务数


def _chunks(items, chunk_size):
    for start in range(0, len(items), chunk_size):
        yield items[start:start + chunk_size]


def run_chunked(fn, items, workers=None, chunk_size=CHUNK_SIZE):
    """
    分块执行 fn

    参数:
        fn: 可 pickle 的函数，接收一块任务（list），返回等长结果列表
        items: 任务列表
        workers: 进程数；None 时读取配置项 workers
        chunk_size: 每块任务数

    返回:
        list: 与 items 一一对应的结果
    """
    items = list(items)
    workers = get_setting("workers") if workers is None else workers
    chunk_size = max(1, chunk_size)
    chunks = list(_chunks(items, chunk_size))

    if workers <= 1 or len(chunks) <= 1:
        results = []
        for chunk in chunks:
            results.extend(fn(chunk))
        return results

    _logger.debug(f"进程池执行: {len(items)} 个任务, {len(chunks)} 块, {workers} 个进程")
    results = []
    with ProcessPoolExecutor(max_workers=workers, initializer=restore_settings,
                             initargs=(settings_snapshot(),)) as pool:
        # map 按提交顺序返回
        for part in pool.map(fn, chunks):
            results.extend(part)
    return results
