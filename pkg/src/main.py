#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 主程序入口

点–超平面配置与低秩可列矩阵的精确计算工具。
本文件负责初始化日志与异常钩子、配置模块搜索路径，然后把命令行交给 cli.app.run()。
"""

import sys
import os
import logging
import traceback
from datetime import datetime
from pathlib import Path

# ============================================================================
# 模块路径配置
# ============================================================================
# 把 src/ 加入搜索路径，engine / utils / cli 都按顶层包导入
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from utils.config import get_setting  # noqa: E402
from utils.paths import get_log_dir  # noqa: E402

# ============================================================================
# 日志系统配置
# ============================================================================
# stdout 只写 RunReport，日志一律走 stderr；
# log_to_file 打开时每次运行另写一个带时间戳的日志文件，只保留最近 MAX_LOG_FILES 个
# ============================================================================
LOG_DIR = Path(get_log_dir())
MAX_LOG_FILES = 10


def _rotate_logs():
    """轮转清理旧日志文件，只保留最近 MAX_LOG_FILES 个"""
    if not LOG_DIR.exists():
        return
    log_files = sorted(LOG_DIR.glob("flatrank_*.log"), key=lambda f: f.stat().st_mtime)
    if len(log_files) > MAX_LOG_FILES:
        for f in log_files[:len(log_files) - MAX_LOG_FILES]:
            try:
                f.unlink()
            except OSError:
                pass


def setup_logging(log_to_file=None):
    """
    初始化 "FlatRank" logger

    参数:
        log_to_file: 是否写日志文件（None 时读取配置项 log_to_file）
    """
    logger = logging.getLogger("FlatRank")
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    ch = logging.StreamHandler(sys.stderr)
    ch.set_name("console")
    ch.setLevel(logging.INFO)
    ch.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    logger.addHandler(ch)

    if get_setting("log_to_file") if log_to_file is None else log_to_file:
        LOG_DIR.mkdir(exist_ok=True)
        log_file = LOG_DIR / f"flatrank_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
        fh = logging.FileHandler(log_file, encoding="utf-8")
        # 新日志创建之后再清理，严格保留最近 MAX_LOG_FILES 个
        _rotate_logs()
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        ))
        logger.addHandler(fh)

    return logger


def setup_exception_hook(logger):
    """未捕获的异常先以 CRITICAL 写入日志，再交给原始钩子打印"""
    original_hook = sys.excepthook

    def global_exception_handler(exc_type, exc_value, exc_tb):
        tb_str = "".join(traceback.format_exception(exc_type, exc_value, exc_tb))
        logger.critical(f"未捕获的异常:\n{tb_str}")
        original_hook(exc_type, exc_value, exc_tb)

    sys.excepthook = global_exception_handler


def main():
    """入口：返回 cli.app.run() 的退出码"""
    logger = setup_logging()
    setup_exception_hook(logger)
    logger.debug(f"Python: {sys.version}")
    logger.debug(f"工作目录: {os.getcwd()}")

    from cli.app import run
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
