#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 结果缓存

把耗时子命令（rs-exact、verify、reproduce）的 results 持久化到 SQLite，
同样的输入再次运行时直接取回。

缓存设计：
- 键：MD5(命令 + 规范化输入 + 种子 + 版本号)
- 值：results 的 JSON 文本
- 存储：<应用数据根>/cache/results_cache.db（WAL 模式）
- 容量：result_cache_max_entries 条，按 updated_at 做 LRU 淘汰
"""

import hashlib
import json
import logging
import os
import sqlite3
import threading
import time
from datetime import datetime

from engine import __version__
from utils.config import get_setting
from utils.paths import get_project_cache_dir

_logger = logging.getLogger("FlatRank")

DB_FILENAME = "results_cache.db"

# 写入重试
_WRITE_RETRIES = 3
_WRITE_RETRY_INTERVAL = 0.1


def _now():
    # 微秒精度：同一秒内的多次写入也能排出先后
    return datetime.now().isoformat(timespec="microseconds")


class ResultCache:
    """SQLite 结果缓存"""

    def __init__(self, db_path=None, max_entries=None):
        """
        参数:
            db_path: 数据库路径（默认放在项目缓存目录）
            max_entries: LRU 上限（默认取配置项 result_cache_max_entries）
        """
        if db_path is None:
            db_path = os.path.join(get_project_cache_dir(), DB_FILENAME)
        self.db_path = db_path
        self.max_entries = max_entries or get_setting("result_cache_max_entries")
        self._lock = threading.RLock()

        self._conn = sqlite3.connect(db_path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA journal_mode=WAL;")
        self._conn.execute("PRAGMA synchronous=NORMAL;")
        self._conn.executescript("""
            CREATE TABLE IF NOT EXISTS results (
                cache_key   TEXT PRIMARY KEY,
                command     TEXT NOT NULL,
                results     TEXT NOT NULL,
                updated_at  TEXT NOT NULL
            );
            CREATE INDEX IF NOT EXISTS idx_updated_at ON results(updated_at);
        """)
        self._conn.commit()

    # ===================== 键 =====================

    @staticmethod
    def make_key(command, inputs, seed):
        """MD5(命令, 规范化输入, 种子, 版本号)"""
        raw = json.dumps({"command": command, "inputs": inputs, "seed": seed, "version": __version__},
                         sort_keys=True, ensure_ascii=False, default=str)
        return hashlib.md5(raw.encode("utf-8")).hexdigest()

    def _execute_with_retry(self, sql, params=()):
        for attempt in range(_WRITE_RETRIES):
            try:
                cursor = self._conn.execute(sql, params)
                self._conn.commit()
                return cursor
            except sqlite3.OperationalError as e:
                _logger.warning(f"SQLite 写入重试 ({attempt + 1}/{_WRITE_RETRIES}): {e}")
                if attempt < _WRITE_RETRIES - 1:
                    time.sleep(_WRITE_RETRY_INTERVAL)
                else:
                    raise

    # ===================== 读写 =====================

    def get(self, command, inputs, seed):
        """
        查询缓存

        返回:
            命中时返回 results（已解析的 JSON），未命中返回 None
        """
        with self._lock:
            key = self.make_key(command, inputs, seed)
            row = self._conn.execute("SELECT results FROM results WHERE cache_key = ?", (key,)).fetchone()
            if row is None:
                _logger.debug(f"缓存未命中: {command} (key={key[:8]}...)")
                return None
            self._execute_with_retry("UPDATE results SET updated_at = ? WHERE cache_key = ?", (_now(), key))
            _logger.info(f"缓存命中: {command} (key={key[:8]}...)")
            return json.loads(row["results"])

    def set(self, command, inputs, seed, results):
        """写入缓存并做 LRU 淘汰；results 必须可 JSON 序列化"""
        with self._lock:
            key = self.make_key(command, inputs, seed)
            self._execute_with_retry(
                "INSERT OR REPLACE INTO results (cache_key, command, results, updated_at) VALUES (?, ?, ?, ?)",
                (key, command, json.dumps(results, sort_keys=True, ensure_ascii=False), _now()))
            self._evict_lru()
            _logger.debug(f"缓存写入: {command} (key={key[:8]}...) total={len(self)}")

    def _evict_lru(self):
        """超出上限时按 updated_at 升序删除最旧条目"""
        current = len(self)
        if current <= self.max_entries:
            return
        excess = current - self.max_entries
        _logger.debug(f"LRU 淘汰：当前 {current} 条，上限 {self.max_entries}，删除 {excess} 条")
        self._execute_with_retry("""
            DELETE FROM results
            WHERE cache_key IN (
                SELECT cache_key FROM results ORDER BY updated_at ASC LIMIT ?
            )
        """, (excess,))

    # ===================== 管理 =====================

    def clear(self):
        """清除全部缓存，返回清除的条目数"""
        with self._lock:
            count = len(self)
            self._execute_with_retry("DELETE FROM results")
            _logger.info(f"已清除全部结果缓存 ({count} 条)")
            return count

    def __len__(self):
        with self._lock:
            row = self._conn.execute("SELECT COUNT(*) AS cnt FROM results").fetchone()
            return row["cnt"] if row else 0

    def close(self):
        """关闭连接（先 checkpoint）"""
        try:
            if self._conn:
                self._conn.execute("PRAGMA wal_checkpoint(TRUNCATE);")
                self._conn.close()
                self._conn = None
                _logger.debug("结果缓存连接已关闭（已 checkpoint）")
        except sqlite3.Error as e:
            _logger.warning(f"关闭结果缓存时出错: {e}")
