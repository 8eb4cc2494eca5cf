# -*- coding: utf-8 -*-
"""ResultCache：命中、版本化键、LRU 淘汰与清除"""

import pytest

from utils.cache import ResultCache


@pytest.fixture
def cache(tmp_path):
    rc = ResultCache(db_path=str(tmp_path / "results.db"), max_entries=2)
    yield rc
    rc.close()


def test_miss_then_hit(cache):
    assert cache.get("verify", {"d": 5}, 1) is None
    cache.set("verify", {"d": 5}, 1, {"passed": True, "value": "1/2"})
    assert cache.get("verify", {"d": 5}, 1) == {"passed": True, "value": "1/2"}
    assert len(cache) == 1


def test_key_depends_on_every_part():
    base = ResultCache.make_key("verify", {"d": 5}, 1)
    assert base == ResultCache.make_key("verify", {"d": 5}, 1)
    assert base != ResultCache.make_key("verify", {"d": 5}, 2)
    assert base != ResultCache.make_key("verify", {"d": 10}, 1)
    assert base != ResultCache.make_key("reproduce", {"d": 5}, 1)


def test_lru_eviction_keeps_recently_read(cache):
    cache.set("a", {}, 0, 1)
    cache.set("b", {}, 0, 2)
    assert cache.get("a", {}, 0) == 1
    cache.set("c", {}, 0, 3)
    assert len(cache) == 2
    assert cache.get("b", {}, 0) is None
    assert cache.get("a", {}, 0) == 1
    assert cache.get("c", {}, 0) == 3


def test_clear(cache):
    cache.set("a", {}, 0, 1)
    cache.set("b", {}, 0, 2)
    assert cache.clear() == 2
    assert len(cache) == 0


def test_persists_across_connections(tmp_path):
    path = str(tmp_path / "results.db")
    first = ResultCache(db_path=path, max_entries=10)
    first.set("rs-exact", {"m": [[1]]}, None, {"edges": 2})
    first.close()
    second = ResultCache(db_path=path, max_entries=10)
    assert second.get("rs-exact", {"m": [[1]]}, None) == {"edges": 2}
    second.close()
