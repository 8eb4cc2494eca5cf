# -*- coding: utf-8 -*-
"""
FlatRank 测试公共设施

- 把 src/ 加入 sys.path（与 main.py 一致，engine / utils / cli 作为顶层包导入）
- 每个测试结束后清除运行时配置覆盖
- hypothesis 策略：小整数有理矩阵、低秩矩阵、小配置
"""

import os
import sys
from fractions import Fraction

import pytest
from hypothesis import strategies as st

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from engine.exact_linalg import RationalMatrix  # noqa: E402
from engine.geometry import Hyperplane, Point  # noqa: E402
from engine.search import Biclique  # noqa: E402
from utils.config import clear_overrides, set_config_path  # noqa: E402


@pytest.fixture(autouse=True)
def _isolated_settings(tmp_path):
    """每个测试使用不存在的配置文件（全部走默认值），结束后清除覆盖"""
    set_config_path(str(tmp_path / "config.json"))
    yield
    clear_overrides()
    set_config_path(None)


# ============================================================================
# hypothesis 策略
# ============================================================================
small_ints = st.integers(min_value=-4, max_value=4)
small_rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def rational_matrices(draw, max_rows=5, max_cols=5, elements=small_rationals):
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    entries = draw(st.lists(st.lists(elements, min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    return RationalMatrix.from_rows(entries, cols=cols)


@st.composite
def low_rank_matrices(draw, max_rank=3, max_rows=6, max_cols=6):
    """P @ Q，内维 ≤ max_rank，整数元素"""
    r = draw(st.integers(1, max_rank))
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    P = RationalMatrix.from_rows(draw(st.lists(st.lists(small_ints, min_size=r, max_size=r),
                                               min_size=rows, max_size=rows)), cols=r)
    Q = RationalMatrix.from_rows(draw(st.lists(st.lists(small_ints, min_size=cols, max_size=cols),
                                               min_size=r, max_size=r)), cols=cols)
    return P @ Q


@st.composite
def boolean_matrices(draw, max_rows=6, max_cols=6):
    return draw(rational_matrices(max_rows, max_cols, st.sampled_from([0, 1])))


@st.composite
def points(draw, dim, lo=-2, hi=2):
    return Point(tuple(draw(st.lists(st.integers(lo, hi), min_size=dim, max_size=dim))))


@st.composite
def hyperplanes(draw, dim):
    normal = draw(st.lists(st.integers(-2, 2), min_size=dim, max_size=dim).filter(any))
    return Hyperplane(tuple(normal), draw(st.integers(-2, 2)))


# ============================================================================
# 采样器辅助
# ============================================================================
def corrupt_first_success(run_trials):
    """包装 _run_trials：把第一个成功试验的双团换成包含全部超平面的非法见证"""
    done = []

    def wrapped(c, seed, thresholds, trial_ids):
        out = run_trials(c, seed, thresholds, trial_ids)
        for i, bic in enumerate(out):
            if bic is not None and not done:
                out[i] = Biclique(bic.flat, bic.point_indices, tuple(range(c.m)))
                done.append(i)
        return out

    return wrapped
