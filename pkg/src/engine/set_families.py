#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 集族构造与交叉相交性质

集合均为 [d] = {0, …, d-1} 的子集，用升序元组表示；族内允许重复。

- 网格族：[a] × [b] 上每列恰有一个 1 的 a×b 布尔矩阵（单元 (r, c) 编号为 r·b + c）
- 交集矩阵 Mat(𝒜, ℬ)_{A,B} = |A ∩ B|
- 0-单色矩形密度、{t}-交叉相交族的穷举（小 d）
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from engine.configurations import Configuration
from engine.errors import ConfigurationError, EnumerationCapError, PreconditionError
from engine.exact_linalg import RationalMatrix
from engine.geometry import Hyperplane, Point
from engine.search import max_monochromatic_rectangle
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")

# frankl_rodl_check 的穷举上限
FRANKL_RODL_MAX_D = 4

# grid_trend_table 中做枚举对照的最大族大小
TREND_ENUMERATION_LIMIT = 4096


# ============================================================================
# 数据类型
# ============================================================================
@dataclass(frozen=True)
class SetFamilyPair:
    """
    [d] 上的一对集族

    属性:
        ground_size: d
        family_A / family_B: 子集元组（每个子集为升序元组）
    """

    ground_size: int
    family_A: tuple
    family_B: tuple

    def __post_init__(self):
        fam_a = tuple(tuple(sorted(set(s))) for s in self.family_A)
        fam_b = tuple(tuple(sorted(set(s))) for s in self.family_B)
        if not fam_a or not fam_b:
            raise ConfigurationError("两个集族都必须非空")
        for s in fam_a + fam_b:
            if s and (s[0] < 0 or s[-1] >= self.ground_size):
                raise ConfigurationError(f"子集 {list(s)} 超出 [{self.ground_size}]")
        object.__setattr__(self, "family_A", fam_a)
        object.__setattr__(self, "family_B", fam_b)

    def indicator_arrays(self):
        """(|𝒜| × d, |ℬ| × d) 的 0/1 指示数组"""
        def indicators(family):
            out = np.zeros((len(family), self.ground_size), dtype=np.int64)
            for i, s in enumerate(family):
                out[i, list(s)] = 1
            return out
        return indicators(self.family_A), indicators(self.family_B)

    def intersection_sizes(self):
        """|𝒜| × |ℬ| 的 |A ∩ B| 数组"""
        ind_a, ind_b = self.indicator_arrays()
        return ind_a @ ind_b.T


@dataclass(frozen=True)
class GridFamilyParams:
    """网格族参数：d = a·b，α = a / b"""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise PreconditionError("网格族需要 a ≥ 1, b ≥ 1")

    @property
    def alpha(self):
        return Fraction(self.a, self.b)

    @property
    def d(self):
        return self.a * self.b


# ============================================================================
# 构造
# ============================================================================
def grid_family(params: GridFamilyParams) -> SetFamilyPair:
    """
    𝒜 = ℬ = 每列恰有一个 1 的 a×b 布尔矩阵，共 a^b 个，每个大小为 b

    异常:
        EnumerationCapError: a^b 超过 enumeration_cap
    """
    a, b = params.a, params.b
    total = a ** b
    cap = get_setting("enumeration_cap")
    if total > cap:
        raise EnumerationCapError(f"网格族大小 {total} 超过枚举上限 {cap}")
    family = tuple(tuple(sorted(r * b + c for c, r in enumerate(choice)))
                   for choice in itertools.product(range(a), repeat=b))
    return SetFamilyPair(params.d, family, family)


def random_sparse_family(d: int, set_size: int, count: int, seed=None) -> tuple:
    """
    随机稀疏集族：count 个 [d] 中大小为 set_size 的均匀随机子集（可重复）

    只用于测量，不保证任何密度性质。
    """
    if not 0 <= set_size <= d or count < 1:
        raise PreconditionError("需要 0 ≤ set_size ≤ d 且 count ≥ 1")
    seed = get_setting("default_seed") if seed is None else seed
    rng = np.random.default_rng(seed)
    return tuple(tuple(sorted(int(x) for x in rng.choice(d, size=set_size, replace=False)))
                 for _ in range(count))


def family_configuration(fp: SetFamilyPair) -> Configuration:
    """
    集族的几何视图：A 为 {0,1}^d 中的点，B 为法向量 1_B、偏移 0 的超平面

    异常:
        ConfigurationError: ℬ 含空集或重复集合（对应非法 / 重复超平面）
    """
    if any(not s for s in fp.family_B):
        raise ConfigurationError("ℬ 中的空集不对应超平面")
    d = fp.ground_size
    points = tuple(Point(tuple(1 if i in s else 0 for i in range(d))) for s in fp.family_A)
    hyperplanes = tuple(Hyperplane(tuple(1 if i in s else 0 for i in range(d)), 0) for s in fp.family_B)
    return Configuration(d, points, hyperplanes)


# ============================================================================
# 交叉相交统计
# ============================================================================
def cross_disjoint_epsilon(fp: SetFamilyPair) -> Fraction:
    """均匀随机 (A, B) 相交的概率 Pr[A ∩ B ≠ ∅]"""
    sizes = fp.intersection_sizes()
    return Fraction(int(np.count_nonzero(sizes)), sizes.size)


def disjoint_fraction(fp: SetFamilyPair) -> Fraction:
    """均匀随机 (A, B) 不交的概率（网格族即 ((a-1)/a)^b）"""
    return 1 - cross_disjoint_epsilon(fp)


def grid_delta_formula(a: int, b: int) -> Fraction:
    return Fraction(a - 1, a) ** b


def cross_intersecting_profile(fp: SetFamilyPair) -> tuple:
    """最小的 L：全部 |A ∩ B| 取值，升序"""
    return tuple(sorted(int(x) for x in np.unique(fp.intersection_sizes())))


def is_t_cross_intersecting(family_R, family_S, t: int) -> bool:
    """ℛ, 𝒮 是否 {t}-交叉相交"""
    sets_s = [set(s) for s in family_S]
    return all(len(set(r) & s) == t for r in family_R for s in sets_s)


def intersection_matrix(fp: SetFamilyPair) -> RationalMatrix:
    """Mat(𝒜, ℬ)"""
    sizes = fp.intersection_sizes()
    return RationalMatrix.from_rows(sizes.tolist(), cols=len(fp.family_B))


def max_zero_rectangle_density(fp: SetFamilyPair) -> Fraction:
    """
    最大的完全不交子族对密度 |ℛ||𝒮| / (|𝒜||ℬ|)

    异常:
        EnumerationCapError: 两族都超过 exact_search_cap
    """
    found = max_monochromatic_rectangle(intersection_matrix(fp), value=0)
    if found is None:
        return Fraction(0)
    rect, _ = found
    return Fraction(rect.size, len(fp.family_A) * len(fp.family_B))


def grid_zero_density_bound(params: GridFamilyParams) -> Fraction:
    """乘积结构下的上界 (a/2)^{2b} / a^{2b}；a 为偶数时即 2^{-2b}"""
    a, b = params.a, params.b
    best_column = max(s * (a - s) for s in range(a + 1))
    return Fraction(best_column ** b, a ** (2 * b))


def grid_trend_table(alpha, bs) -> list:
    """
    固定 α = a/b 时网格族不交比例随 b 的变化（趋于 e^{-1/α}）

    返回:
        [{"a", "b", "delta", "enumerated", "limit"}]；limit 只作显示，
        enumerated 只在 a^b 不超过 TREND_ENUMERATION_LIMIT 时计算
    """
    alpha = Fraction(alpha)
    limit = math.exp(-1 / float(alpha))
    rows = []
    for b in bs:
        a = alpha * b
        if a.denominator != 1 or a < 1:
            continue
        a = int(a)
        enumerated = None
        if a ** b <= TREND_ENUMERATION_LIMIT:
            enumerated = disjoint_fraction(grid_family(GridFamilyParams(a, b)))
        rows.append({"a": a, "b": b, "delta": grid_delta_formula(a, b),
                     "enumerated": enumerated, "limit": limit})
    return rows


# ============================================================================
# {t}-交叉相交族的穷举
# ============================================================================
@dataclass
class FranklRodlReport:
    """
    {t}-交叉相交族对的穷举结果

    属性:
        per_t: {t: (最大 |ℛ||𝒮|, ℛ, 𝒮)}
        max_product: 全部 t 上的最大值
        bound: 2^d
    """

    d: int
    per_t: dict
    max_product: int
    bound: int

    @property
    def passed(self):
        return self.max_product <= self.bound

    @property
    def attains_bound(self):
        return self.max_product == self.bound


def _best_pair_for_t(d, t):
    """
    对固定 t 穷举 ℛ（按子集编号递增加入），𝒮 由 ℛ 唯一确定为全部兼容集合
    """
    universe = 1 << d
    compat = []
    for x in range(universe):
        compat.append(sum(1 << y for y in range(universe) if (x & y).bit_count() == t))
    best = {"product": 0, "R": (), "S": 0}

    def visit(start, chosen, mask):
        for x in range(start, universe):
            new = mask & compat[x]
            if not new:
                continue
            chosen.append(x)
            width = new.bit_count()
            if len(chosen) * width > best["product"]:
                best.update(product=len(chosen) * width, R=tuple(chosen), S=new)
            if (len(chosen) + universe - x - 1) * width > best["product"]:
                visit(x + 1, chosen, new)
            chosen.pop()

    visit(0, [], (1 << universe) - 1)

    def as_set(x):
        return tuple(i for i in range(d) if x >> i & 1)

    family_r = tuple(as_set(x) for x in best["R"])
    family_s = tuple(as_set(y) for y in range(universe) if best["S"] >> y & 1)
    return best["product"], family_r, family_s


def frankl_rodl_check(d: int) -> FranklRodlReport:
    """
    对每个 t ∈ {0, …, d} 穷举 {t}-交叉相交的 ℛ, 𝒮 ⊆ 2^[d]，检验 |ℛ||𝒮| ≤ 2^d

    异常:
        EnumerationCapError: d > FRANKL_RODL_MAX_D
    """
    if d < 1:
        raise PreconditionError("需要 d ≥ 1")
    if d > FRANKL_RODL_MAX_D:
        raise EnumerationCapError(f"d = {d} 超过穷举上限 {FRANKL_RODL_MAX_D}")
    per_t = {t: _best_pair_for_t(d, t) for t in range(d + 1)}
    max_product = max(p for p, _, _ in per_t.values())
    report = FranklRodlReport(d, per_t, max_product, 2 ** d)
    _logger.info(f"{{t}}-交叉相交穷举 d={d}: 最大乘积 {max_product}, 上界 {2 ** d}")
    return report
