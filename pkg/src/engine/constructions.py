#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 格点构造及其精确校验

构造（d - 1 为完全平方数，r = √(d-1)）：
- ℋ: ⟨(a_1, …, a_{d-1}, -1), x⟩ = 0，a_i ∈ {0, 1}，共 2^{d-1} 个
- 𝒫: x_1..x_{d-1} ∈ {-1, 1}，x_d ∈ {-2r, …, 2r}
- 𝒰: x_1..x_{d-1} ∈ {-1, 1}，x_d ∈ {-(d-1), …, d-1}

第 idx 个超平面的 a 为 idx 的二进制展开（高位在前），点按 (x_1, …, x_d) 字典序排列。
点集与超平面集都按需生成，d 较大时只使用逐超平面的计数公式。

校验项：
1. I(𝒰, ℋ) = 2^{2d-2}
2. 平面 f 上 𝒰 的点数 ≤ 2^{dim f}
3. 包含 f 的 ℋ 中超平面数 ≤ 2^{d - dim f - 1}
4. I(𝒫, ℋ) ≥ (18/25)·I(𝒰, ℋ)
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, partial

import numpy as np

from engine.configurations import Configuration
from engine.errors import EnumerationCapError, PreconditionError
from engine.geometry import (
    Flat,
    Hyperplane,
    Point,
    count_cube_points_on_flat,
    flat_preimage_under_graph_map,
    hyperplane_contains_flat,
    intersect_flat_hyperplane,
)
from engine.search import rs_exact
from engine.workers import run_chunked
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")

# 1 - 2/e² ≈ 0.7293 的有理下界
DENSE_THRESHOLD = Fraction(18, 25)

UNIVERSE = "universe"
DENSE = "dense"


# ============================================================================
# LatticeConstruction
# ============================================================================
@dataclass(frozen=True)
class LatticeConstruction:
    """
    格点构造

    属性:
        d: 维数（d ≥ 2，d - 1 为完全平方数）
        root: √(d-1)
    """

    d: int
    root: int

    @property
    def m(self):
        return 2 ** (self.d - 1)

    def half_range(self, which):
        """x_d 的取值上界：𝒫 为 2√(d-1)，𝒰 为 d-1"""
        return 2 * self.root if which == DENSE else self.d - 1

    def size(self, which):
        """|𝒫| = 2^{d-1}(4√(d-1)+1)，|𝒰| = 2^{d-1}(2(d-1)+1)"""
        return self.m * (2 * self.half_range(which) + 1)

    @property
    def dense_in_universe(self):
        """𝒫 ⊆ 𝒰 ⇔ 2√(d-1) ≤ d-1"""
        return self.half_range(DENSE) <= self.half_range(UNIVERSE)

    def normal_bits(self, idx):
        """第 idx 个超平面的 (a_1, …, a_{d-1})"""
        return tuple((idx >> (self.d - 2 - i)) & 1 for i in range(self.d - 1))

    def hyperplane(self, idx) -> Hyperplane:
        return Hyperplane(self.normal_bits(idx) + (-1,), 0)

    @cached_property
    def normal_array(self):
        """m × d 整数法向量数组（未规范化，最后一列为 -1）"""
        bits = np.array(list(itertools.product((0, 1), repeat=self.d - 1)), dtype=np.int64)
        return np.hstack([bits.reshape(self.m, self.d - 1), -np.ones((self.m, 1), dtype=np.int64)])

    def point_array(self, which) -> np.ndarray:
        """
        点集的 numpy 数组（字典序）

        异常:
            EnumerationCapError: 点数超过 enumeration_cap
        """
        total = self.size(which)
        cap = get_setting("enumeration_cap")
        if total > cap:
            raise EnumerationCapError(f"格点数 {total} 超过枚举上限 {cap}")
        signs = np.array(list(itertools.product((-1, 1), repeat=self.d - 1)), dtype=np.int64)
        signs = signs.reshape(self.m, self.d - 1)
        r = self.half_range(which)
        last = np.arange(-r, r + 1, dtype=np.int64)
        head = np.repeat(signs, len(last), axis=0)
        tail = np.tile(last, self.m).reshape(-1, 1)
        return np.hstack([head, tail])

    def configuration(self, which) -> Configuration:
        """完整的 Configuration（只适合较小的 d）"""
        points = tuple(Point(tuple(int(x) for x in row)) for row in self.point_array(which))
        hyperplanes = tuple(self.hyperplane(i) for i in range(self.m))
        return Configuration(self.d, points, hyperplanes)


def lattice_construction(d: int) -> LatticeConstruction:
    """
    构造 d 维格点实例

    异常:
        PreconditionError: d < 2 或 d - 1 不是完全平方数
        EnumerationCapError: d - 1 超过 hypercube_cap
    """
    if d < 2:
        raise PreconditionError("格点构造需要 d ≥ 2")
    root = math.isqrt(d - 1)
    if root * root != d - 1:
        raise PreconditionError(f"d - 1 = {d - 1} 不是完全平方数")
    cap = get_setting("hypercube_cap")
    if d - 1 > cap:
        raise EnumerationCapError(f"d - 1 = {d - 1} 超过超立方体上限 {cap}")
    return LatticeConstruction(d, root)


# ============================================================================
# 关联计数
# ============================================================================
def _hits_for_weight(lc: LatticeConstruction, w: int, which) -> int:
    """
    权重为 w 的超平面上的点数

    x_d = Σ a_i x_i 只取决于 a 支撑上的 ±1：k 个 +1 时和为 2k - w；
    支撑外的 d-1-w 个坐标任意。
    """
    bound = lc.half_range(which)
    inside = sum(math.comb(w, k) for k in range(w + 1) if abs(2 * k - w) <= bound)
    return 2 ** (lc.d - 1 - w) * inside


def lattice_incidences_by_weight(lc: LatticeConstruction, which) -> int:
    """按超平面权重分组的计数公式"""
    n1 = lc.d - 1
    return sum(math.comb(n1, w) * _hits_for_weight(lc, w, which) for w in range(n1 + 1))


def lattice_incidences_pairwise(lc: LatticeConstruction, which) -> int:
    """
    逐对判定的关联数（numpy 整数运算）

    异常:
        EnumerationCapError: 规模超过 pairwise_incidence_cap 或 enumeration_cap
    """
    cap = get_setting("pairwise_incidence_cap")
    total = lc.size(which) * lc.m
    if total > cap:
        raise EnumerationCapError(f"逐对判定规模 {total} 超过上限 {cap}")
    points = lc.point_array(which)
    normals = lc.normal_array
    count = 0
    for start in range(0, len(points), 4096):
        count += int(np.count_nonzero(points[start:start + 4096] @ normals.T == 0))
    return count


def lattice_incidences(lc: LatticeConstruction, which=UNIVERSE, method="auto") -> int:
    """
    I(𝒰, ℋ) 或 I(𝒫, ℋ)

    参数:
        which: UNIVERSE 或 DENSE
        method: "formula" / "pairwise" / "auto"（规模允许时逐对判定，否则用公式）
    """
    if which not in (UNIVERSE, DENSE):
        raise PreconditionError(f"未知点集: {which}")
    if method == "formula":
        return lattice_incidences_by_weight(lc, which)
    if method == "pairwise":
        return lattice_incidences_pairwise(lc, which)
    if lc.size(which) * lc.m <= get_setting("pairwise_incidence_cap"):
        return lattice_incidences_pairwise(lc, which)
    return lattice_incidences_by_weight(lc, which)


# ============================================================================
# 平面上的点与包含平面的超平面
# ============================================================================
def universe_points_on_flat(lc: LatticeConstruction, f: Flat, host: int) -> int:
    """
    𝒰 中落在 f 上的点数

    f 位于 ℋ 的第 host 个超平面 h 内；y ↦ (y, ⟨a, y⟩) 把 {-1,1}^{d-1} 一一映到 𝒰 ∩ h，
    因此等于 f 在 ℝ^{d-1} 中原像上的 ±1 立方体点数。

    异常:
        PreconditionError: h 不包含 f
    """
    h = lc.hyperplane(host)
    if f.empty:
        return 0
    if not hyperplane_contains_flat(h, f):
        raise PreconditionError(f"超平面 {host} 不包含给定平面")
    return count_cube_points_on_flat(flat_preimage_under_graph_map(f, h), (-1, 1))


def hyperplanes_containing_flat(lc: LatticeConstruction, f: Flat) -> int:
    """
    ℋ 中包含 f 的超平面数

    (a, -1) 须过 f 的特解且与方向空间正交，即 a ∈ {0,1}^{d-1} 满足一组线性方程
    Σ a_i v_i = v_d（v 取特解与各方向向量），于是化为 {0,1} 立方体计数。
    """
    if f.empty:
        raise PreconditionError("空平面的包含关系没有意义")
    vectors = [f.particular_point().coords] + f.direction_basis()
    return count_cube_points_on_flat(Flat.from_system(vectors, lc.d - 1), (0, 1))


def random_intersection_flat(lc: LatticeConstruction, rng):
    """
    随机取 1..d 个不同超平面求交

    返回:
        (Flat, 所取超平面下标元组)
    """
    count = int(rng.integers(1, lc.d + 1))
    picks = tuple(int(x) for x in rng.choice(lc.m, size=min(count, lc.m), replace=False))
    flat = Flat.whole_space(lc.d)
    for idx in picks:
        flat = intersect_flat_hyperplane(flat, lc.hyperplane(idx))
    return flat, picks


def _sample_flats(d, seed, sample_ids):
    """一块平面抽样：返回 (dim, 点数, 超平面数, 所取下标)"""
    lc = lattice_construction(d)
    out = []
    for s in sample_ids:
        rng = np.random.default_rng([seed, s])
        flat, picks = random_intersection_flat(lc, rng)
        out.append((flat.dim, universe_points_on_flat(lc, flat, picks[0]),
                    hyperplanes_containing_flat(lc, flat), picks))
    return out


# ============================================================================
# 校验报告
# ============================================================================
@dataclass
class ClaimResult:
    """单项校验结果"""

    name: str
    holds: bool
    value: object = None
    bound: object = None
    witness: object = None
    note: str = ""


@dataclass
class LatticeReport:
    """格点构造的校验报告"""

    d: int
    sizes: dict
    claims: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.holds for c in self.claims)

    def claim(self, name):
        return next(c for c in self.claims if c.name == name)


def verify_lattice_claims(lc: LatticeConstruction, samples=1000, seed=None,
                          exact_rs_max_d=5, workers=None) -> LatticeReport:
    """
    校验格点构造的各项性质

    参数:
        samples: 随机交平面的个数
        seed: 抽样种子（默认 default_seed）
        exact_rs_max_d: 不超过此维数时额外用 rs_exact 求 rs(𝒰, ℋ)
        workers: 平面抽样的进程数

    返回:
        LatticeReport；任一项不成立时 passed 为 False，对应项带反例
    """
    seed = get_setting("default_seed") if seed is None else seed
    report = LatticeReport(lc.d, {"m": lc.m, "P": lc.size(DENSE), "U": lc.size(UNIVERSE)})

    # 1. I(𝒰, ℋ)
    expected = 2 ** (2 * lc.d - 2)
    by_formula = lattice_incidences(lc, UNIVERSE, "formula")
    universe_inc = lattice_incidences(lc, UNIVERSE)
    report.claims.append(ClaimResult(
        "incidence_universe", universe_inc == expected == by_formula, universe_inc, expected,
        None if universe_inc == by_formula else {"formula": by_formula, "pairwise": universe_inc}))

    # 2 / 3. 随机交平面
    fn = partial(_sample_flats, lc.d, seed)
    results = run_chunked(fn, range(samples), workers, chunk_size=64)
    point_bad = next((r for r in results if r[1] > 2 ** r[0]), None)
    hyper_bad = next((r for r in results if r[2] > 2 ** (lc.d - r[0] - 1)), None)
    report.claims.append(ClaimResult(
        "points_on_flat", point_bad is None, max((r[1] for r in results), default=0), "2^dim",
        None if point_bad is None else {"dim": point_bad[0], "points": point_bad[1], "picks": point_bad[3]}))
    report.claims.append(ClaimResult(
        "hyperplanes_containing_flat", hyper_bad is None, max((r[2] for r in results), default=0),
        "2^(d-dim-1)",
        None if hyper_bad is None else {"dim": hyper_bad[0], "hyperplanes": hyper_bad[2], "picks": hyper_bad[3]}))

    # 4. I(𝒫, ℋ) ≥ (18/25) I(𝒰, ℋ)
    dense_inc = lattice_incidences(lc, DENSE)
    threshold = DENSE_THRESHOLD * universe_inc
    report.claims.append(ClaimResult(
        "incidence_dense", dense_inc >= threshold, dense_inc, threshold,
        None if dense_inc >= threshold else {"ratio": Fraction(dense_inc, universe_inc)}))

    # 𝒫 ⊆ 𝒰 只在 d ≥ 5 时断言
    if lc.d >= 5:
        report.claims.append(ClaimResult("dense_in_universe", lc.dense_in_universe))
    else:
        _logger.warning(f"d = {lc.d} < 5：𝒫 ⊆ 𝒰 不成立也不作断言，仅标记")
        report.claims.append(ClaimResult("dense_in_universe", True, lc.dense_in_universe,
                                         note="d < 5，未断言"))

    if lc.d <= exact_rs_max_d:
        bic = rs_exact(lc.configuration(UNIVERSE))
        bound = 2 ** (lc.d - 1)
        report.claims.append(ClaimResult("rs_universe", bic.edges <= bound, bic.edges, bound,
                                         None if bic.edges <= bound else bic))

    _logger.info(f"格点校验 d={lc.d}: {'通过' if report.passed else '失败'}")
    return report
