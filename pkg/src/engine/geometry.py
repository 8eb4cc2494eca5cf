#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 点、超平面与仿射平面

本模块提供 ℝ^d 中点、超平面、仿射平面（flat）的精确谓词：
关联判定、平面与超平面求交、包含关系、仿射包、超立方体格点计数。

表示约定：
- 超平面 ⟨a, x⟩ = b 规范化为「法向量第一个非零坐标为 1」，平行判定即语法相等
- 平面用约束系统表示：增广矩阵 (A | b) 的简化行阶梯形，同一解集的表示唯一，
  因此平面相等即字段相等
- 空平面是合法值（dim = -1），不是异常
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from operator import mul

from engine.errors import (
    DimensionMismatchError,
    EnumerationCapError,
    PreconditionError,
    VerificationError,
)
from engine.exact_linalg import ZERO, reduced_echelon_rows, to_rational
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")


def _lcm_of_denominators(values):
    return math.lcm(1, *(Fraction(x).denominator for x in values))


def scaled_integers(values):
    """把有理向量整体放大为整数向量，返回 (整数元组, 放大倍数)"""
    scale = _lcm_of_denominators(values)
    return tuple(int(x * scale) for x in values), scale


# ============================================================================
# Point / Hyperplane
# ============================================================================
@dataclass(frozen=True)
class Point:
    """ℝ^d 中的点，坐标为精确有理数"""

    coords: tuple

    def __post_init__(self):
        coords = tuple(to_rational(x) for x in self.coords)
        if not coords:
            raise PreconditionError("点的维数必须 ≥ 1")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self):
        return len(self.coords)

    @cached_property
    def integer_form(self):
        """(整数坐标, 公分母)：p = 整数坐标 / 公分母"""
        return scaled_integers(self.coords)


@dataclass(frozen=True)
class Hyperplane:
    """
    超平面 ⟨normal, x⟩ = offset

    构造时自动规范化：法向量第一个非零坐标缩放为 1（offset 同比缩放）
    """

    normal: tuple
    offset: Fraction = ZERO

    def __post_init__(self):
        normal = tuple(to_rational(x) for x in self.normal)
        offset = to_rational(self.offset)
        lead = next((x for x in normal if x != 0), None)
        if lead is None:
            raise PreconditionError("超平面法向量不能为零向量")
        object.__setattr__(self, "normal", tuple(x / lead for x in normal))
        object.__setattr__(self, "offset", offset / lead)

    @property
    def dim(self):
        return len(self.normal)

    @cached_property
    def integer_form(self):
        """(整数法向量, 整数偏移)，与原方程同解"""
        ints, _ = scaled_integers(self.normal + (self.offset,))
        return ints[:-1], ints[-1]

    def equation_row(self):
        """增广行 (a_1, …, a_d, b)"""
        return self.normal + (self.offset,)


def _check_dim(a, b, what="维数"):
    if a != b:
        raise DimensionMismatchError(f"{what}不一致: {a} vs {b}")


def incident(p: Point, h: Hyperplane) -> bool:
    """
    点是否落在超平面上（⟨normal, p⟩ == offset，精确整数判定）

    异常:
        DimensionMismatchError: 维数不一致
    """
    _check_dim(p.dim, h.dim)
    p_ints, p_den = p.integer_form
    a_ints, b_int = h.integer_form
    return sum(map(mul, a_ints, p_ints)) == b_int * p_den


# ============================================================================
# Flat
# ============================================================================
@dataclass(frozen=True)
class Flat:
    """
    仿射平面：增广约束系统 (A | b) 的简化行阶梯形的解集

    属性:
        ambient_dim: 环境维数 d
        rows: 规范行（每行长度 d + 1），空平面时为 ()
        empty: 是否为空集
    """

    ambient_dim: int
    rows: tuple = ()
    empty: bool = False

    @classmethod
    def from_system(cls, rows, ambient_dim):
        """
        由任意增广约束行构造规范平面

        参数:
            rows: 可迭代的 (a_1, …, a_d, b) 行
            ambient_dim: d
        """
        rows = [tuple(to_rational(x) for x in r) for r in rows]
        for r in rows:
            _check_dim(len(r), ambient_dim + 1, "约束行长度")
        reduced, pivots = reduced_echelon_rows(rows, ambient_dim + 1)
        if pivots and pivots[-1] == ambient_dim:
            return cls.empty_flat(ambient_dim)
        return cls(ambient_dim, tuple(tuple(r) for r in reduced))

    @classmethod
    def whole_space(cls, ambient_dim):
        if ambient_dim < 1:
            raise PreconditionError("环境维数必须 ≥ 1")
        return cls(ambient_dim)

    @classmethod
    def empty_flat(cls, ambient_dim):
        return cls(ambient_dim, (), True)

    @property
    def dim(self):
        """j = d - rank(A)；空平面返回 -1"""
        if self.empty:
            return -1
        return self.ambient_dim - len(self.rows)

    @cached_property
    def pivots(self):
        return tuple(next(k for k, x in enumerate(r) if x != 0) for r in self.rows)

    @cached_property
    def integer_rows(self):
        """每行放大为整数：((a_1..a_d), b)"""
        out = []
        for r in self.rows:
            ints, _ = scaled_integers(r)
            out.append((ints[:-1], ints[-1]))
        return tuple(out)

    def sort_key(self):
        """确定性的字典序键（用于并列打破）"""
        return (self.empty, self.rows)

    def particular_point(self):
        """自由变量取 0 得到的特解；空平面返回 None"""
        if self.empty:
            return None
        coords = [ZERO] * self.ambient_dim
        for row, pc in zip(self.rows, self.pivots):
            coords[pc] = row[-1]
        return Point(tuple(coords))

    def direction_basis(self):
        """方向空间（A 的零空间）的一组基；空平面返回 []"""
        if self.empty:
            return []
        pivot_set = set(self.pivots)
        basis = []
        for free in range(self.ambient_dim):
            if free in pivot_set:
                continue
            vec = [ZERO] * self.ambient_dim
            vec[free] = Fraction(1)
            for row, pc in zip(self.rows, self.pivots):
                vec[pc] = -row[free]
            basis.append(tuple(vec))
        return basis

    def residual(self, row):
        """把增广行对本系统约化后的余项（本系统蕴含该方程 ⇔ 余项为零）"""
        residual = list(row)
        for r, pc in zip(self.rows, self.pivots):
            factor = residual[pc]
            if factor != 0:
                residual = [a - factor * b for a, b in zip(residual, r)]
        return residual


def flat_from_hyperplanes(hyperplanes, ambient_dim):
    """超平面族的交（空族返回全空间）"""
    flat = Flat.whole_space(ambient_dim)
    for h in hyperplanes:
        flat = intersect_flat_hyperplane(flat, h)
        if flat.empty:
            break
    return flat


def intersect_flat_hyperplane(f: Flat, h: Hyperplane) -> Flat:
    """
    平面与超平面求交

    结果只能是三种之一：f 本身（h 包含 f）、(j-1) 维平面、空集。
    空的 f 直接返回空平面。

    异常:
        DimensionMismatchError: 维数不一致
    """
    _check_dim(f.ambient_dim, h.dim)
    if f.empty:
        return f
    residual = f.residual(h.equation_row())
    lead_col = next((k for k, x in enumerate(residual) if x != 0), None)
    if lead_col is None:
        return f
    if lead_col == f.ambient_dim:
        return Flat.empty_flat(f.ambient_dim)

    inv = 1 / residual[lead_col]
    new_row = tuple(x * inv for x in residual)
    rows = []
    for r in f.rows:
        factor = r[lead_col]
        if factor != 0:
            r = tuple(a - factor * b for a, b in zip(r, new_row))
        rows.append(r)
    rows.append(new_row)
    rows.sort(key=lambda r: next(k for k, x in enumerate(r) if x != 0))
    result = Flat(f.ambient_dim, tuple(rows))
    if result.dim != f.dim - 1:
        raise VerificationError("求交后维数未按预期减一", witness={"before": f.dim, "after": result.dim})
    return result


def flat_contains_point(f: Flat, p: Point) -> bool:
    """点是否属于平面（空平面恒为 False）"""
    _check_dim(f.ambient_dim, p.dim)
    if f.empty:
        return False
    p_ints, p_den = p.integer_form
    return all(sum(map(mul, a, p_ints)) == b * p_den for a, b in f.integer_rows)


def hyperplane_contains_flat(h: Hyperplane, f: Flat) -> bool:
    """
    超平面是否包含整个平面（h 的方程是 f 约束行的有理组合）

    异常:
        DimensionMismatchError: 维数不一致
        PreconditionError: f 为空
    """
    _check_dim(f.ambient_dim, h.dim)
    if f.empty:
        raise PreconditionError("空平面的包含关系没有意义")
    return all(x == 0 for x in f.residual(h.equation_row()))


def affine_hull(points) -> Flat:
    """
    点集的仿射包：包含全部点的最小平面

    约束由差向量矩阵的零空间给出：对零空间基向量 a，方程为 ⟨a, x⟩ = ⟨a, p_0⟩

    异常:
        PreconditionError: 空列表
        DimensionMismatchError: 维数不统一
    """
    points = list(points)
    if not points:
        raise PreconditionError("仿射包需要至少一个点")
    d = points[0].dim
    for p in points:
        _check_dim(p.dim, d)
    base = points[0].coords
    diffs = [tuple(a - b for a, b in zip(p.coords, base)) for p in points[1:]]
    # 差向量张成的线性空间，其正交补即约束法向量
    span = Flat.from_system([diff + (ZERO,) for diff in diffs], d) if diffs else Flat.whole_space(d)
    normals = span.direction_basis()
    system = [a + (sum(map(mul, a, base), ZERO),) for a in normals]
    return Flat.from_system(system, d)


def flat_preimage_under_graph_map(f: Flat, h: Hyperplane) -> Flat:
    """
    把位于 h 内的平面拉回 ℝ^{d-1}

    h 的最后一个法向坐标必须非零，于是 y ↦ (y, x_d(y)) 是 ℝ^{d-1} 到 h 的同构，
    其中 x_d(y) = (offset - Σ_{i<d} a_i y_i) / a_d。返回 f 在该同构下的原像。

    异常:
        PreconditionError: h 的最后一个法向坐标为零，或 d < 2
    """
    _check_dim(f.ambient_dim, h.dim)
    d = f.ambient_dim
    if d < 2 or h.normal[-1] == 0:
        raise PreconditionError("只能沿最后一个坐标非零的超平面拉回")
    if f.empty:
        return Flat.empty_flat(d - 1)
    a_last = h.normal[-1]
    slope = [-a / a_last for a in h.normal[:-1]]
    shift = h.offset / a_last
    system = []
    for r in f.rows:
        alpha_d = r[d - 1]
        coeffs = [r[i] + alpha_d * slope[i] for i in range(d - 1)]
        system.append(tuple(coeffs) + (r[d] - alpha_d * shift,))
    return Flat.from_system(system, d - 1)


# ============================================================================
# 超立方体格点计数
# ============================================================================
def count_cube_points_on_flat(f: Flat, values=(-1, 1)) -> int:
    """
    统计两值立方体 {lo, hi}^ℓ 中落在平面 f 上的点数

    按坐标逐一拆分（x_1 = lo 或 hi 各得一个子立方体），对约束的剩余右端做记忆化，
    并用剩余坐标可达的取值区间剪枝。

    参数:
        f: ℝ^ℓ 中的平面
        values: 两个整数取值

    异常:
        EnumerationCapError: ℓ 超过 hypercube_cap
    """
    ell = f.ambient_dim
    cap = get_setting("hypercube_cap")
    if ell > cap:
        raise EnumerationCapError(f"超立方体维数 {ell} 超过上限 {cap}")
    if f.empty:
        return 0
    lo, hi = (int(v) for v in values)
    rows = f.integer_rows
    if not rows:
        return 2 ** ell

    # 剩余坐标 k.. 的取值范围
    suffix_min = [[0] * (ell + 1) for _ in rows]
    suffix_max = [[0] * (ell + 1) for _ in rows]
    for r, (coeffs, _) in enumerate(rows):
        for k in range(ell - 1, -1, -1):
            a = coeffs[k]
            suffix_min[r][k] = suffix_min[r][k + 1] + min(a * lo, a * hi)
            suffix_max[r][k] = suffix_max[r][k + 1] + max(a * lo, a * hi)

    states = {tuple(b for _, b in rows): 1}
    free = 0
    for k in range(ell):
        column = [coeffs[k] for coeffs, _ in rows]
        if not any(column):
            free += 1
            continue
        nxt = defaultdict(int)
        for residual, count in states.items():
            for v in (lo, hi):
                cand = tuple(res - a * v for res, a in zip(residual, column))
                if all(suffix_min[r][k + 1] <= cand[r] <= suffix_max[r][k + 1] for r in range(len(rows))):
                    nxt[cand] += count
        states = nxt
        if not states:
            return 0
    return states.get(tuple(0 for _ in rows), 0) * 2 ** free


def count_hypercube_points_on_flat(f: Flat, ell: int) -> int:
    """
    {-1, 1}^ℓ 中落在 f 上的点数（对 j 维平面恒 ≤ 2^j）

    异常:
        DimensionMismatchError: f 的环境维数不是 ℓ
        EnumerationCapError: ℓ 超过 hypercube_cap
    """
    _check_dim(f.ambient_dim, ell, "环境维数与 ℓ")
    return count_cube_points_on_flat(f, (-1, 1))
