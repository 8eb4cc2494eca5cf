#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 点-超平面配置

本模块管理配置 (𝒫, ℋ) 及其矩阵对应：

1. 关联统计 - incidence_matrix / incidence_stats（numpy 批量精确整数判定）
2. 平行 k-划分 - find_parallel_partition / 校验 / 一般 k-划分校验
3. 矩阵侧 - listability / arity
4. Mat/Con 对应 - mat_of / con_of / offset_set
5. 双团 → 矩形 - rectangle_from_biclique / monochromatic_from_biclique / lift_rectangle

关联判定全部化为整数：点 p = P/den，超平面 ⟨a, x⟩ = b（a, b 为整数），
p 在超平面上 ⇔ ⟨a, P⟩ == b·den。模长安全时用 int64，否则退回 Python 整数的 object 数组。
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from operator import mul

import numpy as np

from engine.errors import (
    ConfigurationError,
    DimensionMismatchError,
    EnumerationCapError,
    InvalidWitnessError,
    PreconditionError,
)
from engine.exact_linalg import RationalMatrix, ZERO, factorize
from engine.geometry import Flat, Hyperplane, Point, scaled_integers
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")

# int64 安全上限（留出求和余量）
_INT64_SAFE = 2 ** 62

# 批量关联判定时每块的点数
_POINT_CHUNK = 4096


def _integer_array(rows, extra_bound=1):
    """
    整数二维列表 → numpy 数组；可能溢出 int64 时使用 object dtype

    参数:
        rows: 整数行列表
        extra_bound: 另一乘数的最大绝对值（用于估计乘积和的上界）
    """
    flat = [abs(x) for r in rows for x in r]
    width = len(rows[0]) if rows else 0
    bound = (max(flat, default=0) * max(extra_bound, 1)) * max(width, 1)
    dtype = np.int64 if bound < _INT64_SAFE else object
    arr = np.array(rows, dtype=dtype) if rows else np.zeros((0, width), dtype=np.int64)
    return arr


# ============================================================================
# Configuration
# ============================================================================
@dataclass(frozen=True)
class Configuration:
    """
    有限点集 + 有限超平面集（ℝ^dim 中）

    点允许重复（多重集），超平面按规范形式去重：重复即视为非法输入。

    异常:
        ConfigurationError: 点或超平面为空、出现重复超平面
        DimensionMismatchError: 维数不统一
    """

    dim: int
    points: tuple
    hyperplanes: tuple

    def __post_init__(self):
        points = tuple(p if isinstance(p, Point) else Point(p) for p in self.points)
        hyperplanes = tuple(self.hyperplanes)
        if not points or not hyperplanes:
            raise ConfigurationError("配置至少需要 1 个点和 1 个超平面")
        for p in points:
            if p.dim != self.dim:
                raise DimensionMismatchError(f"点维数 {p.dim} 与配置维数 {self.dim} 不一致")
        for h in hyperplanes:
            if h.dim != self.dim:
                raise DimensionMismatchError(f"超平面维数 {h.dim} 与配置维数 {self.dim} 不一致")
        seen = {}
        for idx, h in enumerate(hyperplanes):
            if h in seen:
                raise ConfigurationError(
                    f"超平面 {idx} 与 {seen[h]} 重复", witness={"indices": [seen[h], idx]})
            seen[h] = idx
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "hyperplanes", hyperplanes)

    @property
    def n(self):
        return len(self.points)

    @property
    def m(self):
        return len(self.hyperplanes)

    @cached_property
    def _point_arrays(self):
        forms = [p.integer_form for p in self.points]
        dens = [den for _, den in forms]
        hyper_bound = max((abs(x) for h in self.hyperplanes for x in h.integer_form[0]), default=1)
        coords = _integer_array([list(ints) for ints, _ in forms], hyper_bound)
        return coords, np.array(dens, dtype=coords.dtype)

    @cached_property
    def _point_bound(self):
        coords, dens = self._point_arrays
        return max(int(np.abs(coords).max()), int(np.abs(dens).max()))

    @cached_property
    def _hyperplane_arrays(self):
        forms = [h.integer_form for h in self.hyperplanes]
        point_bound = max((abs(x) for p in self.points for x in p.integer_form[0]), default=1)
        den_bound = max(p.integer_form[1] for p in self.points)
        normals = _integer_array([list(a) for a, _ in forms], point_bound)
        offsets = [b for _, b in forms]
        off_bound = max((abs(b) for b in offsets), default=0) * den_bound
        if off_bound >= _INT64_SAFE:
            normals = normals.astype(object)
        return normals, np.array(offsets, dtype=normals.dtype)

    def _arrays(self):
        coords, dens = self._point_arrays
        normals, offsets = self._hyperplane_arrays
        if coords.dtype != normals.dtype:
            coords, dens = coords.astype(object), dens.astype(object)
            normals, offsets = normals.astype(object), offsets.astype(object)
        return coords, dens, normals, offsets


@dataclass(frozen=True)
class IncidenceStats:
    """关联数 I(𝒫, ℋ) 与密度 ε = I / (n·m)"""

    incidences: int
    density: Fraction
    n: int = 0
    m: int = 0


@dataclass(frozen=True)
class Rectangle:
    """
    矩阵中的矩形：行下标集 × 列下标集（均为升序元组）

    属性:
        row_indices: 行下标
        col_indices: 列下标
    """

    row_indices: tuple
    col_indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "row_indices", tuple(sorted(set(self.row_indices))))
        object.__setattr__(self, "col_indices", tuple(sorted(set(self.col_indices))))

    @property
    def size(self):
        return len(self.row_indices) * len(self.col_indices)

    @property
    def is_nonempty(self):
        return bool(self.row_indices) and bool(self.col_indices)

    def cells(self):
        return ((i, j) for i in self.row_indices for j in self.col_indices)


@dataclass(frozen=True)
class ParallelPartition:
    """
    超平面的平行 k-划分

    属性:
        blocks: 每块的超平面下标元组
        block_size_bound: k
        block_normals: 每块的法向量（None 表示取块内首个超平面的规范法向量）
        block_columns: 每块对应的原矩阵列（仅 con_of 产出时存在）
    """

    blocks: tuple
    block_size_bound: int
    block_normals: tuple = None
    block_columns: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        if self.block_normals is not None:
            object.__setattr__(self, "block_normals",
                               tuple(tuple(Fraction(x) for x in a) for a in self.block_normals))
        if self.block_columns is not None:
            object.__setattr__(self, "block_columns", tuple(tuple(b) for b in self.block_columns))

    def normals(self, c: Configuration):
        """每块实际使用的法向量"""
        if self.block_normals is not None:
            return self.block_normals
        return tuple(c.hyperplanes[b[0]].normal for b in self.blocks)

    def block_of(self):
        """超平面下标 → 块下标"""
        return {h: j for j, block in enumerate(self.blocks) for h in block}


# ============================================================================
# 关联统计
# ============================================================================
def _incidence_chunks(c: Configuration):
    """逐块产出 (起始点下标, 布尔关联块)"""
    cap = get_setting("pairwise_incidence_cap")
    if c.n * c.m > cap:
        raise EnumerationCapError(f"逐对关联判定规模 {c.n}×{c.m} 超过上限 {cap}")
    coords, dens, normals, offsets = c._arrays()
    for start in range(0, c.n, _POINT_CHUNK):
        block = coords[start:start + _POINT_CHUNK]
        lhs = block @ normals.T
        rhs = np.outer(dens[start:start + _POINT_CHUNK], offsets)
        yield start, lhs == rhs


def incidence_matrix(c: Configuration) -> np.ndarray:
    """n × m 布尔关联矩阵"""
    out = np.zeros((c.n, c.m), dtype=bool)
    for start, block in _incidence_chunks(c):
        out[start:start + block.shape[0]] = block
    return out


def incidence_stats(c: Configuration) -> IncidenceStats:
    """
    精确关联数与密度（逐对判定）

    异常:
        EnumerationCapError: n·m 超过 pairwise_incidence_cap
    """
    total = 0
    for _, block in _incidence_chunks(c):
        total += int(np.count_nonzero(block))
    stats = IncidenceStats(total, Fraction(total, c.n * c.m), c.n, c.m)
    _logger.debug(f"关联统计: n={c.n}, m={c.m}, I={total}")
    return stats


def points_on_flat(c: Configuration, f: Flat, candidates=None) -> tuple:
    """
    平面上的点下标（升序）

    参数:
        candidates: 可选的候选点下标（如父平面上的点），只在其中判定
    """
    if f.ambient_dim != c.dim:
        raise DimensionMismatchError(f"平面维数 {f.ambient_dim} 与配置维数 {c.dim} 不一致")
    index = np.arange(c.n) if candidates is None else np.asarray(candidates, dtype=np.int64)
    if f.empty or index.size == 0:
        return ()
    if not f.rows:
        return tuple(int(i) for i in index)
    coords, dens = c._point_arrays
    row_bound = max(abs(x) for a, b in f.integer_rows for x in (*a, b))
    safe = row_bound * c._point_bound * (c.dim + 1) < _INT64_SAFE and coords.dtype != object
    dtype = np.int64 if safe else object
    lhs_rows = np.array([list(a) for a, _ in f.integer_rows], dtype=dtype)
    rhs = np.array([b for _, b in f.integer_rows], dtype=dtype)
    lhs = coords[index].astype(dtype) @ lhs_rows.T
    mask = np.all(lhs == np.outer(dens[index].astype(dtype), rhs), axis=1)
    return tuple(int(i) for i in index[mask])


def hyperplanes_containing(c: Configuration, f: Flat) -> tuple:
    """
    包含平面 f 的超平面下标（升序）

    h 包含非空 f ⇔ h 过 f 的特解，且 h 的法向量与 f 的方向空间正交

    异常:
        PreconditionError: f 为空
    """
    if f.ambient_dim != c.dim:
        raise DimensionMismatchError(f"平面维数 {f.ambient_dim} 与配置维数 {c.dim} 不一致")
    if f.empty:
        raise PreconditionError("空平面的包含关系没有意义")
    point = f.particular_point()
    p_ints, p_den = point.integer_form
    dirs = [scaled_integers(v)[0] for v in f.direction_basis()]
    hits = []
    for idx, h in enumerate(c.hyperplanes):
        a, b = h.integer_form
        if sum(map(mul, a, p_ints)) != b * p_den:
            continue
        if all(sum(map(mul, a, v)) == 0 for v in dirs):
            hits.append(idx)
    return tuple(hits)


# ============================================================================
# 划分
# ============================================================================
def _check_blocks_cover(blocks, m):
    flat = [h for block in blocks for h in block]
    if any(not block for block in blocks):
        raise ConfigurationError("划分中存在空块")
    if len(flat) != len(set(flat)) or set(flat) != set(range(m)):
        raise ConfigurationError("划分的块必须互不相交且覆盖全部超平面")


def validate_parallel_partition(c: Configuration, pp: ParallelPartition, incidences=None):
    """
    校验平行 k-划分，失败抛出 ConfigurationError（witness 指出违规的块 / 点）

    参数:
        incidences: 可选的预计算关联矩阵
    """
    _check_blocks_cover(pp.blocks, c.m)
    if pp.block_normals is not None and len(pp.block_normals) != len(pp.blocks):
        raise ConfigurationError("块法向量个数与块数不一致")
    if pp.block_columns is not None and len(pp.block_columns) != len(pp.blocks):
        raise ConfigurationError("块对应列个数与块数不一致")
    normals = pp.normals(c)
    for j, block in enumerate(pp.blocks):
        if len(block) > pp.block_size_bound:
            raise ConfigurationError(f"块 {j} 大小 {len(block)} 超过 k={pp.block_size_bound}",
                                     witness={"block": j})
        canonical = Hyperplane(normals[j]).normal
        for h in block:
            if c.hyperplanes[h].normal != canonical:
                raise ConfigurationError(f"块 {j} 中超平面 {h} 的法向量与块法向量不平行",
                                         witness={"block": j, "hyperplane": h})
    inc = incidence_matrix(c) if incidences is None else incidences
    for j, block in enumerate(pp.blocks):
        counts = inc[:, list(block)].sum(axis=1)
        bad = np.flatnonzero(counts != 1)
        if bad.size:
            raise ConfigurationError(
                f"点 {int(bad[0])} 在块 {j} 中的关联数为 {int(counts[bad[0]])}，应恰为 1",
                witness={"block": j, "point": int(bad[0])})


def is_valid_parallel_partition(c: Configuration, pp: ParallelPartition) -> bool:
    try:
        validate_parallel_partition(c, pp)
    except ConfigurationError:
        return False
    return True


def is_valid_k_partition(c: Configuration, blocks, k: int) -> bool:
    """
    一般（非平行）k-划分校验：块互不相交且覆盖 ℋ，每块 ≤ k，每块至少覆盖每个点一次
    """
    try:
        _check_blocks_cover(blocks, c.m)
    except ConfigurationError:
        return False
    if any(len(block) > k for block in blocks):
        return False
    inc = incidence_matrix(c)
    return all(bool(np.all(inc[:, list(block)].any(axis=1))) for block in blocks)


def find_parallel_partition(c: Configuration, k: int):
    """
    按规范法向量分组寻找平行 k-划分

    同组超平面两两平行且互不相交，每个点至多落在组内一个超平面上，
    因此覆盖全部点的块只能是整组：每组成为一块，组大小 ≤ k 且每个点恰好命中一次时成功。

    返回:
        ParallelPartition 或 None
    """
    if k < 1:
        raise PreconditionError("k 必须 ≥ 1")
    groups = OrderedDict()
    for idx, h in enumerate(c.hyperplanes):
        groups.setdefault(h.normal, []).append(idx)
    blocks = tuple(tuple(g) for g in groups.values())
    if any(len(b) > k for b in blocks):
        return None
    pp = ParallelPartition(blocks, k)
    if not is_valid_parallel_partition(c, pp):
        return None
    return pp


# ============================================================================
# 矩阵侧
# ============================================================================
def listability(M: RationalMatrix) -> int:
    """最小的 k 使 M 是 k-listable（各列不同取值数的最大值）"""
    return max((len(set(M.column(j))) for j in range(M.cols)), default=0)


def arity(M: RationalMatrix) -> int:
    """M 的不同取值总数"""
    return len(M.distinct_values())


# ============================================================================
# Mat / Con
# ============================================================================
def mat_of(c: Configuration, pp: ParallelPartition) -> RationalMatrix:
    """
    Mat(𝒫, ℋ)：n × 块数，(i, j) = ⟨p_i, a_j⟩，a_j 为块 j 的法向量

    异常:
        ConfigurationError: 划分不合法
    """
    validate_parallel_partition(c, pp)
    normals = pp.normals(c)
    rows = [[sum(map(mul, p.coords, a), ZERO) for a in normals] for p in c.points]
    return RationalMatrix.from_rows(rows, cols=len(normals))


def con_of(M: RationalMatrix):
    """
    Con(M)：由规范分解 M = PQ 构造配置与平行划分

    - 点为 P 的各行
    - 列 j 的超平面为 ⟨x, q_j⟩ = b，b 取遍 M 第 j 列的不同值
    - q_j 规范法向量相同的列合并为一块（互为倍数，超平面集相同），以首列 q_j 为块法向量
    - 零列（q_j = 0）丢弃

    返回:
        (Configuration, ParallelPartition)

    异常:
        PreconditionError: M 为空
        ConfigurationError: M 为零矩阵（秩 0，无法构成 ℝ^0 中的配置）
    """
    if M.is_empty:
        raise PreconditionError("con_of 需要非空矩阵")
    fac = factorize(M)
    d = fac.inner_dim
    if d == 0:
        raise ConfigurationError("零矩阵没有对应的配置（秩为 0）")

    points = tuple(Point(fac.left.row(i)) for i in range(M.rows))
    groups = OrderedDict()
    for j in range(M.cols):
        q = fac.right.column(j)
        if not any(q):
            continue
        groups.setdefault(Hyperplane(q).normal, []).append(j)

    hyperplanes, blocks, normals, columns = [], [], [], []
    for cols in groups.values():
        rep = cols[0]
        q = fac.right.column(rep)
        block = []
        for b in sorted(set(M.column(rep))):
            block.append(len(hyperplanes))
            hyperplanes.append(Hyperplane(q, b))
        blocks.append(tuple(block))
        normals.append(q)
        columns.append(tuple(cols))

    k = max(len(b) for b in blocks)
    config = Configuration(d, points, tuple(hyperplanes))
    pp = ParallelPartition(tuple(blocks), k, tuple(normals), tuple(columns))
    _logger.debug(f"Con(M): {M.rows}×{M.cols}, rank={d}, 超平面 {len(hyperplanes)} 个, 块 {len(blocks)} 个")
    return config, pp


def _offset_in_block_scale(h: Hyperplane, normal):
    lead = next(x for x in normal if x != 0)
    return h.offset * lead


def offset_set(c: Configuration, pp: ParallelPartition) -> set:
    """偏移集：以各块法向量为尺度时所有超平面的偏移值"""
    normals = pp.normals(c)
    return {_offset_in_block_scale(c.hyperplanes[h], normals[j])
            for j, block in enumerate(pp.blocks) for h in block}


# ============================================================================
# 双团 → 矩形
# ============================================================================
def _require_complete(c: Configuration, point_indices, hyperplane_indices):
    point_indices = sorted(point_indices)
    hyperplane_indices = sorted(hyperplane_indices)
    if not point_indices or not hyperplane_indices:
        raise InvalidWitnessError("双团两侧都必须非空",
                                  witness={"points": point_indices, "hyperplanes": hyperplane_indices})
    if point_indices[0] < 0 or point_indices[-1] >= c.n or hyperplane_indices[0] < 0 \
            or hyperplane_indices[-1] >= c.m:
        raise InvalidWitnessError("双团下标越界")
    coords, dens, normals, offsets = c._arrays()
    sub = coords[point_indices] @ normals[hyperplane_indices].T
    ok = sub == np.outer(dens[point_indices], offsets[hyperplane_indices])
    if not bool(np.all(ok)):
        i, j = (int(x) for x in np.argwhere(~ok)[0])
        raise InvalidWitnessError("双团中存在不关联的 (点, 超平面) 对",
                                  witness={"point": point_indices[i], "hyperplane": hyperplane_indices[j]})


def rectangle_from_biclique(c: Configuration, pp: ParallelPartition, bic) -> Rectangle:
    """
    双团 → Mat(𝒫, ℋ) 中的 1-listable 矩形

    行为双团的点，列为含有双团超平面的块；每列在这些行上取值恒为该超平面的偏移。

    异常:
        InvalidWitnessError: 双团不合法
    """
    _require_complete(c, bic.point_indices, bic.hyperplane_indices)
    block_of = pp.block_of()
    cols = {block_of[h] for h in bic.hyperplane_indices}
    return Rectangle(tuple(bic.point_indices), tuple(cols))


def monochromatic_from_biclique(c: Configuration, pp: ParallelPartition, bic):
    """
    在 rectangle_from_biclique 的结果上按偏移值拆分，取列数最多的一组（并列取较小值）

    返回:
        (Rectangle, value)：大小 ≥ 双团边数 / 不同偏移数
    """
    rect = rectangle_from_biclique(c, pp, bic)
    block_of = pp.block_of()
    normals = pp.normals(c)
    by_value = {}
    for h in bic.hyperplane_indices:
        j = block_of[h]
        by_value.setdefault(_offset_in_block_scale(c.hyperplanes[h], normals[j]), set()).add(j)
    value, cols = min(by_value.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    return Rectangle(rect.row_indices, tuple(cols)), value


def lift_rectangle(rect: Rectangle, pp: ParallelPartition) -> Rectangle:
    """
    把 Mat 的块列矩形还原到 Con(M) 的原矩阵列（同块各列互为倍数，1-listable 性保持）

    异常:
        PreconditionError: 划分不带原矩阵列信息
    """
    if pp.block_columns is None:
        raise PreconditionError("该划分不是由 con_of 产生的，无法还原矩阵列")
    cols = [col for j in rect.col_indices for col in pp.block_columns[j]]
    return Rectangle(rect.row_indices, tuple(cols))
