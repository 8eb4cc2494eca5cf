#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 双团与单色矩形搜索

1. rs_exact - 穷举候选平面，求关联图的最大完全二部子图
2. max_monochromatic_rectangle / max_1listable_submatrix - 矩阵中的精确矩形搜索
3. randomized_biclique - 随机取 d 个超平面求交的采样器
4. greedy_biclique - 贪心基线

并列一律按固定顺序打破：边数（或面积）大者优先，其次点数（行数）多者优先，最后字典序小者优先。
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import numpy as np

from engine.configurations import (
    Configuration,
    Rectangle,
    hyperplanes_containing,
    incidence_stats,
    points_on_flat,
)
from engine.errors import EnumerationCapError, InvalidWitnessError, PreconditionError
from engine.exact_linalg import RationalMatrix
from engine.geometry import (
    Flat,
    flat_contains_point,
    hyperplane_contains_flat,
    intersect_flat_hyperplane,
)
from engine.workers import run_chunked
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")


# ============================================================================
# 数据类型
# ============================================================================
@dataclass(frozen=True)
class Biclique:
    """
    完全二部子图的证据：平面 S、S 上的点、包含 S 的超平面

    属性:
        flat: 见证平面
        point_indices: 点下标（升序元组）
        hyperplane_indices: 超平面下标（升序元组）
    """

    flat: Flat
    point_indices: tuple
    hyperplane_indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "point_indices", tuple(sorted(self.point_indices)))
        object.__setattr__(self, "hyperplane_indices", tuple(sorted(self.hyperplane_indices)))

    @property
    def edges(self):
        return len(self.point_indices) * len(self.hyperplane_indices)

    def rank_key(self):
        """越小越好的排序键"""
        return (-self.edges, -len(self.point_indices), self.flat.sort_key())


@dataclass(frozen=True)
class SearchBudget:
    """
    随机 / 贪心搜索的预算

    属性:
        trials: 试验次数（≥ 1）
        seed: 随机种子（None 时取 default_seed）
        subset_size_cap: 贪心求交步数上限（None 表示不限）
    """

    trials: int = 1
    seed: int = None
    subset_size_cap: int = None

    def __post_init__(self):
        if self.trials < 1:
            raise PreconditionError("trials 必须 ≥ 1")
        if self.seed is None:
            object.__setattr__(self, "seed", get_setting("default_seed"))


@dataclass(frozen=True)
class SamplerOutcome:
    """采样器一次运行的汇总：最佳双团、成功试验数、成功试验中最小的边数、未通过校验而作废的试验数"""

    best: Biclique
    successes: int
    trials: int
    epsilon: Fraction
    weakest_edges: int = None
    rejected: int = 0


def biclique_of_flat(c: Configuration, f: Flat, candidates=None) -> Biclique:
    """平面 f 上的全部点 × 包含 f 的全部超平面"""
    return Biclique(f, points_on_flat(c, f, candidates), hyperplanes_containing(c, f))


def validate_biclique(c: Configuration, bic: Biclique):
    """
    校验双团：点都在平面上，平面落在每个超平面内

    异常:
        InvalidWitnessError: 校验失败（witness 给出违规下标）
    """
    if bic.flat.ambient_dim != c.dim:
        raise InvalidWitnessError("见证平面维数与配置不一致", witness=bic)
    for i in bic.point_indices:
        if not 0 <= i < c.n:
            raise InvalidWitnessError(f"点下标 {i} 越界", witness=bic)
        if not flat_contains_point(bic.flat, c.points[i]):
            raise InvalidWitnessError(f"点 {i} 不在见证平面上", witness={"point": i})
    if bic.hyperplane_indices and bic.flat.empty:
        raise InvalidWitnessError("空平面不能作为带超平面的见证", witness=bic)
    for j in bic.hyperplane_indices:
        if not 0 <= j < c.m:
            raise InvalidWitnessError(f"超平面下标 {j} 越界", witness=bic)
        if not hyperplane_contains_flat(c.hyperplanes[j], bic.flat):
            raise InvalidWitnessError(f"超平面 {j} 不包含见证平面", witness={"hyperplane": j})


# ============================================================================
# rs 精确搜索
# ============================================================================
def rs_exact(c: Configuration) -> Biclique:
    """
    rs(𝒫, ℋ) 的精确值与见证

    候选平面为超平面族的交；每一步只接受使维数严格下降的超平面，已访问的平面去重，
    不含点的平面不再向下扩展（子平面上的点只会更少）。

    异常:
        EnumerationCapError: 候选平面数超过 enumeration_cap
    """
    cap = get_setting("enumeration_cap")
    if c.m > cap:
        raise EnumerationCapError(f"超平面数 {c.m} 超过枚举上限 {cap}")

    whole = Flat.whole_space(c.dim)
    all_points = tuple(range(c.n))
    visited = {whole}
    stack = [(whole, all_points)]
    best = None
    while stack:
        flat, pts = stack.pop()
        for h in c.hyperplanes:
            child = intersect_flat_hyperplane(flat, h)
            if child.empty or child == flat or child in visited:
                continue
            visited.add(child)
            if len(visited) > cap:
                raise EnumerationCapError(f"候选平面数超过枚举上限 {cap}")
            bic = biclique_of_flat(c, child, pts)
            if best is None or bic.rank_key() < best.rank_key():
                best = bic
            if bic.point_indices:
                stack.append((child, bic.point_indices))

    _logger.debug(f"rs_exact: 候选平面 {len(visited) - 1} 个, 最佳边数 {best.edges if best else 0}")
    return best


# ============================================================================
# 矩形精确搜索
# ============================================================================
def _check_search_cap(M: RationalMatrix):
    if M.is_empty:
        raise PreconditionError("矩形搜索需要非空矩阵")
    cap = get_setting("exact_search_cap")
    if min(M.rows, M.cols) > cap:
        raise EnumerationCapError(f"矩阵 {M.rows}×{M.cols} 较短边超过精确搜索上限 {cap}")


def _bits(mask):
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def _rect_key(rows, cols):
    """越小越好：面积大、行数多、字典序小"""
    return (-len(rows) * len(cols), -len(rows), rows, cols)


def max_monochromatic_rectangle(M: RationalMatrix, value=None):
    """
    最大单色矩形（全部元素相等）

    在较短的一边上做带界剪枝的子集枚举：对已选下标集合，按取值维护另一边上
    「所选下标处全为该值」的位掩码，另一边因此被唯一确定为最大可能集合。

    参数:
        value: 只搜索取值为 value 的矩形（None 表示任意值）

    返回:
        (Rectangle, value)；指定 value 而矩阵中不存在该值时返回 None

    异常:
        PreconditionError: 空矩阵
        EnumerationCapError: 较短边超过 exact_search_cap
    """
    _check_search_cap(M)
    transposed = M.rows > M.cols
    W = M.transpose() if transposed else M
    if value is not None:
        value = Fraction(value)

    value_masks = []
    for i in range(W.rows):
        masks = {}
        for j, x in enumerate(W.row(i)):
            if value is None or x == value:
                masks[x] = masks.get(x, 0) | (1 << j)
        value_masks.append(masks)

    best = {"key": None, "rect": None, "value": None}

    def offer(chosen, v, mask):
        side = _bits(mask)
        rows, cols = (side, tuple(chosen)) if transposed else (tuple(chosen), side)
        key = _rect_key(rows, cols)
        if best["key"] is None or key < best["key"]:
            best.update(key=key, rect=Rectangle(rows, cols), value=v)

    def visit(start, chosen, masks):
        for i in range(start, W.rows):
            row_masks = value_masks[i]
            if masks is None:
                new = dict(row_masks)
            else:
                new = {}
                for v, mask in masks.items():
                    merged = mask & row_masks.get(v, 0)
                    if merged:
                        new[v] = merged
            if not new:
                continue
            chosen.append(i)
            widest = 0
            for v, mask in new.items():
                offer(chosen, v, mask)
                widest = max(widest, mask.bit_count())
            bound = (len(chosen) + W.rows - i - 1) * widest
            if best["key"] is None or bound >= -best["key"][0]:
                visit(i + 1, chosen, new)
            chosen.pop()

    visit(0, [], None)
    if best["rect"] is None:
        return None
    return best["rect"], best["value"]


def max_1listable_submatrix(M: RationalMatrix) -> Rectangle:
    """
    最大 1-listable 子矩阵（所选行上每列都是常数）

    行数不超过上限时枚举行子集：列集由行子集唯一确定。
    否则枚举列子集 T：按在 T 上的取值把行分类，每一类连同其确定的列集都是候选。

    异常:
        PreconditionError: 空矩阵
        EnumerationCapError: 较短边超过 exact_search_cap
    """
    _check_search_cap(M)
    cap = get_setting("exact_search_cap")
    if M.rows <= cap:
        return _max_1listable_by_rows(M)
    return _max_1listable_by_columns(M)


def _equal_masks(M):
    """eq[i][k]：第 i 行与第 k 行取值相同的列掩码"""
    rows = [M.row(i) for i in range(M.rows)]
    eq = []
    for a in rows:
        eq.append([sum(1 << j for j, (x, y) in enumerate(zip(a, b)) if x == y) for b in rows])
    return eq


def _max_1listable_by_rows(M):
    eq = _equal_masks(M)
    full = (1 << M.cols) - 1
    best = {"key": None, "rect": None}

    def offer(chosen, mask):
        rows, cols = tuple(chosen), _bits(mask)
        key = _rect_key(rows, cols)
        if best["key"] is None or key < best["key"]:
            best.update(key=key, rect=Rectangle(rows, cols))

    def visit(start, chosen, mask):
        for i in range(start, M.rows):
            new = full if not chosen else mask & eq[chosen[0]][i]
            chosen.append(i)
            offer(chosen, new)
            bound = (len(chosen) + M.rows - i - 1) * new.bit_count()
            if new and bound >= -best["key"][0]:
                visit(i + 1, chosen, new)
            chosen.pop()

    visit(0, [], full)
    return best["rect"]


def _max_1listable_by_columns(M):
    eq = _equal_masks(M)
    best = {"key": None, "rect": None}
    seen = set()
    for mask in range(1, 1 << M.cols):
        cols = _bits(mask)
        classes = {}
        for i in range(M.rows):
            classes.setdefault(tuple(M[i, j] for j in cols), []).append(i)
        for members in classes.values():
            rows = tuple(members)
            if rows in seen:
                continue
            seen.add(rows)
            forced = (1 << M.cols) - 1
            for i in rows[1:]:
                forced &= eq[rows[0]][i]
            key = _rect_key(rows, _bits(forced))
            if best["key"] is None or key < best["key"]:
                best.update(key=key, rect=Rectangle(rows, _bits(forced)))
    return best["rect"]


# ============================================================================
# 随机采样器
# ============================================================================
def sampler_thresholds(c: Configuration, epsilon: Fraction):
    """(点数阈值, 超平面数阈值)：ε^d/2 · n 与 ε^d/(3d) · m，精确有理数"""
    eps_d = epsilon ** c.dim
    return eps_d / 2 * c.n, eps_d / (3 * c.dim) * c.m


def _run_trials(c, seed, thresholds, trial_ids):
    """执行一块试验，返回每次试验的双团（失败为 None）"""
    point_threshold, hyper_threshold = thresholds
    memo = {}

    def biclique_for(flat):
        if flat not in memo:
            memo[flat] = biclique_of_flat(c, flat)
        return memo[flat]

    out = []
    for t in trial_ids:
        rng = np.random.default_rng([seed, t])
        picks = [int(x) for x in rng.integers(0, c.m, size=c.dim)]
        prefixes = [Flat.whole_space(c.dim)]
        for idx in picks:
            prefixes.append(intersect_flat_hyperplane(prefixes[-1], c.hyperplanes[idx]))
        final = prefixes[-1]
        if final.empty or len(biclique_for(final).point_indices) < point_threshold:
            out.append(None)
            continue

        found = None
        for j, idx in enumerate(picks, start=1):
            before = prefixes[j - 1]
            if prefixes[j] != before:
                continue
            bic = biclique_for(before)
            if len(bic.hyperplane_indices) >= hyper_threshold:
                found = bic
                break
        if found is not None:
            tail = biclique_for(final)
            if tail.rank_key() < found.rank_key():
                found = tail
        out.append(found)
    return out


def run_sampler(c: Configuration, budget: SearchBudget, workers=None) -> SamplerOutcome:
    """
    随机采样器的完整运行

    每次试验从 ℋ 中有放回地均匀抽取 d 个超平面，逐次求交得到前缀平面；
    若最终交 S 上的点数 ≥ ε^d/2 · n，再找一个前缀 F_{j-1}：H_j 不切割它且它被
    ≥ ε^d/(3d) · m 个超平面包含。成功时取该前缀与 S 两个双团中较好的一个。
    每个成功试验的双团都经 validate_biclique 校验，未通过的计入 rejected 而不计为成功。

    第 t 次试验使用 default_rng([seed, t])，结果与并发方式无关。

    异常:
        PreconditionError: 关联密度 ε = 0
    """
    epsilon = incidence_stats(c).density
    if epsilon == 0:
        raise PreconditionError("关联密度为 0，采样器没有意义")
    thresholds = sampler_thresholds(c, epsilon)
    if thresholds[0] <= 1:
        _logger.warning("ε^d/2 · n ≤ 1，成功率下界不适用，仍照常运行")

    fn = partial(_run_trials, c, budget.seed, thresholds)
    results = run_chunked(fn, range(budget.trials), workers)

    best = None
    successes = 0
    rejected = 0
    weakest = None
    for t, bic in enumerate(results):
        if bic is None:
            continue
        # 只有通过校验的双团才计为成功
        try:
            validate_biclique(c, bic)
        except InvalidWitnessError as e:
            _logger.warning(f"第 {t} 次试验的双团未通过校验，作废: {e}")
            rejected += 1
            continue
        successes += 1
        weakest = bic.edges if weakest is None else min(weakest, bic.edges)
        if best is None or bic.rank_key() < best.rank_key():
            best = bic
    _logger.info(f"采样器: {successes}/{budget.trials} 次成功, {rejected} 次作废, ε={epsilon}")
    return SamplerOutcome(best, successes, budget.trials, epsilon, weakest, rejected)


def randomized_biclique(c: Configuration, budget: SearchBudget, workers=None):
    """随机采样器：返回全部试验中最好的双团，全部失败时返回 None"""
    return run_sampler(c, budget, workers).best


# ============================================================================
# 贪心基线
# ============================================================================
def greedy_biclique(c: Configuration, budget: SearchBudget = None) -> Biclique:
    """
    贪心双团

    从关联点最多的超平面出发，每步与使（新平面上的点数 × 包含它的超平面数）最大的
    超平面求交，返回过程中最好的中间双团。
    """
    steps = None if budget is None else budget.subset_size_cap
    whole = Flat.whole_space(c.dim)

    current = None
    for h in c.hyperplanes:
        bic = biclique_of_flat(c, intersect_flat_hyperplane(whole, h))
        if current is None or len(bic.point_indices) > len(current.point_indices):
            current = bic
    best = current

    taken = 1
    while steps is None or taken < steps:
        step_best = None
        for h in c.hyperplanes:
            child = intersect_flat_hyperplane(current.flat, h)
            if child.empty or child == current.flat:
                continue
            bic = biclique_of_flat(c, child, current.point_indices)
            if step_best is None or bic.edges > step_best.edges:
                step_best = bic
        if step_best is None:
            break
        current = step_best
        taken += 1
        if current.rank_key() < best.rank_key():
            best = current
    return best
