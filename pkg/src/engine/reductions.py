#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 可列性约化

把 k-listable 矩阵逐级约化到 2-listable，再用布尔情形的查找器（oracle）取回
1-listable 子矩阵：

- normalize_columns: 丢弃常数列，其余各列仿射变换为同时含 0 和 1
- listability_step: 逐元素 z(z-1)，0 与 1 合并为 0，可列性至少减一
- find_1listable_recursive: 上述两步的递归
- binarize_two_valued: 两值矩阵 → 布尔矩阵

每一步的秩上界都用精确计算校验，失败抛出 VerificationError。
"""

import logging
from dataclasses import dataclass, field

from engine.configurations import Rectangle, arity, listability
from engine.errors import EnumerationCapError, PreconditionError, VerificationError
from engine.exact_linalg import (
    ONE,
    RationalMatrix,
    SupportPolynomial,
    entrywise_poly,
    rank,
)
from engine.search import max_1listable_submatrix
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")

# z(z-1) = z^2 - z
STEP_POLYNOMIAL = SupportPolynomial(((2, 1), (1, -1)))


@dataclass(frozen=True)
class NormalizationRecord:
    """
    列归一化记录

    属性:
        kept_columns: 保留的原列下标
        a_values: 每个保留列的 a_j（列最小值）
        scale_values: 每个保留列的 1/(b_j - a_j)，b_j 为次小值
        dropped_constant_columns: 被丢弃的常数列下标
    """

    kept_columns: tuple
    a_values: tuple
    scale_values: tuple
    dropped_constant_columns: tuple

    def restore(self, N: RationalMatrix) -> RationalMatrix:
        """逆变换：由归一化矩阵还原保留列"""
        rows = []
        for i in range(N.rows):
            rows.append([x / s + a for x, a, s in zip(N.row(i), self.a_values, self.scale_values)])
        return RationalMatrix.from_rows(rows, cols=N.cols)


@dataclass
class ReductionTrace:
    """约化过程的逐级记录（用于日志与报告）"""

    levels: list = field(default_factory=list)

    def record(self, depth, M, branch):
        entry = {
            "depth": depth,
            "rows": M.rows,
            "cols": M.cols,
            "rank": rank(M),
            "listability": listability(M),
            "branch": branch,
        }
        self.levels.append(entry)
        _logger.debug(f"约化 L{depth}: {M.rows}×{M.cols}, rank={entry['rank']}, "
                      f"listability={entry['listability']}, {branch}")


def normalize_columns(M: RationalMatrix):
    """
    N = (M - A) D：丢弃常数列，其余列减去最小值 a_j 后除以 (次小值 - a_j)

    返回:
        (N, NormalizationRecord)；全是常数列时 N 为 n × 0

    异常:
        VerificationError: rank(N) > rank(M) + 1
    """
    kept, a_values, scales, dropped = [], [], [], []
    for j in range(M.cols):
        values = sorted(set(M.column(j)))
        if len(values) < 2:
            dropped.append(j)
            continue
        kept.append(j)
        a_values.append(values[0])
        scales.append(ONE / (values[1] - values[0]))

    rows = [[(M[i, j] - a) * s for j, a, s in zip(kept, a_values, scales)] for i in range(M.rows)]
    N = RationalMatrix.from_rows(rows, cols=len(kept))
    record = NormalizationRecord(tuple(kept), tuple(a_values), tuple(scales), tuple(dropped))
    if rank(N) > rank(M) + 1:
        raise VerificationError("归一化后秩增加超过 1", witness={"rank_M": rank(M), "rank_N": rank(N)})
    return N, record


def listability_step(M: RationalMatrix) -> RationalMatrix:
    """
    M̃_ij = M_ij (M_ij - 1)

    异常:
        PreconditionError: 某列不同时含 0 和 1
        VerificationError: 可列性没有下降，或 rank(M̃) > r² + r
    """
    for j in range(M.cols):
        column = set(M.column(j))
        if 0 not in column or 1 not in column:
            raise PreconditionError(f"第 {j} 列必须同时含 0 和 1", witness={"column": j})
    out = entrywise_poly(M, STEP_POLYNOMIAL)
    k_before, k_after = listability(M), listability(out)
    if M.cols and k_after > k_before - 1:
        raise VerificationError("z(z-1) 步骤后可列性没有下降",
                                witness={"before": k_before, "after": k_after})
    r, r_after = rank(M), rank(out)
    if r_after > r * r + r:
        raise VerificationError("z(z-1) 步骤后秩超过 r² + r", witness={"rank": r, "rank_after": r_after})
    return out


def _is_1listable(M: RationalMatrix, rect: Rectangle) -> bool:
    for j in rect.col_indices:
        if len({M[i, j] for i in rect.row_indices}) > 1:
            return False
    return True


def _default_oracle(M):
    return max_1listable_submatrix(M)


def find_1listable_recursive(M: RationalMatrix, oracle=None, trace: ReductionTrace = None) -> Rectangle:
    """
    递归寻找 1-listable 子矩阵

    1. 可列性 ≤ 1：整个矩阵
    2. 可列性 = 2：交给 oracle
    3. 否则归一化；常数列占一半及以上时直接取全部行 × 常数列；
       不然做 z(z-1) 步骤并递归得到 (S, T)，确认 N|S×T 是 2-listable 后再交给 oracle

    参数:
        oracle: 对 2-listable 矩阵返回 1-listable 矩形的函数，默认 max_1listable_submatrix
        trace: 可选的 ReductionTrace

    异常:
        VerificationError: 中间结果不满足预期（非 2-listable、结果非 1-listable）
        EnumerationCapError: 递归深度超过 recursion_depth_cap
    """
    if M.is_empty:
        raise PreconditionError("需要非空矩阵")
    oracle = oracle or _default_oracle
    rect = _find_1listable(M, oracle, trace, 0)
    if not _is_1listable(M, rect):
        raise VerificationError("约化结果不是 1-listable 子矩阵", witness=rect)
    return rect


def _find_1listable(M, oracle, trace, depth):
    if depth > get_setting("recursion_depth_cap"):
        raise EnumerationCapError(f"约化递归深度超过上限 {depth - 1}")
    k = listability(M)
    all_rows = tuple(range(M.rows))
    if k <= 1:
        if trace is not None:
            trace.record(depth, M, "1-listable")
        return Rectangle(all_rows, tuple(range(M.cols)))
    if k == 2:
        if trace is not None:
            trace.record(depth, M, "oracle")
        rect = oracle(M)
        if not rect.is_nonempty or not _is_1listable(M, rect):
            raise VerificationError("oracle 返回的矩形不是非空 1-listable", witness=rect)
        return rect

    N, record = normalize_columns(M)
    constant = record.dropped_constant_columns
    if 2 * len(constant) >= M.cols:
        if trace is not None:
            trace.record(depth, M, "constant-columns")
        return Rectangle(all_rows, constant)

    if trace is not None:
        trace.record(depth, M, "step")
    stepped = listability_step(N)
    inner = _find_1listable(stepped, oracle, trace, depth + 1)

    restricted = N.submatrix(inner.row_indices, inner.col_indices)
    if listability(restricted) > 2:
        raise VerificationError("递归结果在归一化矩阵上不是 2-listable",
                                witness={"rows": inner.row_indices, "cols": inner.col_indices})
    final = oracle(restricted) if listability(restricted) == 2 else \
        Rectangle(tuple(range(restricted.rows)), tuple(range(restricted.cols)))
    if not final.is_nonempty or not _is_1listable(restricted, final):
        raise VerificationError("oracle 返回的矩形不是非空 1-listable", witness=final)
    rows = tuple(inner.row_indices[i] for i in final.row_indices)
    cols = tuple(record.kept_columns[inner.col_indices[j]] for j in final.col_indices)
    return Rectangle(rows, cols)


def binarize_two_valued(M: RationalMatrix) -> RationalMatrix:
    """
    两值矩阵 (M - a)/(b - a) → 布尔矩阵（a < b 为两个取值）

    异常:
        PreconditionError: arity(M) != 2
        VerificationError: 秩增加超过 1
    """
    if arity(M) != 2:
        raise PreconditionError(f"需要恰好两个取值的矩阵，实际 {arity(M)} 个")
    a, b = sorted(M.distinct_values())
    out = M.map(lambda x: (x - a) / (b - a))
    if rank(out) > rank(M) + 1:
        raise VerificationError("二值化后秩增加超过 1", witness={"values": (a, b)})
    return out
