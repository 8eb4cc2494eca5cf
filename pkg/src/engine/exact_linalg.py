#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 精确有理线性代数模块

本模块是其它所有模块的算术底座：有理数标量、有理矩阵、秩、规范分解、
Kronecker 幂、逐元素多项式映射，以及多项式秩证书。

设计要点：
- 标量统一使用 fractions.Fraction（永远是最简分数，分母为正，零为 0/1）
- 任何秩 / 关联判定都不使用浮点数
- 消元为主元归一化的 Gauss-Jordan 消元；位长超过 bit_length_cap 时抛出 BitLengthError
- 允许 0 行或 0 列的空矩阵，秩为 0
- 所有值构造后不可变，可在并发任务间共享
"""

import itertools
import logging
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from operator import mul

from engine.errors import (
    BitLengthError,
    DimensionMismatchError,
    EnumerationCapError,
    PreconditionError,
    VerificationError,
)
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


# ============================================================================
# 标量
# ============================================================================
def to_rational(value) -> Fraction:
    """
    把输入转换为精确有理数

    参数:
        value: int / Fraction / "num/den" 字符串 / 整数字符串

    返回:
        Fraction

    异常:
        PreconditionError: 浮点数、小数字符串或无法解析的输入
    """
    if isinstance(value, numbers.Rational):
        return Fraction(int(value)) if isinstance(value, numbers.Integral) else Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text for ch in ".eE") or not text:
            raise PreconditionError(f"只接受无小数点的分数字符串: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise PreconditionError(f"无法解析的有理数: {value!r}") from e
    raise PreconditionError(f"不支持的标量类型 {type(value).__name__}（禁止浮点数）")


def format_rational(x: Fraction) -> str:
    """有理数 → "num/den" 字符串（整数只输出分子）"""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _check_bits(values, cap):
    for x in values:
        if x.numerator.bit_length() > cap or x.denominator.bit_length() > cap:
            raise BitLengthError(
                f"消元中出现过长的系数（>{cap} 位），实例规模过大",
                witness={"value_bits": max(x.numerator.bit_length(), x.denominator.bit_length())},
            )


# ============================================================================
# RationalMatrix
# ============================================================================
@dataclass(frozen=True)
class RationalMatrix:
    """
    精确有理矩阵（行优先存储）

    属性:
        rows: 行数
        cols: 列数
        entries: 长度为 rows × cols 的 Fraction 元组
    """

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise PreconditionError("矩阵维数不能为负")
        if len(self.entries) != self.rows * self.cols:
            raise PreconditionError(
                f"元素个数 {len(self.entries)} 与形状 {self.rows}×{self.cols} 不符")

    # ---------------- 构造 ----------------

    @classmethod
    def from_rows(cls, rows, cols=None):
        """由二维列表构造；cols 仅在 0 行时需要显式给出"""
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise PreconditionError("各行长度不一致")
        entries = tuple(to_rational(x) for r in rows for x in r)
        return cls(len(rows), cols, entries)

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols, (ZERO,) * (rows * cols))

    @classmethod
    def identity(cls, n):
        return cls(n, n, tuple(ONE if i == j else ZERO for i in range(n) for j in range(n)))

    @classmethod
    def from_columns(cls, columns, rows):
        """由列向量列表构造（rows 在 0 列时决定行数）"""
        columns = [list(c) for c in columns]
        return cls.from_rows([[c[i] for c in columns] for i in range(rows)], cols=len(columns))

    # ---------------- 访问 ----------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def is_empty(self):
        return self.rows == 0 or self.cols == 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j):
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def row_list(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self):
        return RationalMatrix(self.cols, self.rows,
                              tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def submatrix(self, row_indices, col_indices):
        row_indices = list(row_indices)
        col_indices = list(col_indices)
        return RationalMatrix(len(row_indices), len(col_indices),
                              tuple(self[i, j] for i in row_indices for j in col_indices))

    def distinct_values(self):
        return set(self.entries)

    def is_boolean(self):
        return all(x == 0 or x == 1 for x in self.entries)

    def map(self, fn):
        return RationalMatrix(self.rows, self.cols, tuple(Fraction(fn(x)) for x in self.entries))

    # ---------------- 运算 ----------------

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatchError(f"矩阵乘法维数不符: {self.shape} @ {other.shape}")
        other_cols = [other.column(j) for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for c in other_cols:
                out.append(sum(map(mul, r, c), ZERO))
        return RationalMatrix(self.rows, other.cols, tuple(out))

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatchError(f"矩阵加法维数不符: {self.shape} + {other.shape}")
        return RationalMatrix(self.rows, self.cols,
                              tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatchError(f"矩阵减法维数不符: {self.shape} - {other.shape}")
        return RationalMatrix(self.rows, self.cols,
                              tuple(a - b for a, b in zip(self.entries, other.entries)))

    def scale(self, factor):
        factor = to_rational(factor)
        return RationalMatrix(self.rows, self.cols, tuple(factor * x for x in self.entries))


# ============================================================================
# 消元
# ============================================================================
def reduced_echelon_rows(rows, width):
    """
    对行向量列表做主元归一化的 Gauss-Jordan 消元

    参数:
        rows: Fraction 行向量列表（不会被修改）
        width: 行长度

    返回:
        (非零行列表, 主元列元组)；行按主元列升序，主元为 1，主元列其余位置为 0

    异常:
        BitLengthError: 系数位长超过 bit_length_cap
    """
    cap = get_setting("bit_length_cap")
    work = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(width):
        if r == len(work):
            break
        pivot_row = next((i for i in range(r, len(work)) if work[i][col] != 0), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = 1 / work[r][col]
        prow = [x * inv for x in work[r]]
        _check_bits(prow, cap)
        work[r] = prow
        for i in range(len(work)):
            if i != r:
                factor = work[i][col]
                if factor != 0:
                    work[i] = [a - factor * b for a, b in zip(work[i], prow)]
        pivots.append(col)
        r += 1
    return work[:r], tuple(pivots)


def rref(M: RationalMatrix):
    """
    计算 M 的简化行阶梯形

    返回:
        (R, pivots)：R 为 rank × cols 的 RationalMatrix，pivots 为主元列
    """
    rows, pivots = reduced_echelon_rows(M.row_list(), M.cols)
    return RationalMatrix.from_rows(rows, cols=M.cols), pivots


def rank(M: RationalMatrix) -> int:
    """
    精确秩（有理数域上的秩 = 实数域上的秩）

    空矩阵与零矩阵的秩为 0
    """
    if M.is_empty:
        return 0
    _, pivots = reduced_echelon_rows(M.row_list(), M.cols)
    return len(pivots)


# ============================================================================
# 分解
# ============================================================================
@dataclass(frozen=True)
class Factorization:
    """
    M = left · right 的显式分解

    属性:
        left: n × d
        right: d × m
    """

    left: RationalMatrix
    right: RationalMatrix

    @property
    def inner_dim(self):
        return self.left.cols

    def product(self):
        return self.left @ self.right


def factorize(M: RationalMatrix) -> Factorization:
    """
    规范秩分解 M = P Q

    由简化行阶梯形确定：P 取 M 的主元列，Q 取 rref 的非零行。
    重复调用结果一致；零矩阵给出内维 0 的分解。

    返回:
        Factorization，inner_dim == rank(M)
    """
    if M.is_empty:
        return Factorization(RationalMatrix.zeros(M.rows, 0), RationalMatrix.zeros(0, M.cols))
    R, pivots = rref(M)
    left = M.submatrix(range(M.rows), pivots)
    return Factorization(left, R)


# ============================================================================
# Kronecker 幂与多项式
# ============================================================================
def kronecker_power(v, c: int, cap=None):
    """
    向量的 c 重 Kronecker 自乘 v^{⊗c}

    多重下标 (k_1, …, k_c) 处的元素为 ∏ v_{k_i}，下标按字典序展开；c = 0 时返回 (1,)

    参数:
        v: 有理向量
        c: 次数（≥ 0）
        cap: 下标空间上限（默认读取 kronecker_cap）

    异常:
        PreconditionError: c < 0
        EnumerationCapError: len(v)^c 超过上限
    """
    if c < 0:
        raise PreconditionError("Kronecker 幂次数必须非负")
    v = tuple(to_rational(x) for x in v)
    cap = get_setting("kronecker_cap") if cap is None else cap
    size = len(v) ** c
    if size > cap:
        raise EnumerationCapError(f"Kronecker 幂长度 {size} 超过上限 {cap}")
    return tuple(reduce(mul, combo, ONE) for combo in itertools.product(v, repeat=c))


@dataclass(frozen=True)
class SupportPolynomial:
    """
    单变量有理多项式，只保存非零系数

    属性:
        coefficients: ((次数, 系数), ...)，按次数升序，系数均非零
    """

    coefficients: tuple = field(default=())

    def __post_init__(self):
        cleaned = {}
        for deg, coef in self.coefficients:
            if deg < 0:
                raise PreconditionError("多项式次数必须非负")
            coef = to_rational(coef)
            cleaned[deg] = cleaned.get(deg, ZERO) + coef
        normalized = tuple(sorted((d, c) for d, c in cleaned.items() if c != 0))
        object.__setattr__(self, "coefficients", normalized)

    @classmethod
    def from_dict(cls, mapping):
        return cls(tuple(mapping.items()))

    @property
    def support(self):
        """S(p)：非零单项式的次数集合"""
        return tuple(d for d, _ in self.coefficients)

    @property
    def degree(self):
        return max(self.support, default=0)

    def __call__(self, z):
        z = to_rational(z)
        return sum((c * z ** d for d, c in self.coefficients), ZERO)


def entrywise_poly(M: RationalMatrix, p: SupportPolynomial) -> RationalMatrix:
    """逐元素作用多项式：N_ij = p(M_ij)"""
    return M.map(p)


def poly_rank_certificate(M: RationalMatrix, p: SupportPolynomial):
    """
    逐元素多项式的秩证书

    取规范分解 M = PQ（内维 d），对每个 c ∈ S(p)：
    左因子行 i 拼接 coef_c · P_i^{⊗c}，右因子列 j 拼接 Q_j^{⊗c}，
    于是 p(M_ij) = Σ_c coef_c ⟨P_i^{⊗c}, Q_j^{⊗c}⟩。

    返回:
        (Factorization, bound)：内维恰为 bound = Σ_{c∈S(p)} d^c

    异常:
        EnumerationCapError: Kronecker 下标空间超限
        VerificationError: 乘积与 entrywise_poly(M, p) 不相等（实现错误）
    """
    base = factorize(M)
    d = base.inner_dim
    bound = sum(d ** c for c in p.support)

    left_rows = []
    for i in range(M.rows):
        prow = base.left.row(i)
        row = []
        for c, coef in p.coefficients:
            row.extend(coef * x for x in kronecker_power(prow, c))
        left_rows.append(row)
    right_cols = []
    for j in range(M.cols):
        qcol = base.right.column(j)
        col = []
        for c, _ in p.coefficients:
            col.extend(kronecker_power(qcol, c))
        right_cols.append(col)

    left = RationalMatrix.from_rows(left_rows, cols=bound)
    right = RationalMatrix.from_columns(right_cols, rows=bound)
    cert = Factorization(left, right)
    if cert.product() != entrywise_poly(M, p):
        raise VerificationError("多项式秩证书的乘积与逐元素多项式不一致",
                                witness={"rank": d, "support": p.support})
    _logger.debug(f"多项式秩证书: rank={d}, S(p)={p.support}, bound={bound}")
    return cert, bound
