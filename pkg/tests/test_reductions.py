# -*- coding: utf-8 -*-
"""reductions：列归一化、z(z-1) 步骤、递归约化与二值化"""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import low_rank_matrices
from engine.configurations import Rectangle, listability
from engine.errors import EnumerationCapError, PreconditionError, VerificationError
from engine.exact_linalg import RationalMatrix, rank
from engine.reductions import (
    ReductionTrace,
    binarize_two_valued,
    find_1listable_recursive,
    listability_step,
    normalize_columns,
)
from utils.config import override_settings

DIAGONAL_RAMP = RationalMatrix.from_rows([[0, 0], [1, 1], [2, 2]])


class TestNormalize:
    def test_drops_constant_and_rescales(self):
        M = RationalMatrix.from_rows([[3, 5], [3, 7], [3, 9]])
        N, record = normalize_columns(M)
        assert N.row_list() == [[0], [1], [2]]
        assert record.kept_columns == (1,)
        assert record.dropped_constant_columns == (0,)
        assert record.a_values == (5,)
        assert record.scale_values == (Fraction(1, 2),)
        assert record.restore(N) == M.submatrix(range(3), [1])

    def test_all_constant(self):
        N, record = normalize_columns(RationalMatrix.from_rows([[1, 2], [1, 2]]))
        assert N.shape == (2, 0)
        assert record.dropped_constant_columns == (0, 1)


class TestStep:
    def test_merges_zero_and_one(self):
        out = listability_step(RationalMatrix.from_rows([[0], [1], [2]]))
        assert out.row_list() == [[0], [0], [2]]
        assert listability(out) == 2

    def test_requires_zero_and_one(self):
        with pytest.raises(PreconditionError):
            listability_step(RationalMatrix.from_rows([[0], [2]]))

    @settings(max_examples=80, deadline=None)
    @given(low_rank_matrices(max_rank=2, max_rows=5, max_cols=4))
    def test_rank_and_listability_bounds(self, M):
        N, _ = normalize_columns(M)
        assert rank(N) <= rank(M) + 1
        if N.cols == 0:
            return
        out = listability_step(N)
        r = rank(N)
        assert rank(out) <= r * r + r
        assert listability(out) <= listability(N) - 1


class TestRecursive:
    def test_three_listable_ramp(self):
        trace = ReductionTrace()
        rect = find_1listable_recursive(DIAGONAL_RAMP, trace=trace)
        assert rect == Rectangle((0,), (0, 1))
        assert [level["branch"] for level in trace.levels] == ["step", "oracle"]
        assert trace.levels[0]["listability"] == 3

    def test_constant_columns_shortcut(self):
        M = RationalMatrix.from_rows([[0, 5, 5], [1, 5, 5], [2, 5, 5]])
        assert find_1listable_recursive(M) == Rectangle((0, 1, 2), (1, 2))

    def test_one_listable_returns_whole_matrix(self):
        M = RationalMatrix.from_rows([[1, 2], [1, 2]])
        assert find_1listable_recursive(M) == Rectangle((0, 1), (0, 1))

    def test_bad_oracle_is_caught(self):
        M = RationalMatrix.from_rows([[0], [1]])
        with pytest.raises(VerificationError):
            find_1listable_recursive(M, oracle=lambda _: Rectangle((0, 1), (0,)))

    def test_depth_cap(self):
        override_settings(recursion_depth_cap=0)
        with pytest.raises(EnumerationCapError):
            find_1listable_recursive(DIAGONAL_RAMP)

    def test_empty_matrix(self):
        with pytest.raises(PreconditionError):
            find_1listable_recursive(RationalMatrix.from_rows([], cols=1))

    @settings(max_examples=80, deadline=None)
    @given(low_rank_matrices(max_rank=2, max_rows=5, max_cols=4))
    def test_result_is_nonempty_and_1listable(self, M):
        rect = find_1listable_recursive(M)
        assert rect.is_nonempty
        for j in rect.col_indices:
            assert len({M[i, j] for i in rect.row_indices}) == 1


class TestBinarize:
    def test_two_values(self):
        out = binarize_two_valued(RationalMatrix.from_rows([[2, 5], [5, 2]]))
        assert out.row_list() == [[0, 1], [1, 0]]
        assert out.is_boolean()

    def test_requires_two_values(self):
        with pytest.raises(PreconditionError):
            binarize_two_valued(RationalMatrix.from_rows([[0, 1, 2]]))
