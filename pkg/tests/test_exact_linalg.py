# -*- coding: utf-8 -*-
"""exact_linalg：精确消元、秩、分解、Kronecker 幂与多项式秩证书"""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings

from conftest import low_rank_matrices, rational_matrices
from engine.errors import BitLengthError, DimensionMismatchError, EnumerationCapError, PreconditionError
from engine.exact_linalg import (
    RationalMatrix,
    SupportPolynomial,
    entrywise_poly,
    factorize,
    format_rational,
    kronecker_power,
    poly_rank_certificate,
    rank,
    rref,
    to_rational,
)
from utils.config import override_settings


def sympy_rank(M):
    return sympy.Matrix(M.rows, M.cols, [sympy.Rational(x.numerator, x.denominator) for x in M.entries]).rank()


class TestScalars:
    def test_parses_fraction_strings_and_ints(self):
        assert to_rational("3/4") == Fraction(3, 4)
        assert to_rational("-2") == Fraction(-2)
        assert to_rational(7) == Fraction(7)

    @pytest.mark.parametrize("bad", ["0.5", "1e3", "", "abc", 0.5])
    def test_rejects_decimals_and_floats(self, bad):
        with pytest.raises(PreconditionError):
            to_rational(bad)

    def test_format(self):
        assert format_rational(Fraction(6, 8)) == "3/4"
        assert format_rational(Fraction(-4, 2)) == "-2"


class TestRank:
    def test_known_ranks(self):
        assert rank(RationalMatrix.from_rows([[1, 2], [2, 4]])) == 1
        assert rank(RationalMatrix.identity(3)) == 3
        assert rank(RationalMatrix.zeros(2, 3)) == 0

    def test_zero_by_n_matrix(self):
        assert rank(RationalMatrix.from_rows([], cols=3)) == 0

    def test_rref_of_singular_matrix(self):
        R, pivots = rref(RationalMatrix.from_rows([[1, 2, 3], [2, 4, 6], [1, 0, 1]]))
        assert pivots == (0, 1)
        assert R.row_list() == [[1, 0, 1], [0, 1, 1]]

    @settings(max_examples=200, deadline=None)
    @given(rational_matrices(max_rows=6, max_cols=6))
    def test_matches_sympy(self, M):
        assert rank(M) == sympy_rank(M)

    @settings(max_examples=100, deadline=None)
    @given(rational_matrices())
    def test_rank_of_transpose(self, M):
        assert rank(M) == rank(M.transpose())

    def test_bit_length_cap(self):
        override_settings(bit_length_cap=8)
        M = RationalMatrix.from_rows([[Fraction(1, 1000), 1], [1, 1]])
        with pytest.raises(BitLengthError):
            rank(M)


class TestFactorize:
    @settings(max_examples=150, deadline=None)
    @given(low_rank_matrices())
    def test_product_and_inner_dim(self, M):
        fac = factorize(M)
        assert fac.product() == M
        assert fac.inner_dim == rank(M)

    def test_deterministic(self):
        M = RationalMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
        assert factorize(M) == factorize(M)

    def test_zero_matrix_has_inner_dim_zero(self):
        fac = factorize(RationalMatrix.zeros(2, 2))
        assert fac.inner_dim == 0
        assert fac.product() == RationalMatrix.zeros(2, 2)

    def test_matmul_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            RationalMatrix.identity(2) @ RationalMatrix.identity(3)


class TestKronecker:
    def test_powers(self):
        assert kronecker_power((1, 2), 0) == (1,)
        assert kronecker_power((1, 2), 2) == (1, 2, 2, 4)

    def test_negative_degree(self):
        with pytest.raises(PreconditionError):
            kronecker_power((1,), -1)

    def test_cap(self):
        with pytest.raises(EnumerationCapError):
            kronecker_power((1, 2, 3), 5, cap=100)


class TestPolyRank:
    def test_support_polynomial_drops_zero_terms(self):
        p = SupportPolynomial(((2, 1), (1, -1), (0, 0)))
        assert p.support == (1, 2)
        assert p.degree == 2
        assert p(3) == 6

    def test_step_polynomial_on_small_matrix(self):
        M = RationalMatrix.from_rows([[0, 1, 2], [1, 2, 0]])
        p = SupportPolynomial(((2, 1), (1, -1)))
        assert entrywise_poly(M, p).row_list() == [[0, 0, 2], [0, 2, 0]]

    @settings(max_examples=100, deadline=None)
    @given(low_rank_matrices(max_rank=3, max_rows=5, max_cols=5))
    def test_certificate_reproduces_entrywise_poly(self, M):
        p = SupportPolynomial(((0, 1), (1, Fraction(-1, 2)), (2, 3)))
        cert, bound = poly_rank_certificate(M, p)
        d = rank(M)
        assert bound == 1 + d + d * d
        assert cert.inner_dim == bound
        assert cert.product() == entrywise_poly(M, p)
        assert rank(entrywise_poly(M, p)) <= bound
