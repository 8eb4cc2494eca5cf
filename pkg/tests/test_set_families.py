# -*- coding: utf-8 -*-
"""set_families：网格族、交集矩阵、不交密度与 {t}-交叉相交穷举"""

import math
from fractions import Fraction

import pytest

from engine.configurations import incidence_stats
from engine.errors import ConfigurationError, EnumerationCapError, PreconditionError
from engine.set_families import (
    GridFamilyParams,
    SetFamilyPair,
    cross_disjoint_epsilon,
    cross_intersecting_profile,
    disjoint_fraction,
    family_configuration,
    frankl_rodl_check,
    grid_delta_formula,
    grid_family,
    grid_trend_table,
    grid_zero_density_bound,
    intersection_matrix,
    is_t_cross_intersecting,
    max_zero_rectangle_density,
    random_sparse_family,
)
from utils.config import override_settings


class TestSetFamilyPair:
    def test_normalizes_sets(self):
        fp = SetFamilyPair(3, [(2, 0, 0)], [(1,)])
        assert fp.family_A == ((0, 2),)

    def test_rejects_out_of_range_and_empty(self):
        with pytest.raises(ConfigurationError):
            SetFamilyPair(2, [(0, 2)], [(1,)])
        with pytest.raises(ConfigurationError):
            SetFamilyPair(2, [], [(1,)])

    def test_intersection_matrix(self):
        fp = SetFamilyPair(3, [(0, 1), (2,)], [(1, 2), (0,)])
        assert intersection_matrix(fp).row_list() == [[1, 1], [1, 0]]
        assert cross_intersecting_profile(fp) == (0, 1)


class TestGrid:
    def test_params(self):
        params = GridFamilyParams(3, 2)
        assert params.d == 6 and params.alpha == Fraction(3, 2)
        with pytest.raises(PreconditionError):
            GridFamilyParams(0, 2)

    def test_family_shape(self):
        fp = grid_family(GridFamilyParams(3, 2))
        assert len(fp.family_A) == 9
        assert fp.family_A == fp.family_B
        assert all(len(s) == 2 for s in fp.family_A)

    def test_cap(self):
        override_settings(enumeration_cap=8)
        with pytest.raises(EnumerationCapError):
            grid_family(GridFamilyParams(3, 2))

    @pytest.mark.parametrize("a, b", [(2, 2), (2, 3), (3, 2), (4, 2)])
    def test_disjoint_fraction_matches_formula(self, a, b):
        fp = grid_family(GridFamilyParams(a, b))
        assert disjoint_fraction(fp) == grid_delta_formula(a, b)

    def test_two_by_two(self):
        fp = grid_family(GridFamilyParams(2, 2))
        assert cross_disjoint_epsilon(fp) == Fraction(3, 4)
        assert cross_intersecting_profile(fp) == (0, 1, 2)
        assert max_zero_rectangle_density(fp) == Fraction(1, 16)

    @pytest.mark.parametrize("a, b, density", [(2, 3, Fraction(1, 64)), (4, 2, Fraction(1, 16))])
    def test_even_a_attains_product_bound(self, a, b, density):
        params = GridFamilyParams(a, b)
        fp = grid_family(params)
        assert max_zero_rectangle_density(fp) == density
        assert grid_zero_density_bound(params) == Fraction(1, 2 ** (2 * b))

    def test_odd_a_stays_below_bound(self):
        params = GridFamilyParams(3, 2)
        assert grid_zero_density_bound(params) == Fraction(4, 81)
        assert max_zero_rectangle_density(grid_family(params)) <= Fraction(4, 81)

    def test_no_disjoint_pairs(self):
        fp = SetFamilyPair(2, [(0, 1)], [(0,), (1,)])
        assert max_zero_rectangle_density(fp) == 0

    def test_configuration_view(self):
        fp = grid_family(GridFamilyParams(2, 2))
        c = family_configuration(fp)
        assert c.dim == 4 and c.n == 4 and c.m == 4
        assert incidence_stats(c).density == disjoint_fraction(fp)

    def test_configuration_rejects_empty_set(self):
        with pytest.raises(ConfigurationError):
            family_configuration(SetFamilyPair(2, [(0,)], [()]))

    def test_trend_table(self):
        rows = grid_trend_table(1, range(1, 4))
        assert [(r["a"], r["b"]) for r in rows] == [(1, 1), (2, 2), (3, 3)]
        assert rows[2]["delta"] == Fraction(8, 27)
        assert all(r["enumerated"] == r["delta"] for r in rows)
        assert rows[0]["limit"] == pytest.approx(math.exp(-1))

    def test_trend_table_skips_fractional_a(self):
        rows = grid_trend_table(Fraction(1, 2), [1, 2, 3])
        assert [(r["a"], r["b"]) for r in rows] == [(1, 2)]


class TestCrossIntersecting:
    def test_predicate(self):
        assert is_t_cross_intersecting([(0, 1)], [(1, 2), (0, 3)], 1)
        assert not is_t_cross_intersecting([(0, 1)], [(1, 2), (0, 3)], 0)

    @pytest.mark.parametrize("d, expected", [(1, 2), (2, 4), (3, 8)])
    def test_exhaustive_bound(self, d, expected):
        report = frankl_rodl_check(d)
        assert report.max_product == expected
        assert report.passed and report.attains_bound
        for t, (product, fam_r, fam_s) in report.per_t.items():
            assert len(fam_r) * len(fam_s) == product
            if product:
                assert is_t_cross_intersecting(fam_r, fam_s, t)

    def test_limits(self):
        with pytest.raises(EnumerationCapError):
            frankl_rodl_check(5)
        with pytest.raises(PreconditionError):
            frankl_rodl_check(0)


class TestRandomSparse:
    def test_deterministic(self):
        a = random_sparse_family(10, 3, 5, seed=1)
        assert a == random_sparse_family(10, 3, 5, seed=1)
        assert len(a) == 5 and all(len(s) == 3 for s in a)

    def test_bad_arguments(self):
        with pytest.raises(PreconditionError):
            random_sparse_family(3, 4, 1)
