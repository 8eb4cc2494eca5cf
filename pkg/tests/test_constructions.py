# -*- coding: utf-8 -*-
"""constructions：格点构造的规模、关联计数公式与各项校验"""

import numpy as np
import pytest

from engine.configurations import hyperplanes_containing, incidence_stats, points_on_flat
from engine.constructions import (
    DENSE,
    UNIVERSE,
    hyperplanes_containing_flat,
    lattice_construction,
    lattice_incidences,
    random_intersection_flat,
    universe_points_on_flat,
    verify_lattice_claims,
)
from engine.errors import EnumerationCapError, PreconditionError
from engine.geometry import Flat, intersect_flat_hyperplane
from utils.config import override_settings


class TestConstruction:
    @pytest.mark.parametrize("d", [0, 1, 3, 6])
    def test_requires_square_d_minus_one(self, d):
        with pytest.raises(PreconditionError):
            lattice_construction(d)

    def test_hypercube_cap(self):
        override_settings(hypercube_cap=3)
        with pytest.raises(EnumerationCapError):
            lattice_construction(5)

    @pytest.mark.parametrize("d, m, dense, universe", [
        (2, 2, 10, 6),
        (5, 16, 144, 144),
        (10, 512, 6656, 9728),
    ])
    def test_sizes(self, d, m, dense, universe):
        lc = lattice_construction(d)
        assert lc.m == m
        assert lc.size(DENSE) == dense
        assert lc.size(UNIVERSE) == universe
        assert len(lc.point_array(UNIVERSE)) == universe

    def test_dense_in_universe_from_d_five(self):
        assert not lattice_construction(2).dense_in_universe
        assert lattice_construction(5).dense_in_universe
        assert lattice_construction(17).dense_in_universe

    def test_point_array_cap(self):
        override_settings(enumeration_cap=100)
        with pytest.raises(EnumerationCapError):
            lattice_construction(5).point_array(UNIVERSE)

    def test_hyperplane_bits(self):
        lc = lattice_construction(5)
        assert lc.normal_bits(0) == (0, 0, 0, 0)
        assert lc.normal_bits(5) == (0, 1, 0, 1)
        assert np.array_equal(lc.normal_array[5], [0, 1, 0, 1, -1])


class TestIncidences:
    @pytest.mark.parametrize("d", [2, 5, 10])
    @pytest.mark.parametrize("which", [UNIVERSE, DENSE])
    def test_formula_matches_pairwise(self, d, which):
        lc = lattice_construction(d)
        assert lattice_incidences(lc, which, "formula") == lattice_incidences(lc, which, "pairwise")

    @pytest.mark.parametrize("d", [2, 5, 10, 17])
    def test_universe_count(self, d):
        lc = lattice_construction(d)
        assert lattice_incidences(lc, UNIVERSE, "formula") == 2 ** (2 * d - 2)

    def test_matches_generic_configuration(self):
        lc = lattice_construction(5)
        assert incidence_stats(lc.configuration(UNIVERSE)).incidences == 256

    def test_unknown_point_set(self):
        with pytest.raises(PreconditionError):
            lattice_incidences(lattice_construction(2), "other")


class TestFlatCounts:
    def test_host_hyperplane_itself(self):
        lc = lattice_construction(5)
        f = intersect_flat_hyperplane(Flat.whole_space(5), lc.hyperplane(0))
        assert universe_points_on_flat(lc, f, 0) == 16
        assert hyperplanes_containing_flat(lc, f) == 1

    def test_host_must_contain_flat(self):
        lc = lattice_construction(5)
        f = intersect_flat_hyperplane(Flat.whole_space(5), lc.hyperplane(0))
        with pytest.raises(PreconditionError):
            universe_points_on_flat(lc, f, 1)

    def test_random_flats_match_generic_search(self):
        lc = lattice_construction(5)
        c = lc.configuration(UNIVERSE)
        for s in range(40):
            flat, picks = random_intersection_flat(lc, np.random.default_rng([17, s]))
            assert len(set(picks)) == len(picks)
            assert universe_points_on_flat(lc, flat, picks[0]) == len(points_on_flat(c, flat))
            assert hyperplanes_containing_flat(lc, flat) == len(hyperplanes_containing(c, flat))


class TestClaims:
    def test_d_five(self):
        report = verify_lattice_claims(lattice_construction(5), samples=200, seed=1, workers=1)
        assert report.passed
        assert report.sizes == {"m": 16, "P": 144, "U": 144}
        assert report.claim("incidence_universe").value == 256
        assert report.claim("rs_universe").value == 16
        assert report.claim("dense_in_universe").holds

    def test_d_two_flags_but_does_not_assert_containment(self):
        report = verify_lattice_claims(lattice_construction(2), samples=50, seed=1, workers=1)
        assert report.passed
        claim = report.claim("dense_in_universe")
        assert claim.holds and claim.value is False
        assert report.claim("incidence_universe").value == 4
        assert report.claim("rs_universe").value <= 2

    def test_rs_skipped_above_limit(self):
        report = verify_lattice_claims(lattice_construction(5), samples=20, seed=1,
                                       exact_rs_max_d=2, workers=1)
        assert all(c.name != "rs_universe" for c in report.claims)
