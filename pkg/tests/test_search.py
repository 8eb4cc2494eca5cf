# -*- coding: utf-8 -*-
"""search：rs 精确值、矩形穷举、随机采样器与贪心基线"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corrupt_first_success, hyperplanes, points, rational_matrices
from engine.configurations import Configuration, incidence_matrix
from engine.errors import EnumerationCapError, InvalidWitnessError, PreconditionError
from engine.exact_linalg import RationalMatrix
from engine import search, workers
from engine.geometry import Flat, Hyperplane, Point
from engine.search import (
    Biclique,
    SearchBudget,
    greedy_biclique,
    max_1listable_submatrix,
    max_monochromatic_rectangle,
    randomized_biclique,
    rs_exact,
    run_sampler,
    validate_biclique,
)
from engine.workers import run_chunked
from utils.config import clear_overrides, get_setting, override_settings, set_config_path


def axis_grid_configuration():
    pts = tuple(Point(v) for v in itertools.product((0, 1), repeat=2))
    hs = (Hyperplane((1, 0), 0), Hyperplane((1, 0), 1), Hyperplane((0, 1), 0), Hyperplane((0, 1), 1))
    return Configuration(2, pts, hs)


def cube_copies(copies=3):
    """{0,1}³ 每个顶点重复 copies 次，超平面 x_k = 0 / x_k = 1"""
    pts = tuple(Point(v) for v in itertools.product((0, 1), repeat=3) for _ in range(copies))
    hs = []
    for k in range(3):
        normal = tuple(1 if i == k else 0 for i in range(3))
        hs += [Hyperplane(normal, 0), Hyperplane(normal, 1)]
    return Configuration(3, pts, tuple(hs))


def brute_rs(c):
    inc = incidence_matrix(c)
    best = 0
    for size in range(1, c.m + 1):
        for subset in itertools.combinations(range(c.m), size):
            common = int(inc[:, list(subset)].all(axis=1).sum())
            best = max(best, common * size)
    return best


def brute_monochromatic_area(M):
    best = 0
    for size in range(1, M.rows + 1):
        for rows in itertools.combinations(range(M.rows), size):
            for v in M.distinct_values():
                cols = [j for j in range(M.cols) if all(M[i, j] == v for i in rows)]
                best = max(best, size * len(cols))
    return best


def brute_1listable_area(M):
    best = 0
    for size in range(1, M.rows + 1):
        for rows in itertools.combinations(range(M.rows), size):
            cols = [j for j in range(M.cols) if len({M[i, j] for i in rows}) == 1]
            best = max(best, size * len(cols))
    return best


@st.composite
def small_configurations(draw):
    pts = draw(st.lists(points(2, -1, 1), min_size=1, max_size=6))
    hs = draw(st.lists(hyperplanes(2), min_size=1, max_size=5, unique=True))
    return Configuration(2, tuple(pts), tuple(hs))


class TestRsExact:
    def test_axis_grid(self):
        c = axis_grid_configuration()
        bic = rs_exact(c)
        assert bic.edges == 2
        # 并列时点数多者优先：取直线而不是顶点
        assert len(bic.point_indices) == 2
        validate_biclique(c, bic)

    def test_cube_copies(self):
        bic = rs_exact(cube_copies())
        assert bic.edges == 12
        assert len(bic.point_indices) == 12

    @settings(max_examples=80, deadline=None)
    @given(small_configurations())
    def test_matches_brute_force(self, c):
        bic = rs_exact(c)
        assert bic.edges == brute_rs(c)
        validate_biclique(c, bic)

    def test_cap(self):
        override_settings(enumeration_cap=1)
        with pytest.raises(EnumerationCapError):
            rs_exact(axis_grid_configuration())

    def test_invalid_witness(self):
        c = axis_grid_configuration()
        bad = Biclique(Flat.from_system([(1, 0, 1)], 2), (0,), ())
        with pytest.raises(InvalidWitnessError):
            validate_biclique(c, bad)
        with pytest.raises(InvalidWitnessError):
            validate_biclique(c, Biclique(Flat.from_system([(1, 0, 1)], 2), (2,), (2,)))


class TestRectangles:
    def test_identity_zero_block(self):
        rect, value = max_monochromatic_rectangle(RationalMatrix.identity(4))
        assert value == 0
        assert rect.row_indices == (0, 1) and rect.col_indices == (2, 3)
        assert rect.size == 4

    def test_small_identity_prefers_lexicographic(self):
        rect, value = max_monochromatic_rectangle(RationalMatrix.identity(2))
        assert rect.size == 1 and value == 1
        assert rect.row_indices == (0,) and rect.col_indices == (0,)

    def test_missing_value(self):
        assert max_monochromatic_rectangle(RationalMatrix.identity(2), value=5) is None
        rect, value = max_monochromatic_rectangle(RationalMatrix.identity(3), value=Fraction(1))
        assert value == 1 and rect.size == 1

    def test_empty_matrix(self):
        with pytest.raises(PreconditionError):
            max_monochromatic_rectangle(RationalMatrix.from_rows([], cols=2))

    def test_search_cap(self):
        override_settings(exact_search_cap=2)
        with pytest.raises(EnumerationCapError):
            max_monochromatic_rectangle(RationalMatrix.identity(3))

    @settings(max_examples=120, deadline=None)
    @given(rational_matrices(max_rows=5, max_cols=4, elements=st.integers(0, 2)))
    def test_monochromatic_matches_brute_force(self, M):
        rect, value = max_monochromatic_rectangle(M)
        assert rect.size == brute_monochromatic_area(M)
        assert all(M[i, j] == value for i, j in rect.cells())

    def test_1listable_identity(self):
        rect = max_1listable_submatrix(RationalMatrix.identity(2))
        assert rect.row_indices == (0,) and rect.col_indices == (0, 1)

    @settings(max_examples=120, deadline=None)
    @given(rational_matrices(max_rows=5, max_cols=4, elements=st.integers(0, 2)))
    def test_1listable_matches_brute_force(self, M):
        rect = max_1listable_submatrix(M)
        assert rect.size == brute_1listable_area(M)
        for j in rect.col_indices:
            assert len({M[i, j] for i in rect.row_indices}) == 1

    @settings(max_examples=60, deadline=None)
    @given(rational_matrices(max_rows=6, max_cols=3, elements=st.integers(0, 1)))
    def test_1listable_column_enumeration(self, M):
        # 行数超过上限时改为枚举列子集
        override_settings(exact_search_cap=3)
        rect = max_1listable_submatrix(M)
        assert rect.size == brute_1listable_area(M)


class TestSampler:
    def test_budget_defaults(self):
        assert SearchBudget().seed == get_setting("default_seed")
        with pytest.raises(PreconditionError):
            SearchBudget(trials=0)

    def test_deterministic_per_seed(self):
        c = cube_copies()
        a = run_sampler(c, SearchBudget(trials=300, seed=7), workers=1)
        b = run_sampler(c, SearchBudget(trials=300, seed=7), workers=1)
        assert a == b

    def test_success_rate_and_witness(self):
        c = cube_copies()
        outcome = run_sampler(c, SearchBudget(trials=2000, seed=11), workers=1)
        assert outcome.epsilon == Fraction(1, 2)
        # 单次试验的成功概率恰为 13/36
        assert abs(outcome.successes / outcome.trials - 13 / 36) < 0.06
        validate_biclique(c, outcome.best)
        assert outcome.best.edges <= rs_exact(c).edges
        assert outcome.weakest_edges is not None
        assert 1 <= outcome.weakest_edges <= outcome.best.edges

    def test_invalid_trial_is_not_counted(self, monkeypatch):
        c = cube_copies()
        budget = SearchBudget(trials=300, seed=7)
        clean = run_sampler(c, budget, workers=1)
        assert clean.rejected == 0 and clean.successes > 0

        monkeypatch.setattr(search, "_run_trials", corrupt_first_success(search._run_trials))
        outcome = run_sampler(c, budget, workers=1)
        assert outcome.rejected == 1
        assert outcome.successes == clean.successes - 1
        validate_biclique(c, outcome.best)

    def test_randomized_biclique_returns_best(self):
        c = cube_copies()
        budget = SearchBudget(trials=200, seed=3)
        assert randomized_biclique(c, budget, workers=1) == run_sampler(c, budget, workers=1).best

    def test_zero_density_rejected(self):
        c = Configuration(1, (Point((5,)),), (Hyperplane((1,), 0),))
        with pytest.raises(PreconditionError):
            run_sampler(c, SearchBudget(trials=5))

    def test_greedy_is_valid_and_bounded(self):
        c = cube_copies()
        bic = greedy_biclique(c)
        validate_biclique(c, bic)
        assert bic.edges == 12
        assert greedy_biclique(c, SearchBudget(subset_size_cap=1)).edges <= rs_exact(c).edges


class TestRunChunked:
    def test_order_preserved_in_process_pool(self):
        assert run_chunked(list, range(1000), workers=2, chunk_size=7) == list(range(1000))

    def test_serial_path(self):
        assert run_chunked(list, [], workers=1) == []
        assert run_chunked(list, range(10), workers=1, chunk_size=3) == list(range(10))

    def test_pool_workers_receive_runtime_overrides(self, monkeypatch):
        class FreshProcessPool:
            """在本进程内模拟子进程：先清空配置状态，再执行 initializer"""

            def __init__(self, max_workers, initializer=None, initargs=()):
                clear_overrides()
                set_config_path(None)
                initializer(*initargs)

            def __enter__(self):
                return self

            def __exit__(self, *exc):
                return False

            def map(self, fn, chunks):
                return map(fn, chunks)

        monkeypatch.setattr(workers, "ProcessPoolExecutor", FreshProcessPool)
        override_settings(exact_search_cap=5)
        result = run_chunked(lambda chunk: [get_setting("exact_search_cap")] * len(chunk),
                             range(10), workers=2, chunk_size=3)
        assert result == [5] * 10
