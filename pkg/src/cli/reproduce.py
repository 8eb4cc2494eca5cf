#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 验收套件

reproduce 子命令的各个作用域：

- lattice:   格点构造（d ∈ {5, 10, 17}，受 --max-d 限制）
- grid:      网格族 δ、0-矩形密度、配置视图交叉核对，以及 {t}-交叉相交穷举
- reduction: 3-listable 约化流水线与多项式秩证书
- protocol:  随机布尔矩阵的协议树
- sampler:   d = 3 配置上随机采样器的成功率

每个套件把表格行写入 report.results[作用域]，失败行同时记入 report.failures。
随机实例全部由 default_rng([seed, 套件编号, 实例编号]) 生成。
"""

import itertools
import logging
import math
import sys
from fractions import Fraction

import numpy as np
from tqdm import tqdm

from engine.configurations import Configuration, incidence_stats, listability
from engine.constructions import lattice_construction, verify_lattice_claims
from engine.errors import FlatRankError
from engine.exact_linalg import RationalMatrix, SupportPolynomial, entrywise_poly, poly_rank_certificate, rank
from engine.geometry import Hyperplane, Point
from engine.protocol import build_protocol, rank_lower_bound, validate_protocol
from engine.reductions import find_1listable_recursive, listability_step, normalize_columns
from engine.search import Biclique, SearchBudget, run_sampler, sampler_thresholds
from engine.set_families import (
    GridFamilyParams,
    disjoint_fraction,
    family_configuration,
    frankl_rodl_check,
    grid_delta_formula,
    grid_family,
    grid_trend_table,
    max_zero_rectangle_density,
)
from utils.serialization import biclique_to_json

_logger = logging.getLogger("FlatRank")

SCOPES = ("all", "lattice", "grid", "reduction", "protocol", "sampler")

LATTICE_DIMS = (5, 10, 17)
GRID_PARAMS = ((2, 2), (2, 3), (3, 2), (4, 2))
FRANKL_RODL_DIMS = (2, 3)

REDUCTION_INSTANCES = 100
POLY_INSTANCES = 100
PROTOCOL_INSTANCES = 50
SAMPLER_TRIALS = 10_000


def _progress(iterable, desc, total=None):
    return tqdm(iterable, desc=desc, total=total, file=sys.stderr, leave=False,
                disable=not sys.stderr.isatty())


# ============================================================================
# 格点构造
# ============================================================================
def lattice_samples_for(d):
    """d ≤ 10 时 1000 个随机交平面，更大的 d 只取 200 个"""
    return 1000 if d <= 10 else 200


def lattice_row(d, seed, samples=None, exact_rs_max_d=5, workers=None):
    """
    单个维数的格点校验

    返回:
        (表格行, 失败的 claim 列表)
    """
    lc = lattice_construction(d)
    samples = lattice_samples_for(d) if samples is None else samples
    report = verify_lattice_claims(lc, samples=samples, seed=seed,
                                   exact_rs_max_d=exact_rs_max_d, workers=workers)
    row = {"d": d, "sizes": report.sizes, "samples": samples, "claims": {}}
    failed = []
    for claim in report.claims:
        row["claims"][claim.name] = {"holds": claim.holds, "value": claim.value,
                                     "bound": claim.bound, "note": claim.note}
        if not claim.holds:
            witness = biclique_to_json(claim.witness) if isinstance(claim.witness, Biclique) else claim.witness
            failed.append({"d": d, "claim": claim.name, "value": claim.value,
                           "bound": claim.bound, "witness": witness})
    return row, failed


def lattice_suite(report, seed, max_d=17, workers=None):
    dims = [d for d in LATTICE_DIMS if d <= max_d]
    if not dims:
        _logger.warning(f"--max-d {max_d} 小于 5，格点套件没有可运行的维数")
    rows = []
    for d in _progress(dims, "lattice"):
        row, failed = lattice_row(d, seed, workers=workers)
        rows.append(row)
        for f in failed:
            report.fail(f)
    report.results["lattice"] = rows


# ============================================================================
# 网格族
# ============================================================================
def grid_row(a, b):
    """
    (a, b) 网格族的检查行

    返回:
        (表格行, 失败原因列表)
    """
    params = GridFamilyParams(a, b)
    fp = grid_family(params)
    delta = disjoint_fraction(fp)
    formula = grid_delta_formula(a, b)
    density = incidence_stats(family_configuration(fp)).density
    zero_density = max_zero_rectangle_density(fp)
    row = {"a": a, "b": b, "family_size": len(fp.family_A), "delta": delta, "delta_formula": formula,
           "configuration_density": density, "max_zero_density": zero_density}
    problems = []
    if delta != formula:
        problems.append("delta")
    if density != delta:
        problems.append("configuration_density")
    if a % 2 == 0:
        expected = Fraction(1, 2 ** (2 * b))
        row["zero_density_expected"] = expected
        if zero_density != expected:
            problems.append("max_zero_density")
    return row, problems


def frankl_rodl_row(d):
    fr = frankl_rodl_check(d)
    best_t = min(t for t, (p, _, _) in fr.per_t.items() if p == fr.max_product)
    _, family_r, family_s = fr.per_t[best_t]
    row = {"d": d, "max_product": fr.max_product, "bound": fr.bound, "attains_bound": fr.attains_bound,
           "t": best_t, "R": [list(s) for s in family_r], "S": [list(s) for s in family_s],
           "per_t": {str(t): p for t, (p, _, _) in fr.per_t.items()}}
    return row, fr.passed and fr.attains_bound


def grid_suite(report):
    rows = []
    for a, b in _progress(GRID_PARAMS, "grid"):
        row, problems = grid_row(a, b)
        rows.append(row)
        if problems:
            report.fail({"a": a, "b": b, "failed": problems, "row": row})
    report.results["grid"] = rows

    fr_rows = []
    for d in FRANKL_RODL_DIMS:
        row, ok = frankl_rodl_row(d)
        fr_rows.append(row)
        if not ok:
            report.fail({"frankl_rodl_d": d, "max_product": row["max_product"], "bound": row["bound"]})
    report.results["frankl_rodl"] = fr_rows
    report.results["grid_trend"] = grid_trend_table(1, range(1, 7))


# ============================================================================
# 约化与多项式秩
# ============================================================================
def random_three_listable(rng):
    """
    秩 ≤ 4 的 3-listable 矩阵（≤ 8×8）

    行取 {0,1}^r 的随机向量，列向量支撑至多 2 个坐标、取值 ±c，
    于是每列至多 3 个不同值。
    """
    r = int(rng.integers(1, 5))
    n, m = int(rng.integers(2, 9)), int(rng.integers(2, 9))
    P = rng.integers(0, 2, size=(n, r))
    Q = np.zeros((r, m), dtype=np.int64)
    for j in range(m):
        support = rng.choice(r, size=min(r, int(rng.integers(1, 3))), replace=False)
        scale = int(rng.integers(1, 4))
        sign = int(rng.choice((-1, 1)))
        Q[support[0], j] = scale
        if len(support) > 1:
            Q[support[1], j] = sign * scale
    return RationalMatrix.from_rows((P @ Q).tolist(), cols=m)


def reduction_row(M):
    """对一个矩阵跑完整约化，返回 (行, 是否通过)"""
    row = {"shape": list(M.shape), "rank": rank(M), "listability": listability(M)}
    N, _ = normalize_columns(M)
    if N.cols:
        stepped = listability_step(N)
        row["step_listability"] = listability(stepped)
        row["step_rank"] = rank(stepped)
        r = rank(N)
        if row["step_listability"] > 2 or row["step_rank"] > r * r + r:
            return row, False
    rect = find_1listable_recursive(M)
    row["rectangle"] = [list(rect.row_indices), list(rect.col_indices)]
    return row, rect.is_nonempty


def random_low_rank_with_poly(rng):
    """秩 ≤ 3 的整数矩阵与次数 ≤ 2 的多项式"""
    r = int(rng.integers(1, 4))
    n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
    P = rng.integers(-2, 3, size=(n, r))
    Q = rng.integers(-2, 3, size=(r, m))
    M = RationalMatrix.from_rows((P @ Q).tolist(), cols=m)
    coefficients = []
    for deg in range(3):
        if rng.random() < 0.7:
            coefficients.append((deg, Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))))
    if not any(coef for _, coef in coefficients):
        coefficients.append((1, 1))
    return M, SupportPolynomial(tuple(coefficients))


def poly_row(M, p):
    cert, bound = poly_rank_certificate(M, p)
    image = entrywise_poly(M, p)
    d = rank(M)
    row = {"rank": d, "support": list(p.support), "bound": bound, "image_rank": rank(image)}
    ok = cert.product() == image and bound == sum(d ** c for c in p.support) and row["image_rank"] <= bound
    return row, ok


def reduction_suite(report, seed):
    rows, failures = [], 0
    for i in _progress(range(REDUCTION_INSTANCES), "reduction"):
        M = random_three_listable(np.random.default_rng([seed, 5, i]))
        try:
            row, ok = reduction_row(M)
        except FlatRankError as e:
            row, ok = {"shape": list(M.shape), "error": str(e)}, False
        rows.append(row)
        if not ok:
            failures += 1
            report.fail({"reduction_instance": i, "row": row})

    poly_rows = []
    for i in _progress(range(POLY_INSTANCES), "poly-rank"):
        M, p = random_low_rank_with_poly(np.random.default_rng([seed, 6, i]))
        row, ok = poly_row(M, p)
        poly_rows.append(row)
        if not ok:
            report.fail({"poly_instance": i, "row": row})

    report.results["reduction"] = {"instances": REDUCTION_INSTANCES, "failures": failures,
                                   "max_listability": max(r.get("listability", 0) for r in rows)}
    report.results["poly_rank"] = {"instances": POLY_INSTANCES,
                                   "max_bound": max(r["bound"] for r in poly_rows),
                                   "all_certified": all(r["image_rank"] <= r["bound"] for r in poly_rows)}


# ============================================================================
# 协议树
# ============================================================================
def random_boolean(rng, max_side=12):
    n, m = int(rng.integers(1, max_side + 1)), int(rng.integers(1, max_side + 1))
    return RationalMatrix.from_rows(rng.integers(0, 2, size=(n, m)).tolist(), cols=m)


def protocol_row(M):
    tree = build_protocol(M)
    validate_protocol(tree, M)
    row = {"shape": list(M.shape), "rank": rank(M), "depth": tree.depth,
           "lower_bound": rank_lower_bound(M), "leaves": len(tree.leaves())}
    return row, row["depth"] >= row["lower_bound"]


def protocol_suite(report, seed):
    rows = []
    for i in _progress(range(PROTOCOL_INSTANCES), "protocol"):
        M = random_boolean(np.random.default_rng([seed, 9, i]))
        try:
            row, ok = protocol_row(M)
        except FlatRankError as e:
            row, ok = {"shape": list(M.shape), "error": str(e)}, False
        rows.append(row)
        if not ok:
            report.fail({"protocol_instance": i, "row": row})
    report.results["protocol"] = {
        "instances": PROTOCOL_INSTANCES,
        "max_depth": max(r.get("depth", 0) for r in rows),
        "min_slack": min((r["depth"] - r["lower_bound"] for r in rows if "depth" in r), default=None),
    }


# ============================================================================
# 随机采样器
# ============================================================================
def sampler_configuration(copies=3):
    """
    d = 3：{0,1}^3 的每个顶点取 copies 份，超平面 x_i = 0 与 x_i = 1

    每个点恰在 3 个超平面上，ε = 1/2；copies = 3 时 n = 24 > 2/ε³。
    """
    points = tuple(Point(v) for v in itertools.product((0, 1), repeat=3) for _ in range(copies))
    hyperplanes = tuple(Hyperplane(tuple(int(i == k) for i in range(3)), b) for k in range(3) for b in (0, 1))
    return Configuration(3, points, hyperplanes)


def sampler_row(c, seed, trials=SAMPLER_TRIALS, workers=None):
    outcome = run_sampler(c, SearchBudget(trials=trials, seed=seed), workers)
    eps, d = outcome.epsilon, c.dim
    expected = eps ** d / 6
    sigma = math.sqrt(float(expected) * (1 - float(expected)) / trials)
    rate = Fraction(outcome.successes, trials)
    edge_bound = eps ** (2 * d) / (6 * d) * c.n * c.m
    row = {"d": d, "n": c.n, "m": c.m, "epsilon": eps, "trials": trials, "successes": outcome.successes,
           "rejected": outcome.rejected, "success_rate": rate, "rate_lower_bound": expected, "sigma": sigma,
           "thresholds": list(sampler_thresholds(c, eps)),
           "best_edges": outcome.best.edges if outcome.best else 0,
           "weakest_edges": outcome.weakest_edges, "edge_bound": edge_bound}
    ok = outcome.rejected == 0 \
        and float(rate) >= float(expected) - 3 * sigma \
        and (outcome.weakest_edges is None or outcome.weakest_edges >= edge_bound)
    return row, ok


def sampler_suite(report, seed, workers=None):
    row, ok = sampler_row(sampler_configuration(), seed, workers=workers)
    report.results["sampler"] = row
    if not ok:
        report.fail({"sampler": row})


def run_scope(report, scope, seed, max_d=17, workers=None):
    """执行一个作用域（all 依次执行全部）"""
    if scope == "all":
        for name in SCOPES[1:]:
            run_scope(report, name, seed, max_d, workers)
        return
    _logger.info(f"reproduce {scope} 开始")
    if scope == "lattice":
        lattice_suite(report, seed, max_d, workers)
    elif scope == "grid":
        grid_suite(report)
    elif scope == "reduction":
        reduction_suite(report, seed)
    elif scope == "protocol":
        protocol_suite(report, seed)
    elif scope == "sampler":
        sampler_suite(report, seed, workers)
    _logger.info(f"reproduce {scope} 结束: {'通过' if report.passed else '存在失败项'}")
