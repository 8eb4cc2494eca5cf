#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 命令行入口

run(argv) 解析参数、执行子命令，把 RunReport 写到 stdout，返回退出码：
0 成功；1 校验失败（带反例）；2 用法错误、输入格式错误或超出枚举上限。

子命令：gen, stats, rs-exact, rect-max, biclique-sample, reduce, protocol, verify, reproduce
输入文档从文件参数或 stdin 读取，可直接用管道串联：gen grid --a 2 --b 2 | stats
"""

import argparse
import logging
import sys
import time
from fractions import Fraction

from cli.report import FORMATS, RunReport, to_plain
from cli.reproduce import SCOPES, frankl_rodl_row, grid_row, lattice_row, run_scope
from engine import __version__
from engine.configurations import (
    arity,
    con_of,
    find_parallel_partition,
    incidence_stats,
    is_valid_parallel_partition,
    lift_rectangle,
    listability,
    mat_of,
    monochromatic_from_biclique,
    offset_set,
)
from engine.constructions import DENSE, UNIVERSE, lattice_construction
from engine.errors import (
    BitLengthError,
    ConfigurationError,
    DimensionMismatchError,
    EnumerationCapError,
    FlatRankError,
    InvalidWitnessError,
    PreconditionError,
    ProtocolError,
    VerificationError,
)
from engine.exact_linalg import rank, to_rational
from engine.protocol import build_protocol, rank_lower_bound, validate_protocol
from engine.reductions import ReductionTrace, binarize_two_valued, find_1listable_recursive
from engine.search import (
    SearchBudget,
    greedy_biclique,
    max_1listable_submatrix,
    max_monochromatic_rectangle,
    rs_exact,
    run_sampler,
    validate_biclique,
)
from engine.set_families import (
    GridFamilyParams,
    SetFamilyPair,
    cross_disjoint_epsilon,
    cross_intersecting_profile,
    disjoint_fraction,
    family_configuration,
    grid_family,
    intersection_matrix,
    random_sparse_family,
)
from utils.cache import ResultCache
from utils.config import clear_overrides, get_setting, override_settings, set_config_path
from utils.serialization import (
    biclique_to_json,
    configuration_to_json,
    dumps,
    family_pair_to_json,
    load_document,
    matrix_to_json,
    rectangle_to_json,
)

_logger = logging.getLogger("FlatRank")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# 校验类失败 → 1，其余 FlatRankError → 2
_FAILURE_ERRORS = (VerificationError, InvalidWitnessError, ProtocolError)
_USAGE_ERRORS = (PreconditionError, EnumerationCapError, ConfigurationError,
                 DimensionMismatchError, BitLengthError)


# ============================================================================
# 参数解析
# ============================================================================
def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="随机种子（默认取配置 default_seed）")
    common.add_argument("--format", choices=FORMATS, default="json", help="报告格式")
    common.add_argument("--cap", type=int, default=None,
                        help="本次运行的 enumeration_cap 与 exact_search_cap")
    common.add_argument("--config", default=None, help="配置文件路径")
    common.add_argument("--workers", type=int, default=None, help="进程数")
    common.add_argument("--cache", action="store_true", help="使用结果缓存")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="控制台输出 DEBUG 日志")
    verbosity.add_argument("--quiet", action="store_true", help="控制台只输出 WARNING 及以上")
    return common


def _input_arg(parser):
    parser.add_argument("input", nargs="?", default="-", help="输入 JSON 文件（默认 stdin）")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="flatrank", description="点–超平面配置与低秩可列矩阵的精确工具")
    parser.add_argument("--version", action="version", version=f"flatrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="生成实例文档")
    gen_sub = gen.add_subparsers(dest="target", required=True)
    p = gen_sub.add_parser("lattice", parents=[common], help="格点构造的配置")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--which", choices=(UNIVERSE, DENSE), default=UNIVERSE)
    p = gen_sub.add_parser("grid", parents=[common], help="网格集族")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p = gen_sub.add_parser("sparse", parents=[common], help="随机稀疏集族")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p = gen_sub.add_parser("con", parents=[common], help="矩阵 → Con(M) 配置（带平行划分）")
    _input_arg(p)
    p = gen_sub.add_parser("mat", parents=[common], help="带平行划分的配置 → Mat 矩阵")
    _input_arg(p)

    p = sub.add_parser("stats", parents=[common], help="实例的基本统计")
    _input_arg(p)
    p.add_argument("--k", type=int, default=None, help="寻找平行 k-划分")

    p = sub.add_parser("rs-exact", parents=[common], help="精确最大完全二部子图")
    _input_arg(p)

    p = sub.add_parser("rect-max", parents=[common], help="最大单色矩形 / 1-listable 子矩阵")
    _input_arg(p)
    p.add_argument("--value", default=None, help="只找取该值的单色矩形")
    p.add_argument("--listable", action="store_true", help="改为最大 1-listable 子矩阵")

    p = sub.add_parser("biclique-sample", parents=[common], help="随机采样器与贪心基线")
    _input_arg(p)
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("reduce", parents=[common], help="可列性约化到 1-listable 子矩阵")
    _input_arg(p)

    p = sub.add_parser("protocol", parents=[common], help="构建并校验协议树")
    _input_arg(p)
    p.add_argument("--dot", action="store_true", help="输出 Graphviz DOT")

    verify = sub.add_parser("verify", help="校验构造的性质")
    verify_sub = verify.add_subparsers(dest="target", required=True)
    p = verify_sub.add_parser("lattice", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=None, help="随机交平面数（默认 d ≤ 10 时 1000）")
    p.add_argument("--exact-rs-max-d", type=int, default=5)
    p = verify_sub.add_parser("grid", parents=[common])
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p = verify_sub.add_parser("frankl-rodl", parents=[common])
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("reproduce", parents=[common], help="运行验收套件")
    p.add_argument("scope", choices=SCOPES)
    p.add_argument("--max-d", type=int, default=17)
    return parser


# ============================================================================
# 输入
# ============================================================================
def _read_document(path):
    if path in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise PreconditionError(f"无法读取输入文件 {path}: {e}") from e
    return load_document(text)


def _matrix_input(args):
    """
    读取矩阵；也接受带划分的配置（取 Mat）与集族（取交集矩阵）

    返回:
        (RationalMatrix, 原文档 kind)
    """
    kind, obj = _read_document(args.input)
    if kind == "matrix":
        return obj, kind
    if kind == "configuration":
        c, pp = obj
        if pp is None:
            raise PreconditionError("配置缺少平行划分，无法得到矩阵")
        return mat_of(c, pp), kind
    if kind == "set_families":
        return intersection_matrix(obj), kind
    raise PreconditionError(f"此命令需要矩阵输入，实际为 {kind}")


def _configuration_input(args):
    kind, obj = _read_document(args.input)
    if kind == "configuration":
        return obj
    if kind == "set_families":
        return family_configuration(obj), None
    raise PreconditionError(f"此命令需要配置输入，实际为 {kind}")


def _seed(args):
    return get_setting("default_seed") if args.seed is None else args.seed


def _with_cache(args, report, inputs, compute):
    """
    命中时直接填入缓存的 results / witnesses / failures，否则运行 compute(report) 并写入
    """
    if not (args.cache or get_setting("result_cache_enabled")):
        compute(report)
        return
    cache = ResultCache()
    try:
        hit = cache.get(report.command, inputs, report.seed)
        if hit is not None:
            report.results, report.witnesses = hit["results"], hit["witnesses"]
            for row in hit["failures"]:
                report.fail(row)
            return
        compute(report)
        plain = report.to_dict()
        cache.set(report.command, inputs, report.seed,
                  {k: plain[k] for k in ("results", "witnesses", "failures")})
    finally:
        cache.close()


# ============================================================================
# 子命令
# ============================================================================
def cmd_gen(args):
    if args.target == "lattice":
        lc = lattice_construction(args.d)
        return dumps(configuration_to_json(lc.configuration(args.which)))
    if args.target == "grid":
        return dumps(family_pair_to_json(grid_family(GridFamilyParams(args.a, args.b))))
    if args.target == "sparse":
        seed = _seed(args)
        family_a = random_sparse_family(args.d, args.size, args.count, seed)
        family_b = random_sparse_family(args.d, args.size, args.count, seed + 1)
        return dumps(family_pair_to_json(SetFamilyPair(args.d, family_a, family_b)))
    M, kind = _matrix_input(args)
    if args.target == "mat":
        return dumps(matrix_to_json(M))
    c, pp = con_of(M)
    return dumps(configuration_to_json(c, pp))


def _configuration_stats(report, c, pp, k):
    stats = incidence_stats(c)
    report.results.update({"kind": "configuration", "dim": c.dim, "n": c.n, "m": c.m,
                           "incidences": stats.incidences, "density": stats.density})
    if pp is None and k is not None:
        pp = find_parallel_partition(c, k)
        report.results["partition_found"] = pp is not None
    if pp is not None:
        valid = is_valid_parallel_partition(c, pp)
        report.results["partition_valid"] = valid
        if valid:
            M = mat_of(c, pp)
            report.results.update({"blocks": len(pp.blocks), "k": pp.block_size_bound,
                                   "matrix_rank": rank(M), "listability": listability(M),
                                   "offsets": sorted(offset_set(c, pp))})


def cmd_stats(args):
    kind, obj = _read_document(args.input)
    report = RunReport("stats", {"kind": kind, "k": args.k})
    if kind == "configuration":
        c, pp = obj
        _configuration_stats(report, c, pp, args.k)
    elif kind == "set_families":
        fp = obj
        report.results.update({
            "kind": kind, "ground_size": fp.ground_size,
            "sizes": [len(fp.family_A), len(fp.family_B)],
            "epsilon": cross_disjoint_epsilon(fp), "delta": disjoint_fraction(fp),
            "profile": list(cross_intersecting_profile(fp)),
            "intersection_rank": rank(intersection_matrix(fp)),
        })
        try:
            report.results["configuration_density"] = incidence_stats(family_configuration(fp)).density
        except ConfigurationError as e:
            _logger.warning(f"集族没有配置视图: {e}")
    elif kind == "matrix":
        M = obj
        report.results.update({"kind": kind, "shape": list(M.shape), "rank": rank(M),
                               "listability": listability(M), "arity": arity(M),
                               "boolean": M.is_boolean()})
    else:
        raise PreconditionError(f"stats 不支持 {kind} 文档")
    return report


def cmd_rs_exact(args):
    c, pp = _configuration_input(args)
    report = RunReport("rs-exact", {"dim": c.dim, "n": c.n, "m": c.m})

    def compute(rep):
        bic = rs_exact(c)
        validate_biclique(c, bic)
        rep.results.update({"rs": bic.edges, "points": len(bic.point_indices),
                            "hyperplanes": len(bic.hyperplane_indices), "flat_dim": bic.flat.dim})
        rep.witnesses["biclique"] = biclique_to_json(bic)
        if pp is not None and is_valid_parallel_partition(c, pp):
            rect, value = monochromatic_from_biclique(c, pp, bic)
            rep.results["monochromatic_size"] = rect.size
            rep.witnesses["rectangle"] = rectangle_to_json(rect, value)
            if pp.block_columns is not None:
                lifted = lift_rectangle(rect, pp)
                rep.results["lifted_size"] = lifted.size
                rep.witnesses["lifted_rectangle"] = rectangle_to_json(lifted, value)

    _with_cache(args, report, configuration_to_json(c, pp), compute)
    return report


def _check_rectangle(M, rect, per_column):
    for j in rect.col_indices:
        values = {M[i, j] for i in rect.row_indices}
        if len(values) > 1:
            raise InvalidWitnessError("矩形不满足单色 / 1-listable 条件", witness={"column": j})
    if not per_column and len({M[i, j] for i, j in rect.cells()}) > 1:
        raise InvalidWitnessError("矩形不是单色的", witness={"rows": rect.row_indices})


def cmd_rect_max(args):
    M, kind = _matrix_input(args)
    report = RunReport("rect-max", {"source": kind, "shape": list(M.shape),
                                    "value": args.value, "listable": args.listable})
    if args.listable:
        rect, value = max_1listable_submatrix(M), None
    else:
        target = None if args.value is None else to_rational(args.value)
        found = max_monochromatic_rectangle(M, value=target)
        if found is None:
            report.results.update({"size": 0, "density": Fraction(0)})
            return report
        rect, value = found
    _check_rectangle(M, rect, args.listable)
    report.results.update({"size": rect.size, "rows": len(rect.row_indices), "cols": len(rect.col_indices),
                           "density": Fraction(rect.size, M.rows * M.cols)})
    if value is not None:
        report.results["value"] = value
    report.witnesses["rectangle"] = rectangle_to_json(rect, value)
    return report


def cmd_biclique_sample(args):
    c, _ = _configuration_input(args)
    seed = _seed(args)
    report = RunReport("biclique-sample", {"dim": c.dim, "n": c.n, "m": c.m, "trials": args.trials}, seed=seed)
    outcome = run_sampler(c, SearchBudget(trials=args.trials, seed=seed), args.workers)
    eps, d = outcome.epsilon, c.dim
    report.results.update({
        "epsilon": eps, "trials": outcome.trials, "successes": outcome.successes,
        "success_rate": Fraction(outcome.successes, outcome.trials),
        "rate_lower_bound": eps ** d / 6,
        "edge_bound": eps ** (2 * d) / (6 * d) * c.n * c.m,
        "weakest_edges": outcome.weakest_edges, "rejected": outcome.rejected,
    })
    if outcome.rejected:
        report.fail({"rejected_trials": outcome.rejected})
    if outcome.best is not None:
        report.results["best_edges"] = outcome.best.edges
        report.witnesses["biclique"] = biclique_to_json(outcome.best)
    greedy = greedy_biclique(c)
    validate_biclique(c, greedy)
    report.results["greedy_edges"] = greedy.edges
    report.witnesses["greedy"] = biclique_to_json(greedy)
    return report


def cmd_reduce(args):
    M, kind = _matrix_input(args)
    report = RunReport("reduce", {"source": kind, "shape": list(M.shape)})
    trace = ReductionTrace()
    report.results.update({"rank": rank(M), "listability": listability(M), "arity": arity(M)})
    if arity(M) == 2:
        report.results["binarized_rank"] = rank(binarize_two_valued(M))
    rect = find_1listable_recursive(M, trace=trace)
    report.results.update({"rectangle_size": rect.size, "density": Fraction(rect.size, M.rows * M.cols),
                           "levels": trace.levels})
    report.witnesses["rectangle"] = rectangle_to_json(rect)
    return report


def cmd_protocol(args):
    M, kind = _matrix_input(args)
    if not M.is_boolean() and arity(M) == 2:
        M = binarize_two_valued(M)
    tree = build_protocol(M)
    validate_protocol(tree, M)
    if args.dot:
        return tree.to_dot()
    report = RunReport("protocol", {"source": kind, "shape": list(M.shape)})
    report.results.update({"depth": tree.depth, "leaves": len(tree.leaves()), "rank": rank(M),
                           "rank_lower_bound": rank_lower_bound(M)})
    report.witnesses["protocol"] = tree.to_json()
    return report


def cmd_verify(args):
    seed = _seed(args)
    if args.target == "lattice":
        inputs = {"d": args.d, "samples": args.samples, "exact_rs_max_d": args.exact_rs_max_d}
        report = RunReport("verify lattice", inputs, seed=seed)

        def compute(rep):
            row, failed = lattice_row(args.d, seed, args.samples, args.exact_rs_max_d, args.workers)
            rep.results.update(row)
            for f in failed:
                rep.fail(f)

        _with_cache(args, report, inputs, compute)
        return report

    if args.target == "grid":
        inputs = {"a": args.a, "b": args.b}
        report = RunReport("verify grid", inputs, seed=seed)

        def compute(rep):
            row, problems = grid_row(args.a, args.b)
            rep.results.update(row)
            if problems:
                rep.fail({"failed": problems})

        _with_cache(args, report, inputs, compute)
        return report

    inputs = {"d": args.d}
    report = RunReport("verify frankl-rodl", inputs, seed=seed)

    def compute(rep):
        row, ok = frankl_rodl_row(args.d)
        rep.results.update(row)
        if not ok:
            rep.fail({"max_product": row["max_product"], "bound": row["bound"]})

    _with_cache(args, report, inputs, compute)
    return report


def cmd_reproduce(args):
    seed = _seed(args)
    inputs = {"scope": args.scope, "max_d": args.max_d}
    report = RunReport(f"reproduce {args.scope}", inputs, seed=seed)
    _with_cache(args, report, inputs, lambda rep: run_scope(rep, args.scope, seed, args.max_d, args.workers))
    return report


COMMANDS = {
    "gen": cmd_gen,
    "stats": cmd_stats,
    "rs-exact": cmd_rs_exact,
    "rect-max": cmd_rect_max,
    "biclique-sample": cmd_biclique_sample,
    "reduce": cmd_reduce,
    "protocol": cmd_protocol,
    "verify": cmd_verify,
    "reproduce": cmd_reproduce,
}


# ============================================================================
# 入口
# ============================================================================
def _apply_options(args):
    console_level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    for handler in _logger.handlers:
        if handler.get_name() == "console":
            handler.setLevel(console_level)
    if args.config:
        set_config_path(args.config)
    if args.cap is not None:
        override_settings(enumeration_cap=args.cap, exact_search_cap=args.cap)
    if args.workers is not None:
        override_settings(workers=args.workers)


def _failure_report(args, error):
    report = RunReport(" ".join(filter(None, (args.command, getattr(args, "target", None)))),
                       seed=getattr(args, "seed", None))
    report.fail({"error": str(error), "type": type(error).__name__, "witness": to_plain(error.witness)})
    return report


def run(argv=None) -> int:
    """
    执行一次命令行调用

    参数:
        argv: 参数列表（默认 sys.argv[1:]）

    返回:
        退出码 0 / 1 / 2
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    _apply_options(args)
    started = time.perf_counter()
    try:
        out = COMMANDS[args.command](args)
    except _FAILURE_ERRORS as e:
        _logger.error(f"校验失败: {e}")
        report = _failure_report(args, e)
        report.wall_time = time.perf_counter() - started
        print(report.render(args.format))
        return EXIT_FAILED
    except _USAGE_ERRORS as e:
        _logger.error(f"{type(e).__name__}: {e}")
        print(f"flatrank: 错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FlatRankError as e:
        _logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    finally:
        clear_overrides()
        if args.config:
            set_config_path(None)

    if isinstance(out, str):
        print(out)
        return EXIT_OK
    out.wall_time = time.perf_counter() - started
    print(out.render(args.format))
    _logger.info(f"{out.command} 完成，用时 {out.wall_time:.2f}s")
    return EXIT_OK if out.passed else EXIT_FAILED
