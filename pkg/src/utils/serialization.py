#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - JSON 编解码

所有有理数以 "num/den" 字符串写出（整数只写分子），读入时也接受裸整数。
每个文档带 "kind" 字段，load_document() 据此分派：

- matrix:        {"rows", "cols", "entries"}
- point:         {"coords"}
- hyperplane:    {"normal", "offset"}
- flat:          {"ambient_dim", "rows", "empty"}
- configuration: {"dim", "points", "hyperplanes", "partition"?}
- set_families:  {"ground_size", "family_A", "family_B"}
- biclique:      {"flat", "points", "hyperplanes", "edges"}
- rectangle:     {"rows", "cols", "size", "value"?}
- protocol:      ProtocolTree.to_json()
"""

import json
import logging

from engine.configurations import Configuration, ParallelPartition, Rectangle
from engine.errors import FlatRankError, PreconditionError
from engine.exact_linalg import RationalMatrix, format_rational, to_rational
from engine.geometry import Flat, Hyperplane, Point
from engine.search import Biclique
from engine.set_families import SetFamilyPair

_logger = logging.getLogger("FlatRank")


def _fmt_vector(values):
    return [format_rational(x) for x in values]


def _require(data, *keys):
    missing = [k for k in keys if k not in data]
    if missing:
        raise PreconditionError(f"JSON 缺少字段: {', '.join(missing)}")


# ============================================================================
# 矩阵
# ============================================================================
def matrix_to_json(M: RationalMatrix) -> dict:
    return {
        "kind": "matrix",
        "rows": M.rows,
        "cols": M.cols,
        "entries": [_fmt_vector(M.row(i)) for i in range(M.rows)],
    }


def matrix_from_json(data: dict) -> RationalMatrix:
    """
    解析矩阵文档

    异常:
        PreconditionError: 字段缺失、形状不符或含浮点数
    """
    _require(data, "entries")
    entries = data["entries"]
    rows = data.get("rows", len(entries))
    cols = data.get("cols", len(entries[0]) if entries else 0)
    if len(entries) != rows or any(len(r) != cols for r in entries):
        raise PreconditionError(f"矩阵形状与声明的 {rows}×{cols} 不符")
    return RationalMatrix.from_rows([[to_rational(x) for x in r] for r in entries], cols=cols)


# ============================================================================
# 几何对象
# ============================================================================
def point_to_json(p: Point) -> list:
    return _fmt_vector(p.coords)


def hyperplane_to_json(h: Hyperplane) -> dict:
    return {"normal": _fmt_vector(h.normal), "offset": format_rational(h.offset)}


def hyperplane_from_json(data) -> Hyperplane:
    _require(data, "normal")
    return Hyperplane(tuple(data["normal"]), data.get("offset", 0))


def flat_to_json(f: Flat) -> dict:
    return {
        "kind": "flat",
        "ambient_dim": f.ambient_dim,
        "dim": f.dim,
        "empty": f.empty,
        "rows": [_fmt_vector(r) for r in f.rows],
    }


def flat_from_json(data: dict) -> Flat:
    _require(data, "ambient_dim")
    if data.get("empty"):
        return Flat.empty_flat(data["ambient_dim"])
    return Flat.from_system(data.get("rows", []), data["ambient_dim"])


def partition_to_json(pp: ParallelPartition) -> dict:
    out = {"blocks": [list(b) for b in pp.blocks], "k": pp.block_size_bound}
    if pp.block_normals is not None:
        out["normals"] = [_fmt_vector(a) for a in pp.block_normals]
    if pp.block_columns is not None:
        out["columns"] = [list(b) for b in pp.block_columns]
    return out


def partition_from_json(data) -> ParallelPartition:
    """接受块列表，或 {"blocks", "k", "normals"?, "columns"?}"""
    if isinstance(data, list):
        data = {"blocks": data}
    _require(data, "blocks")
    blocks = data["blocks"]
    k = data.get("k", max((len(b) for b in blocks), default=0))
    normals = data.get("normals")
    if normals is not None:
        normals = [[to_rational(x) for x in a] for a in normals]
    return ParallelPartition(blocks, k, normals, data.get("columns"))


def configuration_to_json(c: Configuration, pp: ParallelPartition = None) -> dict:
    out = {
        "kind": "configuration",
        "dim": c.dim,
        "points": [point_to_json(p) for p in c.points],
        "hyperplanes": [hyperplane_to_json(h) for h in c.hyperplanes],
    }
    if pp is not None:
        out["partition"] = partition_to_json(pp)
    return out


def configuration_from_json(data: dict):
    """
    解析配置文档

    返回:
        (Configuration, ParallelPartition 或 None)
    """
    _require(data, "points", "hyperplanes")
    points = [Point(tuple(p)) for p in data["points"]]
    hyperplanes = [hyperplane_from_json(h) for h in data["hyperplanes"]]
    dim = data.get("dim", points[0].dim if points else 0)
    c = Configuration(dim, tuple(points), tuple(hyperplanes))
    pp = partition_from_json(data["partition"]) if data.get("partition") is not None else None
    return c, pp


# ============================================================================
# 集族
# ============================================================================
def family_pair_to_json(fp: SetFamilyPair) -> dict:
    return {
        "kind": "set_families",
        "ground_size": fp.ground_size,
        "family_A": [list(s) for s in fp.family_A],
        "family_B": [list(s) for s in fp.family_B],
    }


def family_pair_from_json(data: dict) -> SetFamilyPair:
    _require(data, "ground_size", "family_A")
    family_b = data.get("family_B", data["family_A"])
    return SetFamilyPair(int(data["ground_size"]), tuple(map(tuple, data["family_A"])),
                         tuple(map(tuple, family_b)))


# ============================================================================
# 证据
# ============================================================================
def biclique_to_json(bic: Biclique) -> dict:
    return {
        "kind": "biclique",
        "flat": flat_to_json(bic.flat),
        "points": list(bic.point_indices),
        "hyperplanes": list(bic.hyperplane_indices),
        "edges": bic.edges,
    }


def biclique_from_json(data: dict) -> Biclique:
    _require(data, "flat", "points", "hyperplanes")
    return Biclique(flat_from_json(data["flat"]), tuple(data["points"]), tuple(data["hyperplanes"]))


def rectangle_to_json(rect: Rectangle, value=None) -> dict:
    out = {"kind": "rectangle", "rows": list(rect.row_indices), "cols": list(rect.col_indices),
           "size": rect.size}
    if value is not None:
        out["value"] = format_rational(value)
    return out


def rectangle_from_json(data: dict) -> Rectangle:
    _require(data, "rows", "cols")
    return Rectangle(tuple(data["rows"]), tuple(data["cols"]))


# ============================================================================
# 文档级接口
# ============================================================================
_LOADERS = {
    "matrix": matrix_from_json,
    "flat": flat_from_json,
    "configuration": configuration_from_json,
    "set_families": family_pair_from_json,
    "biclique": biclique_from_json,
    "rectangle": rectangle_from_json,
}


def _guess_kind(data):
    if "entries" in data:
        return "matrix"
    if "hyperplanes" in data and "points" in data and "flat" not in data:
        return "configuration"
    if "family_A" in data:
        return "set_families"
    return None


def load_document(source):
    """
    解析 JSON 文本或已解析的 dict，按 "kind" 分派

    返回:
        (kind, 对象)；configuration 的对象为 (Configuration, ParallelPartition 或 None)

    异常:
        PreconditionError: JSON 格式错误或 kind 未知
    """
    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as e:
            raise PreconditionError(f"输入不是合法的 JSON: {e}") from e
    else:
        data = source
    if not isinstance(data, dict):
        raise PreconditionError("输入文档必须是 JSON 对象")

    kind = data.get("kind") or _guess_kind(data)
    loader = _LOADERS.get(kind)
    if loader is None:
        raise PreconditionError(f"未知的文档类型: {kind!r}")
    try:
        return kind, loader(data)
    except FlatRankError:
        raise
    except (TypeError, ValueError, KeyError, IndexError) as e:
        raise PreconditionError(f"{kind} 文档格式错误: {e}") from e


def dumps(document) -> str:
    """确定性的 JSON 文本（键排序、UTF-8 原样输出）"""
    return json.dumps(document, sort_keys=True, ensure_ascii=False, indent=2)
