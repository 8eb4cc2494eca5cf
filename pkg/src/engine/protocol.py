#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 由矩形查找器构建通信协议树

递归方案（四象限拆分）：
子矩阵为常数 → 叶子；否则取查找器给出的单色矩形 A×B，
行方发送 x ∈ A（1 比特），列方发送 y ∈ B（1 比特），A×B 成为叶子，
其余至多三个象限继续递归。某一边已是全集时省去对应比特。
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from engine.configurations import Rectangle, arity
from engine.errors import EnumerationCapError, PreconditionError, ProtocolError, VerificationError
from engine.exact_linalg import RationalMatrix, format_rational, rank
from engine.search import max_monochromatic_rectangle
from utils.config import get_setting

_logger = logging.getLogger("FlatRank")

ROW = "row"
COLUMN = "column"
LEAF = "leaf"


@dataclass
class ProtocolNode:
    """
    协议树节点

    内部节点: speaker 为 ROW / COLUMN，subset 为发送 1 的下标集合，yes / no 为子节点编号
    叶子: speaker 为 LEAF，携带 rectangle 与 value
    """

    node_id: int
    parent: int = None
    branch: str = None
    speaker: str = LEAF
    subset: frozenset = frozenset()
    yes: int = None
    no: int = None
    rectangle: Rectangle = None
    value: object = None


@dataclass
class ProtocolTree:
    """协议树：nodes[0] 为根"""

    rows: int
    cols: int
    nodes: list = field(default_factory=list)

    def _add(self, parent, branch, **kwargs):
        node = ProtocolNode(len(self.nodes), parent, branch, **kwargs)
        self.nodes.append(node)
        if parent is not None:
            setattr(self.nodes[parent], branch, node.node_id)
        return node.node_id

    def evaluate(self, x, y):
        """沿树走到叶子，返回叶子的值"""
        node = self.nodes[0]
        while node.speaker != LEAF:
            coord = x if node.speaker == ROW else y
            node = self.nodes[node.yes if coord in node.subset else node.no]
        if x not in node.rectangle.row_indices or y not in node.rectangle.col_indices:
            raise ProtocolError(f"输入 ({x}, {y}) 落入的叶子不含该格", witness={"leaf": node.node_id})
        return node.value

    def leaves(self):
        """[(Rectangle, value), ...]，按节点编号排序"""
        return [(n.rectangle, n.value) for n in self.nodes if n.speaker == LEAF]

    @property
    def depth(self):
        """最坏情况下的通信比特数"""
        depths = {}
        for node in self.nodes:
            depths[node.node_id] = 0 if node.parent is None else depths[node.parent] + 1
        return max(depths[n.node_id] for n in self.nodes if n.speaker == LEAF)

    def to_json(self):
        """节点列表（带父节点链接）"""
        nodes = []
        for n in self.nodes:
            entry = {"id": n.node_id, "parent": n.parent, "branch": n.branch, "speaker": n.speaker}
            if n.speaker == LEAF:
                entry["rectangle"] = {"rows": list(n.rectangle.row_indices),
                                      "cols": list(n.rectangle.col_indices)}
                entry["value"] = format_rational(n.value)
            else:
                entry["subset"] = sorted(n.subset)
            nodes.append(entry)
        return {"kind": "protocol", "rows": self.rows, "cols": self.cols,
                "depth": self.depth, "nodes": nodes}

    def to_dot(self):
        """Graphviz DOT 文本"""
        lines = ["digraph protocol {", "  node [fontname=\"monospace\"];"]
        for n in self.nodes:
            if n.speaker == LEAF:
                label = (f"rows {list(n.rectangle.row_indices)}\\n"
                         f"cols {list(n.rectangle.col_indices)}\\n= {format_rational(n.value)}")
                lines.append(f"  n{n.node_id} [shape=box, label=\"{label}\"];")
            else:
                who = "x" if n.speaker == ROW else "y"
                lines.append(f"  n{n.node_id} [label=\"{who} ∈ {sorted(n.subset)}?\"];")
            if n.parent is not None:
                lines.append(f"  n{n.parent} -> n{n.node_id} [label=\"{1 if n.branch == 'yes' else 0}\"];")
        lines.append("}")
        return "\n".join(lines)


def rank_lower_bound(M: RationalMatrix) -> int:
    """任何正确协议的深度下界 ⌈log₂ rank(M)⌉（rank 为 0 时取 0）"""
    r = rank(M)
    return max(r - 1, 0).bit_length()


def _default_finder(M):
    return max_monochromatic_rectangle(M)


def build_protocol(M: RationalMatrix, rectangle_finder=None) -> ProtocolTree:
    """
    构建计算 M 的协议树

    参数:
        M: 非空布尔矩阵
        rectangle_finder: 对非常数布尔矩阵返回非空单色矩形（Rectangle 或 (Rectangle, value)）

    异常:
        PreconditionError: M 为空或不是布尔矩阵
        ProtocolError: 查找器返回非法矩形（witness 为该矩形）
        EnumerationCapError: 递归深度超过 recursion_depth_cap
    """
    if M.is_empty or not M.is_boolean():
        raise PreconditionError("协议构建需要非空布尔矩阵")
    finder = rectangle_finder or _default_finder
    depth_cap = get_setting("recursion_depth_cap")
    tree = ProtocolTree(M.rows, M.cols)

    def build(R, C, parent, branch, level):
        if level > depth_cap:
            raise EnumerationCapError(f"协议树深度超过上限 {depth_cap}")
        sub = M.submatrix(R, C)
        if arity(sub) == 1:
            tree._add(parent, branch, rectangle=Rectangle(R, C), value=sub[0, 0])
            return

        found = finder(sub)
        rect, _ = found if isinstance(found, tuple) else (found, None)
        if rect is None or not rect.is_nonempty \
                or rect.row_indices[-1] >= sub.rows or rect.col_indices[-1] >= sub.cols:
            raise ProtocolError("查找器返回了空的或越界的矩形", witness=rect)
        if len({sub[i, j] for i, j in rect.cells()}) != 1:
            raise ProtocolError("查找器返回的矩形不是单色的", witness=rect)

        A = [R[i] for i in rect.row_indices]
        B = [C[j] for j in rect.col_indices]
        value = sub[rect.row_indices[0], rect.col_indices[0]]
        rest_rows = [x for x in R if x not in set(A)]
        rest_cols = [y for y in C if y not in set(B)]

        def column_split(rows, parent, branch, level, hit_is_leaf):
            if not rest_cols:
                if hit_is_leaf:
                    tree._add(parent, branch, rectangle=Rectangle(rows, B), value=value)
                else:
                    build(rows, B, parent, branch, level)
                return
            node = tree._add(parent, branch, speaker=COLUMN, subset=frozenset(B))
            if hit_is_leaf:
                tree._add(node, "yes", rectangle=Rectangle(rows, B), value=value)
            else:
                build(rows, B, node, "yes", level + 1)
            build(rows, rest_cols, node, "no", level + 1)

        if not rest_rows:
            column_split(A, parent, branch, level, True)
            return
        node = tree._add(parent, branch, speaker=ROW, subset=frozenset(A))
        column_split(A, node, "yes", level + 1, True)
        column_split(rest_rows, node, "no", level + 1, False)

    build(list(range(M.rows)), list(range(M.cols)), None, None, 0)
    _logger.debug(f"协议树: {M.rows}×{M.cols}, 节点 {len(tree.nodes)} 个, 深度 {tree.depth}")
    return tree


def validate_protocol(tree: ProtocolTree, M: RationalMatrix):
    """
    校验协议树：叶子两两不交、覆盖 X×Y、各自单色，且在每个输入上求值正确

    异常:
        VerificationError: 任一条件不满足（witness 给出反例格）
    """
    if (tree.rows, tree.cols) != M.shape:
        raise VerificationError("协议树形状与矩阵不符", witness={"tree": (tree.rows, tree.cols)})
    cover = np.zeros(M.shape, dtype=np.int64)
    for rect, value in tree.leaves():
        for i, j in rect.cells():
            cover[i, j] += 1
            if M[i, j] != value:
                raise VerificationError("叶子矩形不是单色的", witness={"cell": (i, j)})
    bad = np.argwhere(cover != 1)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise VerificationError(f"格 ({i}, {j}) 被叶子覆盖 {int(cover[i, j])} 次", witness={"cell": (i, j)})
    for x in range(M.rows):
        for y in range(M.cols):
            if tree.evaluate(x, y) != M[x, y]:
                raise VerificationError("协议求值与矩阵不符", witness={"cell": (x, y)})
