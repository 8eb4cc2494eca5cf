#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 运行报告

RunReport 是每个子命令写到 stdout 的结果。有理数同时给出精确的 "num/den"
与 6 位有效数字的小数（仅供阅读）。除 wall_time 外，同样的参数与种子产出
逐字节相同的 JSON。
"""

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from engine.exact_linalg import format_rational

FORMATS = ("json", "csv", "table")


def exact(value: Fraction) -> dict:
    """{"exact": "num/den", "decimal": "0.75"}"""
    value = Fraction(value)
    return {"exact": format_rational(value), "decimal": f"{float(value):.6g}"}


def to_plain(obj):
    """递归转换为可 JSON 序列化的结构；Fraction 变为 exact()"""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        if obj.denominator == 1:
            return int(obj)
        return exact(obj)
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [to_plain(v) for v in obj]
        return sorted(items) if isinstance(obj, (set, frozenset)) else items
    return str(obj)


@dataclass
class RunReport:
    """
    子命令的结构化结果

    属性:
        command: 子命令（含子作用域，如 "verify lattice"）
        inputs: 参数回显
        results: 结果（计数、密度等）
        witnesses: 证据（双团、矩形、协议树）
        seed: 使用的种子
        passed: False 时 CLI 以退出码 1 结束
        failures: 不通过的条目
    """

    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    seed: int = None
    wall_time: float = 0.0
    passed: bool = True
    failures: list = field(default_factory=list)

    def fail(self, row):
        self.passed = False
        self.failures.append(row)

    def to_dict(self):
        return {
            "command": self.command,
            "inputs": to_plain(self.inputs),
            "results": to_plain(self.results),
            "witnesses": to_plain(self.witnesses),
            "seed": self.seed,
            "passed": self.passed,
            "failures": to_plain(self.failures),
            "wall_time": round(self.wall_time, 3),
        }

    def render(self, fmt="json") -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=2)
        rows = _flatten("results", to_plain(self.results))
        rows += [("passed", str(self.passed).lower()), ("seed", str(self.seed))]
        if fmt == "csv":
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(["key", "value"])
            writer.writerows(rows)
            return buffer.getvalue().rstrip("\n")
        width = max(len(k) for k, _ in rows)
        lines = [f"# {self.command}"]
        lines += [f"{k.ljust(width)}  {v}" for k, v in rows]
        return "\n".join(lines)


def _flatten(prefix, value):
    """嵌套结构 → [(a.b.c, 文本)]；exact() 结构折叠为 "num/den (decimal)" """
    if isinstance(value, dict):
        if set(value) == {"exact", "decimal"}:
            return [(prefix, f"{value['exact']} ({value['decimal']})")]
        out = []
        for k in sorted(value):
            out += _flatten(f"{prefix}.{k}", value[k])
        return out
    if isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        out = []
        for i, v in enumerate(value):
            out += _flatten(f"{prefix}[{i}]", v)
        return out
    if isinstance(value, list):
        return [(prefix, " ".join(str(v) for v in value))]
    return [(prefix, str(value).lower() if isinstance(value, bool) else str(value))]
