#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FlatRank - 异常定义

所有引擎层异常都继承自 FlatRankError，CLI 据此映射退出码：
- VerificationError → 1（断言/验证失败，附带反例）
- 其余 FlatRankError → 2（输入不合法、超出枚举上限等）
"""


class FlatRankError(Exception):
    """引擎层可恢复错误的基类

    属性:
        witness: 可选的证据载荷（dict / 对象），用于报告中复现问题
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DimensionMismatchError(FlatRankError):
    """点、超平面、平面的环境维数不一致"""


class EnumerationCapError(FlatRankError):
    """枚举规模超过配置上限（实例过大）"""


class BitLengthError(FlatRankError):
    """消元过程中分子/分母位长超过上限"""


class PreconditionError(FlatRankError):
    """调用前置条件不满足"""


class ConfigurationError(FlatRankError):
    """配置（点集 + 超平面集）或划分不合法"""


class InvalidWitnessError(FlatRankError):
    """返回或传入的双团 / 矩形证据未通过校验"""


class ProtocolError(FlatRankError):
    """协议树构建失败（矩形查找器返回非法矩形、递归过深等）"""


class VerificationError(FlatRankError):
    """数学性质校验失败

    属性:
        witness: 反例 dict
    """
