"""FlatRank 核心引擎"""

__version__ = "0.1.0"
