"""FlatRank 命令行"""
