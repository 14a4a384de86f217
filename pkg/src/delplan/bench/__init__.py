"""Benchmark scenario generators."""

from delplan.bench.domains import apartment, letter, mailcheck, mailtell
from delplan.bench.graphs import NeighborhoodGraph, WsParams, full_path_length, path_graph, watts_strogatz

__all__ = [
    "apartment",
    "letter",
    "mailtell",
    "mailcheck",
    "NeighborhoodGraph",
    "WsParams",
    "watts_strogatz",
    "path_graph",
    "full_path_length",
]
