"""Neighborhood graphs for the letter-passing benchmarks."""

from __future__ import annotations

import random
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass

import networkx as nx

__all__ = ["WsParams", "NeighborhoodGraph", "watts_strogatz", "path_graph", "full_path_length", "MAX_ATTEMPTS"]

MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class WsParams:
    """Watts-Strogatz parameters: n nodes, even mean degree k, rewiring probability beta."""

    n: int
    k: int
    beta: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 2 or self.k % 2:
            raise ValueError("k must be an even number >= 2")
        if self.n <= self.k:
            raise ValueError("n must exceed k")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")


@dataclass(frozen=True)
class NeighborhoodGraph:
    """Simple connected undirected graph over agent identifiers."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        order = {v: i for i, v in enumerate(self.nodes)}
        if len(order) != len(self.nodes):
            raise ValueError("duplicate node identifiers")
        canonical = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if u not in order or v not in order:
                raise ValueError(f"edge ({u!r}, {v!r}) uses an unknown node")
            canonical.add((u, v) if order[u] < order[v] else (v, u))
        if len(canonical) != len(self.edges):
            raise ValueError("duplicate edges")
        edges = tuple(sorted(canonical, key=lambda e: (order[e[0]], order[e[1]])))
        object.__setattr__(self, "edges", edges)
        if not nx.is_connected(self.to_networkx()):
            raise ValueError("neighborhood graph must be connected")

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "NeighborhoodGraph":
        nodes = sorted(g.nodes)
        return cls(tuple(str(v) for v in nodes), tuple((str(u), str(v)) for u, v in g.edges))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def neighbors(self, v: str) -> list[str]:
        out = [b for a, b in self.edges if a == v] + [a for a, b in self.edges if b == v]
        order = {x: i for i, x in enumerate(self.nodes)}
        return sorted(out, key=order.__getitem__)

    def degree(self, v: str) -> int:
        return len(self.neighbors(v))

    def distance(self, u: str, v: str) -> int:
        return nx.shortest_path_length(self.to_networkx(), u, v)


def watts_strogatz(p: WsParams) -> NeighborhoodGraph:
    """Seeded connected Watts-Strogatz graph.

    Attempt ``a`` draws from ``random.Random(f"ws:{seed}:{a}")``; the first
    connected result is returned. Nodes are "0".."n-1".
    """
    for attempt in range(MAX_ATTEMPTS):
        rng = random.Random(f"ws:{p.seed}:{attempt}")
        g = nx.watts_strogatz_graph(p.n, p.k, p.beta, seed=rng)
        if nx.is_connected(g):
            return NeighborhoodGraph.from_networkx(g)
    raise RuntimeError(f"no connected graph after {MAX_ATTEMPTS} attempts for {p}")


def path_graph(nodes: Iterable[str]) -> NeighborhoodGraph:
    nodes = tuple(nodes)
    return NeighborhoodGraph(nodes, tuple(zip(nodes, nodes[1:])))


def full_path_length(graph: NeighborhoodGraph, start: str) -> int:
    """Length of a shortest walk from ``start`` that visits every node.

    Breadth-first search over (position, visited set); exponential in the
    node count, meant for the benchmark sizes (n up to about 20).
    """
    index = {v: i for i, v in enumerate(graph.nodes)}
    adj = [[index[w] for w in graph.neighbors(v)] for v in graph.nodes]
    full = (1 << len(graph.nodes)) - 1
    s = index[start]
    first = (s, 1 << s)
    if first[1] == full:
        return 0
    dist = {first: 0}
    queue = deque([first])
    while queue:
        v, mask = queue.popleft()
        d = dist[(v, mask)]
        for w in adj[v]:
            nxt = (w, mask | (1 << w))
            if nxt in dist:
                continue
            if nxt[1] == full:
                return d + 1
            dist[nxt] = d + 1
            queue.append(nxt)
    raise ValueError("graph is not connected")
