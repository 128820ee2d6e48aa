"""Optimal mean cycles of a multiplicatively weighted digraph.

Edge weights are positive rationals w, and the "mean" of a cycle with
product P and length L is P^(1/L), i.e. the geometric mean. Comparisons
between candidate means are made on the rationals themselves
(P1^L2 against P2^L1), so no logarithm enters the optimization.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import networkx as nx


@dataclass(frozen=True)
class GeometricMean:
    """The value ratio^(1/length)"""

    ratio: Fraction
    length: int

    def __lt__(self, other: "GeometricMean") -> bool:
        return self.ratio**other.length < other.ratio**self.length

    def __le__(self, other: "GeometricMean") -> bool:
        return self.ratio**other.length <= other.ratio**self.length

    def same_value(self, other: "GeometricMean") -> bool:
        return self.ratio**other.length == other.ratio**self.length

    def reciprocal(self) -> "GeometricMean":
        return GeometricMean(1 / self.ratio, self.length)


def _karp(graph: nx.MultiDiGraph, nodes: list, maximize: bool) -> Optional[GeometricMean]:
    """Karp's characterization on one strongly connected component"""
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    better = (lambda a, b: a > b) if maximize else (lambda a, b: a < b)

    edges: dict[tuple[int, int], Fraction] = {}
    for u, v, w in graph.subgraph(nodes).edges(data="weight"):
        key = (index[u], index[v])
        if key not in edges or better(w, edges[key]):
            edges[key] = w
    if not edges:
        return None

    # best[k][v]: extremal product over walks of exactly k edges from nodes[0] to v
    best: list[list[Optional[Fraction]]] = [[None] * n for _ in range(n + 1)]
    best[0][0] = Fraction(1)
    for k in range(1, n + 1):
        for (u, v), w in edges.items():
            if best[k - 1][u] is None:
                continue
            candidate = best[k - 1][u] * w
            if best[k][v] is None or better(candidate, best[k][v]):
                best[k][v] = candidate

    result: Optional[GeometricMean] = None
    for v in range(n):
        if best[n][v] is None:
            continue
        inner: Optional[GeometricMean] = None
        for k in range(n):
            if best[k][v] is None:
                continue
            candidate = GeometricMean(best[n][v] / best[k][v], n - k)
            if inner is None or (candidate < inner if maximize else inner < candidate):
                inner = candidate
        if inner is not None and (
            result is None or (result < inner if maximize else inner < result)
        ):
            result = inner
    return result


def optimal_mean_cycle(
    edges: Iterable[tuple[int, int, Fraction]], start: int, maximize: bool = True
) -> GeometricMean:
    """Largest (or smallest) geometric mean weight over cycles reachable from `start`"""
    graph = nx.MultiDiGraph()
    graph.add_node(start)
    for u, v, w in edges:
        if w <= 0:
            raise ValueError("mean-cycle weights must be positive")
        graph.add_edge(u, v, weight=Fraction(w))

    reachable = nx.descendants(graph, start) | {start}
    sub = graph.subgraph(reachable)
    result: Optional[GeometricMean] = None
    for component in nx.strongly_connected_components(sub):
        nodes = sorted(component)
        value = _karp(sub, nodes, maximize)
        if value is None:
            continue
        if result is None or (result < value if maximize else value < result):
            result = value
    if result is None:
        raise ValueError("no cycle is reachable from the start node")
    return result
