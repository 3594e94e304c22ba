"""Shared instance builders for the test suite.

Every graph here is small enough that brute-force oracles (exhaustive
bipartitions, exhaustive 0-extensions) stay instant.
"""

from fractions import Fraction

from vsparse import WeightedGraph


def path3() -> WeightedGraph:
    """Path a-c-b with unit weights; terminals a, b; c in the middle."""
    return WeightedGraph(3, [0, 1], {(0, 2): 1, (1, 2): 1})


def unit_star(k: int = 3) -> WeightedGraph:
    """k unit edges from terminals 0..k-1 to a non-terminal center k."""
    return WeightedGraph(k + 1, range(k), {(t, k): 1 for t in range(k)})


def weighted_star(weights) -> WeightedGraph:
    """Star with one leaf terminal per weight, center non-terminal."""
    k = len(weights)
    return WeightedGraph(k + 1, range(k),
                         {(t, k): Fraction(w) for t, w in enumerate(weights)})


def triangle_y() -> WeightedGraph:
    """Complete graph on 3 terminals (Y = X), unit weights."""
    return WeightedGraph(3, [0, 1, 2], {(0, 1): 1, (0, 2): 1, (1, 2): 1})
