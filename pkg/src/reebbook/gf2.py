"""Rank computations over GF(2) with rows packed into Python ints."""

from __future__ import annotations


def rank(rows: list[int]) -> int:
    """Rank of a 0/1 matrix whose rows are bitmask integers."""
    pivots: list[int] = []
    r = 0
    for row in rows:
        for p in pivots:
            row = min(row, row ^ p)
        if row:
            pivots.append(row)
            pivots.sort(reverse=True)
            r += 1
    return r


def independent_subset_size(vectors: list[int]) -> int:
    """Size of a maximal linearly independent subset (== rank)."""
    return rank(list(vectors))
