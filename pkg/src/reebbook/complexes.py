"""Simplicial complexes with exact piecewise-linear level-set slicing.

Vertex values are exact rationals.  Ties between vertex values are broken
symbolically by vertex id, so every comparison behaves as if all values
were distinct.  Level-set slices are triangulated cell complexes built
from staircase chains of lower/upper vertex grids and are exact as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .gf2 import rank as gf2_rank

Point = tuple[int, int]  # crossing point on edge (lower, upper); (v, v) sits on the vertex


class ComplexError(ValueError):
    """Invalid simplicial-complex input."""


@dataclass(frozen=True)
class LabelArray:
    """Per-arc label: nothing, one Euler characteristic, or Betti numbers.

    Betti values are stored as (b1, b2, ...) with trailing zeros trimmed,
    so contractible pieces in any dimension carry the same empty array.
    """

    kind: str  # "none" | "euler" | "betti"
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("none", "euler", "betti"):
            raise ValueError(f"unknown label kind {self.kind!r}")
        if self.kind == "euler" and len(self.values) != 1:
            raise ValueError("euler labels carry exactly one value")
        if self.kind == "betti" and any(v < 0 for v in self.values):
            raise ValueError("betti numbers are nonnegative")

    @staticmethod
    def none() -> "LabelArray":
        return LabelArray("none", ())

    @staticmethod
    def euler(chi: int) -> "LabelArray":
        return LabelArray("euler", (int(chi),))

    @staticmethod
    def betti(values: tuple[int, ...]) -> "LabelArray":
        vals = list(values)
        while vals and vals[-1] == 0:
            vals.pop()
        return LabelArray("betti", tuple(int(v) for v in vals))


@dataclass(frozen=True)
class SimplicialComplex:
    """Finite simplicial complex with one rational value per vertex.

    `vertices` is sorted by id; `simplices` is closed under taking
    nonempty subsets.
    """

    vertices: tuple[tuple[int, Fraction], ...]
    simplices: frozenset[frozenset[int]]

    def value(self, v: int) -> Fraction:
        return self._values[v]

    @property
    def _values(self) -> dict[int, Fraction]:
        d = self.__dict__.get("_values_cache")
        if d is None:
            d = {v: f for v, f in self.vertices}
            object.__setattr__(self, "_values_cache", d)
        return d

    @property
    def vertex_ranks(self) -> dict[int, int]:
        """Position of each vertex in the symbolically perturbed order."""
        d = self.__dict__.get("_ranks_cache")
        if d is None:
            order = sorted(self._values, key=lambda v: (self._values[v], v))
            d = {v: i for i, v in enumerate(order)}
            object.__setattr__(self, "_ranks_cache", d)
            object.__setattr__(self, "_order_cache", order)
        return d

    @property
    def vertex_order(self) -> list[int]:
        """Vertex ids sorted by (value, id)."""
        self.vertex_ranks
        return list(self.__dict__["_order_cache"])

    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def check_faces_closed(self) -> None:
        for s in self.simplices:
            for k in range(1, len(s)):
                for face in combinations(sorted(s), k):
                    if frozenset(face) not in self.simplices:
                        raise ComplexError(f"face {set(face)} of {set(s)} is missing")


def build_complex(
    maximal_simplices: list[list[int]] | list[set[int]],
    vertex_values: dict[int, Fraction | int | str],
) -> SimplicialComplex:
    """Close the given simplices under subsets and attach vertex values.

    Raises ComplexError if a referenced vertex has no value, or if the
    input is empty.
    """
    if not maximal_simplices and not vertex_values:
        raise ComplexError("empty complex")
    values: dict[int, Fraction] = {}
    for v, f in vertex_values.items():
        if int(v) <= 0:
            raise ComplexError(f"vertex ids must be positive, got {v}")
        values[int(v)] = Fraction(f)
    simplices: set[frozenset[int]] = set()
    for raw in maximal_simplices:
        s = frozenset(int(v) for v in raw)
        if not s:
            raise ComplexError("empty simplex in input")
        for v in s:
            if v not in values:
                raise ComplexError(f"vertex {v} has no function value")
        for k in range(1, len(s) + 1):
            for face in combinations(sorted(s), k):
                simplices.add(frozenset(face))
    for v in values:
        simplices.add(frozenset([v]))
    vertices = tuple(sorted(values.items()))
    return SimplicialComplex(vertices=vertices, simplices=frozenset(simplices))


def compare_vertices(x: SimplicialComplex, i: int, j: int) -> str:
    """Strict comparison of two vertices under the perturbed order.

    Returns "less" or "greater".  Comparing a vertex with itself is an
    error: the perturbed function has no equal values.
    """
    if i == j:
        raise ComplexError(f"cannot compare vertex {i} with itself")
    vals = x._values
    if i not in vals or j not in vals:
        missing = i if i not in vals else j
        raise ComplexError(f"vertex {missing} not in complex")
    return "less" if (vals[i], i) < (vals[j], j) else "greater"


def euler_characteristic(x: SimplicialComplex) -> int:
    """Alternating sum of simplex counts by dimension."""
    chi = 0
    for s in x.simplices:
        chi += -1 if len(s) % 2 == 0 else 1
    return chi


@dataclass(frozen=True)
class SliceComplex:
    """Triangulated level set of the PL function at one level.

    Points are crossing points on edges (lower, upper); a degenerate
    point (v, v) marks the vertex itself for at-vertex slices.  Cells
    are tuples of point indices; every nonempty subset of a cell is
    itself a cell, so the structure is a simplicial complex.
    """

    level: Fraction
    at_vertex: int | None
    points: tuple[Point, ...]
    cells: tuple[tuple[int, ...], ...]
    origins: tuple[frozenset[int], ...]  # aligned with cells
    components: tuple[tuple[int, ...], ...]  # cell indices per component

    def dim(self, cell_index: int) -> int:
        return len(self.cells[cell_index]) - 1

    @property
    def point_component(self) -> dict[Point, int]:
        """Component index of every crossing point."""
        d = self.__dict__.get("_pc_cache")
        if d is None:
            d = {}
            for ci, cell_ids in enumerate(self.components):
                for c in cell_ids:
                    for p in self.cells[c]:
                        d[self.points[p]] = ci
            object.__setattr__(self, "_pc_cache", d)
        return d

    def component_dimension(self, comp: int) -> int:
        return max(len(self.cells[c]) for c in self.components[comp]) - 1


def _maximal_chains(nl: int, nu: int) -> list[list[tuple[int, int]]]:
    """Monotone staircase paths through an nl-by-nu grid of index pairs."""
    paths: list[list[tuple[int, int]]] = []

    def walk(i: int, j: int, acc: list[tuple[int, int]]) -> None:
        if i == nl - 1 and j == nu - 1:
            paths.append(list(acc))
            return
        if i + 1 < nl:
            acc.append((i + 1, j))
            walk(i + 1, j, acc)
            acc.pop()
        if j + 1 < nu:
            acc.append((i, j + 1))
            walk(i, j + 1, acc)
            acc.pop()

    walk(0, 0, [(0, 0)])
    return paths


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, a: int) -> int:
        p = self.parent.setdefault(a, a)
        root = a
        while root != self.parent[root]:
            root = self.parent[root]
        while a != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _slice_cells(
    x: SimplicialComplex, below: int, apex_rank: int | None
) -> tuple[list[Point], list[tuple[int, ...]], list[frozenset[int]]]:
    """Cells of the level set with `below` vertices strictly under the level.

    With apex_rank set, the level passes through the vertex of that rank
    and every simplex containing it contributes the cone over its grid.
    """
    ranks = x.vertex_ranks
    order = x.vertex_order
    apex_vertex = order[apex_rank] if apex_rank is not None else None

    point_index: dict[Point, int] = {}
    points: list[Point] = []

    def pid(p: Point) -> int:
        k = point_index.get(p)
        if k is None:
            k = len(points)
            point_index[p] = k
            points.append(p)
        return k

    top_cells: dict[tuple[int, ...], frozenset[int]] = {}
    for s in sorted(x.simplices, key=lambda s: (len(s), sorted(s))):
        lows = sorted((v for v in s if ranks[v] < below), key=lambda v: ranks[v])
        ups = sorted(
            (v for v in s if ranks[v] >= below and v != apex_vertex),
            key=lambda v: ranks[v],
        )
        has_apex = apex_vertex is not None and apex_vertex in s
        if has_apex:
            # the lower side for an at-vertex slice excludes the vertex itself
            lows = [v for v in lows if v != apex_vertex]
        if not has_apex and (not lows or not ups):
            continue
        chains: list[list[Point]]
        if lows and ups:
            grids = _maximal_chains(len(lows), len(ups))
            chains = [[(lows[i], ups[j]) for i, j in g] for g in grids]
        else:
            chains = [[]]
        for chain in chains:
            cell_pts = [pid(p) for p in chain]
            if has_apex:
                cell_pts.append(pid((apex_vertex, apex_vertex)))
            if not cell_pts:
                continue
            key = tuple(sorted(cell_pts))
            old = top_cells.get(key)
            origin = frozenset(v for p in key for v in set(points[p]))
            if old is None or len(origin) < len(old):
                top_cells[key] = origin

    cells: dict[tuple[int, ...], frozenset[int]] = {}
    for cell, origin in top_cells.items():
        for k in range(1, len(cell) + 1):
            for sub in combinations(cell, k):
                sub_origin = frozenset(v for p in sub for v in set(points[p]))
                old = cells.get(sub)
                if old is None or len(sub_origin) < len(old):
                    cells[sub] = sub_origin

    ordered = sorted(cells, key=lambda c: (len(c), c))
    return points, ordered, [cells[c] for c in ordered]


def _assemble(
    x: SimplicialComplex,
    level: Fraction,
    at_vertex: int | None,
    below: int,
    apex_rank: int | None,
) -> SliceComplex:
    points, cells, origins = _slice_cells(x, below, apex_rank)
    uf = _UnionFind()
    for cell in cells:
        for p in cell[1:]:
            uf.union(cell[0], p)
    groups: dict[int, list[int]] = {}
    for ci, cell in enumerate(cells):
        groups.setdefault(uf.find(cell[0]), []).append(ci)
    components = tuple(
        tuple(g) for g in sorted(groups.values(), key=lambda g: cells[g[0]])
    )
    return SliceComplex(
        level=level,
        at_vertex=at_vertex,
        points=tuple(points),
        cells=tuple(cells),
        origins=tuple(origins),
        components=components,
    )


def slice_complex(
    x: SimplicialComplex, t: Fraction | int | str, at_vertex: int | None = None
) -> SliceComplex:
    """Triangulated level set of the PL function at level t.

    If t equals one or more vertex values and no explicit at_vertex is
    given, the slice is taken at the lowest such vertex in the perturbed
    order and includes that vertex as a degenerate point.  Levels outside
    the value range give an empty slice.
    """
    t = Fraction(t)
    ranks = x.vertex_ranks
    if at_vertex is not None:
        if at_vertex not in x._values:
            raise ComplexError(f"vertex {at_vertex} not in complex")
        r = ranks[at_vertex]
        return _assemble(x, x.value(at_vertex), at_vertex, r, r)
    hits = sorted((v for v, f in x.vertices if f == t), key=lambda v: ranks[v])
    if hits:
        v = hits[0]
        r = ranks[v]
        return _assemble(x, t, v, r, r)
    below = sum(1 for _, f in x.vertices if f < t)
    return _assemble(x, t, None, below, None)


def slice_between(x: SimplicialComplex, below: int) -> SliceComplex:
    """Slice in the open band after the first `below` perturbed vertices.

    The band between consecutive perturbed vertex levels has constant
    level-set topology; `below` picks the band.  The reported level is
    the value of the last vertex underneath (or the minimum value).
    """
    order = x.vertex_order
    if not 0 <= below <= len(order):
        raise ComplexError(f"band index {below} out of range")
    if below == 0:
        level = x.value(order[0])
    else:
        level = x.value(order[below - 1])
    return _assemble(x, level, None, below, None)


def _component_betti(s: SliceComplex, component_index: int) -> list[int]:
    if not 0 <= component_index < len(s.components):
        raise ComplexError(f"component {component_index} out of range")
    cell_ids = s.components[component_index]
    by_dim: dict[int, list[tuple[int, ...]]] = {}
    for ci in cell_ids:
        by_dim.setdefault(len(s.cells[ci]) - 1, []).append(s.cells[ci])
    top = max(by_dim)
    index_of: dict[int, dict[tuple[int, ...], int]] = {
        d: {c: i for i, c in enumerate(sorted(cs))} for d, cs in by_dim.items()
    }
    ranks: dict[int, int] = {}
    for d in range(1, top + 1):
        cols = []
        faces = index_of.get(d - 1, {})
        for cell in sorted(by_dim.get(d, [])):
            col = 0
            for drop in range(len(cell)):
                face = cell[:drop] + cell[drop + 1 :]
                col |= 1 << faces[face]
            cols.append(col)
        ranks[d] = gf2_rank(cols)
    betti = []
    for d in range(top + 1):
        nd = len(by_dim.get(d, []))
        betti.append(nd - ranks.get(d, 0) - ranks.get(d + 1, 0))
    return betti


def betti_numbers(s: SliceComplex, component_index: int) -> LabelArray:
    """Betti numbers (b1, b2, ...) of one slice component over GF(2)."""
    betti = _component_betti(s, component_index)
    return LabelArray.betti(tuple(betti[1:]))


def slice_euler(s: SliceComplex, component_index: int) -> LabelArray:
    """Euler characteristic of one slice component (alternating cell count)."""
    if not 0 <= component_index < len(s.components):
        raise ComplexError(f"component {component_index} out of range")
    chi = 0
    for ci in s.components[component_index]:
        chi += -1 if len(s.cells[ci]) % 2 == 0 else 1
    return LabelArray.euler(chi)
