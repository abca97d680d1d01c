"""Ready-made simplicial complexes with height functions.

These builders produce the standard shapes used across the test suite:
cycles, solid simplices, a subdivided theta graph, a grid torus whose
height function has one min, one max and two saddles, the same torus
with an extra membrane that turns one band of level sets into theta
graphs, a tilted cylinder variant of that, and products with a cycle.
"""

from __future__ import annotations

from fractions import Fraction

from .complexes import SimplicialComplex, build_complex


def point_complex() -> SimplicialComplex:
    return build_complex([[1]], {1: 0})


def segment(values: tuple[int, int] = (0, 1)) -> SimplicialComplex:
    return build_complex([[1, 2]], {1: values[0], 2: values[1]})


def cycle_complex(n: int = 3, values: list | None = None) -> SimplicialComplex:
    """Boundary of an n-gon; default values 0..n-1."""
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    if values is None:
        values = list(range(n))
    edges = [[i + 1, (i + 1) % n + 1] for i in range(n)]
    return build_complex(edges, {i + 1: values[i] for i in range(n)})


def filled_triangle() -> SimplicialComplex:
    return build_complex([[1, 2, 3]], {1: 0, 2: 1, 3: 2})


def solid_simplex(k: int) -> SimplicialComplex:
    """Full simplex on k vertices with values 0..k-1."""
    return build_complex([list(range(1, k + 1))], {i: i - 1 for i in range(1, k + 1)})


def subdivided_theta() -> SimplicialComplex:
    """Two junction vertices joined by three arcs of two edges each."""
    edges = [[1, 2], [2, 5], [1, 3], [3, 5], [1, 4], [4, 5]]
    return build_complex(edges, {1: 0, 2: 1, 3: 2, 4: 3, 5: 4})


_MERIDIAN = 4
_LONGITUDE = 8
_TUBE = [1, 0, -1, 0]  # radial offset around the tube
_RING = [0, 7, 10, 7, 0, -7, -10, -7]  # height profile around the big circle


def _tid(i: int, j: int) -> int:
    return 1 + (i % _MERIDIAN) + _MERIDIAN * (j % _LONGITUDE)


def grid_torus() -> SimplicialComplex:
    """Upright torus on a 4x8 vertex grid.

    Heights (2 + tube_i) * ring_j give a single minimum at -30, saddles
    at -10 and 10 (inner rim of the hole) and a single maximum at 30, so
    regular level sets are one circle near the poles and two circles in
    the middle band.
    """
    tris, values = _grid_torus_parts()
    return build_complex(tris, values)


def _grid_torus_parts() -> tuple[list[list[int]], dict[int, int]]:
    values: dict[int, int] = {}
    for j in range(_LONGITUDE):
        for i in range(_MERIDIAN):
            values[_tid(i, j)] = (2 + _TUBE[i]) * _RING[j]
    tris: list[list[int]] = []
    for j in range(_LONGITUDE):
        for i in range(_MERIDIAN):
            a, b = _tid(i, j), _tid(i + 1, j)
            c, d = _tid(i + 1, j + 1), _tid(i, j + 1)
            if (i, j) == (1, 7):
                # flipped diagonal so the membrane of torus_with_membrane
                # can attach along the edge (2,7)-(1,0)
                tris += [[a, b, d], [b, c, d]]
            else:
                tris += [[a, b, c], [a, c, d]]
    return tris, values


def torus_with_membrane() -> SimplicialComplex:
    """Grid torus plus a membrane across one side of the middle band.

    The membrane spans heights -7..7 on the two-circle band, so the level
    sets of that side are theta graphs there (a circle with a chord) and
    plain circles elsewhere.
    """
    tris, values = _grid_torus_parts()
    anchor_lo = _tid(2, 7)  # height -7
    anchor_hi = _tid(2, 1)  # height 7
    tris += [
        [anchor_lo, anchor_hi, _tid(2, 0)],
        [anchor_lo, anchor_hi, _tid(1, 0)],
    ]
    return build_complex(tris, values)


def tilted_cylinder(rings: int = 5, with_membrane: bool = True) -> SimplicialComplex:
    """Cylinder of triangle rings with strictly increasing vertex heights.

    Ring z has heights 7z, 7z+1, 7z+2.  With the membrane, two cylinder
    quads between columns 0 and 1 are doubled with the opposite diagonal,
    so mid-band level sets are theta graphs.
    """
    if rings < 2:
        raise ValueError("need at least 2 rings")

    def cid(i: int, z: int) -> int:
        return 1 + (i % 3) + 3 * z

    values = {cid(i, z): 7 * z + i for z in range(rings) for i in range(3)}
    tris: list[list[int]] = []
    for z in range(rings - 1):
        for i in range(3):
            a, b = cid(i, z), cid(i + 1, z)
            c, d = cid(i + 1, z + 1), cid(i, z + 1)
            tris += [[a, b, c], [a, c, d]]
    if with_membrane:
        if rings < 5:
            raise ValueError("membrane needs at least 5 rings")
        for z in (1, 2):
            a, b = cid(0, z), cid(1, z)
            c, d = cid(1, z + 1), cid(0, z + 1)
            tris += [[a, b, d], [b, c, d]]
    return build_complex(tris, values)


def product_with_cycle(x: SimplicialComplex, n: int = 3) -> SimplicialComplex:
    """Product of a complex with an n-cycle, heights lifted from x.

    Uses the staircase prism triangulation of every maximal simplex times
    every cycle edge; vertex (v, layer) gets id v + layer * max_id.
    """
    if n < 3:
        raise ValueError("cycle factor needs at least 3 vertices")
    base = max(v for v, _ in x.vertices)

    def pid(v: int, layer: int) -> int:
        return v + base * layer

    values: dict[int, Fraction] = {}
    for v, f in x.vertices:
        for layer in range(n):
            values[pid(v, layer)] = f

    maximal = [s for s in x.simplices if not any(s < t for t in x.simplices)]
    cells: list[list[int]] = []
    for s in sorted(maximal, key=lambda s: sorted(s)):
        verts = sorted(s)
        for k in range(n):
            p, q = sorted((k, (k + 1) % n))
            for cut in range(len(verts)):
                cell = [pid(v, p) for v in verts[: cut + 1]]
                cell += [pid(v, q) for v in verts[cut:]]
                cells.append(cell)
    return build_complex(cells, values)
