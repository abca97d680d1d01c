"""Level-set graphs of PL functions by an exact sweep over vertex levels.

The sweep visits every vertex level (in the symbolically perturbed order)
and every open band between consecutive levels, computes the slice
components, and links components of neighbouring levels when a simplex
contributes cells to both.  Maximal chains of regular components become
arcs; vertex levels where a component's in/out arc count is not 1/1
become nodes.  Refinement inserts degree-2 nodes where the Euler
characteristic or a higher Betti number of a component changes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .complexes import (
    LabelArray,
    SimplicialComplex,
    SliceComplex,
    betti_numbers,
    slice_between,
    slice_complex,
    slice_euler,
)


class ReebError(ValueError):
    """Invalid input to the sweep."""


@dataclass(frozen=True)
class ReebNode:
    id: int
    height: Fraction
    kind: str  # "reeb" | "euler" | "betti"
    level_rank: int  # rank of the vertex level carrying this node

    @property
    def key(self) -> tuple[Fraction, int]:
        # strict order even when heights tie: ranks never tie
        return (self.height, self.level_rank)


@dataclass(frozen=True)
class ReebArc:
    lower: int
    upper: int
    index: int  # disambiguates parallel arcs for one node pair
    label: LabelArray


@dataclass(frozen=True)
class ReebGraph:
    nodes: tuple[ReebNode, ...]
    arcs: tuple[ReebArc, ...]
    # per arc (aligned with arcs): the (band_index, component) chain it sweeps
    traces: tuple[tuple[tuple[int, int], ...], ...]

    def node_by_id(self, node_id: int) -> ReebNode:
        return self._index[node_id]

    @property
    def _index(self) -> dict[int, ReebNode]:
        d = self.__dict__.get("_index_cache")
        if d is None:
            d = {n.id: n for n in self.nodes}
            object.__setattr__(self, "_index_cache", d)
        return d

    def degree(self, node_id: int) -> tuple[int, int]:
        ins = sum(1 for a in self.arcs if a.upper == node_id)
        outs = sum(1 for a in self.arcs if a.lower == node_id)
        return ins, outs


def _canonical_point(
    s: frozenset[int], ranks: dict[int, int], below: int, apex: int | None
) -> tuple[int, int] | None:
    """Representative crossing point of a simplex at a level, if any."""
    if apex is not None and apex in s:
        return (apex, apex)
    lows = [v for v in s if ranks[v] < below]
    ups = [v for v in s if ranks[v] >= below and v != apex]
    if not lows or not ups:
        return None
    lo = min(lows, key=lambda v: ranks[v])
    up = min(ups, key=lambda v: ranks[v])
    return (lo, up)


def build_reeb(x: SimplicialComplex) -> ReebGraph:
    """Sweep the complex and contract regular levels into arcs."""
    if not x.vertices:
        raise ReebError("empty complex")
    order = x.vertex_order
    ranks = x.vertex_ranks
    n = len(order)
    simplices = sorted(x.simplices, key=lambda s: sorted(s))

    # components of every vertex level and band, as simplex -> component
    vertex_comp: list[dict[frozenset[int], int]] = []
    band_comp: list[dict[frozenset[int], int]] = []  # band k sits below vertex k
    vertex_ncomp: list[int] = []
    band_ncomp: list[int] = []
    for k in range(n):
        if k > 0:
            sl = slice_between(x, k)
            pc = sl.point_component
            m: dict[frozenset[int], int] = {}
            for s in simplices:
                p = _canonical_point(s, ranks, k, None)
                if p is not None:
                    m[s] = pc[p]
            band_comp.append(m)
            band_ncomp.append(len(sl.components))
        sl = slice_complex(x, 0, at_vertex=order[k])
        pc = sl.point_component
        m = {}
        for s in simplices:
            p = _canonical_point(s, ranks, k, order[k])
            if p is not None:
                m[s] = pc[p]
        vertex_comp.append(m)
        vertex_ncomp.append(len(sl.components))

    # each band component links one component below and one above
    down_link: list[dict[int, int]] = []
    up_link: list[dict[int, int]] = []
    for k in range(1, n):
        dn: dict[int, int] = {}
        up: dict[int, int] = {}
        for s, c in band_comp[k - 1].items():
            dn[c] = vertex_comp[k - 1][s]
            up[c] = vertex_comp[k][s]
        down_link.append(dn)
        up_link.append(up)

    # in/out band components per vertex-level component
    ins: dict[tuple[int, int], list[int]] = {}
    outs: dict[tuple[int, int], list[int]] = {}
    for k in range(n):
        for c in range(vertex_ncomp[k]):
            ins[(k, c)] = []
            outs[(k, c)] = []
    for k in range(1, n):
        for c in range(band_ncomp[k - 1]):
            ins[(k, up_link[k - 1][c])].append(c)
            outs[(k - 1, down_link[k - 1][c])].append(c)

    critical = {
        kc for kc in ins if (len(ins[kc]), len(outs[kc])) != (1, 1)
    }

    node_keys = sorted(critical)
    node_id = {kc: i + 1 for i, kc in enumerate(node_keys)}
    nodes = tuple(
        ReebNode(id=i + 1, height=x.value(order[k]), kind="reeb", level_rank=k)
        for i, (k, _) in enumerate(node_keys)
    )

    arcs: list[ReebArc] = []
    traces: list[tuple[tuple[int, int], ...]] = []
    pair_count: dict[tuple[int, int], int] = {}
    for kc in node_keys:
        for c0 in sorted(outs[kc]):
            trace: list[tuple[int, int]] = []
            k, c = kc[0] + 1, c0
            while True:
                trace.append((k, c))
                target = (k, up_link[k - 1][c])
                if target in critical:
                    break
                k += 1
                c = outs[target][0]
            lo, hi = node_id[kc], node_id[target]
            idx = pair_count.get((lo, hi), 0)
            pair_count[(lo, hi)] = idx + 1
            arcs.append(ReebArc(lo, hi, idx, LabelArray.none()))
            traces.append(tuple(trace))

    return ReebGraph(nodes=nodes, arcs=tuple(arcs), traces=tuple(traces))


def _band_label(sl: SliceComplex, comp: int, mode: str) -> LabelArray:
    if mode == "euler":
        return slice_euler(sl, comp)
    return betti_numbers(sl, comp)


def refine_labels(r: ReebGraph, x: SimplicialComplex, mode: str) -> ReebGraph:
    """Label every arc and insert degree-2 nodes where labels change.

    Labels are computed on the regular bands each arc sweeps; a change
    between adjacent bands puts a node of the given kind at the vertex
    value separating them.  Applying the refinement twice is the same as
    applying it once.
    """
    if mode not in ("euler", "betti"):
        raise ReebError(f"unknown label mode {mode!r}")
    order = x.vertex_order

    band_cache: dict[int, SliceComplex] = {}

    def band(k: int) -> SliceComplex:
        if k not in band_cache:
            band_cache[k] = slice_between(x, k)
        return band_cache[k]

    new_nodes = list(r.nodes)
    next_id = len(new_nodes) + 1  # provisional; renumbered below
    arcs: list[tuple[int, int, LabelArray, tuple[tuple[int, int], ...]]] = []
    for arc, trace in zip(r.arcs, r.traces):
        labels = [_band_label(band(k), c, mode) for k, c in trace]
        cut_points = [
            i + 1 for i in range(len(labels) - 1) if labels[i] != labels[i + 1]
        ]
        pieces = []
        start = 0
        for cut in cut_points + [len(labels)]:
            pieces.append((start, cut))
            start = cut
        prev = arc.lower
        for start, cut in pieces:
            if cut < len(labels):
                change_rank = trace[cut - 1][0]  # vertex level above this band
                node = ReebNode(
                    id=next_id,
                    height=x.value(order[change_rank]),
                    kind=mode,
                    level_rank=change_rank,
                )
                new_nodes.append(node)
                next_id += 1
                upper: int = node.id
            else:
                upper = arc.upper
            arcs.append((prev, upper, labels[start], trace[start:cut]))
            prev = upper

    # renumber all nodes by (height, level rank)
    ordered = sorted(new_nodes, key=lambda nd: nd.key)
    remap = {nd.id: i + 1 for i, nd in enumerate(ordered)}
    nodes = tuple(replace(nd, id=i + 1) for i, nd in enumerate(ordered))
    pair_count: dict[tuple[int, int], int] = {}
    out_arcs: list[ReebArc] = []
    out_traces: list[tuple[tuple[int, int], ...]] = []
    for lo, hi, label, tr in sorted(
        arcs, key=lambda a: (remap[a[0]], remap[a[1]], a[3])
    ):
        lo2, hi2 = remap[lo], remap[hi]
        idx = pair_count.get((lo2, hi2), 0)
        pair_count[(lo2, hi2)] = idx + 1
        out_arcs.append(ReebArc(lo2, hi2, idx, label))
        out_traces.append(tr)
    return ReebGraph(nodes=nodes, arcs=tuple(out_arcs), traces=tuple(out_traces))
