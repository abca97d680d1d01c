"""Multi-page book embeddings of DAGs and their linear codes.

A book embedding puts all nodes on a common axis at exact rational
positions, directs every arc along the axis, and assigns each arc to one
page so that no two arcs of a page strictly interleave.  Construction:
embed the core (one fresh page per node beyond a fixed 2-page base for
the first four), expand each core page into a block of m+1 pages, then
replay the simplification events backwards, placing parallel copies,
chain nodes and hanging trees inside the free axis intervals of their
arcs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import LabelArray
from .dagcore import (
    Arc,
    BudgetError,
    CoreFiltration,
    Dag,
    DagError,
    MergeEvent,
    Stage,
    TreeEvent,
    arc_ids,
    core_filtration,
    make_dag,
    max_shared_independent_cycles,
    page_budget,
    simplify_steps12,
    topological_order,
)
from .reeb import ReebGraph


class BookEmbedError(ValueError):
    """Invalid embedding input or an internally inconsistent layout."""


@dataclass(frozen=True)
class EmbeddedArc:
    lower: int
    upper: int
    page: int
    arc_index: int = 0
    label: LabelArray = field(default_factory=LabelArray.none)


@dataclass(frozen=True)
class BookEmbedding:
    pages: int
    axis: tuple[tuple[int, Fraction], ...]  # (node, position), sorted by position
    arcs: tuple[EmbeddedArc, ...]

    def position(self) -> dict[int, Fraction]:
        return {n: p for n, p in self.axis}

    def nodes_in_axis_order(self) -> list[int]:
        return [n for n, _ in self.axis]


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.kind}: {self.detail}"


def _interleaves(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]) -> bool:
    return (a[0] < b[0] < a[1] < b[1]) or (b[0] < a[0] < b[1] < a[1])


def validate(
    b: BookEmbedding, g: Dag | None = None, check_access_to_axis: bool = False
) -> list[Violation]:
    """Report every violated book-embedding property (empty = valid)."""
    out: list[Violation] = []
    pos = b.position()
    seen_pos: dict[Fraction, int] = {}
    for n, p in b.axis:
        if p in seen_pos:
            out.append(Violation("nodes-in-axis", f"nodes {seen_pos[p]} and {n} share position {p}"))
        seen_pos[p] = n

    spans_by_page: dict[int, list[tuple[Fraction, Fraction, EmbeddedArc]]] = {}
    for a in b.arcs:
        if a.lower not in pos or a.upper not in pos:
            out.append(Violation("nodes-in-axis", f"arc ({a.lower},{a.upper}) endpoint off the axis"))
            continue
        lo, hi = pos[a.lower], pos[a.upper]
        if not lo < hi:
            out.append(Violation("directional", f"arc ({a.lower},{a.upper}) runs against the axis"))
            continue
        if not 0 <= a.page < b.pages:
            out.append(Violation("page-range", f"arc ({a.lower},{a.upper}) on page {a.page} of {b.pages}"))
            continue
        spans_by_page.setdefault(a.page, []).append((lo, hi, a))

    for page, spans in sorted(spans_by_page.items()):
        spans.sort(key=lambda s: (s[0], s[1]))
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                s, t = spans[i], spans[j]
                if _interleaves((s[0], s[1]), (t[0], t[1])):
                    out.append(
                        Violation(
                            "page-planarity",
                            f"page {page}: arcs ({s[2].lower},{s[2].upper}) and "
                            f"({t[2].lower},{t[2].upper}) interleave",
                        )
                    )

    if check_access_to_axis:
        for page, spans in sorted(spans_by_page.items()):
            for lo, hi, a in spans:
                blockers = sorted(
                    (s, e)
                    for s, e, other in spans
                    if other is not a and lo <= s and e <= hi and (s, e) != (lo, hi)
                )
                cur = lo
                free = False
                for s, e in blockers:
                    if s > cur:
                        free = True
                        break
                    cur = max(cur, e)
                if cur < hi:
                    free = True
                if not free:
                    out.append(
                        Violation(
                            "access-to-axis",
                            f"page {page}: arc ({a.lower},{a.upper}) has no uncovered interval",
                        )
                    )

    if g is not None:
        want = sorted((a.lower, a.upper, a.label.values) for a in g.arcs)
        got = sorted((a.lower, a.upper, a.label.values) for a in b.arcs)
        if want != got:
            out.append(Violation("graph-mismatch", "arc multisets differ"))
        if set(g.nodes) != {n for n, _ in b.axis}:
            out.append(Violation("graph-mismatch", "node sets differ"))
    return out


# ---------------------------------------------------------------------------
# trees in half-disks


def _tree_adjacency(nodes: set[int], arcs: list[tuple[int, int, int]]):
    adj: dict[int, list[tuple[int, int, int]]] = {n: [] for n in nodes}
    for aid, u, v in arcs:
        adj[u].append((v, aid, +1))
        adj[v].append((u, aid, -1))
    return adj


class _Layout:
    """Mutable axis + page state shared by the construction passes."""

    def __init__(self, pages: int):
        self.pages = pages
        self.positions: dict[int, Fraction] = {}
        self.page_arcs: dict[int, dict[int, tuple[int, int]]] = {}
        self.arc_page: dict[int, int] = {}
        self.arc_nodes: dict[int, tuple[int, int]] = {}

    def occupied(self) -> list[Fraction]:
        return sorted(self.positions.values())

    def place_node(self, node: int, position: Fraction) -> None:
        if node in self.positions:
            raise BookEmbedError(f"node {node} placed twice")
        if position in set(self.positions.values()):
            raise BookEmbedError(f"position {position} occupied")
        self.positions[node] = position

    def draw(self, aid: int, lower: int, upper: int, page: int) -> None:
        if not 0 <= page < self.pages:
            raise BudgetError(f"page {page} outside the {self.pages}-page book")
        self.page_arcs.setdefault(page, {})[aid] = (lower, upper)
        self.arc_page[aid] = page
        self.arc_nodes[aid] = (lower, upper)

    def erase(self, aid: int) -> tuple[int, int, int]:
        page = self.arc_page.pop(aid)
        lower, upper = self.page_arcs[page].pop(aid)
        del self.arc_nodes[aid]
        return lower, upper, page

    def span(self, aid: int) -> tuple[Fraction, Fraction]:
        u, v = self.arc_nodes[aid]
        return self.positions[u], self.positions[v]

    def page_spans(self, page: int, skip: int | None = None):
        for aid, (u, v) in self.page_arcs.get(page, {}).items():
            if aid == skip:
                continue
            yield self.positions[u], self.positions[v]

    def conflicts(self, page: int, span: tuple[Fraction, Fraction]) -> bool:
        return any(_interleaves(span, s) for s in self.page_spans(page))

    def free_interval(
        self, page: int, lo: Fraction, hi: Fraction, from_low: bool
    ) -> tuple[Fraction, Fraction]:
        """Open sub-interval of (lo, hi) clear of same-page arcs and nodes.

        Arcs spanning exactly (lo, hi) do not block: material placed here
        nests under them.  from_low picks the interval next to lo, else
        next to hi.
        """
        blockers = sorted(
            (s, e)
            for s, e in self.page_spans(page)
            if lo <= s and e <= hi and (s, e) != (lo, hi)
        )
        free: list[tuple[Fraction, Fraction]] = []
        cur = lo
        for s, e in blockers:
            if s > cur:
                free.append((cur, s))
            cur = max(cur, e)
        if cur < hi:
            free.append((cur, hi))
        if not free:
            raise BookEmbedError("no free interval under the arc")
        alpha, beta = free[0] if from_low else free[-1]
        inside = sorted(p for p in self.positions.values() if alpha < p < beta)
        if inside:
            if from_low:
                beta = inside[0]
            else:
                alpha = inside[-1]
        return alpha, beta

    def gap_after(self, position: Fraction) -> tuple[Fraction, Fraction]:
        later = [p for p in self.occupied() if p > position]
        return (position, later[0] if later else position + 1)

    def gap_before(self, position: Fraction) -> tuple[Fraction, Fraction]:
        earlier = [p for p in self.occupied() if p < position]
        return (earlier[-1] if earlier else position - 1, position)


def _sub_intervals(
    lo: Fraction, hi: Fraction, k: int, near_low: bool
) -> list[tuple[Fraction, Fraction]]:
    """k disjoint slots in (lo, hi); slot 0 nearest to lo resp. hi."""
    w = (hi - lo) / (k + 1)
    slots = [(lo + w * i, lo + w * (i + 1)) for i in range(1, k + 1)]
    if near_low:
        return slots
    return list(reversed(slots))


def _place_subtree(
    layout: _Layout,
    adj,
    order_pos: dict[int, int],
    node: int,
    parent: int | None,
    lo: Fraction,
    hi: Fraction,
    page: int,
) -> None:
    """Node at the middle of (lo, hi); lower neighbours left, higher right."""
    mid = (lo + hi) / 2
    layout.place_node(node, mid)
    lowers = sorted(
        (w, aid, d) for w, aid, d in adj[node] if w != parent and order_pos[w] < order_pos[node]
    )
    uppers = sorted(
        (w, aid, d) for w, aid, d in adj[node] if w != parent and order_pos[w] > order_pos[node]
    )
    for (w, aid, d), slot in zip(lowers, _sub_intervals(lo, mid, len(lowers), True)):
        # lowest neighbour farthest from the node
        _place_subtree(layout, adj, order_pos, w, node, slot[0], slot[1], page)
        layout.draw(aid, w if d < 0 else node, node if d < 0 else w, page)
    for (w, aid, d), slot in zip(uppers, _sub_intervals(mid, hi, len(uppers), True)):
        _place_subtree(layout, adj, order_pos, w, node, slot[0], slot[1], page)
        layout.draw(aid, node if d > 0 else w, w if d > 0 else node, page)


def _check_tree(tree: Dag) -> None:
    if len(tree.arcs) != len(tree.nodes) - 1:
        raise BookEmbedError("not a tree: wrong arc count")
    parent = {n: n for n in tree.nodes}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in tree.arcs:
        ru, rv = find(a.lower), find(a.upper)
        if ru == rv:
            raise BookEmbedError("not a tree: undirected cycle")
        parent[ru] = rv


def embed_tree(
    tree: Dag,
    root: int,
    interval: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1)),
    side: str = "positive",
) -> BookEmbedding:
    """One-page layout of a tree in a half-disk over the given interval.

    The root sits at the interval end (low end for the positive side,
    high end for the negative side) and must have degree at most 1.
    """
    if root not in tree.nodes:
        raise BookEmbedError(f"root {root} not in the tree")
    _check_tree(tree)
    if tree.degree(root) > 1:
        raise BookEmbedError(f"root {root} has degree {tree.degree(root)}, want 1")
    if side not in ("positive", "negative"):
        raise BookEmbedError(f"unknown side {side!r}")
    order = topological_order(tree)
    order_pos = {n: i for i, n in enumerate(order)}
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    layout = _Layout(pages=1)
    arcs = [(i, a.lower, a.upper) for i, a in enumerate(tree.arcs)]
    adj = _tree_adjacency(set(tree.nodes), arcs)
    layout.place_node(root, lo if side == "positive" else hi)
    if adj[root]:
        ((q, aid, d),) = adj[root]
        _place_subtree(layout, adj, order_pos, q, root, lo, hi, 0)
        layout.draw(aid, root if d > 0 else q, q if d > 0 else root, 0)
    return _to_embedding(layout, tree)


def _to_embedding(layout: _Layout, g: Dag) -> BookEmbedding:
    axis = tuple(sorted(((n, p) for n, p in layout.positions.items()), key=lambda t: t[1]))
    arcs = []
    for i, a in enumerate(g.arcs):
        page = layout.arc_page.get(i)
        if page is None:
            raise BookEmbedError(f"arc {a.pair} was never drawn")
        arcs.append(EmbeddedArc(a.lower, a.upper, page, a.index, a.label))
    arcs.sort(key=lambda a: (layout.positions[a.lower], layout.positions[a.upper], a.page, a.arc_index))
    return BookEmbedding(pages=layout.pages, axis=axis, arcs=tuple(arcs))


# ---------------------------------------------------------------------------
# cores

_BASE_PAGES = {
    (1, 2): 0, (1, 3): 0, (3, 4): 0,
    (2, 3): 1, (2, 4): 1, (1, 4): 1,
}


def _core_page(lower_rank: int, upper_rank: int) -> int:
    """Page of a core arc, by 1-based node ranks on the axis."""
    if upper_rank <= 4:
        return _BASE_PAGES[(lower_rank, upper_rank)]
    return upper_rank - 3


def _check_core(core: Dag) -> None:
    seen_pairs = set()
    for a in core.arcs:
        if a.pair in seen_pairs:
            raise BookEmbedError(f"core has parallel arcs {a.pair}")
        seen_pairs.add(a.pair)
    comp = {n: n for n in core.nodes}

    def find(a: int) -> int:
        while comp[a] != a:
            comp[a] = comp[comp[a]]
            a = comp[a]
        return a

    for a in core.arcs:
        comp[find(a.lower)] = find(a.upper)
    degree = {n: 0 for n in core.nodes}
    for a in core.arcs:
        degree[a.lower] += 1
        degree[a.upper] += 1
    sizes: dict[int, int] = {}
    for n in core.nodes:
        sizes[find(n)] = sizes.get(find(n), 0) + 1
    for n in core.nodes:
        if sizes[find(n)] > 1 and degree[n] < 3:
            raise BookEmbedError(f"core node {n} has degree {degree[n]} < 3")


def embed_core(core: Dag, order: list[int] | None = None) -> BookEmbedding:
    """Canonical embedding of a core into max(1, n-2) pages.

    Nodes go on the axis in canonical order at integer positions; arcs
    among the first four nodes follow a fixed 2-page split, and all arcs
    reaching each later node share that node's own page.
    """
    _check_core(core)
    if order is None:
        order = topological_order(core)
    layout, n = _core_layout(core, order)
    return _to_embedding(layout, core)


def _core_layout(core: Dag, order: list[int]) -> tuple[_Layout, int]:
    n = len(core.nodes)
    pages = max(1, n - 2)
    layout = _Layout(pages=pages)
    rank = {node: i + 1 for i, node in enumerate(order)}
    for node in order:
        layout.place_node(node, Fraction(rank[node]))
    for i, a in enumerate(core.arcs):
        layout.draw(i, a.lower, a.upper, _core_page(rank[a.lower], rank[a.upper]))
    return layout, n


# ---------------------------------------------------------------------------
# full graphs by reverse replay of the filtration


def _contains_merge(derived, aid: int) -> bool:
    if aid not in derived:
        return False
    kind, children = derived[aid]
    if kind == "merge":
        return True
    return any(_contains_merge(derived, c) for c in children)


class _Replay:
    def __init__(self, g: Dag, f: CoreFiltration, m: int, nest: bool):
        self.g = g
        self.f = f
        self.m = m
        self.nest = nest
        self.ep = f.endpoints()
        self.derived = f.derived()
        self.order_pos = {node: i for i, node in enumerate(f.order)}
        core_order = [node for node in f.order if node in set(f.core.nodes)]
        self.core_order = core_order
        n = len(core_order)
        self.base_pages = max(1, n - 2)
        self.pages = (m + 1) * self.base_pages
        self.layout = _Layout(pages=self.pages)
        # highest rotational-copy offset ever forced per block, for riders
        self.block_floor: dict[int, int] = {}

    def mu(self, aid: int) -> int:
        if aid not in self.derived:
            return 1
        kind, children = self.derived[aid]
        if kind == "merge":
            return max(self.mu(c) for c in children)
        if self.nest:
            chains = sum(1 for c in children if _contains_merge(self.derived, c))
            return max(1, chains)
        return sum(self.mu(c) for c in children)

    def run(self) -> BookEmbedding:
        f = self.f
        rank = {node: i + 1 for i, node in enumerate(self.core_order)}
        for node in self.core_order:
            self.layout.place_node(node, Fraction(rank[node]))
        core_ids = arc_ids(f.core)
        for i, a in enumerate(f.core.arcs):
            core_page = _core_page(rank[a.lower], rank[a.upper])
            block_page = core_page * (self.m + 1)
            aid = core_ids[i]
            mu = self.mu(aid)
            if mu > self.m + 1:
                raise BudgetError(f"page budget {mu} exceeds bound {self.m + 1}")
            self.block_floor[core_page] = max(self.block_floor.get(core_page, 0), mu)
            self.layout.draw(aid, a.lower, a.upper, block_page)

        for stage in reversed(f.stages):
            for ev in reversed(stage.removals):
                self.undo_tree(ev)
            for ev in reversed(stage.collapses):
                self.undo_collapse(ev)
            for ev in reversed(stage.merges):
                self.undo_merge(ev)
        return _to_embedding(self.layout, self.g)

    # -- trees ---------------------------------------------------------

    def undo_tree(self, ev: TreeEvent) -> None:
        tree_nodes = set(ev.tree_nodes) | {ev.root}
        arcs = [(aid, *self.ep[aid]) for aid in ev.tree_arcs]
        adj = _tree_adjacency(tree_nodes, arcs)
        ups = sorted(
            (w, aid, d) for w, aid, d in adj[ev.root] if self.order_pos[w] > self.order_pos[ev.root]
        )
        downs = sorted(
            (w, aid, d) for w, aid, d in adj[ev.root] if self.order_pos[w] < self.order_pos[ev.root]
        )
        if ups:
            self._attach_branches(ev.root, ups, adj, ev.up_anchor, upward=True)
        if downs:
            self._attach_branches(ev.root, downs, adj, ev.down_anchor, upward=False)

    def _attach_branches(self, root, branches, adj, anchor, upward: bool) -> None:
        rpos = self.layout.positions[root]
        if anchor is not None and anchor in self.layout.arc_page:
            page = self.layout.arc_page[anchor]
            lo, hi = self.layout.span(anchor)
            alpha, beta = self.layout.free_interval(page, lo, hi, from_low=upward)
        else:
            alpha, beta = (
                self.layout.gap_after(rpos) if upward else self.layout.gap_before(rpos)
            )
            page = None
        slots = _sub_intervals(alpha, beta, len(branches), near_low=upward)
        if not upward:
            slots = list(reversed(slots))  # lowest branch farthest from the root
        for (w, aid, d), slot in zip(branches, slots):
            branch_page = page
            if branch_page is None:
                span = (min(rpos, (slot[0] + slot[1]) / 2), max(rpos, (slot[0] + slot[1]) / 2))
                branch_page = self._first_fit(0, span)
            _place_subtree(self.layout, adj, self.order_pos, w, root, slot[0], slot[1], branch_page)
            lo_node, hi_node = (root, w) if d > 0 else (w, root)
            self.layout.draw(aid, lo_node, hi_node, branch_page)

    def _first_fit(self, start_page: int, span) -> int:
        for page in range(start_page, self.pages):
            if not self.layout.conflicts(page, span):
                return page
        raise BudgetError("no page can take the arc without a crossing")

    # -- parallel arcs ---------------------------------------------------

    def undo_collapse(self, ev) -> None:
        lower, upper, page = self.layout.erase(ev.merged)
        children = sorted(ev.arcs)
        placements: list[tuple[int, int]] = []
        if self.nest:
            offset = 0
            used_chain = False
            for aid in children:
                if _contains_merge(self.derived, aid):
                    if used_chain:
                        offset += 1
                    used_chain = True
                    placements.append((aid, page + offset))
                else:
                    placements.append((aid, page))
        else:
            offset = 0
            for aid in children:
                placements.append((aid, page + offset))
                offset += self.mu(aid)
        block = page // (self.m + 1)
        for aid, target in placements:
            if target // (self.m + 1) != block:
                raise BudgetError(
                    f"parallel copies spill out of the {self.m + 1}-page block"
                )
            self.layout.draw(aid, lower, upper, target)

    # -- degree-2 nodes ----------------------------------------------------

    def undo_merge(self, ev: MergeEvent) -> None:
        lower, upper, page = self.layout.erase(ev.merged)
        a_lo, a_hi = self.ep[ev.arc_a]
        b_lo, b_hi = self.ep[ev.arc_b]
        w = ev.node
        wpos_rank = self.order_pos[w]
        lo_rank, hi_rank = self.order_pos[lower], self.order_pos[upper]
        if lo_rank < wpos_rank < hi_rank:
            plo, phi = self.layout.positions[lower], self.layout.positions[upper]
            alpha, beta = self.layout.free_interval(page, plo, phi, from_low=True)
            self.layout.place_node(w, (alpha + beta) / 2)
            self.layout.draw(ev.arc_a, a_lo, a_hi, page)
            self.layout.draw(ev.arc_b, b_lo, b_hi, page)
            return
        # chain node beyond both endpoints: place it in the adjacent gap and
        # find a block page where neither new arc crosses anything
        if wpos_rank > hi_rank:
            alpha, beta = self.layout.gap_after(self.layout.positions[upper])
        else:
            alpha, beta = self.layout.gap_before(self.layout.positions[lower])
        wpos = (alpha + beta) / 2
        self.layout.place_node(w, wpos)
        spans = []
        for lo_n, hi_n in (self.ep[ev.arc_a], self.ep[ev.arc_b]):
            spans.append(
                (
                    min(self.layout.positions[lo_n], self.layout.positions[hi_n]),
                    max(self.layout.positions[lo_n], self.layout.positions[hi_n]),
                )
            )
        block = page // (self.m + 1)
        floor = self.block_floor.get(block, 1)
        candidates = [page]
        candidates += [block * (self.m + 1) + off for off in range(floor, self.m + 1)]
        candidates += [block * (self.m + 1) + off for off in range(0, floor)]
        target = None
        tried: set[int] = set()
        for cand in candidates:
            if cand in tried or not 0 <= cand < self.pages:
                continue
            tried.add(cand)
            if not self.layout.conflicts(cand, spans[0]) and not self.layout.conflicts(
                cand, spans[1]
            ):
                target = cand
                break
        if target is None:
            raise BudgetError("no page in the block can take a chain node's arcs")
        self.layout.draw(ev.arc_a, a_lo, a_hi, target)
        self.layout.draw(ev.arc_b, b_lo, b_hi, target)


def embed_dag(
    g: Dag, f: CoreFiltration, m: int, nest_parallel_arcs: bool = False
) -> BookEmbedding:
    """Embed a DAG into exactly (m+1) * max(1, n-2) pages via its core.

    n counts core nodes.  m must be at least the largest page budget of a
    core arc minus one; BudgetError reports violations.  With
    nest_parallel_arcs, restored parallel arcs share their page instead
    of spreading over rotational copies (labelled chains still get their
    own copies when several ride the same pair of nodes).
    """
    if f.original.arcs != g.arcs or f.original.nodes != g.nodes:
        raise BookEmbedError("filtration does not belong to this graph")
    if m < 0:
        raise BookEmbedError("m must be nonnegative")
    replay = _Replay(g, f, m, nest_parallel_arcs)
    b = replay.run()
    bad = validate(b, g)
    if bad:
        raise BookEmbedError("construction produced an invalid embedding: " + "; ".join(map(str, bad)))
    return b


def embed_reeb(r: ReebGraph) -> BookEmbedding:
    """Embed a level-set graph, counting shared cycles after pre-merging.

    Degree-2 label nodes are first merged away and parallel arcs
    collapsed; the cycle statistic of that smaller graph sizes the book.
    Parallel arcs are nested in one page, so a labelled chain and its
    plain twin coexist where possible.
    """
    g = reeb_to_dag(r)
    h = simplify_steps12(g)
    m = max_shared_independent_cycles(h)
    f = core_filtration(g)
    return embed_dag(g, f, m, nest_parallel_arcs=True)


def reeb_to_dag(r: ReebGraph) -> Dag:
    heights = {n.id: n.height for n in r.nodes}
    return make_dag(
        [Arc(a.lower, a.upper, a.index, a.label) for a in r.arcs],
        nodes=[n.id for n in r.nodes],
        heights=heights,
    )


# ---------------------------------------------------------------------------
# linear codes


@dataclass(frozen=True)
class CodeEntry:
    i: int
    j: int
    labels: tuple[tuple[int, ...], ...]  # one group per sub-arc of a chain
    page: int  # 1-based in the text form

    def text(self) -> str:
        body = f"{self.i}{self.j}" if self.i <= 9 and self.j <= 9 else f"{self.i},{self.j}"
        if self.labels:
            if all(len(g) == 1 for g in self.labels):
                body += ";" + ",".join(str(g[0]) for g in self.labels)
            else:
                body += ";" + ";".join(",".join(str(v) for v in g) for g in self.labels)
        return f"({body})_{self.page}"


@dataclass(frozen=True)
class LinearCode:
    entries: tuple[CodeEntry, ...]

    def text(self) -> str:
        return ",".join(e.text() for e in self.entries)

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.text()


def encode(b: BookEmbedding, reeb_optimized: bool = False) -> LinearCode:
    """Lexicographically sorted code of a book embedding.

    Nodes are renumbered 1..n along the axis.  With reeb_optimized,
    maximal chains of labelled degree-2 nodes collapse into one entry
    whose label groups list the sub-arc labels in order; the chain's
    interior nodes are not numbered.
    """
    order = b.nodes_in_axis_order()
    arcs = list(b.arcs)
    chains: list[list[EmbeddedArc]] = []
    if reeb_optimized:
        ins: dict[int, list[int]] = {}
        outs: dict[int, list[int]] = {}
        for k, a in enumerate(arcs):
            ins.setdefault(a.upper, []).append(k)
            outs.setdefault(a.lower, []).append(k)

        def chainable(n: int) -> bool:
            if len(ins.get(n, [])) != 1 or len(outs.get(n, [])) != 1:
                return False
            a, c = arcs[ins[n][0]], arcs[outs[n][0]]
            return a.page == c.page and a.label.values != () and c.label.values != ()

        for k, a in enumerate(arcs):
            if chainable(a.lower):
                continue  # interior arc; its chain is walked from the head
            chain = [a]
            while chainable(chain[-1].upper):
                chain.append(arcs[outs[chain[-1].upper][0]])
            chains.append(chain)
    else:
        chains = [[a] for a in arcs]

    dropped: set[int] = set()
    for chain in chains:
        for a in chain[1:]:
            dropped.add(a.lower)
    renum = {n: i + 1 for i, n in enumerate(n for n in order if n not in dropped)}

    entries = []
    for chain in chains:
        labels = tuple(a.label.values for a in chain if a.label.values != ())
        entries.append(
            CodeEntry(
                i=renum[chain[0].lower],
                j=renum[chain[-1].upper],
                labels=labels,
                page=chain[0].page + 1,
            )
        )
    entries.sort(key=lambda e: (e.i, e.j, e.page, e.labels))
    return LinearCode(entries=tuple(entries))


class CodeParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def parse_code(text: str) -> LinearCode:
    """Parse the textual code; errors carry the offending line number."""
    entries: list[CodeEntry] = []
    for lineno, line in enumerate(text.splitlines() or [""], start=1):
        line = line.strip()
        if not line:
            continue
        chunks = []
        depth = 0
        cur = ""
        for ch in line:
            if ch == "," and depth == 0:
                if cur:
                    chunks.append(cur)
                cur = ""
                continue
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise CodeParseError(lineno, "unbalanced ')'")
            cur += ch
        if depth != 0:
            raise CodeParseError(lineno, "unbalanced '('")
        if cur:
            chunks.append(cur)
        for chunk in chunks:
            entries.append(_parse_entry(chunk, lineno))
    return LinearCode(entries=tuple(entries))


def _parse_entry(chunk: str, lineno: int) -> CodeEntry:
    chunk = chunk.strip()
    if not (chunk.startswith("(") and "_" in chunk):
        raise CodeParseError(lineno, f"malformed entry {chunk!r}")
    body, _, page_text = chunk.rpartition("_")
    if not (body.startswith("(") and body.endswith(")")):
        raise CodeParseError(lineno, f"malformed entry {chunk!r}")
    body = body[1:-1]
    try:
        page = int(page_text)
    except ValueError:
        raise CodeParseError(lineno, f"bad page in {chunk!r}") from None
    parts = body.split(";")
    head = parts[0]
    try:
        if "," in head:
            i_text, j_text = head.split(",")
            i, j = int(i_text), int(j_text)
        else:
            if len(head) < 2:
                raise ValueError
            i, j = int(head[:-1]), int(head[-1])
    except ValueError:
        raise CodeParseError(lineno, f"bad node pair in {chunk!r}") from None
    groups = []
    for part in parts[1:]:
        try:
            groups.append(tuple(int(v) for v in part.split(",") if v != ""))
        except ValueError:
            raise CodeParseError(lineno, f"bad label in {chunk!r}") from None
    return CodeEntry(i=i, j=j, labels=tuple(groups), page=page)


def decode(
    text: str | LinearCode,
    reeb_optimized: bool = False,
    label_mode: str = "euler",
) -> tuple[Dag, list[int]]:
    """Rebuild the labelled multigraph and page list from a code.

    In reeb_optimized euler codes, an entry with several comma-separated
    labels is a chain of unit-labelled sub-arcs whose interior degree-2
    nodes get fresh ids after the numbered ones; in betti codes,
    semicolon-separated groups play that role.
    """
    code = parse_code(text) if isinstance(text, str) else text
    if label_mode not in ("euler", "betti", "none"):
        raise ValueError(f"unknown label mode {label_mode!r}")
    kind = label_mode
    named = {e.i for e in code.entries} | {e.j for e in code.entries}
    next_node = max(named) + 1 if named else 1
    arcs: list[Arc] = []
    labels: list[LabelArray] = []
    pages: list[int] = []
    pair_count: dict[tuple[int, int], int] = {}

    def add(u: int, v: int, label: LabelArray, page: int) -> None:
        idx = pair_count.get((u, v), 0)
        pair_count[(u, v)] = idx + 1
        arcs.append(Arc(u, v, idx, label))
        pages.append(page - 1)

    for e in code.entries:
        groups = list(e.labels)
        if reeb_optimized and kind == "euler" and groups and all(len(g) == 1 for g in groups):
            subarcs = groups
        elif reeb_optimized and kind == "betti" and len(groups) > 1:
            subarcs = groups
        else:
            subarcs = [tuple(v for g in groups for v in g)] if groups else [()]
        if len(subarcs) == 1:
            vals = subarcs[0]
            if vals == ():
                label = LabelArray.none()
            elif kind == "euler" and len(vals) == 1:
                label = LabelArray.euler(vals[0])
            else:
                label = LabelArray.betti(vals)
            add(e.i, e.j, label, e.page)
            continue
        prev = e.i
        for k, vals in enumerate(subarcs):
            upper = e.j if k == len(subarcs) - 1 else next_node
            if upper == next_node:
                next_node += 1
            label = LabelArray.euler(vals[0]) if kind == "euler" else LabelArray.betti(vals)
            add(prev, upper, label, e.page)
            prev = upper

    g = make_dag(arcs, nodes=sorted(named))
    return g, pages


def code_embedding(code: LinearCode | str, **decode_kwargs) -> BookEmbedding:
    """Book embedding with canonical axis positions rebuilt from a code.

    Numbered nodes sit at integer positions; chain interiors (decoded
    from multi-label entries) slot into the gap right after their entry's
    lower node, in chain order.
    """
    g, pages = decode(code, **decode_kwargs)
    named = max((e for e in g.nodes if True), default=0)
    numbered = [n for n in g.nodes if all(n != a.lower or True for a in g.arcs)]
    # numbered nodes are those small ids that appear in entries; decode
    # allocates chain interiors above every named id
    interior_start = None
    ids = sorted(g.nodes)
    for k, n in enumerate(ids):
        if n != k + 1:
            interior_start = n
            break
    pos: dict[int, Fraction] = {}
    for n in ids:
        if interior_start is None or n < interior_start:
            pos[n] = Fraction(n)
    taken = sorted(pos.values())

    def place_after(p: Fraction) -> Fraction:
        later = [q for q in taken if q > p]
        spot = (p + later[0]) / 2 if later else p + 1
        taken.append(spot)
        taken.sort()
        return spot

    for a in g.arcs:
        if a.lower in pos and a.upper not in pos:
            pos[a.upper] = place_after(pos[a.lower])
        elif a.lower not in pos and a.upper not in pos:
            raise BookEmbedError("disconnected chain interior in code")
    for a in g.arcs:
        if a.lower not in pos or a.upper not in pos:
            raise BookEmbedError("chain interior could not be placed")
    axis = tuple(sorted(((n, p) for n, p in pos.items()), key=lambda t: t[1]))
    arcs = tuple(
        EmbeddedArc(a.lower, a.upper, pages[i], a.index, a.label)
        for i, a in enumerate(g.arcs)
    )
    max_page = max(pages, default=0) + 1
    return BookEmbedding(pages=max_page, axis=axis, arcs=arcs)


# ---------------------------------------------------------------------------
# exact page-number oracle


def brute_force_page_number(g: Dag, max_nodes: int = 8, max_arcs: int = 14) -> int:
    """Minimum page count over all axis orders, by exhaustive search.

    Only for desk-sized graphs; raises DagError beyond the limits.
    """
    if len(g.nodes) > max_nodes:
        raise DagError(f"{len(g.nodes)} nodes exceed the oracle limit {max_nodes}")
    if len(g.arcs) > max_arcs:
        raise DagError(f"{len(g.arcs)} arcs exceed the oracle limit {max_arcs}")
    if not g.arcs:
        return 0
    topological_order(g)  # raises on directed cycles

    nodes = list(g.nodes)
    succ: dict[int, list[int]] = {n: [] for n in nodes}
    arcs_into: dict[int, list[int]] = {n: [] for n in nodes}
    for aid, a in enumerate(g.arcs):
        succ[a.lower].append(a.upper)
        arcs_into[a.upper].append(aid)
    indeg0 = {n: sum(1 for a in g.arcs if a.upper == n) for n in nodes}

    def feasible(k: int) -> bool:
        rank: dict[int, int] = {}
        colors: dict[int, int] = {}
        placed_spans: list[tuple[int, int, int]] = []  # (lo, hi, color)
        indeg = dict(indeg0)

        def color_arcs(pending: list[int], idx: int) -> bool:
            if idx == len(pending):
                return place_next()
            aid = pending[idx]
            a = g.arcs[aid]
            lo, hi = rank[a.lower], rank[a.upper]
            for c in range(k):
                ok = True
                for s, e, col in placed_spans:
                    if col == c and ((s < lo < e < hi) or (lo < s < hi < e)):
                        ok = False
                        break
                if ok:
                    placed_spans.append((lo, hi, c))
                    colors[aid] = c
                    if color_arcs(pending, idx + 1):
                        return True
                    placed_spans.pop()
                    del colors[aid]
            return False

        def place_next() -> bool:
            if len(rank) == len(nodes):
                return True
            ready = [n for n in nodes if n not in rank and indeg[n] == 0]
            for n in ready:
                rank[n] = len(rank)
                for w in succ[n]:
                    indeg[w] -= 1
                if color_arcs(sorted(arcs_into[n]), 0):
                    return True
                for w in succ[n]:
                    indeg[w] += 1
                del rank[n]
            return False

        return place_next()

    k = 1
    while True:
        if feasible(k):
            return k
        k += 1
        if k > len(g.arcs):
            return len(g.arcs)
