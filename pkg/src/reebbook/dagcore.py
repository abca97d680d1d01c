"""Directed acyclic multigraphs: ordering, cycle statistics, core filtration.

The core of a DAG is reached by repeating three steps per stage: merge
the two arcs of a degree-2 node, collapse parallel arcs, prune hanging
trees (keeping the attachment node).  Every step is recorded as an event
so the original graph can be rebuilt exactly, arc by arc.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import LabelArray
from .gf2 import rank as gf2_rank


class DagError(ValueError):
    """Invalid DAG input."""


class DagCycleError(DagError):
    """A directed cycle was found; carries one witness cycle."""

    def __init__(self, cycle: list[int]):
        self.cycle = cycle
        super().__init__("directed cycle: " + " -> ".join(map(str, cycle)))


class CycleCapExceeded(RuntimeError):
    """Too many simple cycles; carries the cycle-space upper bound."""

    def __init__(self, cap: int, fallback: int):
        self.cap = cap
        self.fallback = fallback
        super().__init__(
            f"more than {cap} simple cycles; "
            f"cycle-space dimension {fallback} is an upper bound"
        )


class BudgetError(RuntimeError):
    """A per-arc page budget exceeded its bound."""


@dataclass(frozen=True)
class Arc:
    lower: int
    upper: int
    index: int = 0
    label: LabelArray = field(default_factory=LabelArray.none)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.lower, self.upper)


@dataclass(frozen=True)
class Dag:
    nodes: tuple[int, ...]
    arcs: tuple[Arc, ...]
    heights: tuple[tuple[int, Fraction], ...] = ()

    def height_of(self) -> dict[int, Fraction]:
        return dict(self.heights)

    def degree(self, node: int) -> int:
        return sum(1 for a in self.arcs if node in (a.lower, a.upper))


def make_dag(
    arcs: list[tuple[int, int]] | list[Arc],
    nodes: list[int] | None = None,
    heights: dict[int, Fraction] | None = None,
    labels: list[LabelArray] | None = None,
) -> Dag:
    """Build a Dag, assigning parallel-arc indices in input order."""
    pair_count: dict[tuple[int, int], int] = {}
    out: list[Arc] = []
    for k, a in enumerate(arcs):
        if isinstance(a, Arc):
            out.append(a)
            continue
        u, v = a
        if u == v:
            raise DagError(f"self loop at {u}")
        idx = pair_count.get((u, v), 0)
        pair_count[(u, v)] = idx + 1
        label = labels[k] if labels else LabelArray.none()
        out.append(Arc(u, v, idx, label))
    node_set = set(nodes or [])
    for a in out:
        node_set.update(a.pair)
    hts = tuple(sorted((heights or {}).items()))
    return Dag(nodes=tuple(sorted(node_set)), arcs=tuple(out), heights=hts)


def topological_order(g: Dag) -> list[int]:
    """Canonical topological order, ties broken by (height, id).

    Raises DagCycleError listing a directed cycle if there is one.
    """
    hts = g.height_of()

    def key(n: int):
        return (hts[n], n) if n in hts else (n,)

    indeg = {n: 0 for n in g.nodes}
    succ: dict[int, list[int]] = {n: [] for n in g.nodes}
    for a in g.arcs:
        indeg[a.upper] += 1
        succ[a.lower].append(a.upper)
    heap = [(key(n), n) for n in g.nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        _, n = heapq.heappop(heap)
        order.append(n)
        for w in succ[n]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, (key(w), w))
    if len(order) < len(g.nodes):
        remaining = {n for n in g.nodes if indeg[n] > 0}
        start = min(remaining)
        seen: dict[int, int] = {}
        path = [start]
        seen[start] = 0
        node = start
        while True:
            node = next(w for w in succ[node] if w in remaining)
            if node in seen:
                raise DagCycleError(path[seen[node] :] + [node])
            seen[node] = len(path)
            path.append(node)
    return order


def _undirected_cycles(g: Dag, cap: int) -> tuple[list[frozenset[int]], int]:
    """All simple undirected cycles as arc-id sets, with the arc count."""
    m = len(g.arcs)
    adj: dict[int, list[tuple[int, int]]] = {n: [] for n in g.nodes}
    for aid, a in enumerate(g.arcs):
        adj[a.lower].append((a.upper, aid))
        adj[a.upper].append((a.lower, aid))
    for n in adj:
        adj[n].sort()

    comp = _component_count(g)
    fallback = m - len(g.nodes) + comp
    cycles: set[frozenset[int]] = set()

    for s in g.nodes:
        used: list[int] = []
        on_path = {s}

        def dfs(u: int) -> None:
            for w, aid in adj[u]:
                if w < s or aid in used_set:
                    continue
                if w == s:
                    if len(used) >= 1:
                        cycles.add(frozenset(used + [aid]))
                        if len(cycles) > cap:
                            raise CycleCapExceeded(cap, fallback)
                elif w not in on_path:
                    on_path.add(w)
                    used.append(aid)
                    used_set.add(aid)
                    dfs(w)
                    used_set.discard(aid)
                    used.pop()
                    on_path.discard(w)

        used_set: set[int] = set()
        dfs(s)
    return sorted(cycles, key=sorted), m


def _component_count(g: Dag) -> int:
    parent = {n: n for n in g.nodes}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in g.arcs:
        parent[find(a.lower)] = find(a.upper)
    return len({find(n) for n in g.nodes})


def max_shared_independent_cycles(g: Dag, cap: int = 10_000) -> int:
    """Largest number of independent simple cycles sharing one arc.

    Cycles are undirected and node-simple; independence is over GF(2) on
    arc-indicator vectors.  Forests give 0.  If more than `cap` cycles
    exist, CycleCapExceeded reports the cycle-space dimension instead.
    """
    cycles, m = _undirected_cycles(g, cap)
    if not cycles:
        return 0
    masks = [sum(1 << aid for aid in c) for c in cycles]
    best = 0
    for aid in range(m):
        bit = 1 << aid
        sharing = [v for v in masks if v & bit]
        if len(sharing) > best:
            best = max(best, gf2_rank(sharing))
    return best


@dataclass(frozen=True)
class MergeEvent:
    """Step 1: degree-2 node forgotten, its two arcs merged into one."""

    node: int
    arc_a: int
    arc_b: int
    merged: int


@dataclass(frozen=True)
class CollapseEvent:
    """Step 2: parallel arcs replaced by a single arc."""

    arcs: tuple[int, ...]
    merged: int


@dataclass(frozen=True)
class TreeEvent:
    """Step 3: hanging tree removed, its attachment node kept.

    up_anchor / down_anchor are the kept arcs at the root toward the next
    node above resp. below, used to place the tree back during replays.
    """

    root: int
    tree_nodes: tuple[int, ...]
    tree_arcs: tuple[int, ...]
    up_anchor: int | None
    down_anchor: int | None


@dataclass(frozen=True)
class Stage:
    merges: tuple[MergeEvent, ...]
    collapses: tuple[CollapseEvent, ...]
    removals: tuple[TreeEvent, ...]

    def empty(self) -> bool:
        return not (self.merges or self.collapses or self.removals)


@dataclass(frozen=True)
class CoreFiltration:
    original: Dag
    core: Dag
    stages: tuple[Stage, ...]
    arc_endpoints: tuple[tuple[int, tuple[int, int]], ...]
    order: tuple[int, ...]  # canonical node order of the original graph

    def endpoints(self) -> dict[int, tuple[int, int]]:
        return dict(self.arc_endpoints)

    def derived(self) -> dict[int, tuple[str, tuple[int, ...]]]:
        """Parent arc id -> (event kind, child arc ids)."""
        d: dict[int, tuple[str, tuple[int, ...]]] = {}
        for stage in self.stages:
            for ev in stage.merges:
                d[ev.merged] = ("merge", (ev.arc_a, ev.arc_b))
            for ev in stage.collapses:
                d[ev.merged] = ("collapse", ev.arcs)
        return d

    def anchored_trees(self) -> dict[int, list[TreeEvent]]:
        """Tree events keyed by the arc their tree is assigned to."""
        d: dict[int, list[TreeEvent]] = {}
        for stage in self.stages:
            for ev in stage.removals:
                anchor = ev.up_anchor if ev.up_anchor is not None else ev.down_anchor
                if anchor is not None:
                    d.setdefault(anchor, []).append(ev)
        return d

    def unanchored_trees(self) -> list[TreeEvent]:
        out = []
        for stage in self.stages:
            for ev in stage.removals:
                if ev.up_anchor is None and ev.down_anchor is None:
                    out.append(ev)
        return out

    @property
    def graphs(self) -> tuple[Dag, ...]:
        """The chain core(G) = G_0 within G_1 within ... within G_k = G."""
        chain = [self.core]
        current = self.core
        for stage in reversed(self.stages):
            current = _undo_stage(current, stage, self.endpoints())
            chain.append(current)
        return tuple(chain)

    def trace_lines(self) -> list[str]:
        lines: list[str] = []
        ep = self.endpoints()
        for i, stage in enumerate(self.stages, start=1):
            lines.append(f"stage {i}")
            for ev in stage.merges:
                lines.append(
                    f"merge node={ev.node} {ev.arc_a}+{ev.arc_b} -> {ev.merged}"
                    f" ({ep[ev.merged][0]},{ep[ev.merged][1]})"
                )
            for ev in stage.collapses:
                ids = ",".join(map(str, ev.arcs))
                lines.append(
                    f"collapse {ids} -> {ev.merged}"
                    f" ({ep[ev.merged][0]},{ep[ev.merged][1]})"
                )
            for ev in stage.removals:
                nodes = ",".join(map(str, ev.tree_nodes)) or "-"
                arcs = ",".join(map(str, ev.tree_arcs)) or "-"
                up = ev.up_anchor if ev.up_anchor is not None else "-"
                dn = ev.down_anchor if ev.down_anchor is not None else "-"
                lines.append(
                    f"tree root={ev.root} nodes={nodes} arcs={arcs} up={up} down={dn}"
                )
        return lines


def _undo_stage(g: Dag, stage: Stage, ep: dict[int, tuple[int, int]]) -> Dag:
    """Structurally reverse one stage (no geometry), for the graph chain."""
    present: dict[int, tuple[int, int]] = {}
    for a in g.arcs:
        present[_arc_id_of(g, a)] = (a.lower, a.upper)
    nodes = set(g.nodes)
    for ev in reversed(stage.removals):
        nodes.add(ev.root)
        nodes.update(ev.tree_nodes)
        for aid in ev.tree_arcs:
            present[aid] = ep[aid]
    for ev in reversed(stage.collapses):
        del present[ev.merged]
        for aid in ev.arcs:
            present[aid] = ep[aid]
    for ev in reversed(stage.merges):
        del present[ev.merged]
        nodes.add(ev.node)
        present[ev.arc_a] = ep[ev.arc_a]
        present[ev.arc_b] = ep[ev.arc_b]
    return _dag_from_ids(sorted(nodes), present)


_ARC_ID_KEY = "_arc_ids"


def _dag_from_ids(nodes: list[int], present: dict[int, tuple[int, int]]) -> Dag:
    pair_count: dict[tuple[int, int], int] = {}
    arcs = []
    ids = []
    for aid in sorted(present):
        u, v = present[aid]
        idx = pair_count.get((u, v), 0)
        pair_count[(u, v)] = idx + 1
        arcs.append(Arc(u, v, idx))
        ids.append(aid)
    g = Dag(nodes=tuple(sorted(nodes)), arcs=tuple(arcs))
    object.__setattr__(g, _ARC_ID_KEY, tuple(ids))
    return g


def _arc_id_of(g: Dag, a: Arc) -> int:
    ids = getattr(g, _ARC_ID_KEY, None)
    if ids is None:
        return g.arcs.index(a)
    return ids[g.arcs.index(a)]


def arc_ids(g: Dag) -> list[int]:
    """Filtration arc ids aligned with g.arcs (original graphs: positions)."""
    ids = getattr(g, _ARC_ID_KEY, None)
    if ids is None:
        return list(range(len(g.arcs)))
    return list(ids)


def core_filtration(g: Dag) -> CoreFiltration:
    """Simplify to the core, recording every event for exact replay."""
    order = topological_order(g)
    pos = {n: i for i, n in enumerate(order)}

    ep: dict[int, tuple[int, int]] = {}
    present: dict[int, tuple[int, int]] = {}
    for aid, a in enumerate(g.arcs):
        if pos[a.lower] >= pos[a.upper]:
            raise DagError(f"arc {a.pair} is not oriented by the node order")
        ep[aid] = a.pair
        present[aid] = a.pair
    next_id = len(g.arcs)
    nodes = set(g.nodes)

    def degrees() -> dict[int, list[int]]:
        inc: dict[int, list[int]] = {n: [] for n in nodes}
        for aid, (u, v) in present.items():
            inc[u].append(aid)
            inc[v].append(aid)
        return inc

    stages: list[Stage] = []
    while True:
        merges: list[MergeEvent] = []
        collapses: list[CollapseEvent] = []
        removals: list[TreeEvent] = []

        # Step 1: merge degree-2 nodes, smallest first, until none remain.
        while True:
            inc = degrees()
            candidate = None
            for n in sorted(nodes, key=lambda n: pos[n]):
                if len(inc[n]) != 2:
                    continue
                a1, a2 = inc[n]
                ends = {x for x in present[a1] + present[a2] if x != n}
                if len(ends) == 2:
                    candidate = (n, a1, a2, ends)
                    break
            if candidate is None:
                break
            n, a1, a2, ends = candidate
            u, v = sorted(ends, key=lambda x: pos[x])
            merged = next_id
            next_id += 1
            ep[merged] = (u, v)
            present[merged] = (u, v)
            del present[a1], present[a2]
            nodes.discard(n)
            merges.append(MergeEvent(node=n, arc_a=a1, arc_b=a2, merged=merged))

        # Step 2: collapse parallel arcs, groups in (lower, upper) order.
        groups: dict[tuple[int, int], list[int]] = {}
        for aid, pair in present.items():
            groups.setdefault(pair, []).append(aid)
        for pair in sorted(groups, key=lambda p: (pos[p[0]], pos[p[1]])):
            ids = sorted(groups[pair])
            if len(ids) < 2:
                continue
            merged = next_id
            next_id += 1
            ep[merged] = pair
            present[merged] = pair
            for aid in ids:
                del present[aid]
            collapses.append(CollapseEvent(arcs=tuple(ids), merged=merged))

        # Step 3: prune hanging trees, peeling the largest leaf first so a
        # free-standing tree keeps its minimal node.
        inc = degrees()
        removed: set[int] = set()
        removed_arcs: set[int] = set()
        while True:
            leaves = [
                n
                for n in nodes
                if n not in removed
                and len([a for a in inc[n] if a not in removed_arcs]) == 1
            ]
            if not leaves:
                break
            leaf = max(leaves, key=lambda n: pos[n])
            (aid,) = [a for a in inc[leaf] if a not in removed_arcs]
            removed.add(leaf)
            removed_arcs.add(aid)

        if removed:
            # group removed material into trees by attachment root
            parent = {n: n for n in removed}

            def find(a: int) -> int:
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for aid in removed_arcs:
                u, v = present[aid]
                if u in removed and v in removed and find(u) != find(v):
                    parent[find(u)] = find(v)
            root_of_piece: dict[int, int] = {}
            arcs_of: dict[int, set[int]] = {}
            for aid in removed_arcs:
                u, v = present[aid]
                if u in removed and v in removed:
                    rep = find(u)
                elif u in removed:
                    rep = find(u)
                    root_of_piece[rep] = v
                else:
                    rep = find(v)
                    root_of_piece[rep] = u
                arcs_of.setdefault(rep, set()).add(aid)
            pieces: dict[int, list[int]] = {}
            for n in removed:
                pieces.setdefault(find(n), []).append(n)

            events: list[TreeEvent] = []
            for rep, piece_nodes in pieces.items():
                root = root_of_piece.get(rep)
                if root is None:
                    root = min(piece_nodes, key=lambda n: pos[n])
                    piece_nodes = [n for n in piece_nodes if n != root]
                events.append(
                    TreeEvent(
                        root=root,
                        tree_nodes=tuple(sorted(piece_nodes, key=lambda n: pos[n])),
                        tree_arcs=tuple(sorted(arcs_of.get(rep, ()))),
                        up_anchor=None,
                        down_anchor=None,
                    )
                )
            for aid in removed_arcs:
                del present[aid]
            for ev in events:
                for n in ev.tree_nodes:
                    nodes.discard(n)
            # anchors against the pruned graph
            inc = degrees()
            final_events = []
            for ev in sorted(events, key=lambda e: pos[e.root]):
                ups = [a for a in inc[ev.root] if present[a][0] == ev.root]
                downs = [a for a in inc[ev.root] if present[a][1] == ev.root]
                up = min(ups, key=lambda a: pos[present[a][1]]) if ups else None
                down = max(downs, key=lambda a: pos[present[a][0]]) if downs else None
                final_events.append(
                    TreeEvent(
                        root=ev.root,
                        tree_nodes=ev.tree_nodes,
                        tree_arcs=ev.tree_arcs,
                        up_anchor=up,
                        down_anchor=down,
                    )
                )
            removals = final_events

        stage = Stage(tuple(merges), tuple(collapses), tuple(removals))
        if stage.empty():
            break
        stages.append(stage)

    core = _dag_from_ids(sorted(nodes), present)
    ordered_ep = tuple(sorted(ep.items()))
    return CoreFiltration(
        original=g,
        core=core,
        stages=tuple(stages),
        arc_endpoints=ordered_ep,
        order=tuple(order),
    )


def simplify_steps12(g: Dag) -> Dag:
    """The graph after the merge and collapse steps of the first stage."""
    f = core_filtration(g)
    if not f.stages:
        return g
    first = f.stages[0]
    ep = f.endpoints()
    present = {aid: ep[aid] for aid in range(len(g.arcs))}
    nodes = set(g.nodes)
    for ev in first.merges:
        del present[ev.arc_a], present[ev.arc_b]
        present[ev.merged] = ep[ev.merged]
        nodes.discard(ev.node)
    for ev in first.collapses:
        for aid in ev.arcs:
            del present[aid]
        present[ev.merged] = ep[ev.merged]
    return _dag_from_ids(sorted(nodes), present)


def edge_subgraph(f: CoreFiltration, core_arc: int | Arc) -> Dag:
    """Everything of the original graph that collapsed onto one core arc."""
    ep = f.endpoints()
    if isinstance(core_arc, Arc):
        ids = arc_ids(f.core)
        matches = [
            ids[i]
            for i, a in enumerate(f.core.arcs)
            if a.pair == core_arc.pair and a.index == core_arc.index
        ]
        if not matches:
            raise DagError(f"arc {core_arc.pair} not in the core")
        aid = matches[0]
    else:
        aid = core_arc
        if aid not in arc_ids(f.core):
            raise DagError(f"arc id {aid} not in the core")

    derived = f.derived()
    trees = f.anchored_trees()
    n_orig = len(f.original.arcs)
    out_arcs: set[int] = set()
    out_nodes: set[int] = set()

    def gather(a: int) -> None:
        if a in derived:
            kind, children = derived[a]
            if kind == "merge":
                for stage in f.stages:
                    for ev in stage.merges:
                        if ev.merged == a:
                            out_nodes.add(ev.node)
            for c in children:
                gather(c)
        elif a < n_orig:
            out_arcs.add(a)
            out_nodes.update(ep[a])
        for ev in trees.get(a, []):
            out_nodes.update(ev.tree_nodes)
            out_nodes.add(ev.root)
            for ta in ev.tree_arcs:
                gather(ta)

    gather(aid)
    out_nodes.update(ep[aid])
    present = {a: ep[a] for a in sorted(out_arcs)}
    return _dag_from_ids(sorted(out_nodes), present)


def page_budget(f: CoreFiltration, arc: int | Arc, m: int | None = None) -> int:
    """Pages needed to lay the arc's collapsed material over its span.

    Merging chains keeps the budget, collapsing k parallel arcs adds the
    children's budgets, trees ride along for free.  With m given, a
    budget above m+1 raises BudgetError.
    """
    ep = f.endpoints()
    if isinstance(arc, Arc):
        ids = arc_ids(f.core)
        matches = [
            ids[i]
            for i, a in enumerate(f.core.arcs)
            if a.pair == arc.pair and a.index == arc.index
        ]
        if not matches:
            raise DagError(f"arc {arc.pair} not in the core")
        aid = matches[0]
    else:
        aid = arc
        if aid not in ep:
            raise DagError(f"unknown arc id {arc}")

    derived = f.derived()

    def mu(a: int) -> int:
        if a not in derived:
            return 1
        kind, children = derived[a]
        if kind == "merge":
            return max(mu(c) for c in children)
        return sum(mu(c) for c in children)

    value = mu(aid)
    if m is not None and value > m + 1:
        raise BudgetError(f"page budget {value} exceeds bound {m + 1}")
    return value
