"""Planarity testing by PQ-tree vertex addition, with embedding extraction.

Both vertex orders are supported: leaf-to-root DFS (components merge as
vertices arrive) and st-order (one main tree whose special leaf is the
edge v1-vn). Every consumption event snapshots the consumed block as a
"black tree"; after the orientation variables are solved, a backward
replay over those snapshots rebuilds one concrete rotation system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Disconnected, MalformedInstance, NotBiconnected, UnassignedVariable
from .graphs import Graph, StOrder, edge, is_biconnected, is_connected, other_end, st_ordering
from .parity import ParitySystem, VarGen, sweep_qnode_labels
from .pqtree import PQTree, make_leaf, universal


@dataclass
class MergeRec:
    """One component consumed (fully or partially) by a vertex addition."""

    tree_id: int
    snapshot: PQTree
    consumed: set
    full: bool
    remaining_leaves: set | None = None


@dataclass
class StageRec:
    """One vertex addition: merges, new out-edges, and the resulting tree."""

    vertex: str
    kind: str  # 'new' | 'main' | 'final'
    tree_id: int | None
    special_edge: tuple | None
    out_edges: list
    main_merge: MergeRec | None
    merges: list
    forced: list | None = None  # common in-edge order, set by the SEFE driver


@dataclass
class Trace:
    stages: list = field(default_factory=list)
    tree_special: dict = field(default_factory=dict)  # tree id -> birth special edge


class RotationSystem:
    """Cyclic order of incident edges around every vertex."""

    def __init__(self, rot: dict[str, list] | None = None):
        self.rot = rot or {}

    def __getitem__(self, v):
        return self.rot[v]

    def __contains__(self, v):
        return v in self.rot

    def vertices(self):
        return self.rot.keys()

    def restricted(self, v, edge_set) -> list:
        return [e for e in self.rot[v] if e in edge_set]

    def copy(self) -> "RotationSystem":
        return RotationSystem({v: list(r) for v, r in self.rot.items()})


class DSU:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb
        return rb


class AdditionEngine:
    """Vertex-addition state for one graph: component trees and the trace."""

    def __init__(self, g: Graph, vargen: VarGen, system: ParitySystem):
        self.g = g
        self.vargen = vargen
        self.system = system
        self.trees: dict[int, PQTree] = {}
        self.comp = DSU()
        self.comp_tree: dict = {}  # DSU root -> tree id
        self.next_tree_id = 0
        self.next_ph = 0
        self.trace = Trace()
        self.embedded: set[str] = set()
        self.fail_vertex: str | None = None
        self.fail_stage: int | None = None

    def _fresh_tree_id(self) -> int:
        tid = self.next_tree_id
        self.next_tree_id += 1
        return tid

    def _placeholder(self):
        self.next_ph += 1
        return ("#ph", self.next_ph)

    def tree_of_vertex(self, v: str) -> int:
        return self.comp_tree[self.comp.find(v)]

    def in_edges_by_tree(self, v: str) -> dict[int, set]:
        buckets: dict[int, set] = {}
        for e in self.g.adjacency[v]:
            u = other_end(e, v)
            if u in self.embedded:
                tid = self.tree_of_vertex(u)
                buckets.setdefault(tid, set()).add(e)
        return buckets

    def out_edges_of(self, v: str) -> list:
        return [e for e in self.g.adjacency[v]
                if other_end(e, v) not in self.embedded]

    def consume(self, tree_id: int, black: set):
        """Make black circularly consecutive in the tree and take it out.

        Returns (MergeRec, remaining_root_node) or None when the reduction
        fails. remaining_root_node is None for full consumption; otherwise
        it is a detached linear subtree over the remaining out-edges whose
        orders are the admissible arc orders.
        """
        tree = self.trees[tree_id]
        ground = tree.ground_set()
        if black == ground:
            eqs = sweep_qnode_labels([tree])
            self.system.add_all(eqs, "sweep")
            del self.trees[tree_id]
            return MergeRec(tree_id, tree, set(black), True), None
        if tree.special is not None and tree.special in black:
            outcome = tree.complement_reduce(black)
            self.system.add_all(outcome.emitted_equations, "reroot")
        else:
            outcome = tree.reduce(black)
        if not outcome.success:
            return None
        ph = self._placeholder()
        snap, eqs = tree.detach_block(outcome, ph)
        self.system.add_all(eqs, "case2")
        self.system.add_all(sweep_qnode_labels([snap]), "sweep")
        reroot_eqs = tree.re_root(ph)
        self.system.add_all(reroot_eqs, "reroot")
        remaining = tree.into_linear_root()
        remaining_leaves = set()
        if remaining is not None:
            stack = [remaining]
            while stack:
                x = stack.pop()
                if x.is_leaf():
                    remaining_leaves.add(x.element)
                else:
                    stack.extend(x.child_list())
        del self.trees[tree_id]
        rec = MergeRec(tree_id, snap, set(black), False, remaining_leaves)
        return rec, remaining

    def consume_main(self, tree_id: int, black: set):
        """Consume a block from the continuing main tree; the placeholder
        left behind is returned for the graft of the next P-node."""
        tree = self.trees[tree_id]
        assert tree.special is not None and tree.special not in black
        outcome = tree.reduce(black)
        if not outcome.success:
            return None
        ph = self._placeholder()
        snap, eqs = tree.detach_block(outcome, ph)
        self.system.add_all(eqs, "case2")
        self.system.add_all(sweep_qnode_labels([snap]), "sweep")
        rec = MergeRec(tree_id, snap, set(black), False, None)
        return rec, ph

    def add_vertex_new_tree(self, v: str, special_edge) -> bool:
        """DFS-style addition (also the st setup stage): consume the in-edges
        of v from every touched component, then build a fresh tree whose
        special leaf is special_edge."""
        buckets = self.in_edges_by_tree(v)
        merges: list[MergeRec] = []
        parts: list = []
        for tid in sorted(buckets):
            res = self.consume(tid, buckets[tid])
            if res is None:
                self._record_fail(v)
                return False
            rec, remaining = res
            merges.append(rec)
            if remaining is not None:
                parts.append(remaining)
        out = self.out_edges_of(v)
        rest = [e for e in out if e != special_edge]
        tid = self._fresh_tree_id()
        tree = universal([], special=special_edge, vargen=self.vargen)
        body = [make_leaf(e) for e in rest] + parts
        if body:
            tree.root = tree.make_internal(body)
            tree.root.parent = None
            tree._register_subtree(tree.root)
        self.trees[tid] = tree
        self.trace.tree_special[tid] = special_edge
        self._merge_components(v, tid)
        self.trace.stages.append(StageRec(
            vertex=v, kind="new", tree_id=tid, special_edge=special_edge,
            out_edges=rest, main_merge=None, merges=merges))
        return True

    def _merge_components(self, v: str, tid: int) -> None:
        self.comp.add(v)
        root = self.comp.find(v)
        for u in buckets_vertices(self.g, v, self.embedded):
            root = self.comp.union(root, self.comp.find(u))
        self.comp_tree[self.comp.find(v)] = tid
        self.embedded.add(v)

    def add_vertex_main(self, v: str, main_tid: int) -> bool:
        """st-phase addition of v into the main component tree, folding in
        any private components that also attach to v."""
        buckets = self.in_edges_by_tree(v)
        assert main_tid in buckets, "st-order guarantees an in-edge from the main component"
        res = self.consume_main(main_tid, buckets.pop(main_tid))
        if res is None:
            self._record_fail(v)
            return False
        main_rec, ph = res
        merges: list[MergeRec] = []
        out = self.out_edges_of(v)
        parts: list = list(out)
        for tid in sorted(buckets):
            r = self.consume(tid, buckets[tid])
            if r is None:
                self._record_fail(v)
                return False
            rec, remaining = r
            merges.append(rec)
            if remaining is not None:
                parts.append(remaining)
        tree = self.trees[main_tid]
        if not parts:
            # only the last st vertex may lack out-edges
            raise MalformedInstance("interior st vertex without out-edges")
        tree.graft(ph, parts)
        self._merge_components(v, main_tid)
        self.trace.stages.append(StageRec(
            vertex=v, kind="main", tree_id=main_tid, special_edge=None,
            out_edges=out, main_merge=main_rec, merges=merges))
        return True

    def add_vertex_final(self, v: str, main_tid: int | None) -> bool:
        """Last vertex: every touched tree is consumed completely."""
        buckets = self.in_edges_by_tree(v)
        main_rec = None
        merges: list[MergeRec] = []
        if main_tid is not None:
            res = self.consume(main_tid, buckets.pop(main_tid))
            if res is None:
                self._record_fail(v)
                return False
            main_rec, remaining = res
            assert remaining is None and main_rec.full, "final stage consumes the main tree"
        for tid in sorted(buckets):
            r = self.consume(tid, buckets[tid])
            if r is None:
                self._record_fail(v)
                return False
            rec, remaining = r
            assert remaining is None and rec.full, "final stage consumes whole components"
            merges.append(rec)
        self.embedded.add(v)
        self.trace.stages.append(StageRec(
            vertex=v, kind="final", tree_id=None, special_edge=None,
            out_edges=[], main_merge=main_rec, merges=merges))
        return True

    def _record_fail(self, v: str):
        self.fail_vertex = v
        self.fail_stage = len(self.trace.stages)


def buckets_vertices(g: Graph, v: str, embedded: set):
    out = set()
    for e in g.adjacency[v]:
        u = other_end(e, v)
        if u in embedded:
            out.add(u)
    return out


@dataclass
class PlanarityResult:
    planar: bool
    trace: Trace | None
    system: ParitySystem | None
    fail_vertex: str | None = None
    fail_stage: int | None = None
    degenerate: Graph | None = None


def _degenerate_rotation(g: Graph) -> RotationSystem:
    return RotationSystem({v: sorted(g.adjacency[v]) for v in g.vertices})


def planar_dfs(g: Graph) -> PlanarityResult:
    """Planarity by leaf-to-root DFS vertex addition."""
    if not is_connected(g):
        raise Disconnected("planar_dfs needs a connected graph")
    if g.n() <= 2 or g.m() <= 2:
        return PlanarityResult(True, None, None, degenerate=g)
    root = min(g.vertices)
    disc: list[str] = []
    parent_edge: dict[str, tuple] = {}
    seen = {root}
    disc.append(root)
    stack = [(root, iter(sorted(g.neighbors(root))))]
    while stack:
        v, it = stack[-1]
        advanced = False
        for w in it:
            if w in seen:
                continue
            seen.add(w)
            disc.append(w)
            parent_edge[w] = edge(v, w)
            stack.append((w, iter(sorted(g.neighbors(w)))))
            advanced = True
            break
        if not advanced:
            stack.pop()
    order = list(reversed(disc))  # leaf-to-root

    system = ParitySystem()
    eng = AdditionEngine(g, VarGen(), system)
    for i, v in enumerate(order):
        if i == len(order) - 1:
            ok = eng.add_vertex_final(v, None)
        else:
            ok = eng.add_vertex_new_tree(v, parent_edge[v])
        if not ok:
            return PlanarityResult(False, None, None, eng.fail_vertex, eng.fail_stage)
    return PlanarityResult(True, eng.trace, system)


def planar_st(g: Graph, s: str | None = None, t: str | None = None) -> PlanarityResult:
    """Planarity by st-order vertex addition (single main tree)."""
    if g.n() <= 2 or g.m() <= 2:
        if not is_connected(g):
            raise Disconnected("planar_st needs a connected graph")
        return PlanarityResult(True, None, None, degenerate=g)
    if not is_biconnected(g):
        raise NotBiconnected("planar_st needs a biconnected graph")
    if s is None or t is None:
        s, t = min(g.edges)
    order = st_ordering(g, s, t)
    system = ParitySystem()
    eng = AdditionEngine(g, VarGen(), system)
    st_edge = edge(s, t)

    v1 = order.order[0]
    if not eng.add_vertex_new_tree(v1, st_edge):
        return PlanarityResult(False, None, None, eng.fail_vertex, eng.fail_stage)
    main_tid = eng.trace.stages[-1].tree_id
    for v in order.order[1:-1]:
        if not eng.add_vertex_main(v, main_tid):
            return PlanarityResult(False, None, None, eng.fail_vertex, eng.fail_stage)
    if not eng.add_vertex_final(order.order[-1], main_tid):
        return PlanarityResult(False, None, None, eng.fail_vertex, eng.fail_stage)
    return PlanarityResult(True, eng.trace, system)


# ----------------------------------------------------------------------
# rotation extraction: backward replay over the trace


def build_rotation_system(trace: Trace, assignment: dict[int, bool],
                          result_graph: Graph | None = None) -> RotationSystem:
    """Rebuild one concrete rotation system from the recorded snapshots.

    Walking the stages backward, each component's boundary order is fixed
    by substituting the consumed arcs (picked under the assignment, and
    under any forced common-edge order) back into the later boundary.
    """
    if assignment is None:
        raise UnassignedVariable("no satisfying assignment available")
    sigma: dict[int, list] = {}
    rot: dict[str, list] = {}

    for rec in reversed(trace.stages):
        if rec.kind == "final":
            rotation: list = []
            if rec.main_merge is not None:
                m = rec.main_merge
                forced = rec.forced
                arc = m.snapshot.circular_pick(assignment, forced)
                rotation.extend(reversed(arc))
                sigma[m.tree_id] = _rotate_to(arc, trace.tree_special[m.tree_id])
            for m in rec.merges:
                arc = m.snapshot.circular_pick(assignment)
                rotation.extend(reversed(arc))
                sigma[m.tree_id] = _rotate_to(arc, trace.tree_special[m.tree_id])
            rot[rec.vertex] = rotation
            continue

        seq = sigma.pop(rec.tree_id)
        assert seq and seq[0] == (rec.special_edge if rec.kind == "new"
                                  else trace.tree_special[rec.tree_id])
        linear = seq[1:]

        # locate each partial merge's remaining block and the out-edges
        partial = [m for m in rec.merges if not m.full]
        fulls = [m for m in rec.merges if m.full]
        owner: dict = {}
        for m in partial:
            for e in m.remaining_leaves:
                owner[e] = m
        out_set = set(rec.out_edges)

        if rec.kind == "main":
            block_leaves = out_set | set(owner)
            lo = hi = None
            for idx, e in enumerate(linear):
                if e in block_leaves:
                    if lo is None:
                        lo = idx
                    hi = idx
            assert lo is not None, "stage block missing from the boundary"
            segment = linear[lo:hi + 1]
            assert all(e in block_leaves for e in segment), "stage block not contiguous"
            m = rec.main_merge
            arc_main = m.snapshot.pick_order(assignment, rec.forced)
            rotation = list(reversed(arc_main))
            rotation.extend(_expand_segment(segment, out_set, owner, partial,
                                            sigma, trace, assignment))
            for m2 in fulls:
                arc = m2.snapshot.circular_pick(assignment)
                rotation.extend(reversed(arc))
                sigma[m2.tree_id] = _rotate_to(arc, trace.tree_special[m2.tree_id])
            rot[rec.vertex] = rotation
            sigma[rec.tree_id] = seq[:1] + linear[:lo] + arc_main + linear[hi + 1:]
        else:  # 'new'
            rotation = [rec.special_edge]
            rotation.extend(_expand_segment(linear, out_set, owner, partial,
                                            sigma, trace, assignment))
            for m2 in fulls:
                arc = m2.snapshot.circular_pick(assignment)
                rotation.extend(reversed(arc))
                sigma[m2.tree_id] = _rotate_to(arc, trace.tree_special[m2.tree_id])
            rot[rec.vertex] = rotation

    return RotationSystem(rot)


def _expand_segment(segment, out_set, owner, partial, sigma, trace, assignment):
    """Walk a boundary segment, expanding each remaining-block into the
    owning component's consumed arc and fixing that component's boundary."""
    emitted: list = []
    arcs = {m.tree_id: m.snapshot.pick_order(assignment) for m in partial}
    seg_of: dict[int, list] = {m.tree_id: [] for m in partial}
    seen: set[int] = set()
    for e in segment:
        if e in out_set:
            emitted.append(e)
            continue
        m = owner[e]
        seg_of[m.tree_id].append(e)
        if m.tree_id not in seen:
            seen.add(m.tree_id)
            emitted.extend(reversed(arcs[m.tree_id]))
    for m in partial:
        circ = arcs[m.tree_id] + seg_of[m.tree_id]
        sigma[m.tree_id] = _rotate_to(circ, trace.tree_special[m.tree_id])
    return emitted


def _rotate_to(circ: list, anchor) -> list:
    i = circ.index(anchor)
    return circ[i:] + circ[:i]


# ----------------------------------------------------------------------
# embedding validity


def check_planar_embedding(g: Graph, rs: RotationSystem) -> bool:
    """Face-tracing Euler check: V - E + F == 2 for connected g."""
    if g.n() <= 2:
        return True
    for v in g.vertices:
        if v not in rs or sorted(rs[v]) != sorted(g.adjacency[v]):
            raise MalformedInstance(f"rotation at {v!r} does not match the graph")
    return euler_faces(g, rs) == 2 - g.n() + g.m()


def euler_faces(g: Graph, rs: RotationSystem) -> int:
    """Number of face orbits traced through the rotation system."""
    pos: dict[str, dict] = {}
    for v in g.vertices:
        pos[v] = {e: i for i, e in enumerate(rs[v])}
    visited: set = set()
    faces = 0
    for e in g.sorted_edges():
        for dart in ((e[0], e[1]), (e[1], e[0])):
            if dart in visited:
                continue
            faces += 1
            cur = dart
            while cur not in visited:
                visited.add(cur)
                u, v = cur
                ring = rs[v]
                i = pos[v][edge(u, v)]
                nxt = ring[(i + 1) % len(ring)]
                cur = (v, other_end(nxt, v))
        # both darts of every edge end up visited
    return faces


def trace_faces(g: Graph, rs: RotationSystem) -> list[list]:
    """Face boundaries as dart cycles [(u, v), ...]."""
    pos: dict[str, dict] = {}
    for v in g.vertices:
        pos[v] = {e: i for i, e in enumerate(rs[v])}
    visited: set = set()
    faces: list[list] = []
    for e in g.sorted_edges():
        for dart in ((e[0], e[1]), (e[1], e[0])):
            if dart in visited:
                continue
            cycle = []
            cur = dart
            while cur not in visited:
                visited.add(cur)
                cycle.append(cur)
                u, v = cur
                ring = rs[v]
                i = pos[v][edge(u, v)]
                nxt = ring[(i + 1) % len(ring)]
                cur = (v, other_end(nxt, v))
            faces.append(cycle)
    return faces


def rotation_for(result: PlanarityResult) -> RotationSystem:
    """Rotation system for a successful single-graph planarity result."""
    if result.degenerate is not None:
        return _degenerate_rotation(result.degenerate)
    assignment = result.system.solve()
    assert assignment is not None, "single-graph orientation systems are satisfiable"
    return build_rotation_system(result.trace, assignment)
