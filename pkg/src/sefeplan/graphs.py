"""Simple undirected graphs, st-orderings and the contracted reverse-DFS order.

Vertices are opaque strings. An edge is the sorted pair of its endpoints,
so edge identity is stable across the whole package. All iteration orders
are lexicographic to keep every downstream run reproducible.
"""

from __future__ import annotations

from .errors import (
    Disconnected,
    MalformedInstance,
    NotAdjacent,
    NotBiconnected,
    SharingViolation,
)

Edge = tuple[str, str]


def edge(u: str, v: str) -> Edge:
    if u == v:
        raise MalformedInstance(f"self-loop at {u!r}")
    return (u, v) if u < v else (v, u)


def other_end(e: Edge, v: str) -> str:
    return e[1] if e[0] == v else e[0]


class Graph:
    """Simple undirected graph with deterministic adjacency order."""

    def __init__(self, vertices=(), edges=()):
        self.vertices: list[str] = []
        self.adjacency: dict[str, list[Edge]] = {}
        self.edges: set[Edge] = set()
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    def add_vertex(self, v: str) -> None:
        if v not in self.adjacency:
            self.vertices.append(v)
            self.adjacency[v] = []

    def add_edge(self, u: str, v: str) -> Edge:
        e = edge(u, v)
        if e in self.edges:
            raise MalformedInstance(f"duplicate edge {e}")
        self.add_vertex(u)
        self.add_vertex(v)
        self.edges.add(e)
        self.adjacency[u].append(e)
        self.adjacency[v].append(e)
        return e

    def normalize(self) -> "Graph":
        """Sort vertices and adjacency lists lexicographically, in place."""
        self.vertices.sort()
        for v in self.adjacency:
            self.adjacency[v].sort()
        return self

    def has_edge(self, u: str, v: str) -> bool:
        return edge(u, v) in self.edges

    def neighbors(self, v: str):
        return [other_end(e, v) for e in self.adjacency[v]]

    def degree(self, v: str) -> int:
        return len(self.adjacency[v])

    def n(self) -> int:
        return len(self.vertices)

    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def copy(self) -> "Graph":
        return Graph(self.vertices, self.sorted_edges())

    def __repr__(self) -> str:
        return f"Graph({self.n()} vertices, {self.m()} edges)"


class StOrder:
    """Vertex sequence v_1..v_n with v_1 adjacent to v_n and every interior
    vertex having both an earlier and a later neighbor."""

    def __init__(self, order: list[str]):
        self.order = order
        self.position = {v: i for i, v in enumerate(order)}

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def check(self, g: Graph) -> bool:
        """Validate the st-order property against g (oracle for tests)."""
        if sorted(self.order) != sorted(g.vertices):
            return False
        pos = self.position
        if len(self.order) < 2 or not g.has_edge(self.order[0], self.order[-1]):
            return False
        for v in self.order[1:-1]:
            nb = [pos[w] for w in g.neighbors(v)]
            if not any(p < pos[v] for p in nb) or not any(p > pos[v] for p in nb):
                return False
        return True


def is_connected(g: Graph) -> bool:
    """True iff g has at most one connected component."""
    if g.n() <= 1:
        return True
    seen = {g.vertices[0]}
    stack = [g.vertices[0]]
    while stack:
        v = stack.pop()
        for w in g.neighbors(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n()


def is_biconnected(g: Graph) -> bool:
    """Connected, at least 3 vertices, no cut vertex (iterative lowpoint)."""
    if g.n() < 3 or not is_connected(g):
        return False
    root = g.vertices[0]
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    parent: dict[str, str | None] = {root: None}
    counter = 0
    root_children = 0
    stack: list[tuple[str, int]] = [(root, 0)]
    disc[root] = low[root] = counter
    counter += 1
    while stack:
        v, idx = stack[-1]
        if idx < g.degree(v):
            stack[-1] = (v, idx + 1)
            w = other_end(g.adjacency[v][idx], v)
            if w not in disc:
                parent[w] = v
                disc[w] = low[w] = counter
                counter += 1
                if v == root:
                    root_children += 1
                stack.append((w, 0))
            elif w != parent[v]:
                low[v] = min(low[v], disc[w])
        else:
            stack.pop()
            p = parent[v]
            if p is not None:
                low[p] = min(low[p], low[v])
                if p != root and low[v] >= disc[p]:
                    return False
    return root_children == 1


def _st_dfs(g: Graph, s: str, t: str):
    """DFS from s with (s, t) forced first; returns pre, parent and, for each
    vertex, the specific edge realizing its lowpoint."""
    pre: dict[str, int] = {s: 0}
    parent: dict[str, str | None] = {s: None}
    parent_edge: dict[str, Edge] = {}
    low: dict[str, int] = {s: 0}
    low_edge: dict[str, tuple[str, Edge] | None] = {s: None}
    tree_children: dict[str, list[tuple[str, Edge]]] = {v: [] for v in g.vertices}
    back_up: dict[str, list[tuple[str, Edge]]] = {v: [] for v in g.vertices}
    back_down: dict[str, list[tuple[str, Edge]]] = {v: [] for v in g.vertices}
    counter = 1

    def ordered_adj(v):
        edges = g.adjacency[v]
        if v == s:
            st = edge(s, t)
            return [st] + [e for e in edges if e != st]
        return edges

    stack = [(s, ordered_adj(s), 0)]
    while stack:
        v, adj, idx = stack[-1]
        if idx < len(adj):
            stack[-1] = (v, adj, idx + 1)
            e = adj[idx]
            w = other_end(e, v)
            if w not in pre:
                pre[w] = counter
                counter += 1
                parent[w] = v
                parent_edge[w] = e
                low[w] = pre[w]
                low_edge[w] = None
                tree_children[v].append((w, e))
                stack.append((w, ordered_adj(w), 0))
            elif e != parent_edge.get(v):
                if pre[w] < pre[v]:
                    back_up[v].append((w, e))
                    back_down[w].append((v, e))
                    if pre[w] < low[v]:
                        low[v] = pre[w]
                        low_edge[v] = (w, e)
        else:
            stack.pop()
            p = parent[v]
            if p is not None and low[v] < low[p]:
                low[p] = low[v]
                low_edge[p] = (v, parent_edge[v])
    return pre, parent, parent_edge, low, low_edge, tree_children, back_up, back_down


def st_ordering(g: Graph, s: str, t: str) -> StOrder:
    """Even-Tarjan st-numbering: v_1 = s, v_n = t.

    Requires g biconnected and s adjacent to t. Paths of new edges are
    repeatedly peeled off a stack; a vertex is numbered once all its edges
    are old.
    """
    if not g.has_edge(s, t):
        raise NotAdjacent(f"{s!r} and {t!r} are not adjacent")
    if not is_biconnected(g):
        raise NotBiconnected("st-ordering requires a biconnected graph")

    (pre, parent, parent_edge, low, low_edge,
     tree_children, back_up, back_down) = _st_dfs(g, s, t)

    old_vertex = {s, t}
    old_edge = {edge(s, t)}
    # per-vertex consumption pointers into the three edge buckets
    ptr_tree = {v: 0 for v in g.vertices}
    ptr_up = {v: 0 for v in g.vertices}
    ptr_down = {v: 0 for v in g.vertices}

    def next_new(bucket, ptrs, v):
        lst = bucket[v]
        i = ptrs[v]
        while i < len(lst) and lst[i][1] in old_edge:
            i += 1
        ptrs[v] = i
        return lst[i] if i < len(lst) else None

    def pathfinder(v):
        hit = next_new(back_up, ptr_up, v)
        if hit is not None:
            w, e = hit
            old_edge.add(e)
            return [v, w]
        hit = next_new(tree_children, ptr_tree, v)
        if hit is not None:
            w, e = hit
            old_edge.add(e)
            path = [v, w]
            u = w
            while u not in old_vertex:
                old_vertex.add(u)
                le = low_edge[u]
                assert le is not None, "biconnected graph must have a low edge"
                x, ex = le
                old_edge.add(ex)
                path.append(x)
                u = x
            return path
        hit = next_new(back_down, ptr_down, v)
        if hit is not None:
            w, e = hit
            old_edge.add(e)
            path = [v, w]
            u = w
            while u not in old_vertex:
                old_vertex.add(u)
                pe = parent_edge[u]
                old_edge.add(pe)
                u = parent[u]
                path.append(u)
            return path
        return None

    stack = [t, s]
    numbered: list[str] = []
    while stack:
        v = stack.pop()
        path = pathfinder(v)
        if path is None:
            numbered.append(v)
        else:
            # re-push v on top, then the interior of the path beneath it
            for u in path[-2:0:-1]:
                stack.append(u)
            stack.append(v)
    order = StOrder(numbered)
    return order


def reverse_dfs_private_order(gi: Graph, common: set[str]) -> list[str]:
    """Private vertices of gi in reverse DFS-discovery order, where the DFS
    runs from the common subgraph contracted to a single super-vertex.

    Neighbor visits are lexicographic: first by common vertex, then by
    private neighbor name.
    """
    private = [v for v in gi.vertices if v not in common]
    if not private:
        return []
    if not common:
        raise Disconnected("common vertex set is empty")
    discovered: list[str] = []
    seen: set[str] = set()
    # entry points: private neighbors of common vertices, lexicographic
    entry: list[str] = []
    for c in sorted(common):
        if c not in gi.adjacency:
            continue
        for e in sorted(gi.adjacency[c]):
            w = other_end(e, c)
            if w not in common:
                entry.append(w)
    for start in entry:
        if start in seen:
            continue
        seen.add(start)
        stack = [(start, iter(sorted(gi.neighbors(start))))]
        discovered.append(start)
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if w in common or w in seen:
                    continue
                seen.add(w)
                discovered.append(w)
                stack.append((w, iter(sorted(gi.neighbors(w)))))
                advanced = True
                break
            if not advanced:
                stack.pop()
    if len(discovered) != len(private):
        raise Disconnected("some private vertices are unreachable from the common graph")
    return list(reversed(discovered))


def dfs_parent_edges(gi: Graph, common: set[str]) -> dict[str, Edge]:
    """The tree edge through which each private vertex was discovered by the
    contracted-DFS of reverse_dfs_private_order (same traversal order)."""
    parent: dict[str, Edge] = {}
    seen: set[str] = set()
    for c in sorted(common):
        if c not in gi.adjacency:
            continue
        for e in sorted(gi.adjacency[c]):
            w = other_end(e, c)
            if w in common or w in seen:
                continue
            seen.add(w)
            parent[w] = e
            stack = [(w, iter(sorted(gi.neighbors(w))))]
            while stack:
                v, it = stack[-1]
                advanced = False
                for x in it:
                    if x in common or x in seen:
                        continue
                    seen.add(x)
                    parent[x] = edge(v, x)
                    stack.append((x, iter(sorted(gi.neighbors(x)))))
                    advanced = True
                    break
                if not advanced:
                    stack.pop()
    return parent


class SharedInstance:
    """k >= 2 graphs sharing a designated common subgraph.

    Every vertex and edge is either common to all graphs or private to
    exactly one; vertex names are globally unique across private parts.
    """

    def __init__(self, graphs: list[Graph], common_vertices, common_edges):
        self.graphs = graphs
        self.common_vertices: set[str] = set(common_vertices)
        self.common_edges: set[Edge] = {edge(u, v) for u, v in common_edges}
        self.validate()

    @property
    def k(self) -> int:
        return len(self.graphs)

    @property
    def n(self) -> int:
        return len(self.common_vertices)

    def common_graph(self) -> Graph:
        return Graph(sorted(self.common_vertices), sorted(self.common_edges)).normalize()

    def private_vertices(self, i: int) -> list[str]:
        return [v for v in self.graphs[i].vertices if v not in self.common_vertices]

    def private_edges(self, i: int) -> list[Edge]:
        return [e for e in self.graphs[i].sorted_edges() if e not in self.common_edges]

    def validate(self) -> None:
        if self.k < 2:
            raise MalformedInstance("an instance needs at least 2 graphs")
        for i, g in enumerate(self.graphs):
            for v in self.common_vertices:
                if v not in g.adjacency:
                    raise MalformedInstance(f"common vertex {v!r} missing from graph {i + 1}")
            for e in self.common_edges:
                if e not in g.edges:
                    raise MalformedInstance(f"common edge {e} missing from graph {i + 1}")
        for e in self.common_edges:
            for v in e:
                if v not in self.common_vertices:
                    raise MalformedInstance(f"common edge {e} uses non-common vertex {v!r}")
        owner: dict[str, int] = {}
        for i, g in enumerate(self.graphs):
            for v in g.vertices:
                if v in self.common_vertices:
                    continue
                if v in owner and owner[v] != i:
                    raise SharingViolation(
                        f"private vertex {v!r} appears in graphs {owner[v] + 1} and {i + 1}")
                owner[v] = i
        eowner: dict[Edge, int] = {}
        for i, g in enumerate(self.graphs):
            for e in g.edges:
                if e in self.common_edges:
                    continue
                if e in eowner and eowner[e] != i:
                    raise SharingViolation(
                        f"private edge {e} appears in graphs {eowner[e] + 1} and {i + 1}")
                eowner[e] = i

    def base_edge(self) -> Edge:
        """Lexicographically smallest common edge; supplies (v_1, v_n)."""
        return min(self.common_edges)
