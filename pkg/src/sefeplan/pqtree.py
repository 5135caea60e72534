"""PQ-trees with orientation-labeled Q-nodes.

A tree represents the linear orders of its ground set that satisfy the
consecutivity constraints applied so far; with a special leaf attached as
the root's conceptual parent it represents circular orders instead.

Q-node links (the slots between adjacent children) may carry a literal:
the literal is true exactly when the node is read in its stored order.
Labels ride along through merges and reversals (reversal negates them),
which is what lets separate trees share orientation information through
a common equation system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    EmptyGroundSet,
    EmptyProjection,
    NotRepresentable,
    TooLarge,
    UnknownLeaf,
)
from .parity import Literal, VarGen

LEAF = 0
PNODE = 1
QNODE = 2

FULL = 1
PARTIAL = 2


class Node:
    __slots__ = ("kind", "parent", "children", "links", "element")

    def __init__(self, kind, element=None):
        self.kind = kind
        self.parent: Node | None = None
        self.element = element
        # P-node children: insertion-ordered dict used as a set (O(1) removal)
        # Q-node children: list, with links[i] labeling the pair (i, i+1)
        self.children: dict | list | None = None
        self.links: list[Literal | None] | None = None
        if kind == PNODE:
            self.children = {}
        elif kind == QNODE:
            self.children = []
            self.links = []

    def is_leaf(self):
        return self.kind == LEAF

    def is_p(self):
        return self.kind == PNODE

    def is_q(self):
        return self.kind == QNODE

    def child_list(self) -> list["Node"]:
        if self.kind == PNODE:
            return list(self.children)
        if self.kind == QNODE:
            return list(self.children)
        return []

    def child_count(self) -> int:
        if self.kind == LEAF:
            return 0
        return len(self.children)

    def __repr__(self):
        if self.kind == LEAF:
            return f"Leaf({self.element})"
        return f"{'P' if self.kind == PNODE else 'Q'}@{id(self) & 0xFFFF:x}({self.child_count()})"


def _attach(parent: Node, child: Node) -> None:
    child.parent = parent
    if parent.kind == PNODE:
        parent.children[child] = None
    else:
        parent.children.append(child)
        if len(parent.children) > 1:
            parent.links.append(None)


def make_leaf(element) -> Node:
    return Node(LEAF, element)


def reverse_qnode(q: Node) -> None:
    """Flip a Q-node's stored order; link labels reverse and negate."""
    q.children.reverse()
    q.links.reverse()
    q.links = [lit.negate() if lit is not None else None for lit in q.links]


@dataclass
class ReductionOutcome:
    """Result of one consecutivity constraint.

    block identifies where the constrained leaves ended up: ('node', x) when
    one node covers exactly the set, or ('run', q, i0, i1) for a child run of
    a Q-node. emitted_equations carries literal equalities produced while
    restructuring (only link removals generate them).
    """

    success: bool
    emitted_equations: list = field(default_factory=list)
    block: tuple | None = None


class PQTree:
    """Single-owner mutable PQ-tree over string-or-tuple elements."""

    def __init__(self, vargen: VarGen | None = None):
        self.root: Node | None = None
        self.special = None
        self.leaf_index: dict = {}
        self.vargen = vargen if vargen is not None else VarGen()

    # ------------------------------------------------------------------
    # construction and bookkeeping

    def ground_set(self) -> set:
        g = set(self.leaf_index)
        if self.special is not None:
            g.add(self.special)
        return g

    def linear_elements(self) -> set:
        return set(self.leaf_index)

    def _register_subtree(self, node: Node) -> None:
        stack = [node]
        while stack:
            x = stack.pop()
            if x.is_leaf():
                self.leaf_index[x.element] = x
            else:
                stack.extend(x.child_list())

    def iter_nodes(self):
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            x = stack.pop()
            yield x
            if not x.is_leaf():
                stack.extend(x.child_list())

    def ensure_literal(self, q: Node, link_idx: int) -> Literal:
        lit = q.links[link_idx]
        if lit is None:
            lit = self.vargen.fresh()
            q.links[link_idx] = lit
        return lit

    def first_literal(self, q: Node) -> Literal | None:
        for lit in q.links:
            if lit is not None:
                return lit
        return None

    def orientation_literal(self, q: Node) -> Literal:
        """The node's forward literal, creating one on the first link if none."""
        lit = self.first_literal(q)
        if lit is None:
            lit = self.ensure_literal(q, 0)
        return lit

    def new_qnode(self, children: list[Node], links=None, fresh_var=False) -> Node:
        q = Node(QNODE)
        q.children = list(children)
        for c in q.children:
            c.parent = q
        q.links = list(links) if links is not None else [None] * (len(children) - 1)
        if fresh_var and q.links and q.links[0] is None:
            q.links[0] = self.vargen.fresh()
        return q

    def new_pnode(self, children: list[Node]) -> Node:
        p = Node(PNODE)
        for c in children:
            _attach(p, c)
        return p

    def make_internal(self, children: list[Node]) -> Node:
        """P-node for 3+ children, Q-node (fresh variable) for exactly 2."""
        if len(children) == 1:
            return children[0]
        if len(children) == 2:
            return self.new_qnode(children, fresh_var=True)
        return self.new_pnode(children)

    def _p_remainder(self, x: Node) -> Node | None:
        """What is left of P-node x after its pertinent children were removed.

        Reuses x for 3+ leftovers; two leftovers become a Q-node per the
        two-children rule; a single leftover is returned bare.
        """
        cnt = len(x.children)
        if cnt == 0:
            return None
        if cnt == 1:
            c = next(iter(x.children))
            c.parent = None
            return c
        if cnt == 2:
            a, b = list(x.children)
            return self.new_qnode([a, b], fresh_var=True)
        return x

    def replace_child(self, parent: Node | None, old: Node, new: Node) -> None:
        if parent is None:
            self.root = new
            new.parent = None
            return
        if parent.kind == PNODE:
            del parent.children[old]
            parent.children[new] = None
        else:
            i = parent.children.index(old)
            parent.children[i] = new
        new.parent = parent

    def _preserve_labels(self, node: Node, dying: list, eq_out: list) -> None:
        """Keep the orientation information of labels lost in a cyclic cut.

        The cut preserves the node's cyclic direction, so a dying literal
        still describes the rebuilt node's forward order: when no label
        survived, the first dying one is re-attached; the rest are equated.
        """
        live = [lit for lit in dying if lit is not None]
        if not live:
            return
        survivor = self.first_literal(node)
        if survivor is None:
            node.links[0] = live[0]
            survivor = live[0]
        for lit in live:
            if lit != survivor:
                eq_out.append((survivor, lit))

    # ------------------------------------------------------------------
    # debug serialization

    def to_text(self) -> str:
        """Parenthesized form, e.g. P(1,Q(2,3),4); special leaf prefixed with *."""

        def render(x: Node) -> str:
            if x.is_leaf():
                return _elem_str(x.element)
            tag = "P" if x.is_p() else "Q"
            return tag + "(" + ",".join(render(c) for c in x.child_list()) + ")"

        body = render(self.root) if self.root is not None else "()"
        if self.special is not None:
            return f"*{_elem_str(self.special)} {body}"
        return body

    # ------------------------------------------------------------------
    # enumeration (oracle scale)

    def enumerate_linear(self, limit: int = 10) -> set[tuple]:
        """All represented linear orders of the non-special leaves."""
        if self.root is None:
            return {()}
        if len(self.leaf_index) > limit:
            raise TooLarge(f"enumeration beyond {limit} leaves")
        return set(map(tuple, _enum(self.root)))

    def circular_orders(self, limit: int = 8) -> set[tuple]:
        """Represented cyclic orders (canonical rotation), special leaf included."""
        if self.special is None:
            raise UnknownLeaf("circular interpretation needs a special leaf")
        if len(self.leaf_index) + 1 > limit:
            raise TooLarge(f"enumeration beyond {limit} leaves")
        out = set()
        if self.root is None:
            return {(self.special,)}
        for lin in _enum(self.root):
            out.add(canonical_rotation((self.special,) + tuple(lin)))
        return out

    # ------------------------------------------------------------------
    # reduction

    def reduce(self, s) -> ReductionOutcome:
        """Constrain the elements of s to be consecutive (linear semantics)."""
        s = set(s)
        assert self.special not in s or self.special is None
        for e in s:
            if e not in self.leaf_index:
                raise UnknownLeaf(f"{e!r} not in ground set")
        if len(s) <= 1:
            node = self.leaf_index[next(iter(s))] if s else None
            return ReductionOutcome(True, [], ("node", node) if node else None)
        if len(s) == len(self.leaf_index):
            return ReductionOutcome(True, [], ("node", self.root))
        return self._reduce_templates(s)

    def complement_reduce(self, s_complement) -> ReductionOutcome:
        """Constrain (ground minus s_complement) to be consecutive.

        With a special leaf inside s_complement this is the circular
        reduction used when consuming edges: after re-rooting to a leaf
        outside the set, the constraint collapses to a plain reduce on
        s_complement, costing time proportional to it.
        """
        sc = set(s_complement)
        eqs: list = []
        if self.special is not None and self.special in sc:
            outside = None
            for e in self.leaf_index:
                if e not in sc:
                    outside = e
                    break
            if outside is None:
                # complement is the whole ground set: nothing to constrain
                return ReductionOutcome(True, [], ("node", self.root))
            # after re-rooting, the old special is an ordinary linear leaf
            # and sc sits entirely inside the linear part
            eqs = self.re_root(outside)
        if self.special is not None and not sc.issubset(self.leaf_index):
            raise UnknownLeaf("complement set outside ground set")
        if self.special is not None:
            # circularly, S consecutive <=> its complement arc is consecutive
            out = self.reduce(sc) if sc else ReductionOutcome(True, [], ("node", self.root))
        else:
            target = set(self.leaf_index) - sc
            if not target:
                return ReductionOutcome(True, [], None)
            out = self.reduce(target)
        out.emitted_equations = eqs + out.emitted_equations
        return out

    def _reduce_templates(self, s: set) -> ReductionOutcome:
        fulls = [self.leaf_index[e] for e in s]
        # upward climb with stopping; the first climb may overshoot the
        # pertinent root, later ones stop at already-seen nodes
        seen = set(fulls)
        child_map: dict[Node, list[Node]] = {}
        for leaf in fulls:
            x = leaf
            while True:
                p = x.parent
                if p is None:
                    break
                child_map.setdefault(p, []).append(x)
                if p in seen:
                    break
                seen.add(p)
                x = p

        count: dict[Node, int] = {}

        def cnt(x: Node) -> int:
            c = count.get(x)
            if c is not None:
                return c
            if x.is_leaf():
                c = 1
            else:
                c = sum(cnt(ch) for ch in child_map.get(x, ()))
            count[x] = c
            return c

        target = len(s)
        x = fulls[0]
        while cnt(x) != target:
            x = x.parent
        pert_root = x

        # post-order over the pertinent subtree
        order: list[Node] = []
        stack: list[tuple[Node, bool]] = [(pert_root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            stack.append((node, True))
            for ch in child_map.get(node, ()):
                stack.append((ch, False))

        label: dict[Node, int] = {}
        full_suffix: dict[Node, int] = {}
        repl: dict[Node, Node] = {}
        block: tuple | None = None

        for node in order:
            is_root = node is pert_root
            pert_children = [repl[c] for c in child_map.get(node, ())]
            if node.is_leaf():
                label[node] = FULL
                repl[node] = node
                continue
            f_nodes = [c for c in pert_children if label[c] == FULL]
            p_nodes = [c for c in pert_children if label[c] == PARTIAL]

            if node.is_p():
                res = self._template_p(node, f_nodes, p_nodes, is_root,
                                       label, full_suffix, repl)
            else:
                res = self._template_q(node, is_root, label, full_suffix, repl)
            if res is None:
                return ReductionOutcome(False)
            if is_root:
                block = res

        return ReductionOutcome(True, [], block)

    def _template_p(self, x, f_nodes, p_nodes, is_root, label, full_suffix, repl):
        total = x.child_count()
        if not p_nodes and len(f_nodes) == total:
            label[x] = FULL
            repl[x] = x
            return ("node", x) if is_root else True
        max_partials = 2 if is_root else 1
        if len(p_nodes) > max_partials:
            return None

        for c in f_nodes:
            del x.children[c]
        for c in p_nodes:
            del x.children[c]
        F = self.make_internal(f_nodes) if f_nodes else None

        if is_root:
            if not p_nodes:
                # P2: group the full children back under the root
                assert F is not None
                _attach(x, F)
                self._normalize_membership(x)
                return ("node", F)
            if len(p_nodes) == 1:
                # P4: hang the full group at the partial child's full end
                pc = p_nodes[0]
                fs = full_suffix[pc]
                if F is not None:
                    self._q_append(pc, F)
                    fs += 1
                _attach(x, pc)
                self._normalize_membership(x)
                m = len(pc.children)
                return ("run", pc, m - fs, m - 1)
            # P6: chain partial1 + fulls + reversed partial2
            pc1, pc2 = p_nodes
            fs1, fs2 = full_suffix[pc1], full_suffix[pc2]
            run_start = len(pc1.children) - fs1
            if F is not None:
                self._q_append(pc1, F)
            reverse_qnode(pc2)
            self._q_extend(pc1, pc2)
            run_end = run_start + fs1 + (1 if F is not None else 0) + fs2 - 1
            _attach(x, pc1)
            self._normalize_membership(x)
            return ("run", pc1, run_start, run_end)

        # non-root: the node becomes a one-directional partial Q
        parent = x.parent
        if not p_nodes:
            # P3: Q over [empty part, full part]
            assert F is not None
            E = self._p_remainder(x)
            assert E is not None, "a pertinent P-node with no partials has empties"
            newq = self.new_qnode([E, F], fresh_var=True)
            self.replace_child(parent, x, newq)
            label[newq] = PARTIAL
            full_suffix[newq] = 1
            repl[x] = newq
            return True
        # P5: extend the single partial child at both ends
        pc = p_nodes[0]
        fs = full_suffix[pc]
        E = self._p_remainder(x)
        if E is not None:
            self._q_prepend(pc, E)
        if F is not None:
            self._q_append(pc, F)
            fs += 1
        self.replace_child(parent, x, pc)
        label[pc] = PARTIAL
        full_suffix[pc] = fs
        repl[x] = pc
        return True

    def _template_q(self, x, is_root, label, full_suffix, repl):
        kids = x.children
        states = [label.get(c, 0) for c in kids]
        nonempty = [i for i, st in enumerate(states) if st]
        i0, i1 = nonempty[0], nonempty[-1]
        if nonempty != list(range(i0, i1 + 1)):
            return None
        partial_idx = [i for i in nonempty if states[i] == PARTIAL]
        if any(i0 < i < i1 for i in partial_idx):
            return None
        n = len(kids)

        if not partial_idx and i0 == 0 and i1 == n - 1:
            label[x] = FULL
            repl[x] = x
            return ("node", x) if is_root else True

        if not is_root:
            if len(partial_idx) > 1:
                return None
            if i1 == n - 1 and (not partial_idx or partial_idx[0] == i0):
                pass  # already empty..(partial)..full-to-end
            elif i0 == 0 and (not partial_idx or partial_idx[0] == i1):
                reverse_qnode(x)
                i0, i1 = n - 1 - i1, n - 1 - i0
                partial_idx = [n - 1 - i for i in partial_idx]
            else:
                return None
            fs = i1 - i0 + 1
            if partial_idx:
                pc = kids[i0]
                fs = (i1 - i0) + full_suffix[pc]
                self._q_splice(x, i0, pc)
            label[x] = PARTIAL
            full_suffix[x] = fs
            repl[x] = x
            return True

        # root: partials allowed at both run boundaries
        if len(partial_idx) > 2:
            return None
        pc_left = x.children[i0] if (partial_idx and partial_idx[0] == i0) else None
        pc_right = (x.children[i1]
                    if (partial_idx and partial_idx[-1] == i1 and (pc_left is None or i1 != i0))
                    else None)
        if pc_left is None and pc_right is None and partial_idx:
            return None
        start = i0
        end = i1
        if pc_left is not None:
            m0 = len(pc_left.children)
            fs0 = full_suffix[pc_left]
            self._q_splice(x, i0, pc_left)
            start = i0 + (m0 - fs0)
            end = i1 + m0 - 1
        if pc_right is not None:
            reverse_qnode(pc_right)  # full side must face left, into the run
            fs1 = full_suffix[pc_right]
            self._q_splice(x, end, pc_right)
            end = end + fs1 - 1
        return ("run", x, start, end)

    # ------------------------------------------------------------------
    # Q-node surgery

    def _q_append(self, q: Node, child: Node) -> None:
        q.children.append(child)
        q.links.append(None)
        child.parent = q

    def _q_prepend(self, q: Node, child: Node) -> None:
        q.children.insert(0, child)
        q.links.insert(0, None)
        child.parent = q

    def _q_extend(self, q: Node, other: Node) -> None:
        """Append all of other's children (a Q-node) to q; labels ride along."""
        for c in other.children:
            c.parent = q
        q.links.append(None)
        q.links.extend(other.links)
        q.children.extend(other.children)

    def _q_splice(self, q: Node, idx: int, pc: Node) -> None:
        """Replace child idx of q by pc's child sequence, keeping pc's links."""
        for c in pc.children:
            c.parent = q
        q.children[idx:idx + 1] = pc.children
        # links: the two boundary links of idx stay; pc's links go between
        q.links[idx:idx] = pc.links

    def _normalize_membership(self, x: Node) -> None:
        """Kind/arity normalization after child-count changes."""
        if x.is_p() and len(x.children) == 2:
            a, b = list(x.children)
            q = self.new_qnode([a, b], fresh_var=True)
            self.replace_child(x.parent, x, q)
        elif not x.is_leaf() and len(x.children) == 1:
            only = x.child_list()[0]
            self.replace_child(x.parent, x, only)

    # ------------------------------------------------------------------
    # block detachment (consumption support for the planarity drivers)

    def detach_block(self, outcome: ReductionOutcome, placeholder) -> tuple["PQTree", list]:
        """Move the constrained block out into its own linear tree.

        A placeholder leaf takes the block's place so surrounding link
        labels survive untouched. Returns (block tree, equations); a Case-2
        run extraction emits the equation tying the new block root's
        orientation to the hosting Q-node's.
        """
        eqs: list = []
        blk = outcome.block
        assert blk is not None and (blk[0] != "node" or blk[1] is not None)
        ph = make_leaf(placeholder)
        sub = PQTree(self.vargen)
        node = None
        if blk[0] == "run":
            q, i0, i1 = blk[1], blk[2], blk[3]
            if i0 == 0 and i1 == len(q.children) - 1:
                node = q
            elif i0 == i1:
                node = q.children[i0]
            else:
                run = q.children[i0:i1 + 1]
                run_links = q.links[i0:i1]
                xprime = self.new_qnode(run, links=run_links)
                q.children[i0:i1 + 1] = [ph]
                ph.parent = q
                del q.links[i0:i1]
                sub.root = xprime
                xprime.parent = None
                # the run's direction stays tied to the hosting Q-node
                lit_q = self.orientation_literal(q)
                lit_x = sub.orientation_literal(xprime)
                eqs.append((lit_x, lit_q))
        else:
            node = blk[1]
        if node is not None:
            parent = node.parent
            self.replace_child(parent, node, ph)
            sub.root = node
            node.parent = None
        # move the consumed leaves into the block tree's index
        for x in sub.iter_nodes():
            if x.is_leaf():
                del self.leaf_index[x.element]
                sub.leaf_index[x.element] = x
        self.leaf_index[placeholder] = ph
        return sub, eqs

    def graft(self, placeholder, parts: list) -> None:
        """Replace the placeholder leaf by a P-node over the given parts.

        Parts are leaf elements or detached subtree roots (their leaves get
        registered here). A single part replaces the leaf directly.
        """
        ph = self.leaf_index.pop(placeholder)
        nodes: list[Node] = []
        for p in parts:
            if isinstance(p, Node):
                nodes.append(p)
                self._register_subtree(p)
            else:
                leaf = make_leaf(p)
                self.leaf_index[p] = leaf
                nodes.append(leaf)
        assert nodes, "graft needs at least one part"
        new = self.make_internal(nodes)
        self.replace_child(ph.parent, ph, new)

    def into_linear_root(self) -> Node | None:
        """Detach and return the root structure, dropping the special anchor.

        Used when a consumed component's remainder becomes a child of the
        next stage's P-node: the remainder's linear orders are exactly the
        arc orders around the old component boundary.
        """
        root = self.root
        self.root = None
        if root is not None:
            root.parent = None
        return root

    # ------------------------------------------------------------------
    # re-rooting (circular anchor change)

    def re_root(self, elem) -> list:
        """Make elem the special leaf, keeping the circular order set.

        Returns equations for any link labels destroyed by the cyclic cuts.
        """
        if elem == self.special:
            return []
        if elem not in self.leaf_index:
            raise UnknownLeaf(f"{elem!r} not in ground set")
        assert self.special is not None, "re_root needs a circular tree"
        eqs: list = []
        old_special_leaf = make_leaf(self.special)

        leaf = self.leaf_index.pop(elem)
        self.leaf_index[self.special] = old_special_leaf

        path = [leaf]
        while path[-1].parent is not None:
            path.append(path[-1].parent)

        if len(path) == 1:
            # the tree was a bare leaf; the old special becomes the body
            self.root = old_special_leaf
            old_special_leaf.parent = None
            self.special = elem
            return eqs

        def rebuilt(i: int) -> Node:
            """Subtree for path[i] when entered from path[i-1]."""
            x = path[i]
            inner = rebuilt(i + 1) if i + 1 < len(path) else old_special_leaf
            prev = path[i - 1]
            if x.is_p():
                del x.children[prev]
                x.children[inner] = None
                inner.parent = x
                prev.parent = None
            else:
                j = x.children.index(prev)
                dying = []
                if j > 0:
                    dying.append(x.links[j - 1])
                if j < len(x.links):
                    dying.append(x.links[j])
                seg_a = x.children[j + 1:]
                seg_b = x.children[:j]
                links_a = x.links[j + 1:]
                links_b = x.links[:j - 1] if j > 0 else []
                new_links = list(links_a)
                if seg_a:
                    new_links.append(None)
                if seg_b:
                    new_links.append(None)
                new_links.extend(links_b)
                x.children = seg_a + [inner] + seg_b
                x.links = new_links
                for c in x.children:
                    c.parent = x
                prev.parent = None
                self._preserve_labels(x, dying, eqs)
            if x.child_count() == 1:
                only = x.child_list()[0]
                only.parent = None
                return only
            return x

        new_root = rebuilt(1)
        new_root.parent = None
        self.root = new_root
        self.special = elem
        return eqs

    # ------------------------------------------------------------------
    # projection, cloning, intersection support

    def clone(self) -> "PQTree":
        t = PQTree(self.vargen)
        t.special = self.special
        if self.root is not None:
            t.root = _clone_node(self.root)
            t._register_subtree(t.root)
        return t

    def project(self, keep) -> "PQTree":
        """Tree induced on a leaf subset; orientation labels carry over."""
        keep = set(keep)
        if not keep:
            raise EmptyProjection("projection onto the empty set")
        for e in keep:
            if e not in self.leaf_index and e != self.special:
                raise UnknownLeaf(f"{e!r} not in ground set")
        t = PQTree(self.vargen)
        if self.special is not None:
            if self.special not in keep:
                raise EmptyProjection("projection must keep the special leaf")
            t.special = self.special
            keep = keep - {self.special}
        if self.root is not None:
            t.root = _project_node(self.root, keep)
            if t.root is not None:
                t.root.parent = None
                t._register_subtree(t.root)
        if t.root is None and t.special is None:
            raise EmptyProjection("projection onto the empty set")
        return t

    # ------------------------------------------------------------------
    # order extraction

    def pick_order(self, assignment: dict[int, bool] | None = None,
                   forced: list | None = None) -> list:
        """Deterministic represented order of the linear leaves.

        Q-nodes follow their literal under the assignment (forward when
        unlabeled); P-children holding forced elements are arranged so the
        forced subsequence comes out in the given order. Raises
        NotRepresentable when the forced suborder cannot be realized.
        """
        if self.root is None:
            return []
        fpos = {e: i for i, e in enumerate(forced)} if forced else {}
        out: list = []
        self._emit(self.root, assignment or {}, fpos, out)
        return out

    def circular_pick(self, assignment=None, forced=None) -> list:
        """Special leaf first, then the linear pick."""
        assert self.special is not None
        lin_forced = None
        if forced is not None:
            assert forced and forced[0] == self.special
            lin_forced = forced[1:]
        return [self.special] + self.pick_order(assignment, lin_forced)

    def _emit(self, node: Node, asg, fpos, out) -> tuple:
        """Append node's leaves to out; returns (min forced pos, max) or None."""
        if node.is_leaf():
            out.append(node.element)
            p = fpos.get(node.element)
            return (p, p) if p is not None else None

        kids = node.child_list()
        if node.is_q():
            lit = self.first_literal(node)
            pinned = lit is not None and lit.var in asg
            direction = True
            if pinned:
                val = asg[lit.var]
                direction = val if lit.positive else not val
            ordered = kids if direction else list(reversed(kids))
            if fpos:
                ordered = self._orient_for_forced(node, ordered, pinned, fpos)
            spans = []
            for c in ordered:
                spans.append(self._emit2(c, asg, fpos))
            return self._check_spans(node, spans, asg, fpos, out, ordered)
        # P-node: children with forced leaves sorted by their minimum position
        if fpos:
            keyed = []
            free = []
            for c in kids:
                span = _forced_span(c, fpos)
                if span is None:
                    free.append(c)
                else:
                    keyed.append((span[0], c))
            keyed.sort(key=lambda t: t[0])
            ordered = [c for _, c in keyed] + free
        else:
            ordered = kids
        spans = [self._emit2(c, asg, fpos) for c in ordered]
        return self._check_spans(node, spans, asg, fpos, out, ordered)

    def _orient_for_forced(self, node, ordered, pinned, fpos):
        """Verify or fix a Q-node's direction against the forced suborder.

        Nodes whose orientation variable is absent from the assignment are
        free to flip (they never entered any equation).
        """
        marks = []
        for c in ordered:
            sp = _forced_span(c, fpos)
            if sp is not None:
                marks.append(sp[0])
        if len(marks) >= 2 and marks != sorted(marks):
            rmarks = list(reversed(marks))
            if rmarks != sorted(rmarks):
                raise NotRepresentable("forced elements interleave across a Q-node")
            if pinned:
                raise NotRepresentable(
                    "forced order conflicts with the node's assigned orientation")
            return list(reversed(ordered))
        return ordered

    def _emit2(self, c, asg, fpos):
        buf: list = []
        span = self._emit(c, asg, fpos, buf)
        return (span, buf)

    def _check_spans(self, node, spans, asg, fpos, out, ordered) -> tuple | None:
        lo = hi = None
        prev_hi = None
        for span, buf in spans:
            out.extend(buf)
            if span is None:
                continue
            a, b = span
            if prev_hi is not None and a < prev_hi:
                raise NotRepresentable("forced elements interleave between children")
            prev_hi = b
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)
        if lo is None:
            return None
        return (lo, hi)


def _forced_span(node: Node, fpos) -> tuple | None:
    """(min, max) forced positions in the subtree, checking contiguity later."""
    lo = hi = None
    stack = [node]
    while stack:
        x = stack.pop()
        if x.is_leaf():
            p = fpos.get(x.element)
            if p is not None:
                lo = p if lo is None else min(lo, p)
                hi = p if hi is None else max(hi, p)
        else:
            stack.extend(x.child_list())
    return None if lo is None else (lo, hi)


def _clone_node(x: Node) -> Node:
    if x.is_leaf():
        return make_leaf(x.element)
    if x.is_p():
        n = Node(PNODE)
        for c in x.children:
            _attach(n, _clone_node(c))
        return n
    n = Node(QNODE)
    n.children = [_clone_node(c) for c in x.children]
    for c in n.children:
        c.parent = n
    n.links = list(x.links)
    return n


def _project_node(x: Node, keep: set) -> Node | None:
    if x.is_leaf():
        return make_leaf(x.element) if x.element in keep else None
    if x.is_p():
        kept = [_project_node(c, keep) for c in x.children]
        kept = [c for c in kept if c is not None]
        if not kept:
            return None
        if len(kept) == 1:
            return kept[0]
        if len(kept) == 2:
            n = Node(QNODE)
            n.children = kept
            n.links = [None]
        else:
            n = Node(PNODE)
            n.children = {}
            for c in kept:
                n.children[c] = None
        for c in kept:
            c.parent = n
        return n
    # Q-node: surviving children keep their relative order; links between
    # survivors take the first label found in the collapsed gap
    kept_children: list[Node] = []
    kept_links: list[Literal | None] = []
    pending: Literal | None = None
    for i, c in enumerate(x.children):
        sub = _project_node(c, keep)
        if sub is not None:
            if kept_children:
                kept_links.append(pending)
            kept_children.append(sub)
            pending = x.links[i] if i < len(x.links) else None
        else:
            if pending is None and i < len(x.links):
                pending = x.links[i]
            elif i < len(x.links) and x.links[i] is not None:
                pass  # implicitly equal to pending; original tree is swept
    if not kept_children:
        return None
    if len(kept_children) == 1:
        kept_children[0].parent = None
        return kept_children[0]
    n = Node(QNODE)
    n.children = kept_children
    n.links = kept_links
    for c in kept_children:
        c.parent = n
    return n


def _enum(x: Node):
    if x.is_leaf():
        yield [x.element]
        return
    kids = x.child_list()
    if x.is_q():
        for rev in (False, True):
            seq = list(reversed(kids)) if rev else kids
            yield from _concat_enum(seq)
        return
    import itertools
    for perm in itertools.permutations(kids):
        yield from _concat_enum(perm)


def _concat_enum(kids):
    if not kids:
        yield []
        return
    head, rest = kids[0], kids[1:]
    for h in _enum(head):
        for r in _concat_enum(rest):
            yield h + r


def canonical_rotation(seq: tuple) -> tuple:
    """Lexicographically smallest rotation (cyclic canonical form)."""
    if not seq:
        return seq
    best = None
    for i in range(len(seq)):
        rot = seq[i:] + seq[:i]
        if best is None or rot < best:
            best = rot
    return best


def _elem_str(e) -> str:
    if isinstance(e, tuple):
        return "-".join(str(p) for p in e)
    return str(e)


def universal(elements, special=None, vargen: VarGen | None = None) -> PQTree:
    """Tree representing all orders of the given elements.

    With special set, that element is the circular anchor and the rest form
    the linear body.
    """
    elements = list(elements)
    t = PQTree(vargen)
    if special is not None:
        t.special = special
        elements = [e for e in elements if e != special]
    if not elements:
        if special is None:
            raise EmptyGroundSet("a PQ-tree needs at least one element")
        return t
    leaves = [make_leaf(e) for e in elements]
    for leaf in leaves:
        t.leaf_index[leaf.element] = leaf
    if len(leaves) == 1:
        t.root = leaves[0]
    elif len(leaves) == 2:
        t.root = t.new_qnode(leaves, fresh_var=True)
    else:
        t.root = t.new_pnode(leaves)
    return t


def intersect(a: PQTree, b: PQTree, eq_out: list | None = None) -> PQTree | None:
    """Tree representing exactly the orders represented by both inputs.

    Ground sets must match (same special leaf if circular). Returns None
    when the intersection admits no order. For every Q-node constraint from
    b, an equation relating its orientation literal to the corresponding
    Q-node in the result is appended to eq_out (sign matching the relative
    direction of the two child blocks).
    """
    assert a.linear_elements() == b.linear_elements()
    assert a.special == b.special
    t = a.clone()
    if b.root is None:
        return t
    if eq_out is None:
        eq_out = []

    # bottom-up over b's internal nodes so each child's descendant set is
    # already consecutive when its parent's constraints run
    post: list[Node] = []
    stack = [(b.root, False)]
    while stack:
        x, done = stack.pop()
        if done:
            if not x.is_leaf():
                post.append(x)
            continue
        stack.append((x, True))
        if not x.is_leaf():
            for c in x.child_list():
                stack.append((c, False))

    for node in post:
        kids = node.child_list()
        desc = [_leafset(c) for c in kids]
        if node.is_p():
            if not t.reduce(set().union(*desc)).success:
                return None
            continue
        for i in range(len(kids) - 1):
            pair = desc[i] | desc[i + 1]
            out = t.reduce(pair)
            if not out.success:
                return None
            z, boundary, d1_first = _locate_pair(t, out, desc[i], desc[i + 1])
            l_z = t.ensure_literal(z, boundary)
            l_q = b.ensure_literal(node, i)
            eq_out.append((l_z, l_q) if d1_first else (l_z, l_q.negate()))
    return t


def _leafset(x: Node) -> set:
    out = set()
    stack = [x]
    while stack:
        n = stack.pop()
        if n.is_leaf():
            out.add(n.element)
        else:
            stack.extend(n.child_list())
    return out


def _locate_pair(t: PQTree, out: ReductionOutcome, d1: set, d2: set):
    """The Q-node hosting the d1/d2 boundary, its link index, and block order."""
    kind = out.block[0]
    if kind == "node":
        z = out.block[1]
        assert z.is_q(), "pair LCA must be a Q-node"
        i0, i1 = 0, len(z.children) - 1
    else:
        z, i0, i1 = out.block[1], out.block[2], out.block[3]
        assert z.is_q()
    prev_in_d1 = None
    boundary = None
    for i in range(i0, i1 + 1):
        in_d1 = _first_leaf(z.children[i]) in d1
        if prev_in_d1 is not None and in_d1 != prev_in_d1:
            assert boundary is None, "descendant blocks must switch exactly once"
            boundary = i - 1
        prev_in_d1 = in_d1
    assert boundary is not None, "pair blocks must straddle a link"
    d1_first = _first_leaf(z.children[i0]) in d1
    return z, boundary, d1_first


def _first_leaf(x: Node):
    while not x.is_leaf():
        x = x.child_list()[0]
    return x.element


def lift(order_on_subset, t: PQTree, assignment=None) -> list:
    """A represented order of t whose restriction matches the given suborder."""
    sub = list(order_on_subset)
    full = t.pick_order(assignment, forced=sub)
    check = [e for e in full if e in set(sub)]
    if check != sub:
        raise NotRepresentable("suborder is not realizable in the tree")
    return full
