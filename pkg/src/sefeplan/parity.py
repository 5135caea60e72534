"""Boolean orientation variables and literal-equality constraints.

Every Q-node orientation is encoded by literals over Boolean variables.
An equation between two literals says "these evaluate to the same value".
The system is solved by weighted union-find (parity on the path to the
representative), so satisfiability and one concrete assignment come out
in near-linear time.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Literal:
    """A Boolean variable or its negation."""

    var: int
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def __repr__(self) -> str:
        return f"x{self.var}" if self.positive else f"~x{self.var}"


class VarGen:
    """Sequential orientation-variable ids, one generator per decision run."""

    def __init__(self, start: int = 0):
        self._next = start

    def fresh(self) -> Literal:
        v = self._next
        self._next += 1
        return Literal(v, True)

    @property
    def count(self) -> int:
        return self._next


class ParitySystem:
    """Equality/inequality constraints between literals.

    Equations carry a class tag so test harnesses can ablate whole
    classes of constraints; suppressed classes are recorded but not
    enforced.
    """

    def __init__(self, ablate: set[str] | None = None):
        self.parent: dict[int, int] = {}
        self.rank: dict[int, int] = {}
        # flip[v]: parity of the path from v to parent[v] (True = negated)
        self.flip: dict[int, bool] = {}
        self.equations: list[tuple[Literal, Literal, str]] = []
        self.ablate = ablate or set()
        self._unsat = False

    def _ensure(self, v: int) -> None:
        if v not in self.parent:
            self.parent[v] = v
            self.rank[v] = 0
            self.flip[v] = False

    def _find(self, v: int) -> tuple[int, bool]:
        """Representative of v and parity of the full path to it."""
        self._ensure(v)
        path = []
        while self.parent[v] != v:
            path.append(v)
            v = self.parent[v]
        # path compression; each node's flip becomes its parity to the root
        s = False
        for u in reversed(path):
            s ^= self.flip[u]
            self.parent[u] = v
            self.flip[u] = s
        return v, s

    def add_equation(self, a: Literal, b: Literal, cls: str = "generic") -> None:
        """Record the constraint a == b."""
        self.equations.append((a, b, cls))
        if cls in self.ablate:
            return
        # value(a) == value(b)  <=>  val(var_a) xor val(var_b) == (sign_a != sign_b)
        want = a.positive != b.positive
        ra, pa = self._find(a.var)
        rb, pb = self._find(b.var)
        if ra == rb:
            if (pa ^ pb) != want:
                self._unsat = True
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
            pa, pb = pb, pa
        self.parent[rb] = ra
        self.flip[rb] = pa ^ pb ^ want
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1

    def add_all(self, eqs, cls: str = "generic") -> None:
        for a, b in eqs:
            self.add_equation(a, b, cls)

    @property
    def satisfiable(self) -> bool:
        return not self._unsat

    def solve(self) -> dict[int, bool] | None:
        """One satisfying assignment, or None when the system is inconsistent.

        Free variables (whole components) default to True, so repeated
        calls on the same system return the same assignment.
        """
        if self._unsat:
            return None
        out: dict[int, bool] = {}
        for v in self.parent:
            _, parity = self._find(v)
            out[v] = not parity
        return out

    def evaluate(self, lit: Literal, assignment: dict[int, bool]) -> bool:
        val = assignment.get(lit.var, True)
        return val if lit.positive else not val


def sweep_qnode_labels(trees) -> list[tuple[Literal, Literal]]:
    """Chain-equate every labeled link of every Q-node in the given trees.

    Travelling a Q-node's child list first-to-last, all link literals are
    implicitly equal; this materializes the equalities so they survive the
    node's consumption.
    """
    eqs: list[tuple[Literal, Literal]] = []
    for t in trees:
        if t is None:
            continue
        for node in t.iter_nodes():
            if not node.is_q():
                continue
            prev = None
            for lit in node.links:
                if lit is None:
                    continue
                if prev is not None and lit != prev:
                    eqs.append((prev, lit))
                prev = lit
    return eqs
