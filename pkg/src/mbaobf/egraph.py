"""E-graph: equivalence classes of hashconsed expression nodes.

An e-node is an operator or leaf whose children are e-class ids instead of
subtrees.  An e-class is a set of e-nodes that all denote the same value
under the engine's fixed-width semantics.  The graph maintains two
invariants, restored by :meth:`EGraph.rebuild` after a batch of unions:

* hashcons: no two distinct classes contain the same canonical e-node;
* congruence: e-nodes with equal labels and pairwise-equivalent children
  live in the same class.

Mutation protocol: ``add_expr``/``union`` freely, then ``rebuild`` before
reading (``node_count``, matching, extraction).  Determinism matters here:
class representatives are chosen as the smaller canonical id, node sets are
insertion-ordered, and nothing iterates in hash order, so identical
operation sequences produce identical graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .expr import Const, Expression, Op, OPERATORS, Var

EClassId = int

# Sort rank per label, used for deterministic tie-breaking: leaves first,
# then operators alphabetically.
_LABEL_RANK = {
    "const": 0,
    "var": 1,
    "add": 2,
    "and": 3,
    "mul": 4,
    "neg": 5,
    "not": 6,
    "or": 7,
    "sub": 8,
    "xor": 9,
}


@dataclass(frozen=True)
class ENode:
    """label is an operator name, or "var"/"const" with the payload holding
    the variable name or constant value."""

    label: str
    payload: object  # str | int | None
    children: tuple

    def is_leaf(self) -> bool:
        return not self.children

    def sort_key(self):
        if self.label == "const":
            return (_LABEL_RANK["const"], self.payload, "", self.children)
        if self.label == "var":
            return (_LABEL_RANK["var"], 0, self.payload, self.children)
        return (_LABEL_RANK[self.label], 0, "", self.children)

    def render(self) -> str:
        if self.label == "var":
            return f"var {self.payload}"
        if self.label == "const":
            return f"const {self.payload}"
        return f"({self.label} {' '.join(str(c) for c in self.children)})"


@dataclass
class EClass:
    id: EClassId
    nodes: dict = field(default_factory=dict)  # ordered set: ENode -> None
    parents: list = field(default_factory=list)  # [(ENode, EClassId)]


class InvalidIdError(Exception):
    def __init__(self, cid):
        super().__init__(f"invalid e-class id: {cid}")


class CapacityExceededError(Exception):
    """The hard node cap was hit while adding; the graph is still usable."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"e-graph node capacity exceeded (cap={cap})")


class EGraph:
    """Congruence-closed union of e-classes over hashconsed e-nodes.

    ``bits`` fixes the width constants are reduced to; ``max_nodes`` is a
    hard cap enforced inside :meth:`add` so no rule application can exhaust
    memory regardless of what the scheduler does.
    """

    def __init__(self, bits: int = 64, max_nodes: Optional[int] = None):
        self.bits = bits
        self.max_nodes = max_nodes
        self._uf: list[int] = []
        self._hashcons: dict = {}  # canonical ENode -> EClassId
        self._classes: dict = {}  # canonical EClassId -> EClass
        self._worklist: list[int] = []

    # -- union-find ---------------------------------------------------------

    def find(self, cid: EClassId) -> EClassId:
        if not isinstance(cid, int) or cid < 0 or cid >= len(self._uf):
            raise InvalidIdError(cid)
        root = cid
        while self._uf[root] != root:
            root = self._uf[root]
        while self._uf[cid] != root:
            self._uf[cid], cid = root, self._uf[cid]
        return root

    def _new_class(self) -> EClassId:
        cid = len(self._uf)
        self._uf.append(cid)
        self._classes[cid] = EClass(cid)
        return cid

    # -- insertion ----------------------------------------------------------

    def canonicalize(self, node: ENode) -> ENode:
        if node.is_leaf():
            return node
        return ENode(node.label, node.payload,
                     tuple(self.find(c) for c in node.children))

    def add(self, node: ENode) -> EClassId:
        """Insert one e-node (children must be existing class ids)."""
        node = self.canonicalize(node)
        existing = self._hashcons.get(node)
        if existing is not None:
            return self.find(existing)
        if self.max_nodes is not None and len(self._hashcons) >= self.max_nodes:
            raise CapacityExceededError(self.max_nodes)
        cid = self._new_class()
        self._classes[cid].nodes[node] = None
        self._hashcons[node] = cid
        for child in node.children:
            self._classes[child].parents.append((node, cid))
        return cid

    def add_expr(self, e: Expression) -> EClassId:
        """Insert a whole expression bottom-up; returns the root's class."""
        if isinstance(e, Var):
            return self.add(ENode("var", e.name, ()))
        if isinstance(e, Const):
            return self.add(ENode("const", e.value & ((1 << self.bits) - 1), ()))
        children = tuple(self.add_expr(a) for a in e.args)
        return self.add(ENode(e.op.name, None, children))

    def contains(self, node: ENode) -> Optional[EClassId]:
        """Class of a canonical e-node, or None if absent (no insertion)."""
        existing = self._hashcons.get(self.canonicalize(node))
        return None if existing is None else self.find(existing)

    # -- merging ------------------------------------------------------------

    def union(self, a: EClassId, b: EClassId) -> tuple[EClassId, bool]:
        """Merge two classes; the smaller canonical id becomes representative.

        Returns ``(representative, changed)``; ``changed`` is False when the
        ids were already equivalent.
        """
        a, b = self.find(a), self.find(b)
        if a == b:
            return a, False
        winner, loser = (a, b) if a < b else (b, a)
        self._uf[loser] = winner
        lost = self._classes.pop(loser)
        kept = self._classes[winner]
        kept.nodes.update(lost.nodes)
        kept.parents.extend(lost.parents)
        self._worklist.append(winner)
        return winner, True

    # -- congruence maintenance ---------------------------------------------

    def rebuild(self) -> int:
        """Process pending merges until the invariants hold again.

        Returns the number of class repairs performed; a second call with no
        intervening mutation returns 0.
        """
        repairs = 0
        while self._worklist:
            todo = list(dict.fromkeys(self.find(c) for c in self._worklist))
            self._worklist.clear()
            for cid in todo:
                repairs += 1
                self._repair(cid)
        if repairs:
            self._refresh_class_nodes()
        return repairs

    def _repair(self, cid: EClassId) -> None:
        cid = self.find(cid)
        cls = self._classes[cid]
        old_parents = cls.parents
        cls.parents = []
        seen: dict = {}  # canonical parent node -> class id
        for pnode, pcls in old_parents:
            self._hashcons.pop(pnode, None)
            pn = self.canonicalize(pnode)
            pc = self.find(pcls)
            prev = seen.get(pn)
            if prev is not None and self.find(prev) != pc:
                pc, _ = self.union(prev, pc)
            seen[pn] = pc
            self._hashcons[pn] = self.find(pc)
        # cid itself may have been merged away by a congruence union above.
        home = self._classes[self.find(cid)]
        for pn, pc in seen.items():
            home.parents.append((pn, self.find(pc)))

    def _refresh_class_nodes(self) -> None:
        for cls in self._classes.values():
            fresh = dict.fromkeys(self.canonicalize(n) for n in cls.nodes)
            cls.nodes = fresh

    # -- queries ------------------------------------------------------------

    def node_count(self) -> int:
        """Number of distinct canonical e-nodes (exact in rebuilt state)."""
        return len(self._hashcons)

    def class_count(self) -> int:
        return len(self._classes)

    def class_ids(self) -> list[int]:
        """Canonical class ids in ascending order."""
        return sorted(self._classes)

    def nodes_of(self, cid: EClassId) -> Iterator[ENode]:
        return iter(self._classes[self.find(cid)].nodes)

    def expr_of_node(self, node: ENode, arg_exprs: tuple) -> Expression:
        """Rebuild one expression node from an e-node and child expressions."""
        if node.label == "var":
            return Var(node.payload)
        if node.label == "const":
            return Const(node.payload)
        return Op(OPERATORS[node.label], arg_exprs)

    # -- debug output -------------------------------------------------------

    def dump(self) -> str:
        """Snapshot as text lines ``class <id>: {node, node, ...}``."""
        lines = []
        for cid in self.class_ids():
            nodes = sorted(self._classes[cid].nodes, key=ENode.sort_key)
            body = ", ".join(n.render() for n in nodes)
            lines.append(f"class {cid}: {{{body}}}")
        return "\n".join(lines)

    def to_dot(self) -> str:
        """Graphviz description with e-nodes clustered per class."""
        lines = ["digraph egraph {", "  compound=true;", "  node [shape=box];"]
        node_names = {}
        for cid in self.class_ids():
            lines.append(f"  subgraph cluster_{cid} {{")
            lines.append(f'    label="class {cid}"; style=dashed;')
            for i, n in enumerate(sorted(self._classes[cid].nodes,
                                         key=ENode.sort_key)):
                name = f"n{cid}_{i}"
                node_names[n] = name
                label = n.payload if n.is_leaf() else n.label
                lines.append(f'    {name} [label="{label}"];')
            lines.append("  }")
        for n, name in node_names.items():
            for child in n.children:
                target = next(iter(self._classes[child].nodes), None)
                if target is not None:
                    lines.append(f"  {name} -> {node_names[target]} "
                                 f"[lhead=cluster_{child}];")
        lines.append("}")
        return "\n".join(lines)


# -- invariant checks (used by the stress tests, full scans) ----------------


def check_invariants(g: EGraph) -> None:
    """Full-scan hashcons + congruence check; raises AssertionError on breach.

    Quadratic in node count; intended for graphs of a few hundred nodes.
    """
    all_nodes = []
    for cid, cls in g._classes.items():
        assert g.find(cid) == cid, f"class map holds non-canonical id {cid}"
        assert cls.nodes, f"class {cid} is empty"
        for n in cls.nodes:
            assert g.canonicalize(n) == n, f"stale node {n} in class {cid}"
            all_nodes.append((n, cid))
    seen: dict = {}
    for n, cid in all_nodes:
        assert n not in seen or seen[n] == cid, \
            f"hashcons violation: {n} in classes {seen[n]} and {cid}"
        seen[n] = cid
    for n1, c1 in all_nodes:
        for n2, c2 in all_nodes:
            if n1.label == n2.label and n1.payload == n2.payload \
                    and n1.children == n2.children:
                assert c1 == c2, f"congruence violation: {n1} vs {n2}"
    assert len(seen) == g.node_count(), "node_count out of sync"
