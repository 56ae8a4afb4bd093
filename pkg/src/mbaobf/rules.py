"""Rewrite rules: patterns, e-matching and rule application.

A pattern is an expression tree whose leaves may also be pattern variables
(``?name`` in rule files).  A rule rewrites every matched instance of its
left-hand side by unioning in the instantiated right-hand side; it never
removes anything, so the e-graph only ever gains representations.

Rule file format, one rule per line::

    # comment
    name : LHS => RHS      directed
    name : LHS <=> RHS     bidirectional (expands into two directed rules)

Pattern variables on the right-hand side must also occur on the left; a
rule may not invent unbound terms.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import Iterator, Optional

from .egraph import EGraph, ENode
from .expr import Const, Op, ParseError, Var, parse_pattern_text


@dataclass(frozen=True)
class PatVar:
    name: str


# A Pattern is a Var | Const | PatVar leaf or an Op whose args are Patterns.
Pattern = object


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: Pattern
    rhs: Pattern
    bidirectional: bool = False


@dataclass
class Match:
    """One way a rule's LHS embeds into the graph: the class it matched at
    plus the pattern-variable bindings (canonical at match time)."""

    rule: str
    root: int
    subst: dict  # pattern var name -> EClassId


class RuleSyntaxError(Exception):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class UnboundRhsVarError(Exception):
    def __init__(self, rule: str, var: str):
        self.rule = rule
        self.var = var
        super().__init__(f"rule {rule!r}: right-hand side variable ?{var} "
                         f"does not occur on the left-hand side")


def pattern_vars(p: Pattern) -> set:
    out: set = set()
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, PatVar):
            out.add(node.name)
        elif isinstance(node, Op):
            stack.extend(node.args)
    return out


def pattern_size(p: Pattern) -> int:
    count = 0
    stack = [p]
    while stack:
        node = stack.pop()
        count += 1
        if isinstance(node, Op):
            stack.extend(node.args)
    return count


def parse_rules(text: str) -> list[Rule]:
    """Parse a rule file; ``<=>`` lines expand into two directed rules."""
    rules: list[Rule] = []
    names: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise RuleSyntaxError(lineno, "expected 'name : LHS => RHS'")
        name, _, body = line.partition(":")
        name = name.strip()
        if not name or not all(c.isalnum() or c in "_-" for c in name):
            raise RuleSyntaxError(lineno, f"bad rule name {name!r}")
        if "<=>" in body:
            lhs_text, _, rhs_text = body.partition("<=>")
            bidirectional = True
        elif "=>" in body:
            lhs_text, _, rhs_text = body.partition("=>")
            bidirectional = False
        else:
            raise RuleSyntaxError(lineno, "expected '=>' or '<=>'")
        try:
            lhs = parse_pattern_text(lhs_text, PatVar)
            rhs = parse_pattern_text(rhs_text, PatVar)
        except ParseError as exc:
            raise RuleSyntaxError(lineno, str(exc)) from exc
        directed = [(name, lhs, rhs)]
        if bidirectional:
            directed.append((name + "-rev", rhs, lhs))
        for rname, rl, rr in directed:
            if rname in names:
                raise RuleSyntaxError(lineno, f"duplicate rule name {rname!r}")
            missing = pattern_vars(rr) - pattern_vars(rl)
            if missing:
                raise UnboundRhsVarError(rname, sorted(missing)[0])
            names.add(rname)
            rules.append(Rule(rname, rl, rr, bidirectional))
    return rules


def default_rules_text() -> str:
    return importlib.resources.files("mbaobf").joinpath(
        "data/default.rules").read_text(encoding="utf-8")


def load_default_rules() -> list[Rule]:
    """The 14 rules shipped with the engine."""
    return parse_rules(default_rules_text())


# ---------------------------------------------------------------------------
# E-matching
# ---------------------------------------------------------------------------


def _label_index(g: EGraph) -> dict:
    """Per-class map label -> [nodes]; built once per matching round."""
    index: dict = {}
    for cid in g.class_ids():
        by_label: dict = {}
        for n in g.nodes_of(cid):
            by_label.setdefault(n.label, []).append(n)
        index[cid] = by_label
    return index


def _match_at(g: EGraph, index: dict, p: Pattern, cid: int,
              subst: dict) -> Iterator[dict]:
    if isinstance(p, PatVar):
        bound = subst.get(p.name)
        if bound is None:
            new = dict(subst)
            new[p.name] = cid
            yield new
        elif bound == cid:
            yield subst
        return
    by_label = index[cid]
    if isinstance(p, Const):
        want = p.value & ((1 << g.bits) - 1)
        for n in by_label.get("const", ()):
            if n.payload == want:
                yield subst
                return
        return
    if isinstance(p, Var):
        for n in by_label.get("var", ()):
            if n.payload == p.name:
                yield subst
                return
        return
    for n in by_label.get(p.op.name, ()):
        stack = [subst]
        for arg, child in zip(p.args, n.children):
            stack = [s2 for s in stack for s2 in _match_at(g, index, arg, child, s)]
            if not stack:
                break
        for s in stack:
            yield s


def ematch(g: EGraph, p: Pattern, rule_name: str = "",
           index: Optional[dict] = None) -> list[Match]:
    """All matches of ``p`` anywhere in the rebuilt graph.

    Complete with respect to brute-force instantiation; duplicates are
    collapsed and the result is ordered by root id, then by the bindings
    sorted by variable name, so match lists are deterministic.
    """
    if index is None:
        index = _label_index(g)
    out: list[Match] = []
    seen: set = set()
    for cid in g.class_ids():
        found = []
        for subst in _match_at(g, index, p, cid, {}):
            key = (cid, tuple(sorted(subst.items())))
            if key not in seen:
                seen.add(key)
                found.append(key)
        found.sort(key=lambda k: k[1])
        for _, items in found:
            out.append(Match(rule_name, cid, dict(items)))
    return out


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def _instantiate(g: EGraph, p: Pattern, subst: dict) -> int:
    if isinstance(p, PatVar):
        return g.find(subst[p.name])
    if isinstance(p, Const):
        return g.add(ENode("const", p.value & ((1 << g.bits) - 1), ()))
    if isinstance(p, Var):
        return g.add(ENode("var", p.name, ()))
    children = tuple(_instantiate(g, a, subst) for a in p.args)
    return g.add(ENode(p.op.name, None, children))


def count_new_nodes(g: EGraph, p: Pattern, subst: dict) -> int:
    """Upper bound on nodes :func:`apply_match` would add for this match.

    A dry run against the hashcons: a node whose children all resolve to
    existing classes and that is itself present costs nothing; anything
    unresolved counts as new.  Exact unless the RHS repeats a missing
    subpattern, in which case it overcounts (safe direction for capacity
    checks).
    """
    cid, count = _count_new(g, p, subst)
    return count


def _count_new(g: EGraph, p: Pattern, subst: dict) -> tuple[Optional[int], int]:
    if isinstance(p, PatVar):
        return g.find(subst[p.name]), 0
    if isinstance(p, Const):
        node = ENode("const", p.value & ((1 << g.bits) - 1), ())
        existing = g.contains(node)
        return (existing, 0) if existing is not None else (None, 1)
    if isinstance(p, Var):
        existing = g.contains(ENode("var", p.name, ()))
        return (existing, 0) if existing is not None else (None, 1)
    total = 0
    child_ids = []
    for a in p.args:
        cid, count = _count_new(g, a, subst)
        total += count
        child_ids.append(cid)
    if any(c is None for c in child_ids):
        return None, total + 1
    existing = g.contains(ENode(p.op.name, None, tuple(child_ids)))
    if existing is not None:
        return existing, total
    return None, total + 1


def apply_match(g: EGraph, rule: Rule, m: Match) -> bool:
    """Union the instantiated RHS into the matched class.

    Returns whether the graph changed (new nodes or a merge).  The caller
    must rebuild before the next matching round.
    """
    before = g.node_count()
    rhs_id = _instantiate(g, rule.rhs, m.subst)
    _, merged = g.union(g.find(m.root), rhs_id)
    return merged or g.node_count() != before
