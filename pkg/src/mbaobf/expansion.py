"""Expression growth: saturate-in-reverse scheduling and extraction.

The classic e-graph workflow runs rewrite rules to a fixpoint and extracts
the *cheapest* equivalent term.  This module inverts the second half: the
graph is grown under resource-bounded termination conditions (node budget,
iteration budget, wall-clock budget, optional target output size) and the
*most complex* term is extracted.

Maximizing extraction needs care because a grown e-graph is cyclic (a class
can contain a node that refers back to the class, e.g. ``x`` alongside
``x * 1``), so "the largest equivalent term" has no finite supremum.  The
extractor therefore runs a round-indexed dynamic program:

* ``cost(class, 0)`` is defined only for classes holding a leaf (cost 1);
* ``cost(class, r)`` is the maximum of ``1 + sum(cost(child, r-1))`` over
  the class's nodes whose children are all defined at round ``r-1``,
  carrying ``cost(class, r-1)`` forward when no candidate beats it;
* candidates whose total would exceed the output-size budget are skipped,
  which keeps every defined cost (and hence the materialized output)
  within ``max_output_nodes`` even on cyclic graphs.

Reconstruction descends through the round at which each chosen node's cost
was computed, so the output is a finite tree of depth at most ``rounds``
whose size equals the root's cost.  Ties between equal-cost nodes break by
the smallest node (label order, then child ids): runs are deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .egraph import EGraph, ENode
from .expr import DEFAULT_BITWIDTH, Expression, expr_size
from .metrics import MetricsReport, measure
from .rules import _label_index, apply_match, count_new_nodes, ematch


class StopReason(Enum):
    NODE_LIMIT = "NodeLimit"
    ITER_LIMIT = "IterLimit"
    TIME_LIMIT = "TimeLimit"
    TARGET_SIZE = "TargetSizeReached"
    SATURATED = "Saturated"


class UnextractableError(Exception):
    """No term derivable for this class within the given rounds."""

    def __init__(self, cid):
        self.cid = cid
        super().__init__(f"no term extractable for class {cid} within the "
                         f"round budget")


class OutputTooLargeError(Exception):
    def __init__(self, estimate: int, limit: int):
        self.estimate = estimate
        self.limit = limit
        super().__init__(f"output would need ~{estimate} nodes, above the "
                         f"configured limit of {limit}")


@dataclass(frozen=True)
class ExpansionConfig:
    """Termination conditions and extraction knobs for one run.

    At least one of ``node_limit`` / ``iter_limit`` / ``time_limit`` must be
    set.  ``seed`` is reserved for randomized tie-breaking policies; the
    default policy is fully deterministic and ignores it.
    """

    node_limit: Optional[int] = 3000
    iter_limit: Optional[int] = 30
    time_limit: Optional[float] = 2.0
    target_ast_size: Optional[int] = None
    extraction_rounds: int = 64
    max_output_nodes: int = 10_000
    seed: int = 0

    def __post_init__(self):
        for name in ("node_limit", "iter_limit", "time_limit",
                     "target_ast_size"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.extraction_rounds < 1:
            raise ValueError("extraction_rounds must be >= 1")
        if self.max_output_nodes < 1:
            raise ValueError("max_output_nodes must be >= 1")
        if (self.node_limit is None and self.iter_limit is None
                and self.time_limit is None):
            raise ValueError("at least one of node_limit, iter_limit, "
                             "time_limit must be set")


@dataclass(frozen=True)
class ExpansionReport:
    output: Expression
    stop: StopReason
    iterations: int
    final_node_count: int
    elapsed: float
    metrics_in: MetricsReport
    metrics_out: MetricsReport


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


def _sorted_class_nodes(g: EGraph) -> dict:
    return {cid: sorted(g.nodes_of(cid), key=ENode.sort_key)
            for cid in g.class_ids()}


def extract_max(g: EGraph, root: int, rounds: int,
                max_nodes: Optional[int] = None) -> Expression:
    """Largest term for ``root`` derivable with depth at most ``rounds``.

    ``max_nodes`` bounds the result's AST size; None means unbounded, which
    on cyclic graphs makes sizes grow exponentially with ``rounds``.  The
    result's size is nondecreasing in ``rounds``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    root = g.find(root)
    class_nodes = _sorted_class_nodes(g)

    base = {}
    for cid, nodes in class_nodes.items():
        for n in nodes:  # sorted, so the first leaf is the cheapest one
            if n.is_leaf():
                base[cid] = (1, n, 0)
                break
    tables = [base]
    prev = base
    for r in range(1, rounds + 1):
        cur = {}
        any_change = False
        for cid, nodes in class_nodes.items():
            best = None
            for n in nodes:
                total = 1
                defined = True
                for child in n.children:
                    entry = prev.get(child)
                    if entry is None:
                        defined = False
                        break
                    total += entry[0]
                if not defined:
                    continue
                if max_nodes is not None and total > max_nodes:
                    continue
                if best is None or total > best[0]:
                    best = (total, n, r)
            carried = prev.get(cid)
            if carried is not None and (best is None or best[0] <= carried[0]):
                best = carried  # on ties the earlier choice is kept
            if best is not None:
                cur[cid] = best
                if best is not carried:
                    any_change = True
        tables.append(cur)
        prev = cur
        if not any_change:
            break  # fixpoint; further rounds would be identical

    last = len(tables) - 1
    if root not in tables[min(rounds, last)]:
        raise UnextractableError(root)
    return _reconstruct(g, tables, root, rounds)


def _reconstruct(g: EGraph, tables: list, root: int, rounds: int) -> Expression:
    last = len(tables) - 1

    def lookup(cid: int, r: int):
        entry = tables[min(r, last)].get(cid)
        if entry is None:
            raise UnextractableError(cid)
        return entry

    _, node, rc = lookup(root, rounds)
    stack = [[node, rc, []]]  # explicit stack: rounds may exceed recursion depth
    while stack:
        n, r, kids = stack[-1]
        if len(kids) == len(n.children):
            stack.pop()
            built = g.expr_of_node(n, tuple(kids))
            if not stack:
                return built
            stack[-1][2].append(built)
        else:
            _, child_node, child_rc = lookup(n.children[len(kids)], r - 1)
            stack.append([child_node, child_rc, []])
    raise AssertionError("reconstruction stack underflow")


def extract_min(g: EGraph, root: int) -> Expression:
    """Smallest term for ``root``: the classical minimizing extraction.

    Fixpoint over min costs; cost strictly decreases toward the leaves, so
    reconstruction cannot loop.
    """
    root = g.find(root)
    class_nodes = _sorted_class_nodes(g)
    costs: dict = {}  # cid -> (cost, node)
    changed = True
    while changed:
        changed = False
        for cid, nodes in class_nodes.items():
            for n in nodes:
                total = 1
                defined = True
                for child in n.children:
                    entry = costs.get(child)
                    if entry is None:
                        defined = False
                        break
                    total += entry[0]
                if not defined:
                    continue
                cur = costs.get(cid)
                if cur is None or total < cur[0]:
                    costs[cid] = (total, n)
                    changed = True
    if root not in costs:
        raise UnextractableError(root)

    def build(cid: int) -> Expression:
        _, n = costs[cid]
        return g.expr_of_node(n, tuple(build(c) for c in n.children))

    return build(root)


# ---------------------------------------------------------------------------
# The growth loop
# ---------------------------------------------------------------------------

_TIME_CHECK_STRIDE = 256  # applications between wall-clock checks


def expand(e: Expression, rules: list, cfg: Optional[ExpansionConfig] = None,
           bits: int = DEFAULT_BITWIDTH) -> ExpansionReport:
    """Grow an e-graph from ``e`` under ``rules`` and extract the result.

    Each iteration matches every rule against the rebuilt graph, applies
    all matches (skipping any whose application would push the node count
    past ``node_limit``), then rebuilds.  The loop stops on whichever
    termination condition fires first; an input that no rule matches is
    returned unchanged with ``Saturated`` (a no-op, not an error).

    The rules are trusted here: admit them through the soundness checker
    first and the output is equivalent to the input by construction.
    """
    if cfg is None:
        cfg = ExpansionConfig()
    hard_cap = cfg.node_limit * 4 if cfg.node_limit is not None else None
    g = EGraph(bits=bits, max_nodes=hard_cap)
    root = g.add_expr(e)
    g.rebuild()

    if expr_size(e) > cfg.max_output_nodes:
        raise OutputTooLargeError(expr_size(e), cfg.max_output_nodes)

    start = time.monotonic()

    def timed_out() -> bool:
        return (cfg.time_limit is not None
                and time.monotonic() - start >= cfg.time_limit)

    stop: Optional[StopReason] = None
    output: Optional[Expression] = None
    iterations = 0
    while stop is None:
        if cfg.iter_limit is not None and iterations >= cfg.iter_limit:
            stop = StopReason.ITER_LIMIT
            break
        if timed_out():
            stop = StopReason.TIME_LIMIT
            break
        index = _label_index(g)
        matches = []
        for rule in rules:
            for m in ematch(g, rule.lhs, rule.name, index):
                matches.append((rule, m))
        changed = False
        skipped = False
        hit_time = False
        for i, (rule, m) in enumerate(matches):
            if i % _TIME_CHECK_STRIDE == 0 and i and timed_out():
                hit_time = True
                break
            if cfg.node_limit is not None:
                bound = count_new_nodes(g, rule.rhs, m.subst)
                if g.node_count() + bound > cfg.node_limit:
                    skipped = True
                    continue
            if apply_match(g, rule, m):
                changed = True
        g.rebuild()
        iterations += 1
        if hit_time:
            stop = StopReason.TIME_LIMIT
        elif not changed:
            stop = StopReason.NODE_LIMIT if skipped else StopReason.SATURATED
        elif cfg.node_limit is not None and g.node_count() >= cfg.node_limit:
            stop = StopReason.NODE_LIMIT
        elif cfg.target_ast_size is not None:
            candidate = extract_max(g, root, cfg.extraction_rounds,
                                    cfg.max_output_nodes)
            if expr_size(candidate) >= cfg.target_ast_size:
                stop = StopReason.TARGET_SIZE
                output = candidate
        if stop is None and timed_out():
            stop = StopReason.TIME_LIMIT

    if output is None:
        output = extract_max(g, root, cfg.extraction_rounds,
                             cfg.max_output_nodes)
    elapsed = time.monotonic() - start
    return ExpansionReport(
        output=output,
        stop=stop,
        iterations=iterations,
        final_node_count=g.node_count(),
        elapsed=elapsed,
        metrics_in=measure(e),
        metrics_out=measure(output),
    )
