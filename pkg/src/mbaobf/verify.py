"""Solver-free equivalence checking.

Rule soundness and end-to-end obfuscation equivalence are both discharged
by direct evaluation over the finite value domain: exhaustively when the
assignment space is small enough (at most ``2**24`` cases), otherwise by
seeded random sampling.  There is deliberately no SMT dependency; at these
widths plain evaluation is decisive and fast.

Evaluation here is vectorized with numpy over all assignments at once; the
scalar evaluator in :mod:`mbaobf.expr` defines the semantics and the two are
cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .expr import Const, Expression, Var, free_vars, mask_of
from .rules import PatVar, Rule, pattern_vars

EXHAUSTIVE_CASE_LIMIT = 1 << 24

_DTYPES = {4: np.uint8, 8: np.uint8, 16: np.uint16, 32: np.uint32, 64: np.uint64}


class TooManyCasesError(Exception):
    def __init__(self, cases: int):
        self.cases = cases
        super().__init__(
            f"exhaustive check infeasible: {cases} cases exceeds "
            f"{EXHAUSTIVE_CASE_LIMIT}")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a soundness or equivalence check.

    ``counterexample`` is ``(env, lhs_value, rhs_value)`` for the first
    failing assignment in deterministic case order, or None when the check
    passed.  ``cases_checked`` counts assignments evaluated up to and
    including the counterexample.
    """

    passed: bool
    counterexample: Optional[tuple]
    cases_checked: int


def _eval_vec(node, env: dict, bits: int) -> np.ndarray:
    """Evaluate an expression or pattern over per-variable value arrays."""
    dtype = _DTYPES[bits]
    m = dtype(mask_of(bits))
    with np.errstate(over="ignore"):
        return _eval_vec_inner(node, env, bits, dtype, m)


def _eval_vec_inner(node, env, bits, dtype, m) -> np.ndarray:
    if isinstance(node, Const):
        width = len(next(iter(env.values()))) if env else 1
        return np.full(width, node.value & int(m), dtype=dtype)
    if isinstance(node, PatVar):
        return env[node.name]
    if isinstance(node, Var):
        return env[node.name]
    name = node.op.name
    a = _eval_vec_inner(node.args[0], env, bits, dtype, m)
    if name == "neg":
        return (dtype(0) - a) & m
    if name == "not":
        return a ^ m
    b = _eval_vec_inner(node.args[1], env, bits, dtype, m)
    if name == "add":
        return (a + b) & m
    if name == "sub":
        return (a - b) & m
    if name == "mul":
        return (a * b) & m
    if name == "and":
        return a & b
    if name == "or":
        return a | b
    return a ^ b


def _exhaustive_env(names: list, bits: int) -> dict:
    """All assignments, lexicographic in the sorted variable names."""
    size = 1 << bits
    total = size ** len(names)
    env = {}
    for i, name in enumerate(names):
        reps = size ** (len(names) - 1 - i)
        block = np.repeat(np.arange(size, dtype=_DTYPES[bits]), reps)
        env[name] = np.tile(block, total // (reps * size))
    return env


def _random_env(names: list, bits: int, trials: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {name: rng.integers(0, 1 << bits, size=trials,
                               dtype=np.uint64).astype(_DTYPES[bits])
            for name in names}


def _compare(lhs, rhs, names: list, env: dict, bits: int) -> CheckResult:
    lv = _eval_vec(lhs, env, bits)
    rv = _eval_vec(rhs, env, bits)
    if not env:
        lv, rv = np.atleast_1d(lv), np.atleast_1d(rv)
        if int(lv[0]) == int(rv[0]):
            return CheckResult(True, None, 1)
        return CheckResult(False, ({}, int(lv[0]), int(rv[0])), 1)
    neq = lv != rv
    total = len(next(iter(env.values())))
    if not neq.any():
        return CheckResult(True, None, total)
    idx = int(np.argmax(neq))
    cex_env = {name: int(env[name][idx]) for name in names}
    return CheckResult(False, (cex_env, int(lv[idx]), int(rv[idx])), idx + 1)


def check_rule(rule: Rule, bits: int) -> CheckResult:
    """Exhaustive soundness check of a rule at the given width.

    Treats pattern variables as free variables and compares both sides over
    every assignment.  Raises :class:`TooManyCasesError` when the assignment
    space exceeds the feasibility limit (fall back to
    :func:`check_rule_random`).
    """
    names = sorted(pattern_vars(rule.lhs) | pattern_vars(rule.rhs))
    cases = (1 << bits) ** len(names)
    if cases > EXHAUSTIVE_CASE_LIMIT:
        raise TooManyCasesError(cases)
    env = _exhaustive_env(names, bits)
    return _compare(rule.lhs, rule.rhs, names, env, bits)


def check_rule_random(rule: Rule, bits: int, trials: int,
                      seed: int = 0) -> CheckResult:
    """Randomized soundness check: ``trials`` seeded assignments."""
    names = sorted(pattern_vars(rule.lhs) | pattern_vars(rule.rhs))
    if not names:
        return _compare(rule.lhs, rule.rhs, names, {}, bits)
    env = _random_env(names, bits, trials, seed)
    return _compare(rule.lhs, rule.rhs, names, env, bits)


def check_equivalence(a: Expression, b: Expression, bits: int,
                      trials: int = 1000, seed: int = 0) -> CheckResult:
    """Check two expressions for equal value on every environment.

    Exhaustive when the environment space fits the feasibility limit,
    otherwise ``trials`` seeded random environments over the union of the
    free variables.
    """
    names = sorted(free_vars(a) | free_vars(b))
    cases = (1 << bits) ** len(names)
    if cases <= EXHAUSTIVE_CASE_LIMIT:
        env = _exhaustive_env(names, bits)
    else:
        env = _random_env(names, bits, trials, seed)
    return _compare(a, b, names, env, bits)


def check_rules(rules: list, widths: tuple = (4, 8),
                random_bits: int = 64, random_trials: int = 10_000,
                seed: int = 0) -> list:
    """Admission check for a ruleset: exhaustive at each small width, then
    randomized at the full width.  Returns ``[(rule, width_label, result)]``
    for every check performed, in order."""
    results = []
    for rule in rules:
        for w in widths:
            try:
                res = check_rule(rule, w)
            except TooManyCasesError:
                res = check_rule_random(rule, w, random_trials, seed)
            results.append((rule, f"exhaustive@{w}", res))
        res = check_rule_random(rule, random_bits, random_trials, seed)
        results.append((rule, f"random@{random_bits}", res))
    return results
