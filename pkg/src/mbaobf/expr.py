"""Expression language for mixed boolean-arithmetic terms.

An expression is a finite tree of operators over variables and fixed-width
unsigned constants.  All arithmetic is two's-complement modulo ``2**bits``;
the supported widths are 4, 8, 16, 32 and 64 bits.

Grammar accepted by :func:`parse` (lowest precedence first)::

    expr   := xor ( "|" xor )*
    xor    := and ( "^" and )*
    and    := sum ( "&" sum )*
    sum    := term ( ("+"|"-") term )*
    term   := unary ( "*" unary )*
    unary  := ("-"|"~") unary | atom
    atom   := IDENT | NUMBER | "(" expr ")"
    IDENT  := [a-zA-Z_][a-zA-Z0-9_]*
    NUMBER := [0-9]+ | "0x" [0-9a-fA-F]+

Binary operators are left-associative.  Constants out of range are reduced
modulo ``2**bits`` at parse time, so parsed trees always hold canonical
constants in ``[0, 2**bits)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Union

VALID_BITWIDTHS = (4, 8, 16, 32, 64)
DEFAULT_BITWIDTH = 64


class Category(Enum):
    ARITHMETIC = "arithmetic"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class Operator:
    """One entry of the closed operator set.

    ``name`` is the unique internal identifier; ``symbol`` is the surface
    syntax.  Unary minus and binary minus share a symbol but are distinct
    operators.
    """

    name: str
    symbol: str
    arity: int
    category: Category


ADD = Operator("add", "+", 2, Category.ARITHMETIC)
SUB = Operator("sub", "-", 2, Category.ARITHMETIC)
MUL = Operator("mul", "*", 2, Category.ARITHMETIC)
NEG = Operator("neg", "-", 1, Category.ARITHMETIC)
AND = Operator("and", "&", 2, Category.BOOLEAN)
OR = Operator("or", "|", 2, Category.BOOLEAN)
XOR = Operator("xor", "^", 2, Category.BOOLEAN)
NOT = Operator("not", "~", 1, Category.BOOLEAN)

OPERATORS = {op.name: op for op in (ADD, SUB, MUL, NEG, AND, OR, XOR, NOT)}


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Op:
    op: Operator
    args: tuple


Expression = Union[Var, Const, Op]


class ParseError(Exception):
    """Malformed input text; ``position`` is a 0-based character offset."""

    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"syntax error at column {position + 1}: {message}")


class UnboundVariableError(Exception):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable: {name}")


def check_bitwidth(bits: int) -> int:
    if bits not in VALID_BITWIDTHS:
        raise ValueError(f"unsupported bitwidth {bits}; choose one of {VALID_BITWIDTHS}")
    return bits


def mask_of(bits: int) -> int:
    return (1 << bits) - 1


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_SYMBOLS = set("+-*&|^~()")


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "number" | "patvar" | one of the symbol chars | "end"
    text: str
    pos: int


def _tokenize(text: str, allow_pattern_vars: bool) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _SYMBOLS:
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        if c == "?" and allow_pattern_vars:
            j = i + 1
            if j >= n or not (text[j].isalpha() or text[j] == "_"):
                raise ParseError(i, "expected identifier after '?'")
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("patvar", text[i + 1 : j], i))
            i = j
            continue
        if c.isdigit():
            j = i
            if text.startswith("0x", i) or text.startswith("0X", i):
                j = i + 2
                while j < n and text[j] in "0123456789abcdefABCDEF":
                    j += 1
                if j == i + 2:
                    raise ParseError(i, "malformed hex constant")
            else:
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(_Token("number", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(i, f"unexpected character {c!r}")
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list.

    ``bits=None`` leaves constants unreduced (used for rule patterns, whose
    width is only known once a rule is instantiated in an engine).
    """

    def __init__(self, tokens: list[_Token], bits: Optional[int],
                 patvar_factory: Optional[Callable[[str], object]] = None):
        self.tokens = tokens
        self.i = 0
        self.bits = bits
        self.patvar_factory = patvar_factory

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            got = tok.text or "end of input"
            raise ParseError(tok.pos, f"expected {kind!r}, got {got!r}")
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(tok.pos, f"unexpected trailing input {tok.text!r}")
        return e

    def _binary_level(self, sub, ops: dict):
        e = sub()
        while self.peek().kind in ops:
            tok = self.next()
            rhs = sub()
            e = Op(ops[tok.kind], (e, rhs))
        return e

    def expr(self):
        return self._binary_level(self.xor, {"|": OR})

    def xor(self):
        return self._binary_level(self.and_, {"^": XOR})

    def and_(self):
        return self._binary_level(self.sum_, {"&": AND})

    def sum_(self):
        return self._binary_level(self.term, {"+": ADD, "-": SUB})

    def term(self):
        return self._binary_level(self.unary, {"*": MUL})

    def unary(self):
        tok = self.peek()
        if tok.kind == "-":
            self.next()
            return Op(NEG, (self.unary(),))
        if tok.kind == "~":
            self.next()
            return Op(NOT, (self.unary(),))
        return self.atom()

    def atom(self):
        tok = self.next()
        if tok.kind == "ident":
            return Var(tok.text)
        if tok.kind == "number":
            value = int(tok.text, 0)
            if self.bits is not None:
                value &= mask_of(self.bits)
            return Const(value)
        if tok.kind == "patvar":
            if self.patvar_factory is None:
                raise ParseError(tok.pos, "pattern variables are not allowed here")
            return self.patvar_factory(tok.text)
        if tok.kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        got = tok.text or "end of input"
        raise ParseError(tok.pos, f"expected an operand, got {got!r}")


def parse(text: str, bits: int = DEFAULT_BITWIDTH) -> Expression:
    """Parse ``text`` into an expression tree, reducing constants mod 2**bits."""
    check_bitwidth(bits)
    if not text.strip():
        raise ParseError(0, "empty expression")
    return _Parser(_tokenize(text, allow_pattern_vars=False), bits).parse()


def parse_pattern_text(text: str, patvar_factory: Callable[[str], object]):
    """Parse rule-pattern text: the expression grammar plus ``?name`` leaves.

    Constants are kept unreduced; the engine normalizes them per bitwidth.
    """
    if not text.strip():
        raise ParseError(0, "empty pattern")
    return _Parser(_tokenize(text, allow_pattern_vars=True), None,
                   patvar_factory).parse()


# ---------------------------------------------------------------------------
# Printing, evaluation, structure helpers
# ---------------------------------------------------------------------------


def to_text(e: Expression) -> str:
    """Fully parenthesized canonical form; ``parse(to_text(e)) == e``."""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return str(e.value)
    if e.op.arity == 1:
        return f"({e.op.symbol} {to_text(e.args[0])})"
    return f"({to_text(e.args[0])} {e.op.symbol} {to_text(e.args[1])})"


def evaluate(e: Expression, env: dict, bits: int = DEFAULT_BITWIDTH) -> int:
    """Evaluate under fixed-width two's-complement semantics.

    ``env`` must bind every free variable of ``e``; results and intermediate
    values always lie in ``[0, 2**bits)``.
    """
    m = mask_of(check_bitwidth(bits))
    return _eval(e, env, m)


def _eval(e: Expression, env: dict, m: int) -> int:
    if isinstance(e, Const):
        return e.value & m
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariableError(e.name)
        return env[e.name] & m
    name = e.op.name
    if name == "neg":
        return (-_eval(e.args[0], env, m)) & m
    if name == "not":
        return _eval(e.args[0], env, m) ^ m
    a = _eval(e.args[0], env, m)
    b = _eval(e.args[1], env, m)
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


def free_vars(e: Expression) -> set:
    """The set of distinct variable names occurring in ``e``."""
    out: set = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Op):
            stack.extend(node.args)
    return out


def expr_size(e: Expression) -> int:
    """Total node count of the tree."""
    count = 0
    stack = [e]
    while stack:
        node = stack.pop()
        count += 1
        if isinstance(node, Op):
            stack.extend(node.args)
    return count


def walk(e: Expression) -> Iterator[Expression]:
    """Iterate over all nodes of the tree (pre-order)."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Op):
            stack.extend(reversed(node.args))
