"""A small predicate language for parameterized correspondences.

One predicate per action decides whether the action belongs to the value at
``(z, lambdas)``. Predicates see the type only through ``zcell`` (the id of
its sigma cell) and the distribution tuple only through ``lam[j][a]``, the
mass player ``j`` (counted from 1) puts on action ``a``.

Grammar::

    expr := or
    or   := and ("or" and)*
    and  := not ("and" not)*
    not  := "not" not | cmp
    cmp  := sum (("<"|"<="|"="|">="|">") sum)?
          | "zcell" "in" "{" idlist "}" | "true" | "false"
    sum  := prod (("+"|"-") prod)*
    prod := atom ("*" atom)*
    atom := number | "lam" "[" int "]" "[" ident "]"
          | ("min"|"max") "(" expr ("," expr)* ")" | "(" expr ")"

There is no division, so evaluation of a well-typed predicate is total.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

KEYWORDS = {"and", "or", "not", "true", "false", "lam", "zcell", "in", "min", "max"}
COMPARISONS = ("<=", ">=", "<", ">", "=")


class DSLError(ValueError):
    def __init__(self, kind: str, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {kind}: {message}")
        self.kind = kind
        self.line = line
        self.col = col


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Num:
    value: float
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    player: int
    action: str
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    value: bool
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ZcellIn:
    cells: tuple
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Arith:
    op: str
    left: object
    right: object
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Compare:
    op: str
    left: object
    right: object
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BoolOp:
    op: str
    left: object
    right: object
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: object
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<|>|=|\+|-|\*|\(|\)|\[|\]|\{|\}|,)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list:
    toks, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLError("lexical error", f"unexpected character {text[pos]!r}", line, col)
        kind, s = m.lastgroup, m.group()
        if kind != "ws":
            if kind == "ident" and s in KEYWORDS:
                kind = s
            toks.append(_Tok(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, *kinds) -> _Tok:
        t = self.tok
        if t.kind not in kinds and not (t.kind == "op" and t.text in kinds):
            want = " or ".join(repr(k) for k in kinds)
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise DSLError("syntax error", f"expected {want}, found {got}", t.line, t.col)
        self.i += 1
        return t

    def at(self, *kinds) -> bool:
        return self.tok.kind in kinds or (self.tok.kind == "op" and self.tok.text in kinds)

    def expr(self):
        return self.or_()

    def or_(self):
        node = self.and_()
        while self.at("or"):
            t = self.take("or")
            node = BoolOp("or", node, self.and_(), (t.line, t.col))
        return node

    def and_(self):
        node = self.not_()
        while self.at("and"):
            t = self.take("and")
            node = BoolOp("and", node, self.not_(), (t.line, t.col))
        return node

    def not_(self):
        if self.at("not"):
            t = self.take("not")
            return Not(self.not_(), (t.line, t.col))
        return self.cmp()

    def cmp(self):
        t = self.tok
        if self.at("true", "false"):
            self.i += 1
            return Const(t.kind == "true", (t.line, t.col))
        if self.at("zcell"):
            self.take("zcell")
            self.take("in")
            self.take("{")
            cells = [self.name()]
            while self.at(","):
                self.take(",")
                cells.append(self.name())
            self.take("}")
            return ZcellIn(tuple(cells), (t.line, t.col))
        left = self.sum()
        if self.at(*COMPARISONS):
            op = self.take(*COMPARISONS)
            return Compare(op.text, left, self.sum(), (op.line, op.col))
        return left

    def name(self) -> str:
        return self.take("ident", "num", "true", "false", "lam", "zcell", "in",
                         "min", "max", "and", "or", "not").text

    def sum(self):
        node = self.prod()
        while self.at("+", "-"):
            t = self.take("+", "-")
            node = Arith(t.text, node, self.prod(), (t.line, t.col))
        return node

    def prod(self):
        node = self.atom()
        while self.at("*"):
            t = self.take("*")
            node = Arith("*", node, self.atom(), (t.line, t.col))
        return node

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text), (t.line, t.col))
        if t.kind == "lam":
            self.i += 1
            self.take("[")
            j = self.take("num")
            if not j.text.isdigit():
                raise DSLError("syntax error", "player index must be an integer", j.line, j.col)
            self.take("]")
            self.take("[")
            a = self.name()
            self.take("]")
            return Lam(int(j.text), a, (t.line, t.col))
        if t.kind in ("min", "max"):
            self.i += 1
            self.take("(")
            args = [self.expr()]
            while self.at(","):
                self.take(",")
                args.append(self.expr())
            self.take(")")
            return Call(t.kind, tuple(args), (t.line, t.col))
        if self.at("("):
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise DSLError("syntax error", f"unexpected {got}", t.line, t.col)


@dataclass(frozen=True)
class Declaration:
    """Identifiers a predicate may mention: actions per player (1-based) and
    the cell ids of the owner's type space."""

    actions: Mapping
    cells: frozenset = frozenset()


def type_of(node) -> str:
    """'num' or 'bool'; raises on ill-typed trees."""
    if isinstance(node, (Num, Lam)):
        return "num"
    if isinstance(node, (Const, ZcellIn)):
        return "bool"
    if isinstance(node, Arith):
        _expect(node.left, "num")
        _expect(node.right, "num")
        return "num"
    if isinstance(node, Call):
        for a in node.args:
            _expect(a, "num")
        return "num"
    if isinstance(node, Compare):
        _expect(node.left, "num")
        _expect(node.right, "num")
        return "bool"
    if isinstance(node, BoolOp):
        _expect(node.left, "bool")
        _expect(node.right, "bool")
        return "bool"
    if isinstance(node, Not):
        _expect(node.operand, "bool")
        return "bool"
    raise TypeError(f"not a predicate node: {node!r}")


def _expect(node, want: str) -> None:
    got = type_of(node)
    if got != want:
        line, col = node.pos
        raise DSLError("type mismatch", f"expected a {'number' if want == 'num' else 'boolean'} expression",
                       line, col)


def walk(node):
    yield node
    for child in _children(node):
        yield from walk(child)


def _children(node) -> tuple:
    if isinstance(node, (Arith, Compare, BoolOp)):
        return (node.left, node.right)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, Not):
        return (node.operand,)
    return ()


def check_identifiers(node, decl: Declaration) -> None:
    for n in walk(node):
        if isinstance(n, Lam):
            if n.player not in decl.actions:
                raise DSLError("unknown identifier", f"no player {n.player}", *n.pos)
            if n.action not in decl.actions[n.player]:
                raise DSLError("unknown identifier", f"player {n.player} has no action {n.action!r}", *n.pos)
        elif isinstance(n, ZcellIn):
            for c in n.cells:
                if c not in decl.cells:
                    raise DSLError("unknown identifier", f"no type cell {c!r}", *n.pos)


def parse(text: str, decl: Declaration | None = None):
    """Parse and type-check a predicate; identifiers are checked when a
    declaration is given."""
    p = _Parser(text)
    node = p.expr()
    if p.tok.kind != "eof":
        t = p.tok
        raise DSLError("syntax error", f"unexpected {t.text!r} after expression", t.line, t.col)
    if type_of(node) != "bool":
        raise DSLError("type mismatch", "a predicate must be boolean", *node.pos)
    if decl is not None:
        check_identifiers(node, decl)
    return node


def print_canonical(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Lam):
        return f"lam[{node.player}][{node.action}]"
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, ZcellIn):
        return "(zcell in {" + ", ".join(node.cells) + "})"
    if isinstance(node, (Arith, Compare, BoolOp)):
        return f"({print_canonical(node.left)} {node.op} {print_canonical(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}(" + ", ".join(print_canonical(a) for a in node.args) + ")"
    if isinstance(node, Not):
        return f"(not {print_canonical(node.operand)})"
    raise TypeError(f"not a predicate node: {node!r}")


_CMP = {
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b, "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b, ">": lambda a, b: a > b,
}


def evaluate(node, zcell, lambdas):
    """Evaluate at a type cell id and a distribution tuple.

    ``lambdas`` is a sequence indexed from 0 (``lam[1]`` reads
    ``lambdas[0]``) or a mapping keyed by the 1-based player index; each entry
    supports ``entry[action]``.
    """
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Lam):
        dist = lambdas[node.player] if isinstance(lambdas, Mapping) else lambdas[node.player - 1]
        return dist[node.action]
    if isinstance(node, Const):
        return node.value
    if isinstance(node, ZcellIn):
        return zcell in node.cells
    if isinstance(node, Arith):
        a, b = evaluate(node.left, zcell, lambdas), evaluate(node.right, zcell, lambdas)
        return a + b if node.op == "+" else a - b if node.op == "-" else a * b
    if isinstance(node, Call):
        vals = [evaluate(a, zcell, lambdas) for a in node.args]
        return min(vals) if node.fn == "min" else max(vals)
    if isinstance(node, Compare):
        return _CMP[node.op](evaluate(node.left, zcell, lambdas), evaluate(node.right, zcell, lambdas))
    if isinstance(node, BoolOp):
        if node.op == "and":
            return evaluate(node.left, zcell, lambdas) and evaluate(node.right, zcell, lambdas)
        return evaluate(node.left, zcell, lambdas) or evaluate(node.right, zcell, lambdas)
    if isinstance(node, Not):
        return not evaluate(node.operand, zcell, lambdas)
    raise TypeError(f"not a predicate node: {node!r}")


def is_closed_form(node, negated: bool = False) -> bool:
    """True when the inclusion region is closed in the distribution tuple:
    every comparison is non-strict (or equality) once negations are pushed
    down to it."""
    if isinstance(node, Compare):
        closed = node.op in ("<=", ">=", "=")
        return closed != negated
    if isinstance(node, Not):
        return is_closed_form(node.operand, not negated)
    if isinstance(node, BoolOp):
        return is_closed_form(node.left, negated) and is_closed_form(node.right, negated)
    return True


@dataclass(frozen=True)
class CorrespondenceSpec:
    """One parsed predicate per action of the owning player."""

    actions: tuple
    texts: tuple
    exprs: tuple

    @classmethod
    def from_texts(cls, actions: Sequence, texts: Mapping, decl: Declaration | None = None) -> "CorrespondenceSpec":
        actions = tuple(actions)
        missing = [a for a in actions if a not in texts]
        if missing:
            raise DSLError("unknown identifier", f"no predicate for action {missing[0]!r}", 1, 1)
        extra = [a for a in texts if a not in actions]
        if extra:
            raise DSLError("unknown identifier", f"predicate for undeclared action {extra[0]!r}", 1, 1)
        exprs = tuple(parse(texts[a], decl) for a in actions)
        return cls(actions, tuple(texts[a] for a in actions), exprs)

    @classmethod
    def constant(cls, actions: Sequence, included: Sequence) -> "CorrespondenceSpec":
        inc = set(included)
        texts = {a: "true" if a in inc else "false" for a in actions}
        return cls.from_texts(actions, texts)

    def __call__(self, zcell, lambdas) -> frozenset:
        return frozenset(a for a, e in zip(self.actions, self.exprs) if evaluate(e, zcell, lambdas))

    @property
    def closed_form(self) -> bool:
        return all(is_closed_form(e) for e in self.exprs)

    @property
    def tag(self) -> str:
        return "closed-form" if self.closed_form else "mixed"


def random_predicate(rng: random.Random, decl: Declaration, depth: int = 4):
    """A random well-typed boolean AST over the declared identifiers."""
    players = sorted(decl.actions)
    cells = sorted(decl.cells)

    def num(d):
        r = rng.random()
        if d <= 0 or r < 0.3:
            if rng.random() < 0.5 or not players:
                return Num(round(rng.uniform(0, 2), rng.choice([0, 1, 2, 3, 6])))
            j = rng.choice(players)
            return Lam(j, rng.choice(sorted(decl.actions[j])))
        if r < 0.8:
            return Arith(rng.choice("+-*"), num(d - 1), num(d - 1))
        return Call(rng.choice(["min", "max"]), tuple(num(d - 1) for _ in range(rng.randint(1, 3))))

    def boolean(d):
        r = rng.random()
        if d <= 0 or r < 0.15:
            if cells and rng.random() < 0.5:
                return ZcellIn(tuple(rng.sample(cells, rng.randint(1, len(cells)))))
            return Const(rng.random() < 0.5)
        if r < 0.5:
            return Compare(rng.choice(COMPARISONS), num(d - 1), num(d - 1))
        if r < 0.85:
            return BoolOp(rng.choice(["and", "or"]), boolean(d - 1), boolean(d - 1))
        return Not(boolean(d - 1))

    return boolean(depth)
