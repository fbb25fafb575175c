"""Finite state systems and the ``.fss`` text format.

A system file is line oriented::

    # comment
    field 3
    vars x1 x2
    update x1 = 2*x1 + x2
    update x2 = x1 + x2
    output z1 = x1^2 + x2

Expressions use ``+ - * ^`` and parentheses; ``^`` takes an integer literal
and binds tightest, a leading ``-`` negates the first term of an expression.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateUpdate,
    FieldMismatch,
    FssSyntaxError,
    MissingField,
    MissingUpdate,
    NotPrime,
    UndeclaredVariable,
)
from .field import FieldSpec
from .polyfunc import PolyFunc, constant, coordinate, eval_many_funcs, evaluate, render_poly

KEYWORDS = ("field", "vars", "update", "output")
MAX_NESTING = 200
MAX_LITERAL_DIGITS = 4000


@dataclass(frozen=True)
class FssSystem:
    field: FieldSpec
    vars: tuple
    updates: tuple
    outputs: tuple = ()
    output_names: tuple = dc_field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "updates", tuple(self.updates))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        names = tuple(self.output_names) or tuple(f"z{j}" for j in range(1, len(self.outputs) + 1))
        object.__setattr__(self, "output_names", names)
        n = len(self.vars)
        if len(self.updates) != n:
            raise DimensionMismatch(f"{len(self.updates)} updates for {n} variables")
        if len(self.output_names) != len(self.outputs):
            raise DimensionMismatch("one name per output required")
        for f in self.updates + self.outputs:
            if f.field != self.field:
                raise FieldMismatch(f"polynomial over {f.field}, system over {self.field}")
            if f.n != n:
                raise DimensionMismatch(f"polynomial in {f.n} variables, system has {n}")

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def m(self) -> int:
        return len(self.outputs)

    def step(self, x: Sequence[int]) -> tuple:
        return tuple(evaluate(f, x) for f in self.updates)

    def output(self, x: Sequence[int]) -> tuple:
        return tuple(evaluate(g, x) for g in self.outputs)

    def step_many(self, X):
        """Apply F to every row of X."""
        return eval_many_funcs(self.updates, X)

    def output_many(self, X):
        if not self.outputs:
            return np.zeros((len(X), 0), dtype=np.int64)
        return eval_many_funcs(self.outputs, X)

    def simulate(self, x0: Sequence[int], steps: int) -> tuple[list, list]:
        """States x(0..steps) and outputs z(0..steps)."""
        self.check_state(x0)
        x = tuple(int(v) for v in x0)
        states, outs = [x], [self.output(x)]
        for _ in range(steps):
            x = self.step(x)
            states.append(x)
            outs.append(self.output(x))
        return states, outs

    def check_state(self, x: Sequence[int]):
        if len(x) != self.n:
            raise DimensionMismatch(f"state has {len(x)} entries, system has {self.n} variables")
        if any(not 0 <= int(v) < self.p for v in x):
            raise ValueError(f"state entries must lie in 0..{self.p - 1}")


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()=]))", re.ASCII)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        mt = _TOKEN.match(line, pos)
        if mt is None:
            col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
            raise FssSyntaxError(f"unexpected character {line[col - 1]!r}", lineno, col)
        kind = mt.lastgroup
        if kind == "int" and len(mt.group(kind)) > MAX_LITERAL_DIGITS:
            raise FssSyntaxError("integer literal too long", lineno, mt.start(kind) + 1)
        toks.append(_Tok(kind, mt.group(kind), lineno, mt.start(kind) + 1))
        pos = mt.end()
    toks.append(_Tok("end", "", lineno, len(line) + 1))
    return toks


# ---------------------------------------------------------------- expressions
# AST nodes are tuples: ("int", v, tok) | ("var", name, tok) | (op, a, b) | ("neg", a) | ("pow", a, e)


class _ExprParser:
    def __init__(self, toks: list[_Tok], start: int):
        self.toks = toks
        self.i = start
        self.depth = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.cur
        return FssSyntaxError(msg, tok.line, tok.col)

    def expr(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("expression nested too deeply")
        neg = False
        if self.cur.text == "-" and self.cur.kind == "op":
            neg = True
            self.i += 1
        node = self.term()
        if neg:
            node = ("neg", node)
        while self.cur.kind == "op" and self.cur.text in "+-":
            op = "add" if self.cur.text == "+" else "sub"
            self.i += 1
            node = (op, node, self.term())
        self.depth -= 1
        return node

    def term(self):
        node = self.factor()
        while self.cur.kind == "op" and self.cur.text == "*":
            self.i += 1
            node = ("mul", node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.cur.kind == "op" and self.cur.text == "^":
            self.i += 1
            if self.cur.kind != "int":
                raise self.error("exponent must be a nonnegative integer literal")
            node = ("pow", node, int(self.cur.text))
            self.i += 1
        return node

    def base(self):
        tok = self.cur
        if tok.kind == "int":
            self.i += 1
            return ("int", int(tok.text), tok)
        if tok.kind == "ident":
            if tok.text in KEYWORDS:
                raise self.error(f"keyword {tok.text!r} cannot be used in an expression")
            self.i += 1
            return ("var", tok.text, tok)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr()
            if not (self.cur.kind == "op" and self.cur.text == ")"):
                raise self.error("expected ')'")
            self.i += 1
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of line")
        raise self.error(f"unexpected {tok.text!r}")


def _build(node, index: dict, n: int, fs: FieldSpec) -> PolyFunc:
    kind = node[0]
    if kind == "int":
        return constant(node[1], n, fs)
    if kind == "var":
        name, tok = node[1], node[2]
        if name not in index:
            raise UndeclaredVariable(name, tok.line, tok.col)
        return coordinate(index[name] + 1, n, fs)
    if kind == "neg":
        return -_build(node[1], index, n, fs)
    if kind == "pow":
        return _build(node[1], index, n, fs) ** node[2]
    a = _build(node[1], index, n, fs)
    b = _build(node[2], index, n, fs)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    return a * b


def parse_system(text: str) -> FssSystem:
    """Parse ``.fss`` text into an FssSystem.

    Raises a ParseError subclass (with line and column) or NotPrime.
    """
    field_stmt = None
    vars_stmt = None
    updates: dict[str, tuple] = {}
    outputs: list[tuple] = []
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        toks = _tokenize(line, lineno)
        head = toks[0]
        if head.kind == "end":
            continue
        if head.kind != "ident" or head.text not in KEYWORDS:
            raise FssSyntaxError(f"expected one of {', '.join(KEYWORDS)}", lineno, head.col)
        if head.text == "field":
            if field_stmt is not None:
                raise FssSyntaxError("duplicate field statement", lineno, head.col)
            if toks[1].kind != "int":
                raise FssSyntaxError("field expects an integer modulus", lineno, toks[1].col)
            if toks[2].kind != "end":
                raise FssSyntaxError(f"unexpected {toks[2].text!r}", lineno, toks[2].col)
            field_stmt = (int(toks[1].text), toks[1])
        elif head.text == "vars":
            if vars_stmt is not None:
                raise FssSyntaxError("duplicate vars statement", lineno, head.col)
            if updates or outputs:
                raise FssSyntaxError("vars must precede updates and outputs", lineno, head.col)
            names = []
            for tok in toks[1:-1]:
                if tok.kind != "ident":
                    raise FssSyntaxError(f"expected a variable name, got {tok.text!r}", lineno, tok.col)
                if tok.text in KEYWORDS:
                    raise FssSyntaxError(f"keyword {tok.text!r} cannot name a variable", lineno, tok.col)
                if tok.text in names:
                    raise FssSyntaxError(f"variable {tok.text!r} declared twice", lineno, tok.col)
                names.append(tok.text)
            if not names:
                raise FssSyntaxError("vars needs at least one name", lineno, toks[-1].col)
            vars_stmt = names
        else:
            if vars_stmt is None:
                raise FssSyntaxError(f"{head.text} before vars", lineno, head.col)
            target = toks[1]
            if target.kind != "ident" or target.text in KEYWORDS:
                raise FssSyntaxError("expected a name", lineno, target.col)
            if not (toks[2].kind == "op" and toks[2].text == "="):
                raise FssSyntaxError("expected '='", lineno, toks[2].col)
            ep = _ExprParser(toks, 3)
            ast = ep.expr()
            if ep.cur.kind != "end":
                raise FssSyntaxError(f"unexpected {ep.cur.text!r}", lineno, ep.cur.col)
            if head.text == "update":
                if target.text not in vars_stmt:
                    raise UndeclaredVariable(target.text, lineno, target.col)
                if target.text in updates:
                    raise DuplicateUpdate(target.text, lineno, target.col)
                updates[target.text] = (ast, target)
            else:
                if any(name == target.text for name, _, _ in outputs):
                    raise FssSyntaxError(f"output {target.text!r} defined twice", lineno, target.col)
                outputs.append((target.text, ast, target))
    end_line = len(lines) + 1
    if field_stmt is None:
        raise MissingField("missing field statement", end_line, 1)
    if vars_stmt is None:
        raise FssSyntaxError("missing vars statement", end_line, 1)
    try:
        fs = FieldSpec(field_stmt[0])
    except NotPrime as exc:
        exc.line, exc.col = field_stmt[1].line, field_stmt[1].col
        raise
    for name in vars_stmt:
        if name not in updates:
            raise MissingUpdate(name, end_line, 1)
    index = {name: i for i, name in enumerate(vars_stmt)}
    n = len(vars_stmt)
    return FssSystem(
        field=fs,
        vars=tuple(vars_stmt),
        updates=tuple(_build(updates[name][0], index, n, fs) for name in vars_stmt),
        outputs=tuple(_build(ast, index, n, fs) for _, ast, _ in outputs),
        output_names=tuple(name for name, _, _ in outputs),
    )


def render_system(sys: FssSystem) -> str:
    lines = [f"field {sys.p}", "vars " + " ".join(sys.vars)]
    for name, f in zip(sys.vars, sys.updates):
        lines.append(f"update {name} = {render_poly(f, sys.vars)}")
    for name, g in zip(sys.output_names, sys.outputs):
        lines.append(f"output {name} = {render_poly(g, sys.vars)}")
    return "\n".join(lines) + "\n"


def load_system(path) -> FssSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


def example_path(name: str):
    """Path of a bundled system file, e.g. ``example_path("obs3")``."""
    from importlib.resources import files

    return files("ffkoopman") / "systems" / f"{name}.fss"


def load_example(name: str) -> FssSystem:
    return parse_system(example_path(name).read_text(encoding="utf-8"))
