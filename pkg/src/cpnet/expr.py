"""Inscription expression language: parsing, evaluation, pattern matching.

The language is a small closed grammar over ints, reals, strings, booleans,
enum literals, and pairs. There is no attribute access, indexing, lambda, or
any other host-language escape hatch; the only callables are functions
declared via ``fun NAME(params) = body;``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional, Union

from ._lex import Tok, err, tokenize
from .errors import (
    ArityMismatch,
    CpnSyntaxError,
    DelaySyntaxError,
    DivisionByZero,
    DuplicateFunction,
    NotAPattern,
    RecursionLimitExceeded,
    TypeErrorAtRuntime,
    UnboundVariable,
    UnknownFunction,
)
from .values import Value, is_number, values_equal

MAX_CALL_DEPTH = 1000

# Each DSL call level costs a couple of interpreter frames; make sure the
# depth limit above is reachable before Python's own recursion guard.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * MAX_CALL_DEPTH + 1000))

# Words that can never be variable or function names.
RESERVED = frozenset({"and", "or", "not", "mod", "true", "false"})


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '-' | 'not'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # 'or' 'and' '==' '!=' '<' '<=' '>' '>=' '+' '-' '*' '/' 'mod'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pair:
    first: "Expr"
    second: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Lit, Var, Unary, Binary, Pair, Call]


@dataclass(frozen=True)
class ArcInscription:
    """Arc expression plus optional '@+delay' annotation."""

    body: Expr
    delay: Optional[Expr] = None


@dataclass(frozen=True)
class FunctionDef:
    params: tuple[str, ...]
    body: Expr


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0

    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at_sym(self, *texts: str) -> bool:
        return self.cur.kind == "sym" and self.cur.text in texts

    def at_word(self, *words: str) -> bool:
        return self.cur.kind == "ident" and self.cur.text in words

    def expect_sym(self, text: str) -> Tok:
        if not self.at_sym(text):
            raise self.fail(f"expected {text!r}")
        return self.advance()

    def expect_ident(self) -> Tok:
        if self.cur.kind != "ident":
            raise self.fail("expected identifier")
        return self.advance()

    def fail(self, message: str) -> CpnSyntaxError:
        t = self.cur
        got = "end of input" if t.kind == "eof" else repr(t.text)
        return err(self.src, t.pos, f"{message}, got {got}")

    # --- expression grammar, lowest precedence first ---

    def expression(self) -> Expr:
        e = self.and_expr()
        while self.at_word("or"):
            self.advance()
            e = Binary("or", e, self.and_expr())
        return e

    def and_expr(self) -> Expr:
        e = self.cmp_expr()
        while self.at_word("and"):
            self.advance()
            e = Binary("and", e, self.cmp_expr())
        return e

    def cmp_expr(self) -> Expr:
        e = self.add_expr()
        if self.at_sym("==", "!=", "<", "<=", ">", ">="):
            op = self.advance().text
            return Binary(op, e, self.add_expr())
        return e

    def add_expr(self) -> Expr:
        e = self.mul_expr()
        while self.at_sym("+", "-"):
            op = self.advance().text
            e = Binary(op, e, self.mul_expr())
        return e

    def mul_expr(self) -> Expr:
        e = self.unary_expr()
        while self.at_sym("*", "/") or self.at_word("mod"):
            op = self.advance().text
            e = Binary(op, e, self.unary_expr())
        return e

    def unary_expr(self) -> Expr:
        if self.at_sym("-"):
            self.advance()
            operand = self.unary_expr()
            # Fold '-LITERAL' into a negative literal so printed negative
            # numbers reparse to the same tree.
            if isinstance(operand, Lit) and is_number(operand.value):
                return Lit(-operand.value)
            return Unary("-", operand)
        if self.at_word("not"):
            self.advance()
            return Unary("not", self.unary_expr())
        return self.atom()

    def atom(self) -> Expr:
        t = self.cur
        if t.kind in ("int", "real", "string"):
            self.advance()
            return Lit(t.value)
        if t.kind == "ident":
            if t.text == "true":
                self.advance()
                return Lit(True)
            if t.text == "false":
                self.advance()
                return Lit(False)
            if t.text in RESERVED:
                raise self.fail("expected expression")
            self.advance()
            if self.at_sym("("):
                self.advance()
                args: list[Expr] = []
                if not self.at_sym(")"):
                    args.append(self.expression())
                    while self.at_sym(","):
                        self.advance()
                        args.append(self.expression())
                self.expect_sym(")")
                return Call(t.text, tuple(args))
            return Var(t.text)
        if self.at_sym("("):
            self.advance()
            e = self.expression()
            if self.at_sym(","):
                self.advance()
                second = self.expression()
                self.expect_sym(")")
                return Pair(e, second)
            self.expect_sym(")")
            return e
        raise self.fail("expected expression")


def parse_expression(text: str) -> Expr:
    """Parse a complete expression; trailing input is a syntax error."""
    p = _Parser(text)
    if p.cur.kind == "eof":
        raise p.fail("empty expression")
    e = p.expression()
    if p.cur.kind != "eof":
        raise p.fail("unexpected trailing input")
    return e


def parse_arc_inscription(text: str) -> ArcInscription:
    """Parse ``expr`` or ``expr @+ delayexpr``."""
    p = _Parser(text)
    if p.cur.kind == "eof":
        raise p.fail("empty inscription")
    body = p.expression()
    delay: Optional[Expr] = None
    if p.at_sym("@+"):
        at_tok = p.advance()
        if p.cur.kind == "eof":
            raise DelaySyntaxError("expected delay expression after '@+'", at_tok.pos)
        delay = p.expression()
    if p.cur.kind != "eof":
        raise p.fail("unexpected trailing input")
    return ArcInscription(body, delay)


def parse_function_definitions(text: str) -> dict[str, FunctionDef]:
    """Parse zero or more ``fun NAME(p1, p2) = body;`` declarations.

    Later definitions may call earlier ones (and themselves, recursively).
    Duplicate names and duplicate parameters are syntax errors.
    """
    p = _Parser(text)
    table: dict[str, FunctionDef] = {}
    while p.cur.kind != "eof":
        if not p.at_word("fun"):
            raise p.fail("expected 'fun'")
        p.advance()
        name_tok = p.expect_ident()
        name = name_tok.text
        if name in RESERVED:
            raise err(p.src, name_tok.pos, f"reserved word {name!r} cannot name a function")
        if name in table:
            raise DuplicateFunction(f"duplicate function {name!r}")
        p.expect_sym("(")
        params: list[str] = []
        if not p.at_sym(")"):
            while True:
                param_tok = p.expect_ident()
                if param_tok.text in RESERVED:
                    raise err(p.src, param_tok.pos, f"reserved word {param_tok.text!r} cannot be a parameter")
                if param_tok.text in params:
                    raise err(p.src, param_tok.pos, f"duplicate parameter {param_tok.text!r}")
                params.append(param_tok.text)
                if not p.at_sym(","):
                    break
                p.advance()
        p.expect_sym(")")
        p.expect_sym("=")
        body = p.expression()
        p.expect_sym(";")
        table[name] = FunctionDef(tuple(params), body)
    return table


def free_variables(expr: Expr) -> frozenset[str]:
    """Variable names occurring in ``expr``. Function bodies are closed over
    their parameters, so a Call contributes only its argument variables."""
    out: set[str] = set()
    stack: list[Expr] = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, Var):
            out.add(e.name)
        elif isinstance(e, Unary):
            stack.append(e.operand)
        elif isinstance(e, Binary):
            stack.append(e.left)
            stack.append(e.right)
        elif isinstance(e, Pair):
            stack.append(e.first)
            stack.append(e.second)
        elif isinstance(e, Call):
            stack.extend(e.args)
    return frozenset(out)


def _require_number(v: Value, op: str) -> None:
    if not is_number(v):
        raise TypeErrorAtRuntime(f"operator {op!r} requires numbers, got {type(v).__name__}")


def _require_bool(v: Value, op: str) -> None:
    if not isinstance(v, bool):
        raise TypeErrorAtRuntime(f"operator {op!r} requires booleans, got {type(v).__name__}")


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise DivisionByZero("integer division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q  # truncate toward zero


def _arith(op: str, a: Value, b: Value) -> Value:
    _require_number(a, op)
    _require_number(b, op)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if isinstance(a, int) and isinstance(b, int):
            return _int_div(a, b)
        if b == 0:
            raise DivisionByZero("division by zero")
        return a / b
    if op == "mod":
        if not (isinstance(a, int) and isinstance(b, int)):
            raise TypeErrorAtRuntime("operator 'mod' requires integers")
        if b == 0:
            raise DivisionByZero("mod by zero")
        return a - _int_div(a, b) * b  # sign follows the dividend
    raise AssertionError(op)


def _compare(op: str, a: Value, b: Value) -> bool:
    if is_number(a) and is_number(b):
        pass
    elif isinstance(a, str) and isinstance(b, str):
        pass
    else:
        raise TypeErrorAtRuntime(f"operator {op!r} requires two numbers or two strings")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def evaluate(
    expr: Expr,
    env: dict[str, Value],
    functions: Optional[dict[str, FunctionDef]] = None,
    _depth: int = 0,
) -> Value:
    """Evaluate ``expr`` with variables from ``env``.

    Evaluation is strict: both operands of and/or are evaluated. Function
    bodies see only their parameters. Call nesting deeper than
    MAX_CALL_DEPTH raises RecursionLimitExceeded.
    """
    fns = functions or {}
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in env:
            raise UnboundVariable(f"unbound variable {expr.name!r}")
        return env[expr.name]
    if isinstance(expr, Unary):
        v = evaluate(expr.operand, env, fns, _depth)
        if expr.op == "-":
            _require_number(v, "-")
            return -v
        _require_bool(v, "not")
        return not v
    if isinstance(expr, Binary):
        a = evaluate(expr.left, env, fns, _depth)
        b = evaluate(expr.right, env, fns, _depth)
        op = expr.op
        if op in ("and", "or"):
            _require_bool(a, op)
            _require_bool(b, op)
            return (a and b) if op == "and" else (a or b)
        if op == "==":
            return values_equal(a, b)
        if op == "!=":
            return not values_equal(a, b)
        if op in ("<", "<=", ">", ">="):
            return _compare(op, a, b)
        return _arith(op, a, b)
    if isinstance(expr, Pair):
        return (
            evaluate(expr.first, env, fns, _depth),
            evaluate(expr.second, env, fns, _depth),
        )
    if isinstance(expr, Call):
        if expr.func not in fns:
            raise UnknownFunction(f"unknown function {expr.func!r}")
        fn = fns[expr.func]
        if len(expr.args) != len(fn.params):
            raise ArityMismatch(
                f"function {expr.func!r} expects {len(fn.params)} argument(s), got {len(expr.args)}"
            )
        if _depth + 1 > MAX_CALL_DEPTH:
            raise RecursionLimitExceeded(f"call depth exceeded {MAX_CALL_DEPTH}")
        args = [evaluate(a, env, fns, _depth) for a in expr.args]
        call_env = dict(zip(fn.params, args))
        return evaluate(fn.body, call_env, fns, _depth + 1)
    raise AssertionError(type(expr))


def is_pattern(expr: Expr) -> bool:
    """Patterns are variables, literals, and pairs of patterns."""
    if isinstance(expr, (Var, Lit)):
        return True
    if isinstance(expr, Pair):
        return is_pattern(expr.first) and is_pattern(expr.second)
    return False


def match_pattern(
    expr: Expr, value: Value, partial: Optional[dict[str, Value]] = None
) -> Optional[dict[str, Value]]:
    """Unify a pattern with a concrete value.

    Returns the extended binding (a new dict; ``partial`` is not mutated) or
    None on mismatch. A variable bound in ``partial`` must match its existing
    value. Raises NotAPattern for non-pattern expressions.
    """
    if not is_pattern(expr):
        raise NotAPattern("expression is not a pattern")
    bound = dict(partial) if partial else {}
    if _match(expr, value, bound):
        return bound
    return None


def _match(expr: Expr, value: Value, bound: dict[str, Value]) -> bool:
    if isinstance(expr, Var):
        if expr.name in bound:
            return values_equal(bound[expr.name], value)
        bound[expr.name] = value
        return True
    if isinstance(expr, Lit):
        return values_equal(expr.value, value)
    if isinstance(expr, Pair):
        if not (isinstance(value, tuple) and len(value) == 2):
            return False
        return _match(expr.first, value[0], bound) and _match(expr.second, value[1], bound)
    raise AssertionError(type(expr))
