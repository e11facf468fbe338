"""Net structure, marking state, binding search, firing, and the clock.

A Net is immutable once validated. A Marking (per-place token multisets plus
the global clock) is the mutable state and is single-writer. The binding
search is a deterministic backtracking unification:

- input arcs are tried pattern-first (variable < literal < tuple pattern <
  non-pattern), declaration order breaking ties;
- candidate tokens per arc follow canonical value order, and among tokens of
  equal value the one with the smallest timestamp is consumed;
- only tokens with timestamp <= global_clock are available.

Firing never advances the clock; advance_global_clock moves it to the
smallest token timestamp strictly beyond the current value.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Iterator, Optional

from .colorsets import ColorSetRegistry, is_member
from .errors import (
    ColorMismatch,
    CpnError,
    EvaluationError,
    NegativeDelay,
    NotEnabled,
    TypeErrorAtRuntime,
)
from .expr import (
    ArcInscription,
    Binary,
    Call,
    Expr,
    FunctionDef,
    Lit,
    Pair,
    RESERVED,
    Unary,
    Var,
    evaluate,
    free_variables,
    is_pattern,
    match_pattern,
)
from .values import EnumLiteral, Value, normalize_value, sort_key, values_equal


@dataclass(frozen=True)
class Place:
    name: str
    color_set: str


@dataclass(frozen=True)
class Transition:
    name: str
    variables: tuple[str, ...] = ()
    guard: Optional[Expr] = None
    transition_delay: int = 0


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    inscription: ArcInscription


@dataclass(frozen=True)
class Token:
    value: Value
    timestamp: int = 0


@dataclass(frozen=True)
class Binding:
    """One way to enable a transition: variable values plus the exact token
    instance consumed per input arc (arcs in declaration order)."""

    env: dict[str, Value]
    consumed: tuple[tuple[Arc, Token], ...]


@dataclass(frozen=True)
class FiringRecord:
    transition: str
    env: dict[str, Value]
    consumed: tuple[tuple[str, Token], ...]  # (place, token) removed
    produced: tuple[tuple[str, Token], ...]  # (place, token) added
    clock: int


def _token_key(tok: Token) -> tuple:
    return (sort_key(tok.value), tok.timestamp)


class Net:
    """Structure only; all state lives in Markings."""

    def __init__(
        self,
        registry: ColorSetRegistry,
        places: list[Place],
        transitions: list[Transition],
        arcs: list[Arc],
        functions: Optional[dict[str, FunctionDef]] = None,
    ):
        self.registry = registry
        self.places = tuple(places)
        self.transitions = tuple(transitions)
        self.arcs = tuple(arcs)
        self.functions: dict[str, FunctionDef] = dict(functions or {})
        self.place_index: dict[str, Place] = {}
        for p in self.places:
            self.place_index.setdefault(p.name, p)
        self.transition_index: dict[str, Transition] = {}
        for t in self.transitions:
            self.transition_index.setdefault(t.name, t)
        # Bare enum literals usable as constants: spellings owned by exactly
        # one declared set. Ambiguous spellings are a validation error when
        # referenced.
        self._literal_owners = registry.enum_literal_owners()
        self.const_env: dict[str, Value] = {
            lit: EnumLiteral(owners[0], lit)
            for lit, owners in self._literal_owners.items()
            if len(owners) == 1
        }

    def place(self, name: str) -> Place:
        return self.place_index[name]

    def transition(self, name: str) -> Transition:
        return self.transition_index[name]

    def input_arcs(self, transition: Transition) -> list[Arc]:
        return [
            a
            for a in self.arcs
            if a.target == transition.name and a.source in self.place_index
        ]

    def output_arcs(self, transition: Transition) -> list[Arc]:
        return [
            a
            for a in self.arcs
            if a.source == transition.name and a.target in self.place_index
        ]

    def is_timed_place(self, name: str) -> bool:
        return self.registry.get(self.place_index[name].color_set).timed

    def has_timed_sets(self) -> bool:
        return any(
            self.registry.get(p.color_set).timed
            for p in self.places
            if p.color_set in self.registry
        )

    def initial_marking(self) -> "Marking":
        return Marking(self)


class Marking:
    """Per-place token multisets plus the global clock. Token lists are kept
    in canonical order (value order, then timestamp)."""

    def __init__(self, net: Net, global_clock: int = 0):
        self.net = net
        self.global_clock = global_clock
        self._tokens: dict[str, list[Token]] = {p.name: [] for p in net.places}

    def tokens(self, place: str) -> tuple[Token, ...]:
        return tuple(self._tokens[place])

    def place_names(self) -> list[str]:
        return [p.name for p in self.net.places]

    def add_token(self, place: str, value: Value, timestamp: int = 0) -> Token:
        p = self.net.place_index[place]
        value = normalize_value(value)
        if not is_member(self.net.registry, p.color_set, value):
            raise ColorMismatch(
                f"value {value!r} is not a member of color set {p.color_set!r} (place {place!r})"
            )
        if timestamp < 0:
            raise ValueError(f"negative timestamp {timestamp} on place {place!r}")
        if timestamp != 0 and not self.net.is_timed_place(place):
            raise ValueError(f"timestamp on untimed place {place!r}")
        tok = Token(value, timestamp)
        bisect.insort(self._tokens[place], tok, key=_token_key)
        return tok

    def set_tokens(self, place: str, values: list[Value]) -> None:
        """Replace the place content with the given values at timestamp 0."""
        self._tokens[place] = []
        for v in values:
            self.add_token(place, v)

    def remove_token(self, place: str, token: Token) -> None:
        toks = self._tokens[place]
        for i, t in enumerate(toks):
            if values_equal(t.value, token.value) and t.timestamp == token.timestamp:
                del toks[i]
                return
        raise NotEnabled(f"token {token.value!r}@{token.timestamp} not present in {place!r}")

    def copy(self) -> "Marking":
        other = Marking(self.net, self.global_clock)
        other._tokens = {name: list(toks) for name, toks in self._tokens.items()}
        return other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self.global_clock == other.global_clock and self._tokens == other._tokens

    def __repr__(self) -> str:
        parts = []
        for name in self._tokens:
            if self._tokens[name]:
                toks = ", ".join(f"{t.value!r}@{t.timestamp}" for t in self._tokens[name])
                parts.append(f"{name}: [{toks}]")
        return f"Marking(clock={self.global_clock}, {{{'; '.join(parts)}}})"


_IDENT_OK = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _walk(expr: Expr) -> Iterator[Expr]:
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, Unary):
            stack.append(e.operand)
        elif isinstance(e, Binary):
            stack.append(e.left)
            stack.append(e.right)
        elif isinstance(e, Pair):
            stack.append(e.first)
            stack.append(e.second)
        elif isinstance(e, Call):
            stack.extend(e.args)


def _check_names(
    net: Net,
    expr: Expr,
    allowed: set[str],
    where: str,
    violations: list[str],
) -> None:
    for name in sorted(free_variables(expr)):
        if name in allowed or name in net.const_env:
            continue
        if len(net._literal_owners.get(name, [])) > 1:
            sets = ", ".join(net._literal_owners[name])
            violations.append(
                f"AmbiguousEnumLiteral: {name!r} {where} is declared by multiple sets ({sets})"
            )
        else:
            violations.append(f"UndeclaredVariable: {name!r} {where}")
    for node in _walk(expr):
        if isinstance(node, Call):
            fn = net.functions.get(node.func)
            if fn is None:
                violations.append(f"UnknownFunction: {node.func!r} {where}")
            elif len(node.args) != len(fn.params):
                violations.append(
                    f"ArityMismatch: {node.func!r} {where} takes {len(fn.params)} argument(s), got {len(node.args)}"
                )


def validate_net(net: Net) -> list[str]:
    """Structural well-formedness report; empty list means valid."""
    violations: list[str] = []
    seen_places: set[str] = set()
    for p in net.places:
        if p.name in seen_places:
            violations.append(f"DuplicateName: place {p.name!r} declared twice")
        seen_places.add(p.name)
        if p.color_set not in net.registry:
            violations.append(
                f"UnknownColorSet: place {p.name!r} uses undeclared color set {p.color_set!r}"
            )
    seen_transitions: set[str] = set()
    for t in net.transitions:
        if t.name in seen_transitions:
            violations.append(f"DuplicateName: transition {t.name!r} declared twice")
        seen_transitions.add(t.name)
        if t.name in seen_places:
            violations.append(f"NameCollision: {t.name!r} names both a place and a transition")
    for fname, fn in net.functions.items():
        # Bodies are closed apart from parameters: enum-literal constants
        # are not visible inside functions, matching call-time evaluation.
        for name in sorted(free_variables(fn.body) - set(fn.params)):
            violations.append(
                f"UndeclaredVariable: {name!r} in body of function {fname!r}"
            )
        for node in _walk(fn.body):
            if isinstance(node, Call):
                target = net.functions.get(node.func)
                if target is None:
                    violations.append(f"UnknownFunction: {node.func!r} in body of function {fname!r}")
                elif len(node.args) != len(target.params):
                    violations.append(
                        f"ArityMismatch: {node.func!r} in body of function {fname!r} takes {len(target.params)} argument(s), got {len(node.args)}"
                    )
    for t in net.transitions:
        seen_vars: set[str] = set()
        for v in t.variables:
            if v in seen_vars:
                violations.append(f"DuplicateVariable: {v!r} on transition {t.name!r}")
            seen_vars.add(v)
            if not _IDENT_OK.match(v) or v in RESERVED:
                violations.append(f"InvalidName: variable {v!r} on transition {t.name!r}")
        if t.transition_delay < 0:
            violations.append(f"NegativeDelay: transition {t.name!r} has delay {t.transition_delay}")
        if t.guard is not None:
            _check_names(net, t.guard, set(t.variables), f"in guard of transition {t.name!r}", violations)
    for i, a in enumerate(net.arcs):
        src_t = a.source in net.transition_index
        tgt_t = a.target in net.transition_index
        src_known = src_t or a.source in net.place_index
        tgt_known = tgt_t or a.target in net.place_index
        if not src_known or not tgt_known:
            violations.append(
                f"DanglingArc: arc {a.source!r} -> {a.target!r} references an unknown node"
            )
            continue
        if src_t == tgt_t:
            violations.append(
                f"InvalidArc: arc {a.source!r} -> {a.target!r} must join a place and a transition"
            )
            continue
        t = net.transition_index[a.target if tgt_t else a.source]
        where = f"on arc {a.source!r} -> {a.target!r}"
        if tgt_t and a.inscription.delay is not None:
            violations.append(f"DelayOnInputArc: {where}")
        _check_names(net, a.inscription.body, set(t.variables), where, violations)
        if a.inscription.delay is not None:
            _check_names(net, a.inscription.delay, set(t.variables), f"in delay {where}", violations)
    # Every transition variable must be bound by some pattern input arc,
    # otherwise enabling would need to search an unbounded value domain.
    for t in net.transitions:
        pattern_vars: set[str] = set()
        for a in net.input_arcs(t):
            if is_pattern(a.inscription.body):
                pattern_vars |= free_variables(a.inscription.body)
        for v in t.variables:
            if v not in pattern_vars:
                violations.append(
                    f"BindingIncomplete: variable {v!r} of transition {t.name!r} is not bound by any pattern input arc"
                )
    return violations


def _eval_in(net: Net, expr: Expr, env: dict[str, Value], context: str) -> Value:
    try:
        return evaluate(expr, env, net.functions)
    except CpnError as e:
        raise EvaluationError(context, e) from e


def _pattern_rank(insc: ArcInscription) -> int:
    body = insc.body
    if isinstance(body, Var):
        return 0
    if isinstance(body, Lit):
        return 1
    if isinstance(body, Pair) and is_pattern(body):
        return 2
    return 3


def _iter_bindings(net: Net, transition: Transition, marking: Marking) -> Iterator[Binding]:
    in_arcs = net.input_arcs(transition)
    order = sorted(range(len(in_arcs)), key=lambda i: (_pattern_rank(in_arcs[i].inscription), i))
    arcs = [(i, in_arcs[i]) for i in order]
    # Constants visible to guards and inscriptions; transition variables
    # shadow same-named literals.
    seed = {k: v for k, v in net.const_env.items() if k not in transition.variables}

    avail: dict[str, list[Token]] = {}
    used: dict[str, set[int]] = {}
    for _, a in arcs:
        if a.source not in avail:
            avail[a.source] = [
                tok for tok in marking.tokens(a.source) if tok.timestamp <= marking.global_clock
            ]
            used[a.source] = set()

    def candidates(place: str) -> list[tuple[int, Token]]:
        """Distinct remaining values in canonical order; per value, the
        instance with the smallest timestamp (FIFO on ties)."""
        groups: list[tuple[int, Token]] = []
        for i, tok in enumerate(avail[place]):
            if i in used[place]:
                continue
            for g, (gi, gtok) in enumerate(groups):
                if values_equal(gtok.value, tok.value):
                    if tok.timestamp < gtok.timestamp:
                        groups[g] = (i, tok)
                    break
            else:
                groups.append((i, tok))
        return groups

    env: dict[str, Value] = {}
    consumed: list[tuple[int, Arc, Token]] = []

    def finish() -> Optional[Binding]:
        if transition.guard is not None:
            ok = _eval_in(
                net,
                transition.guard,
                {**seed, **env},
                f"in guard of transition {transition.name!r}",
            )
            if not isinstance(ok, bool):
                raise EvaluationError(
                    f"in guard of transition {transition.name!r}",
                    TypeErrorAtRuntime(f"guard returned non-boolean {ok!r}"),
                )
            if not ok:
                return None
        ordered_env = {v: env[v] for v in transition.variables}
        ordered_consumed = tuple(
            (a, tok) for _, a, tok in sorted(consumed, key=lambda c: c[0])
        )
        return Binding(ordered_env, ordered_consumed)

    def dfs(k: int) -> Iterator[Binding]:
        if k == len(arcs):
            b = finish()
            if b is not None:
                yield b
            return
        orig_idx, arc = arcs[k]
        body = arc.inscription.body
        place = arc.source
        if is_pattern(body):
            for i, tok in candidates(place):
                merged = match_pattern(body, tok.value, {**seed, **env})
                if merged is None:
                    continue
                added = [n for n in merged if n not in env and n not in seed]
                for n in added:
                    env[n] = merged[n]
                used[place].add(i)
                consumed.append((orig_idx, arc, tok))
                yield from dfs(k + 1)
                consumed.pop()
                used[place].discard(i)
                for n in added:
                    del env[n]
        else:
            want = _eval_in(
                net,
                body,
                {**seed, **env},
                f"on arc {arc.source!r} -> {arc.target!r}",
            )
            for i, tok in candidates(place):
                if not values_equal(tok.value, want):
                    continue
                used[place].add(i)
                consumed.append((orig_idx, arc, tok))
                yield from dfs(k + 1)
                consumed.pop()
                used[place].discard(i)
                break  # only the FIFO instance of the single wanted value

    yield from dfs(0)


def find_bindings(net: Net, transition: Transition, marking: Marking) -> list[Binding]:
    return list(_iter_bindings(net, transition, marking))


def is_enabled(net: Net, transition: Transition, marking: Marking) -> bool:
    for _ in _iter_bindings(net, transition, marking):
        return True
    return False


def enabled_transitions(net: Net, marking: Marking) -> list[tuple[Transition, list[Binding]]]:
    out = []
    for t in net.transitions:
        bindings = find_bindings(net, t, marking)
        if bindings:
            out.append((t, bindings))
    return out


def fire_transition(
    net: Net,
    transition: Transition,
    marking: Marking,
    binding: Optional[Binding] = None,
) -> FiringRecord:
    if binding is None:
        binding = next(_iter_bindings(net, transition, marking), None)
        if binding is None:
            raise NotEnabled(f"transition {transition.name!r} is not enabled")
    else:
        remaining = {
            place: list(marking.tokens(place))
            for place in {a.source for a, _ in binding.consumed}
        }
        for a, tok in binding.consumed:
            if tok.timestamp > marking.global_clock:
                raise NotEnabled(
                    f"token {tok.value!r}@{tok.timestamp} not yet available (clock {marking.global_clock})"
                )
            pool = remaining[a.source]
            for i, have in enumerate(pool):
                if values_equal(have.value, tok.value) and have.timestamp == tok.timestamp:
                    del pool[i]
                    break
            else:
                raise NotEnabled(
                    f"token {tok.value!r}@{tok.timestamp} not present in {a.source!r}"
                )

    clock = marking.global_clock
    seed = {k: v for k, v in net.const_env.items() if k not in transition.variables}
    env_full = {**seed, **binding.env}

    produced: list[tuple[str, Token]] = []
    for arc in net.output_arcs(transition):
        where = f"on arc {arc.source!r} -> {arc.target!r}"
        value = normalize_value(_eval_in(net, arc.inscription.body, env_full, where))
        target = net.place_index[arc.target]
        if not is_member(net.registry, target.color_set, value):
            raise ColorMismatch(
                f"produced value {value!r} is not a member of {target.color_set!r} (place {target.name!r})"
            )
        if net.is_timed_place(target.name):
            delay = 0
            if arc.inscription.delay is not None:
                delay = _eval_in(net, arc.inscription.delay, env_full, f"in delay {where}")
                if isinstance(delay, bool) or not isinstance(delay, int):
                    raise EvaluationError(
                        f"in delay {where}",
                        TypeErrorAtRuntime(f"delay must be an integer, got {delay!r}"),
                    )
                if delay < 0:
                    raise NegativeDelay(f"delay {delay} {where}")
            timestamp = clock + transition.transition_delay + delay
        else:
            timestamp = 0
        produced.append((target.name, Token(value, timestamp)))

    consumed: list[tuple[str, Token]] = []
    for a, tok in binding.consumed:
        marking.remove_token(a.source, tok)
        consumed.append((a.source, tok))
    for place, tok in produced:
        bisect.insort(marking._tokens[place], tok, key=_token_key)

    return FiringRecord(
        transition=transition.name,
        env=dict(binding.env),
        consumed=tuple(consumed),
        produced=tuple(produced),
        clock=clock,
    )


def advance_global_clock(net: Net, marking: Marking) -> int:
    """Move the clock to the earliest strictly-future token timestamp; no-op
    when every token is already available."""
    future = [
        tok.timestamp
        for place in marking.place_names()
        for tok in marking.tokens(place)
        if tok.timestamp > marking.global_clock
    ]
    if future:
        marking.global_clock = min(future)
    return marking.global_clock
