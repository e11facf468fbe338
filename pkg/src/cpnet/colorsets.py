"""Color set declarations: parsing, registry, membership.

Grammar (whitespace-insensitive, ``//`` comments):
    script := decl* ;
    decl   := "colset" IDENT "=" body ("timed")? ";" ;
    body   := "int" | "real" | "string"
            | "with" IDENT ("|" IDENT)*
            | "product" IDENT "*" IDENT ;

Products reference previously declared sets only. The timed flag matters on
the set a place uses directly; a timed component inside a product is
accepted but ignored (recorded as a registry warning).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from ._lex import err, tokenize
from .errors import CpnSyntaxError, DuplicateColorSet, UnknownColorSet
from .values import EnumLiteral, Value

BASE_KINDS = ("int", "real", "string")


@dataclass(frozen=True)
class ColorSet:
    name: str
    kind: str  # 'int' | 'real' | 'string' | 'enumerated' | 'product'
    timed: bool = False
    literals: tuple[str, ...] = ()
    components: Optional[tuple[str, str]] = None


@dataclass
class ColorSetRegistry:
    """Declaration-ordered, immutable after parse."""

    sets: dict[str, ColorSet] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __contains__(self, name: str) -> bool:
        return name in self.sets

    def __iter__(self) -> Iterator[ColorSet]:
        return iter(self.sets.values())

    def __len__(self) -> int:
        return len(self.sets)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColorSetRegistry):
            return NotImplemented
        return list(self.sets.items()) == list(other.sets.items())

    def get(self, name: str) -> ColorSet:
        if name not in self.sets:
            raise UnknownColorSet(f"unknown color set {name!r}")
        return self.sets[name]

    def enum_literal_owners(self) -> dict[str, list[str]]:
        """Map each declared literal spelling to the sets declaring it."""
        owners: dict[str, list[str]] = {}
        for cs in self:
            if cs.kind == "enumerated":
                for lit in cs.literals:
                    owners.setdefault(lit, []).append(cs.name)
        return owners


def parse_colorset_definitions(text: str) -> ColorSetRegistry:
    toks = tokenize(text)
    i = 0
    registry = ColorSetRegistry()

    def cur():
        return toks[i]

    def fail(message: str) -> CpnSyntaxError:
        t = cur()
        got = "end of input" if t.kind == "eof" else repr(t.text)
        return err(text, t.pos, f"{message}, got {got}")

    def expect_ident() -> str:
        nonlocal i
        if cur().kind != "ident":
            raise fail("expected identifier")
        word = cur().text
        i += 1
        return word

    def expect_sym(sym: str) -> None:
        nonlocal i
        if not (cur().kind == "sym" and cur().text == sym):
            raise fail(f"expected {sym!r}")
        i += 1

    while cur().kind != "eof":
        if not (cur().kind == "ident" and cur().text == "colset"):
            raise fail("expected 'colset'")
        i += 1
        name = expect_ident()
        if name in registry.sets:
            raise DuplicateColorSet(f"duplicate color set {name!r}")
        expect_sym("=")
        kind_pos = cur().pos
        word = expect_ident()
        literals: tuple[str, ...] = ()
        components: Optional[tuple[str, str]] = None
        if word in BASE_KINDS:
            kind = word
        elif word == "with":
            kind = "enumerated"
            lits: list[str] = []
            seen_folded: set[str] = set()
            while True:
                lit_pos = cur().pos
                lit = expect_ident()
                if lit.lower() in seen_folded:
                    raise err(text, lit_pos, f"duplicate literal {lit!r} in color set {name!r}")
                seen_folded.add(lit.lower())
                lits.append(lit)
                if cur().kind == "sym" and cur().text == "|":
                    i += 1
                    continue
                break
            literals = tuple(lits)
        elif word == "product":
            kind = "product"
            left = expect_ident()
            expect_sym("*")
            right = expect_ident()
            for comp in (left, right):
                if comp not in registry.sets:
                    raise UnknownColorSet(
                        f"color set {name!r} references undeclared set {comp!r}"
                    )
                if registry.sets[comp].timed:
                    registry.warnings.append(
                        f"timed flag on component {comp!r} is ignored inside product {name!r}"
                    )
            components = (left, right)
        else:
            raise err(text, kind_pos, f"expected int, real, string, with, or product, got {word!r}")
        timed = False
        if cur().kind == "ident" and cur().text == "timed":
            timed = True
            i += 1
        expect_sym(";")
        registry.sets[name] = ColorSet(name, kind, timed, literals, components)
    return registry


def is_member(registry: ColorSetRegistry, set_name: str, value: Value) -> bool:
    """Structural membership; total for any value once set_name exists."""
    cs = registry.get(set_name)
    return _member(registry, cs, value)


def _member(registry: ColorSetRegistry, cs: ColorSet, value: Value) -> bool:
    if cs.kind == "int":
        if isinstance(value, bool):
            return False
        if isinstance(value, int):
            return True
        return isinstance(value, float) and value.is_integer()
    if cs.kind == "real":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if cs.kind == "string":
        return isinstance(value, str)
    if cs.kind == "enumerated":
        if isinstance(value, str):
            return value in cs.literals
        if isinstance(value, EnumLiteral):
            return value.set_name == cs.name and value.literal in cs.literals
        return False
    left, right = cs.components
    return (
        isinstance(value, tuple)
        and len(value) == 2
        and _member(registry, registry.sets[left], value[0])
        and _member(registry, registry.sets[right], value[1])
    )


def declaration_text(cs: ColorSet) -> str:
    """Canonical single-declaration source text (round-trips via parse)."""
    if cs.kind in BASE_KINDS:
        body = cs.kind
    elif cs.kind == "enumerated":
        body = "with " + " | ".join(cs.literals)
    else:
        body = f"product {cs.components[0]} * {cs.components[1]}"
    timed = " timed" if cs.timed else ""
    return f"colset {cs.name} = {body}{timed};"
