"""Token value universe and canonical orderings.

Values are a closed union: int, real, string, bool, enum literal, and pair
(a 2-tuple of values). Python bool subclasses int, so every numeric branch
here excludes bool explicitly; bools are their own kind.

An EnumLiteral compares equal to its bare spelling so that declared-literal
constants in expressions interoperate with plain-string tokens. Ints and
reals compare numerically (1 == 1.0). Equality is otherwise structural.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class EnumLiteral:
    set_name: str
    literal: str


Value = Union[int, float, str, bool, EnumLiteral, tuple]


def is_number(v: object) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def is_value(v: object) -> bool:
    if isinstance(v, (int, float, str, bool, EnumLiteral)):
        return True
    if isinstance(v, tuple) and len(v) == 2:
        return is_value(v[0]) and is_value(v[1])
    return False


def values_equal(a: Value, b: Value) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if is_number(a) and is_number(b):
        return a == b
    if isinstance(a, EnumLiteral) and isinstance(b, EnumLiteral):
        return a == b
    if isinstance(a, EnumLiteral) and isinstance(b, str):
        return a.literal == b
    if isinstance(a, str) and isinstance(b, EnumLiteral):
        return a == b.literal
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, tuple) and isinstance(b, tuple):
        return (
            len(a) == len(b)
            and values_equal(a[0], b[0])
            and values_equal(a[1], b[1])
        )
    return False


def sort_key(v: Value) -> tuple:
    """Total order across all value kinds, used for canonical token order.

    Values that compare equal via values_equal sort adjacently: int/real by
    numeric value, enum literals alongside their spelling.
    """
    if isinstance(v, bool):
        return (0, v)
    if isinstance(v, int):
        return (1, v, 0)
    if isinstance(v, float):
        return (1, v, 1)
    if isinstance(v, str):
        return (2, v, 0, "")
    if isinstance(v, EnumLiteral):
        return (2, v.literal, 1, v.set_name)
    if isinstance(v, tuple):
        return (3, sort_key(v[0]), sort_key(v[1]))
    raise TypeError(f"not a token value: {type(v).__name__}")


def encode_value(v: Value) -> bytes:
    """Injective, self-delimiting byte encoding (feeds state keys)."""
    if isinstance(v, bool):
        return b"b1" if v else b"b0"
    if isinstance(v, int):
        return b"i%d;" % v
    if isinstance(v, float):
        return b"r" + repr(v).encode("ascii") + b";"
    if isinstance(v, str):
        raw = v.encode("utf-8")
        return b"s%d:" % len(raw) + raw
    if isinstance(v, EnumLiteral):
        s = v.set_name.encode("utf-8")
        l = v.literal.encode("utf-8")
        return b"e%d:" % len(s) + s + b"%d:" % len(l) + l
    if isinstance(v, tuple):
        return b"p" + encode_value(v[0]) + encode_value(v[1])
    raise TypeError(f"not a token value: {type(v).__name__}")


def value_to_json(v: Value) -> object:
    if isinstance(v, EnumLiteral):
        return {"enum": v.set_name, "lit": v.literal}
    if isinstance(v, tuple):
        return [value_to_json(v[0]), value_to_json(v[1])]
    return v


def value_from_json(obj: object) -> Value:
    if isinstance(obj, list):
        if len(obj) != 2:
            raise ValueError(f"pair values need exactly 2 components, got {len(obj)}")
        return (value_from_json(obj[0]), value_from_json(obj[1]))
    if isinstance(obj, dict):
        if set(obj) == {"enum", "lit"} and isinstance(obj["enum"], str) and isinstance(obj["lit"], str):
            return EnumLiteral(obj["enum"], obj["lit"])
        raise ValueError("objects are not token values (except {enum, lit})")
    if isinstance(obj, (bool, int, float, str)):
        return obj
    raise ValueError(f"not a token value: {type(obj).__name__}")


def normalize_value(v: Value) -> Value:
    """Collapse enum literals to their spelling (token storage form)."""
    if isinstance(v, EnumLiteral):
        return v.literal
    if isinstance(v, tuple):
        return (normalize_value(v[0]), normalize_value(v[1]))
    return v


def format_real(x: float) -> str:
    """repr, patched so the text reparses as a REAL (decimal point kept)."""
    text = repr(x)
    if "." not in text:
        if "e" in text or "E" in text:
            mant, _, exp = text.partition("e" if "e" in text else "E")
            text = f"{mant}.0e{exp}"
        else:
            text = text + ".0"
    return text


def format_value(v: Value) -> str:
    """Expression-syntax rendering of a value."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_real(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        escaped = escaped.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
        return f'"{escaped}"'
    if isinstance(v, EnumLiteral):
        return v.literal
    if isinstance(v, tuple):
        return f"({format_value(v[0])}, {format_value(v[1])})"
    raise TypeError(f"not a token value: {type(v).__name__}")
