"""Value universe: equality, ordering, encoding, formatting."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpnet import parse_expression
from cpnet.expr import Lit
from cpnet.values import (
    EnumLiteral,
    encode_value,
    format_real,
    format_value,
    is_number,
    is_value,
    normalize_value,
    sort_key,
    value_from_json,
    value_to_json,
    values_equal,
)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (1, 1, True),
        (1, 1.0, True),
        (1, True, False),
        (True, True, True),
        (False, 0, False),
        (0.5, 0.5, True),
        ("red", "red", True),
        ("red", "blue", False),
        (EnumLiteral("COLOR", "red"), "red", True),
        ("red", EnumLiteral("COLOR", "red"), True),
        (EnumLiteral("COLOR", "red"), EnumLiteral("COLOR", "red"), True),
        (EnumLiteral("COLOR", "red"), EnumLiteral("COLOR", "blue"), False),
        ((1, 2), (1, 2), True),
        ((1, 2), (1, 3), False),
        ((1, (2, 3)), (1, (2, 3)), True),
        ((1, 2), 1, False),
        ("1", 1, False),
    ],
)
def test_values_equal(a, b, expected):
    assert values_equal(a, b) is expected


def test_is_number_excludes_bool():
    assert is_number(1) and is_number(1.5)
    assert not is_number(True) and not is_number("1")


def test_is_value_shapes():
    assert is_value((1, ("a", True)))
    assert not is_value((1, 2, 3))
    assert not is_value([1, 2])
    assert not is_value(None)


def test_normalize_collapses_enum_literals():
    assert normalize_value(EnumLiteral("COLOR", "red")) == "red"
    assert normalize_value((EnumLiteral("C", "a"), 1)) == ("a", 1)
    assert normalize_value(7) == 7


def test_sort_key_orders_kinds():
    values = [(1, 2), "b", 3, True, 0.5, False, "a", EnumLiteral("C", "a")]
    ordered = sorted(values, key=sort_key)
    assert ordered[:2] == [False, True]
    assert ordered[2:4] == [0.5, 3]
    tail = ordered[4:]
    assert tail[-1] == (1, 2)
    assert [normalize_value(v) for v in tail[:-1]] == ["a", "a", "b"]


def test_sort_key_puts_equal_int_and_real_adjacent():
    assert sorted([1.0, 2, 1, 2.0], key=sort_key) == [1, 1.0, 2, 2.0]


# --- encoding ---


def _ident(a, b) -> bool:
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_ident(x, y) for x, y in zip(a, b))
    if isinstance(a, tuple) or isinstance(b, tuple):
        return False
    if type(a) is not type(b):
        return False
    if isinstance(a, EnumLiteral):
        return a == b
    return repr(a) == repr(b)


_scalars = st.one_of(
    st.booleans(),
    st.integers(-10**9, 10**9),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=6),
    st.builds(EnumLiteral, st.text(max_size=3), st.text(max_size=3)),
)
_values = st.recursive(_scalars, lambda ch: st.tuples(ch, ch), max_leaves=4)


@given(_values, _values)
def test_encode_value_injective(a, b):
    assert (encode_value(a) == encode_value(b)) == _ident(a, b)


def test_encode_value_distinguishes_lookalikes():
    assert encode_value(1) != encode_value(True)
    assert encode_value(1) != encode_value(1.0)
    assert encode_value(1) != encode_value("1")
    assert encode_value(("a", "b")) != encode_value("ab")
    assert encode_value(("a", ("b", "c"))) != encode_value((("a", "b"), "c"))


# --- json codec ---


@pytest.mark.parametrize(
    "value, encoded",
    [
        (1, 1),
        (True, True),
        ("s", "s"),
        ((1, "a"), [1, "a"]),
        (EnumLiteral("C", "red"), {"enum": "C", "lit": "red"}),
        ((1, (2, 3)), [1, [2, 3]]),
    ],
)
def test_value_json_round_trip(value, encoded):
    assert value_to_json(value) == encoded
    assert value_from_json(encoded) == value


@pytest.mark.parametrize("bad", [[1, 2, 3], [1], {"enum": "C"}, {"x": 1}, None])
def test_value_from_json_rejects(bad):
    with pytest.raises(ValueError):
        value_from_json(bad)


# --- formatting ---


@pytest.mark.parametrize(
    "x, text",
    [
        (3.0, "3.0"),
        (0.5, "0.5"),
        (1e300, "1.0e+300"),
        (1e-08, "1.0e-08"),
        (-2.5, "-2.5"),
    ],
)
def test_format_real(x, text):
    assert format_real(x) == text


@pytest.mark.parametrize(
    "value, text",
    [
        (True, "true"),
        (False, "false"),
        (-3, "-3"),
        ("a\nb", '"a\\nb"'),
        ('say "hi"', '"say \\"hi\\""'),
        ("back\\slash", '"back\\\\slash"'),
        ((1, (2.0, "x")), '(1, (2.0, "x"))'),
        (EnumLiteral("C", "red"), "red"),
    ],
)
def test_format_value(value, text):
    assert format_value(value) == text


@given(st.one_of(st.integers(), st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=8), st.booleans()))
def test_format_value_reparses_to_same_literal(v):
    expr = parse_expression(format_value(v))
    assert isinstance(expr, Lit)
    assert _ident(expr.value, v) or repr(expr.value) == repr(v)
