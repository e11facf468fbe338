"""Shared tokenizer for the declaration and expression grammars.

Whitespace-insensitive; ``//`` comments run to end of line. Strings use
double quotes with backslash escapes. REAL tokens require a decimal point.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CpnSyntaxError

# Longest symbols first so '==' wins over '='.
_SYMBOLS = ("@+", "==", "!=", "<=", ">=", "(", ")", ",", ";", "=", "<", ">", "+", "-", "*", "/", "|")

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


@dataclass(frozen=True)
class Tok:
    kind: str  # int | real | string | ident | sym | eof
    text: str
    value: object
    pos: int


def _line_col(src: str, pos: int) -> tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col


def err(src: str, pos: int, message: str) -> CpnSyntaxError:
    line, col = _line_col(src, pos)
    return CpnSyntaxError(message, pos, line, col)


def tokenize(src: str) -> list[Tok]:
    toks: list[Tok] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "/" and src.startswith("//", i):
            nl = src.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        start = i
        if c.isdigit():
            while i < n and src[i].isdigit():
                i += 1
            is_real = False
            if i + 1 < n and src[i] == "." and src[i + 1].isdigit():
                is_real = True
                i += 1
                while i < n and src[i].isdigit():
                    i += 1
            if is_real and i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    i = j
                    while i < n and src[i].isdigit():
                        i += 1
            text = src[start:i]
            if is_real:
                toks.append(Tok("real", text, float(text), start))
            else:
                toks.append(Tok("int", text, int(text), start))
            continue
        if c.isalpha() or c == "_":
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            text = src[start:i]
            toks.append(Tok("ident", text, text, start))
            continue
        if c == '"':
            i += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise err(src, start, "unterminated string literal")
                ch = src[i]
                if ch == '"':
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n or src[i + 1] not in _ESCAPES:
                        raise err(src, i, "invalid escape sequence")
                    parts.append(_ESCAPES[src[i + 1]])
                    i += 2
                    continue
                parts.append(ch)
                i += 1
            toks.append(Tok("string", src[start:i], "".join(parts), start))
            continue
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Tok("sym", sym, sym, i))
                i += len(sym)
                break
        else:
            raise err(src, i, f"unexpected character {c!r}")
    toks.append(Tok("eof", "", None, n))
    return toks
