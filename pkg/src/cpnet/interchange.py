"""Canonical JSON interchange, expression pretty-printing, DOT rendering.

Documents are versioned dicts (formatVersion 1). Expressions travel as DSL
source strings. Exports are canonical: schema key order, declaration order
for places/transitions/arcs, tokens sorted by (value encoding, timestamp),
default-valued optional keys omitted. import(export(x)) is the identity up
to that canonicalization, and canonical form is a fixpoint.
"""

from __future__ import annotations

import json
from typing import Optional, Union

from .colorsets import ColorSetRegistry, declaration_text, parse_colorset_definitions
from .errors import CpnError, CpnSyntaxError, SchemaError, ValidationFailed
from .expr import (
    ArcInscription,
    Binary,
    Call,
    Expr,
    FunctionDef,
    Lit,
    Pair,
    Unary,
    Var,
    parse_arc_inscription,
    parse_expression,
    parse_function_definitions,
)
from .hierarchy import (
    FusionSet,
    Hcpn,
    Module,
    SubstitutionTransition,
    flatten,
    validate_hcpn,
)
from .net import Arc, Marking, Net, Place, Token, Transition, validate_net
from .values import encode_value, format_value, value_from_json, value_to_json

FORMAT_VERSION = 1
HIERARCHY_KEYS = ("subModules", "substitutions", "fusionSets")


# --- expression pretty-printing ---

_LEVEL = {
    "or": 1,
    "and": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "mod": 5,
}
_UNARY_LEVEL = 6
_ATOM_LEVEL = 7


def _pp(e: Expr) -> tuple[int, str]:
    if isinstance(e, Lit):
        return _ATOM_LEVEL, format_value(e.value)
    if isinstance(e, Var):
        return _ATOM_LEVEL, e.name
    if isinstance(e, Call):
        args = ", ".join(_pp(a)[1] for a in e.args)
        return _ATOM_LEVEL, f"{e.func}({args})"
    if isinstance(e, Pair):
        return _ATOM_LEVEL, f"({_pp(e.first)[1]}, {_pp(e.second)[1]})"
    if isinstance(e, Unary):
        lvl, text = _pp(e.operand)
        if lvl < _UNARY_LEVEL:
            text = f"({text})"
        return _UNARY_LEVEL, (f"-{text}" if e.op == "-" else f"not {text}")
    if isinstance(e, Binary):
        lvl = _LEVEL[e.op]
        # Comparisons are non-associative, so an operand comparison needs
        # parentheses on either side; the other operators associate left.
        left_need = lvl + 1 if lvl == 3 else lvl
        llvl, ltext = _pp(e.left)
        if llvl < left_need:
            ltext = f"({ltext})"
        rlvl, rtext = _pp(e.right)
        if rlvl < lvl + 1:
            rtext = f"({rtext})"
        return lvl, f"{ltext} {e.op} {rtext}"
    raise TypeError(f"not an expression node: {type(e).__name__}")


def pretty_print(expr: Expr) -> str:
    """Minimal-parentheses text that reparses to a structurally equal AST."""
    return _pp(expr)[1]


def inscription_text(insc: ArcInscription) -> str:
    text = pretty_print(insc.body)
    if insc.delay is not None:
        text += f" @+{pretty_print(insc.delay)}"
    return text


def function_text(name: str, fn: FunctionDef) -> str:
    params = ", ".join(fn.params)
    return f"fun {name}({params}) = {pretty_print(fn.body)};"


# --- JSON import ---


def _require(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise SchemaError(message, path)


def _str_list(obj: object, path: str) -> list[str]:
    _require(isinstance(obj, list), "expected a list", path)
    for i, entry in enumerate(obj):
        _require(isinstance(entry, str), "expected a string", f"{path}[{i}]")
    return obj


def _parse_entries(entries: list[str], parse, path: str):
    """Parse newline-joined declaration entries; on failure, replay prefixes
    to attribute the error to the first offending entry."""
    try:
        return parse("\n".join(entries))
    except CpnError as e:
        for i in range(len(entries)):
            try:
                parse("\n".join(entries[: i + 1]))
            except CpnError as inner:
                raise SchemaError(str(inner), f"{path}[{i}]", inner) from inner
        raise SchemaError(str(e), path, e) from e


def _int_field(obj: dict, key: str, path: str, default: int, minimum: int = 0) -> int:
    raw = obj.get(key, default)
    _require(isinstance(raw, int) and not isinstance(raw, bool), "expected an integer", f"{path}.{key}")
    _require(raw >= minimum, f"must be >= {minimum}", f"{path}.{key}")
    return raw


def _parse_places(raw: object, path: str) -> list[Place]:
    _require(isinstance(raw, list), "expected a list", path)
    places = []
    for i, entry in enumerate(raw):
        p = f"{path}[{i}]"
        _require(isinstance(entry, dict), "expected an object", p)
        _require(isinstance(entry.get("name"), str), "missing string 'name'", p)
        _require(isinstance(entry.get("colorSet"), str), "missing string 'colorSet'", p)
        places.append(Place(entry["name"], entry["colorSet"]))
    return places


def _parse_transitions(raw: object, path: str) -> list[Transition]:
    _require(isinstance(raw, list), "expected a list", path)
    transitions = []
    for i, entry in enumerate(raw):
        p = f"{path}[{i}]"
        _require(isinstance(entry, dict), "expected an object", p)
        _require(isinstance(entry.get("name"), str), "missing string 'name'", p)
        variables = entry.get("variables", [])
        _str_list(variables, f"{p}.variables")
        guard_raw = entry.get("guard")
        guard: Optional[Expr] = None
        if guard_raw is not None:
            _require(isinstance(guard_raw, str), "expected a string or null", f"{p}.guard")
            try:
                guard = parse_expression(guard_raw)
            except CpnError as e:
                raise SchemaError(str(e), f"{p}.guard", e) from e
        delay = _int_field(entry, "transitionDelay", p, 0)
        transitions.append(Transition(entry["name"], tuple(variables), guard, delay))
    return transitions


def _parse_arcs(raw: object, path: str) -> list[Arc]:
    _require(isinstance(raw, list), "expected a list", path)
    arcs = []
    for i, entry in enumerate(raw):
        p = f"{path}[{i}]"
        _require(isinstance(entry, dict), "expected an object", p)
        for key in ("source", "target", "inscription"):
            _require(isinstance(entry.get(key), str), f"missing string {key!r}", p)
        try:
            insc = parse_arc_inscription(entry["inscription"])
        except CpnError as e:
            raise SchemaError(str(e), f"{p}.inscription", e) from e
        arcs.append(Arc(entry["source"], entry["target"], insc))
    return arcs


def _parse_token_list(raw: object, path: str) -> list[Token]:
    _require(isinstance(raw, list), "expected a list", path)
    tokens = []
    for i, entry in enumerate(raw):
        p = f"{path}[{i}]"
        _require(isinstance(entry, dict), "expected an object", p)
        _require("value" in entry, "missing 'value'", p)
        try:
            value = value_from_json(entry["value"])
        except ValueError as e:
            raise SchemaError(str(e), f"{p}.value") from e
        ts = _int_field(entry, "timestamp", p, 0)
        tokens.append(Token(value, ts))
    return tokens


def _parse_token_map(raw: object, path: str) -> dict[str, list[Token]]:
    _require(isinstance(raw, dict), "expected an object", path)
    return {
        place: _parse_token_list(entries, f"{path}.{place}")
        for place, entries in raw.items()
    }


def _fill_marking(marking: Marking, token_map: dict[str, list[Token]], path: str) -> None:
    known = set(marking.place_names())
    for place, tokens in token_map.items():
        _require(place in known, f"unknown place {place!r}", f"{path}.{place}")
        for i, tok in enumerate(tokens):
            try:
                marking.add_token(place, tok.value, tok.timestamp)
            except (CpnError, ValueError) as e:
                cause = e if isinstance(e, CpnError) else None
                raise SchemaError(str(e), f"{path}.{place}[{i}]", cause) from e


def _parse_module(entry: object, registry: ColorSetRegistry, path: str) -> Module:
    _require(isinstance(entry, dict), "expected an object", path)
    _require(isinstance(entry.get("name"), str), "missing string 'name'", path)
    places = _parse_places(entry.get("places", []), f"{path}.places")
    transitions = _parse_transitions(entry.get("transitions", []), f"{path}.transitions")
    arcs = _parse_arcs(entry.get("arcs", []), f"{path}.arcs")
    ports = []
    raw_ports = entry.get("ports", [])
    _require(isinstance(raw_ports, list), "expected a list", f"{path}.ports")
    for i, port in enumerate(raw_ports):
        p = f"{path}.ports[{i}]"
        _require(isinstance(port, dict), "expected an object", p)
        _require(isinstance(port.get("place"), str), "missing string 'place'", p)
        _require(port.get("mode") in ("in", "out", "inout"), "mode must be in|out|inout", p)
        ports.append((port["place"], port["mode"]))
    token_map = _parse_token_map(entry.get("initialTokens", {}), f"{path}.initialTokens")
    timed = {p.name: p.color_set in registry and registry.get(p.color_set).timed for p in places}
    initial: list[tuple[str, Token]] = []
    for place, tokens in token_map.items():
        _require(place in timed, f"unknown place {place!r}", f"{path}.initialTokens.{place}")
        for i, tok in enumerate(tokens):
            _require(
                tok.timestamp == 0 or timed[place],
                f"timestamp on untimed place {place!r}",
                f"{path}.initialTokens.{place}[{i}].timestamp",
            )
            initial.append((place, tok))
    return Module(
        entry["name"],
        tuple(places),
        tuple(transitions),
        tuple(arcs),
        tuple(ports),
        tuple(initial),
    )


def import_json(document: object) -> tuple[Union[Net, Hcpn], Marking, dict[str, FunctionDef]]:
    """Load and fully validate a document.

    Returns (net_or_hcpn, marking, functions). For hierarchical documents
    the marking is the flattened initial marking (its .net is the flat net).
    Raises SchemaError with a JSON path, or ValidationFailed.
    """
    _require(isinstance(document, dict), "document must be an object", "")
    version = document.get("formatVersion")
    _require(version == FORMAT_VERSION, f"unsupported formatVersion {version!r}", "formatVersion")
    for key in ("colorSets", "places", "transitions", "arcs", "initialMarking"):
        _require(key in document, f"missing required key {key!r}", key)

    registry = _parse_entries(
        _str_list(document["colorSets"], "colorSets"), parse_colorset_definitions, "colorSets"
    )
    functions = _parse_entries(
        _str_list(document.get("functions", []), "functions"),
        parse_function_definitions,
        "functions",
    )
    places = _parse_places(document["places"], "places")
    transitions = _parse_transitions(document["transitions"], "transitions")
    arcs = _parse_arcs(document["arcs"], "arcs")

    im = document["initialMarking"]
    _require(isinstance(im, dict), "expected an object", "initialMarking")
    clock = _int_field(im, "globalClock", "initialMarking", 0)
    token_map = _parse_token_map(im.get("tokens", {}), "initialMarking.tokens")

    hierarchical = any(key in document for key in HIERARCHY_KEYS)
    if not hierarchical:
        net = Net(registry, places, transitions, arcs, functions)
        violations = validate_net(net)
        if violations:
            raise ValidationFailed(violations)
        marking = Marking(net, clock)
        _fill_marking(marking, token_map, "initialMarking.tokens")
        return net, marking, functions

    root_initial: list[tuple[str, Token]] = []
    timed = {p.name: p.color_set in registry and registry.get(p.color_set).timed for p in places}
    for place, tokens in token_map.items():
        _require(place in timed, f"unknown place {place!r}", f"initialMarking.tokens.{place}")
        for i, tok in enumerate(tokens):
            _require(
                tok.timestamp == 0 or timed[place],
                f"timestamp on untimed place {place!r}",
                f"initialMarking.tokens.{place}[{i}].timestamp",
            )
            root_initial.append((place, tok))
    root = Module(
        "root", tuple(places), tuple(transitions), tuple(arcs), (), tuple(root_initial)
    )
    modules = [root]
    raw_subs = document.get("subModules", [])
    _require(isinstance(raw_subs, list), "expected a list", "subModules")
    for i, entry in enumerate(raw_subs):
        modules.append(_parse_module(entry, registry, f"subModules[{i}]"))

    substitutions = []
    raw_substitutions = document.get("substitutions", [])
    _require(isinstance(raw_substitutions, list), "expected a list", "substitutions")
    for i, entry in enumerate(raw_substitutions):
        p = f"substitutions[{i}]"
        _require(isinstance(entry, dict), "expected an object", p)
        for key in ("name", "parent", "child"):
            _require(isinstance(entry.get(key), str), f"missing string {key!r}", p)
        sockets_raw = entry.get("sockets", {})
        _require(isinstance(sockets_raw, dict), "expected an object", f"{p}.sockets")
        for socket, port in sockets_raw.items():
            _require(isinstance(port, str), "expected a string", f"{p}.sockets.{socket}")
        substitutions.append(
            SubstitutionTransition(
                entry["name"], entry["parent"], entry["child"], tuple(sockets_raw.items())
            )
        )

    fusion_sets = []
    raw_fusions = document.get("fusionSets", [])
    _require(isinstance(raw_fusions, list), "expected a list", "fusionSets")
    for i, entry in enumerate(raw_fusions):
        p = f"fusionSets[{i}]"
        _require(isinstance(entry, dict), "expected an object", p)
        _require(isinstance(entry.get("name"), str), "missing string 'name'", p)
        members_raw = entry.get("members", [])
        _require(isinstance(members_raw, list), "expected a list", f"{p}.members")
        members = []
        for j, member in enumerate(members_raw):
            mp = f"{p}.members[{j}]"
            _require(isinstance(member, dict), "expected an object", mp)
            _require(isinstance(member.get("module"), str), "missing string 'module'", mp)
            _require(isinstance(member.get("place"), str), "missing string 'place'", mp)
            members.append((member["module"], member["place"]))
        fusion_sets.append(FusionSet(entry["name"], tuple(members)))

    hcpn = Hcpn(registry, tuple(modules), "root", tuple(substitutions), tuple(fusion_sets), functions)
    violations = validate_hcpn(hcpn)
    if violations:
        raise ValidationFailed(violations)
    flat = flatten(hcpn)
    flat.marking.global_clock = clock
    return hcpn, flat.marking, functions


# --- JSON export ---


def _token_json(tok: Token) -> dict:
    return {"value": value_to_json(tok.value), "timestamp": tok.timestamp}


def _tokens_json(tokens: list[Token]) -> list[dict]:
    ordered = sorted(tokens, key=lambda t: (encode_value(t.value), t.timestamp))
    return [_token_json(t) for t in ordered]


def _places_json(places: tuple[Place, ...]) -> list[dict]:
    return [{"name": p.name, "colorSet": p.color_set} for p in places]


def _transitions_json(transitions: tuple[Transition, ...]) -> list[dict]:
    return [
        {
            "name": t.name,
            "variables": list(t.variables),
            "guard": None if t.guard is None else pretty_print(t.guard),
            "transitionDelay": t.transition_delay,
        }
        for t in transitions
    ]


def _arcs_json(arcs: tuple[Arc, ...]) -> list[dict]:
    return [
        {"source": a.source, "target": a.target, "inscription": inscription_text(a.inscription)}
        for a in arcs
    ]


def _initial_marking_json(clock: int, token_map: dict[str, list[Token]]) -> dict:
    out: dict = {}
    if clock != 0:
        out["globalClock"] = clock
    tokens = {
        place: _tokens_json(toks) for place, toks in token_map.items() if toks
    }
    if tokens:
        out["tokens"] = tokens
    return out


def export_json(
    obj: Union[Net, Hcpn],
    marking: Optional[Marking] = None,
    functions: Optional[dict[str, FunctionDef]] = None,
) -> dict:
    """Canonical document for a flat net (plus marking) or a hierarchy."""
    fns = functions if functions is not None else obj.functions
    doc: dict = {"formatVersion": FORMAT_VERSION}
    doc["colorSets"] = [declaration_text(cs) for cs in obj.registry]
    if fns:
        doc["functions"] = [function_text(name, fn) for name, fn in fns.items()]

    if isinstance(obj, Net):
        doc["places"] = _places_json(obj.places)
        doc["transitions"] = _transitions_json(obj.transitions)
        doc["arcs"] = _arcs_json(obj.arcs)
        token_map = {}
        clock = 0
        if marking is not None:
            clock = marking.global_clock
            token_map = {p.name: list(marking.tokens(p.name)) for p in obj.places}
        doc["initialMarking"] = _initial_marking_json(clock, token_map)
        return doc

    root = obj.module(obj.root)
    doc["places"] = _places_json(root.places)
    doc["transitions"] = _transitions_json(root.transitions)
    doc["arcs"] = _arcs_json(root.arcs)
    root_tokens: dict[str, list[Token]] = {}
    for place, tok in root.initial_tokens:
        root_tokens.setdefault(place, []).append(tok)
    clock = marking.global_clock if marking is not None else 0
    doc["initialMarking"] = _initial_marking_json(clock, root_tokens)
    sub_modules = []
    for m in obj.modules:
        if m.name == obj.root:
            continue
        entry: dict = {
            "name": m.name,
            "places": _places_json(m.places),
            "transitions": _transitions_json(m.transitions),
            "arcs": _arcs_json(m.arcs),
        }
        if m.ports:
            entry["ports"] = [{"place": p, "mode": mode} for p, mode in m.ports]
        tokens: dict[str, list[Token]] = {}
        for place, tok in m.initial_tokens:
            tokens.setdefault(place, []).append(tok)
        token_json = {place: _tokens_json(toks) for place, toks in tokens.items() if toks}
        if token_json:
            entry["initialTokens"] = token_json
        sub_modules.append(entry)
    doc["subModules"] = sub_modules
    doc["substitutions"] = [
        {
            "name": s.name,
            "parent": s.parent,
            "child": s.child,
            "sockets": {socket: port for socket, port in s.sockets},
        }
        for s in obj.substitutions
    ]
    doc["fusionSets"] = [
        {
            "name": fs.name,
            "members": [{"module": m, "place": p} for m, p in fs.members],
        }
        for fs in obj.fusion_sets
    ]
    return doc


def document_text(document: dict) -> str:
    """Stable textual form of a document (what files and exports contain)."""
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


# --- DOT rendering ---


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _token_text(tok: Token, timed: bool) -> str:
    base = format_value(tok.value)
    return f"{base}@{tok.timestamp}" if timed else base


def _place_label(place: Place, net: Net, marking: Optional[Marking]) -> str:
    label = f"{place.name} : {place.color_set}"
    if marking is not None:
        toks = marking.tokens(place.name)
        if toks:
            timed = net.is_timed_place(place.name)
            label += "\n" + ", ".join(_token_text(t, timed) for t in toks)
    return label


def _transition_label(t: Transition) -> str:
    label = t.name
    if t.guard is not None:
        label += f"\n[{pretty_print(t.guard)}]"
    if t.transition_delay:
        label += f"\ndelay={t.transition_delay}"
    return label


def _render_flat(net: Net, marking: Optional[Marking]) -> str:
    lines = ["digraph CPN {", "  rankdir=LR;"]
    if marking is not None:
        lines.append(f'  label="clock: {marking.global_clock}";')
        lines.append("  labelloc=t;")
    for place in net.places:
        label = _dot_escape(_place_label(place, net, marking))
        lines.append(f'  "{_dot_escape(place.name)}" [shape=ellipse, label="{label}"];')
    for t in net.transitions:
        label = _dot_escape(_transition_label(t))
        lines.append(f'  "{_dot_escape(t.name)}" [shape=box, label="{label}"];')
    for a in net.arcs:
        label = _dot_escape(inscription_text(a.inscription))
        lines.append(
            f'  "{_dot_escape(a.source)}" -> "{_dot_escape(a.target)}" [label="{label}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _render_hierarchy(h: Hcpn) -> str:
    lines = ["digraph HCPN {", "  rankdir=LR;", "  compound=true;"]
    anchor: dict[str, str] = {}
    subs_by_parent: dict[str, list[SubstitutionTransition]] = {}
    for s in h.substitutions:
        subs_by_parent.setdefault(s.parent, []).append(s)
    for m in h.modules:
        lines.append(f'  subgraph "cluster_{_dot_escape(m.name)}" {{')
        lines.append(f'    label="{_dot_escape(m.name)}";')
        port_modes = dict(m.ports)
        for p in m.places:
            node = f"{m.name}::{p.name}"
            anchor.setdefault(m.name, node)
            shape = "ellipse"
            extra = ", peripheries=2" if p.name in port_modes else ""
            label = _dot_escape(f"{p.name} : {p.color_set}")
            lines.append(f'    "{_dot_escape(node)}" [shape={shape}, label="{label}"{extra}];')
        for t in m.transitions:
            node = f"{m.name}::{t.name}"
            anchor.setdefault(m.name, node)
            label = _dot_escape(_transition_label(t))
            lines.append(f'    "{_dot_escape(node)}" [shape=box, label="{label}"];')
        for s in subs_by_parent.get(m.name, ()):
            node = f"{m.name}::{s.name}"
            anchor.setdefault(m.name, node)
            label = _dot_escape(f"{s.name} : {s.child}")
            lines.append(f'    "{_dot_escape(node)}" [shape=box, style=dashed, label="{label}"];')
        for a in m.arcs:
            src = f"{m.name}::{a.source}"
            tgt = f"{m.name}::{a.target}"
            label = _dot_escape(inscription_text(a.inscription))
            lines.append(
                f'    "{_dot_escape(src)}" -> "{_dot_escape(tgt)}" [label="{label}"];'
            )
        lines.append("  }")
    for s in h.substitutions:
        node = f"{s.parent}::{s.name}"
        for socket, port in s.sockets:
            socket_node = f"{s.parent}::{socket}"
            lines.append(
                f'  "{_dot_escape(socket_node)}" -> "{_dot_escape(node)}" [style=dashed, dir=none, label="{_dot_escape(port)}"];'
            )
        target = anchor.get(s.child)
        if target is not None:
            lines.append(
                f'  "{_dot_escape(node)}" -> "{_dot_escape(target)}" [style=dashed, lhead="cluster_{_dot_escape(s.child)}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_dot(obj: Union[Net, Hcpn], marking: Optional[Marking] = None) -> str:
    """Deterministic DOT text; marking decorates flat nets only."""
    if isinstance(obj, Net):
        return _render_flat(obj, marking)
    return _render_hierarchy(obj)
