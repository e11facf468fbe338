"""Structural bridge to the CPN Tools XML format.

Import maps pages, places, transitions, and arcs into the JSON document
schema. Inscriptions are kept verbatim when they parse in the expression
DSL; anything else is replaced by a neutral placeholder and recorded in an
issue list ({"path", "reason"}). The returned document always imports
cleanly. Export produces a minimal one-page stub on a fixed layout grid;
declarations that have no XML equivalent are emitted as comments.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

from .colorsets import is_member, parse_colorset_definitions
from .errors import CpnError, HierarchyUnsupportedInStub, XmlParseError
from .expr import (
    Call,
    Expr,
    Lit,
    Var,
    evaluate,
    free_variables,
    is_pattern,
    parse_arc_inscription,
    parse_expression,
)
from .interchange import HIERARCHY_KEYS, import_json, pretty_print
from .values import format_value, value_from_json

_GRID_X = 150
_GRID_Y = 100


def _has_call(expr: Expr) -> bool:
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, Call):
            return True
        for attr in ("operand", "left", "right", "first", "second"):
            child = getattr(e, attr, None)
            if child is not None:
                stack.append(child)
    return False


@dataclass
class _Issues:
    entries: list[dict] = field(default_factory=list)

    def add(self, path: str, reason: str) -> None:
        self.entries.append({"path": path, "reason": reason})


class _Names:
    """Unique, collision-free element names."""

    def __init__(self):
        self.used: set[str] = set()

    def claim(self, raw: Optional[str], fallback: str, path: str, issues: _Issues) -> str:
        name = (raw or "").strip()
        if not name:
            name = fallback
            issues.add(path, f"missing name; generated {name!r}")
        candidate = name
        n = 2
        while candidate in self.used:
            candidate = f"{name}_{n}"
            n += 1
        if candidate != name:
            issues.add(path, f"duplicate name {name!r} renamed to {candidate!r}")
        self.used.add(candidate)
        return candidate


def _sanitize_colorset(raw: str) -> str:
    name = re.sub(r"[^A-Za-z0-9_]", "_", raw.strip())
    if not name:
        name = "CS"
    if name[0].isdigit():
        name = "_" + name
    return name


class _FreshVars:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.counter = 0

    def next(self) -> str:
        while True:
            self.counter += 1
            name = f"v{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


@dataclass
class _ArcDraft:
    source: str
    target: str
    to_transition: bool
    text: str
    path: str
    body: Optional[Expr] = None
    delay: Optional[Expr] = None
    keep_verbatim: bool = False


def _parse_initmark(text: str, path: str, issues: _Issues) -> list:
    """Best-effort multiset text: parts joined by '++', each optionally
    'count`value'. Returns evaluated values (repeated per count)."""
    values = []
    for part in text.split("++"):
        part = part.strip()
        if not part:
            continue
        count = 1
        body = part
        if "`" in part:
            head, body = part.split("`", 1)
            try:
                count = int(head.strip())
            except ValueError:
                issues.add(path, f"untranslated multiset count in {part!r}; skipped")
                continue
            if count < 0:
                issues.add(path, f"negative multiset count in {part!r}; skipped")
                continue
        try:
            insc = parse_arc_inscription(body)
            if insc.delay is not None:
                raise CpnError(f"timestamp annotation in initial marking {part!r}")
            value = evaluate(insc.body, {}, {})
        except CpnError:
            issues.add(path, f"untranslated initial marking term {part!r}; skipped")
            continue
        values.extend([value] * count)
    return values


def import_cpn_xml(xml_text: str) -> tuple[dict, list[dict]]:
    """Translate CPN Tools XML into a clean document plus an issue list.

    Only the page/place/trans/arc structure is read. Color set names come
    from place type labels and are declared as plain int sets. Expressions
    that fail to parse, call functions, or use variables no input pattern
    can bind are degraded to placeholders, one issue per degradation.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise XmlParseError(str(e)) from e

    issues = _Issues()
    names = _Names()
    pages = list(root.iter("page"))
    containers = [(f"page[{i}]", page) for i, page in enumerate(pages)]
    if not containers:
        containers = [("", root)]

    known_kinds = {"place", "trans", "arc", "pageattr", "text", "group"}
    for prefix, container in containers:
        if container is not root:
            for child in container:
                if child.tag not in known_kinds:
                    issues.add(
                        f"{prefix}/{child.tag}" if prefix else child.tag,
                        f"unsupported node kind {child.tag!r} skipped",
                    )

    def sub(prefix: str, rest: str) -> str:
        return f"{prefix}/{rest}" if prefix else rest

    # Places: name, color set name, initial marking text.
    places = []
    colorset_names: dict[str, str] = {}
    id_to_name: dict[str, str] = {}
    place_names: set[str] = set()
    initmarks: list[tuple[str, str, str]] = []
    for prefix, container in containers:
        for j, elem in enumerate(container.iter("place")):
            path = sub(prefix, f"place[{j}]")
            name = names.claim(elem.findtext("text"), f"place_{len(places)}", path, issues)
            place_names.add(name)
            raw_cs = (elem.findtext("type/text") or "").strip()
            if not raw_cs:
                raw_cs = "INT"
                issues.add(sub(path, "type"), "missing color set name; defaulted to INT")
            cs = _sanitize_colorset(raw_cs)
            if cs != raw_cs:
                issues.add(sub(path, "type"), f"color set name {raw_cs!r} renamed to {cs!r}")
            colorset_names.setdefault(cs, sub(path, "type"))
            places.append({"name": name, "colorSet": cs})
            if elem.get("id"):
                id_to_name[elem.get("id")] = name
            mark_text = (elem.findtext("initmark/text") or "").strip()
            if mark_text:
                initmarks.append((name, mark_text, sub(path, "initmark")))

    # Transitions: name, guard text, time inscription.
    transitions = []
    guards: dict[str, tuple[str, str]] = {}
    transition_names: set[str] = set()
    for prefix, container in containers:
        for j, elem in enumerate(container.iter("trans")):
            path = sub(prefix, f"trans[{j}]")
            name = names.claim(elem.findtext("text"), f"trans_{len(transitions)}", path, issues)
            transition_names.add(name)
            if elem.get("id"):
                id_to_name[elem.get("id")] = name
            delay = 0
            time_text = (elem.findtext("time/text") or "").strip()
            if time_text:
                m = re.fullmatch(r"@\+\s*(\d+)", time_text)
                if m:
                    delay = int(m.group(1))
                else:
                    issues.add(sub(path, "time"), f"untranslated time inscription {time_text!r}")
            guard_text = (elem.findtext("cond/text") or "").strip()
            if guard_text.startswith("[") and guard_text.endswith("]"):
                guard_text = guard_text[1:-1].strip()
            if guard_text:
                guards[name] = (guard_text, sub(path, "cond"))
            transitions.append({"name": name, "transitionDelay": delay})

    # Arcs: orientation decides direction; BOTHDIR becomes two arcs.
    drafts: list[_ArcDraft] = []
    for prefix, container in containers:
        for j, elem in enumerate(container.iter("arc")):
            path = sub(prefix, f"arc[{j}]")
            place_ref = elem.find("placeend")
            trans_ref = elem.find("transend")
            place = id_to_name.get(place_ref.get("idref")) if place_ref is not None else None
            trans = id_to_name.get(trans_ref.get("idref")) if trans_ref is not None else None
            if place not in place_names or trans not in transition_names:
                issues.add(path, "unresolved arc endpoint; arc skipped")
                continue
            text = (elem.findtext("annot/text") or "").strip()
            orientation = elem.get("orientation")
            if orientation not in ("PtoT", "TtoP", "BOTHDIR"):
                issues.add(path, f"missing or unknown orientation {orientation!r}; assumed PtoT")
                orientation = "PtoT"
            if orientation in ("PtoT", "BOTHDIR"):
                drafts.append(_ArcDraft(place, trans, True, text, sub(path, "annot")))
            if orientation in ("TtoP", "BOTHDIR"):
                drafts.append(_ArcDraft(trans, place, False, text, sub(path, "annot")))
            if orientation == "BOTHDIR":
                issues.add(path, "bidirectional arc split into two arcs")

    # Parse what parses; degrade the rest per transition so that every
    # variable is bindable and no unknown function is called.
    for d in drafts:
        if d.text:
            try:
                insc = parse_arc_inscription(d.text)
                d.body, d.delay = insc.body, insc.delay
                d.keep_verbatim = True
            except CpnError:
                pass

    taken = set()
    for d in drafts:
        if d.body is not None:
            taken |= free_variables(d.body)
            if d.delay is not None:
                taken |= free_variables(d.delay)
    fresh = _FreshVars(taken)

    doc_arcs = []
    final_guards: dict[str, str] = {}
    variables: dict[str, set[str]] = {t["name"]: set() for t in transitions}
    by_transition: dict[str, list[_ArcDraft]] = {t["name"]: [] for t in transitions}
    for d in drafts:
        by_transition[d.target if d.to_transition else d.source].append(d)

    place_colorset = {p["name"]: p["colorSet"] for p in places}

    for t in transitions:
        tname = t["name"]
        mine = by_transition[tname]
        inputs = [d for d in mine if d.to_transition]
        outputs = [d for d in mine if not d.to_transition]

        for d in inputs:
            if d.body is None:
                d.body = Var(fresh.next())
                d.keep_verbatim = False
                issues.add(d.path, f"untranslated inscription {d.text!r}; replaced by fresh variable")
            if d.delay is not None:
                d.delay = None
                d.keep_verbatim = False
                issues.add(d.path, "delay on an input arc dropped")

        bindable: set[str] = set()
        for d in inputs:
            if is_pattern(d.body):
                bindable |= free_variables(d.body)
        for d in inputs:
            if is_pattern(d.body):
                continue
            if _has_call(d.body) or not free_variables(d.body) <= bindable:
                d.body = Var(fresh.next())
                d.keep_verbatim = False
                bindable |= free_variables(d.body)
                issues.add(d.path, f"unbindable inscription {d.text!r}; replaced by fresh variable")

        if tname in guards:
            text, path = guards[tname]
            guard_expr = None
            try:
                guard_expr = parse_expression(text)
            except CpnError:
                issues.add(path, f"untranslated guard {text!r}; guard dropped")
            if guard_expr is not None:
                if _has_call(guard_expr) or not free_variables(guard_expr) <= bindable:
                    issues.add(path, f"guard {text!r} uses unavailable names; guard dropped")
                else:
                    final_guards[tname] = text

        def placeholder() -> Expr:
            # All synthesized color sets are int, so 0 is always a member.
            return Var(sorted(bindable)[0]) if bindable else Lit(0)

        for d in outputs:
            reason = None
            if d.body is None:
                reason = f"untranslated inscription {d.text!r}"
            elif _has_call(d.body) or not free_variables(d.body) <= bindable:
                reason = f"unbindable inscription {d.text!r}"
            if reason is not None:
                d.body = placeholder()
                d.delay = None
                d.keep_verbatim = False
                issues.add(d.path, f"{reason}; replaced by placeholder")
            elif d.delay is not None and (_has_call(d.delay) or not free_variables(d.delay) <= bindable):
                d.delay = None
                d.keep_verbatim = False
                issues.add(d.path, "unbindable delay expression dropped")

        used: set[str] = set()
        if tname in final_guards:
            used |= free_variables(parse_expression(final_guards[tname]))
        for d in mine:
            used |= free_variables(d.body)
            if d.delay is not None:
                used |= free_variables(d.delay)
        variables[tname] = used

    for d in drafts:
        if d.keep_verbatim:
            text = d.text
        else:
            text = pretty_print(d.body)
            if d.delay is not None:
                text += f" @+{pretty_print(d.delay)}"
        doc_arcs.append({"source": d.source, "target": d.target, "inscription": text})

    color_sets = [f"colset {name} = int;" for name in colorset_names]
    for name, path in colorset_names.items():
        issues.add(path, f"color set {name!r} declaration not translated; defaulted to int")
    registry = parse_colorset_definitions("\n".join(color_sets)) if color_sets else None

    tokens: dict[str, list[dict]] = {}
    for place, text, path in initmarks:
        for value in _parse_initmark(text, path, issues):
            if registry is None or not is_member(registry, place_colorset[place], value):
                issues.add(path, f"initial token {format_value(value)} does not fit {place_colorset[place]}; skipped")
                continue
            if isinstance(value, float):
                value = int(value)
            tokens.setdefault(place, []).append({"value": value, "timestamp": 0})

    document = {
        "formatVersion": 1,
        "colorSets": color_sets,
        "places": places,
        "transitions": [
            {
                "name": t["name"],
                "variables": sorted(variables[t["name"]]),
                "guard": final_guards.get(t["name"]),
                "transitionDelay": t["transitionDelay"],
            }
            for t in transitions
        ],
        "arcs": doc_arcs,
        "initialMarking": {"globalClock": 0, "tokens": tokens},
    }
    import_json(document)
    return document, issues.entries


# --- stub export ---


def _initmark_text(tokens: list[dict]) -> str:
    return " ++ ".join(format_value(value_from_json(t["value"])) for t in tokens)


def export_cpn_xml_stub(document: dict) -> str:
    """One-page CPN Tools XML skeleton on a fixed grid.

    Declarations become comments (no SML is generated) and timestamps are
    dropped; the output preserves structural element counts, nothing more.
    """
    if any(key in document for key in HIERARCHY_KEYS):
        raise HierarchyUnsupportedInStub("hierarchical documents cannot be exported as a stub")
    import_json(document)

    root = ET.Element("workspaceElements")
    cpnet = ET.SubElement(root, "cpnet")
    globbox = ET.SubElement(cpnet, "globbox")
    for decl in document.get("colorSets", []):
        globbox.append(ET.Comment(f" {decl} "))
    for decl in document.get("functions", []):
        globbox.append(ET.Comment(f" {decl} "))
    page = ET.SubElement(cpnet, "page", id="page1")
    ET.SubElement(page, "pageattr", name="Page1")

    ids: dict[str, str] = {}
    counter = 0

    def next_id(name: str) -> str:
        nonlocal counter
        counter += 1
        ids[name] = f"n{counter}"
        return ids[name]

    token_map = document.get("initialMarking", {}).get("tokens", {})
    for i, p in enumerate(document["places"]):
        elem = ET.SubElement(page, "place", id=next_id(p["name"]))
        ET.SubElement(elem, "posattr", x="0", y=str(i * _GRID_Y))
        ET.SubElement(elem, "text").text = p["name"]
        type_elem = ET.SubElement(elem, "type")
        ET.SubElement(type_elem, "text").text = p["colorSet"]
        tokens = token_map.get(p["name"], [])
        if tokens:
            mark = ET.SubElement(elem, "initmark")
            ET.SubElement(mark, "text").text = _initmark_text(tokens)

    for i, t in enumerate(document["transitions"]):
        elem = ET.SubElement(page, "trans", id=next_id(t["name"]))
        ET.SubElement(elem, "posattr", x=str(_GRID_X), y=str(i * _GRID_Y))
        ET.SubElement(elem, "text").text = t["name"]
        guard = t.get("guard")
        if guard:
            cond = ET.SubElement(elem, "cond")
            ET.SubElement(cond, "text").text = f"[{guard}]"
        delay = t.get("transitionDelay", 0)
        if delay:
            time_elem = ET.SubElement(elem, "time")
            ET.SubElement(time_elem, "text").text = f"@+{delay}"

    transition_names = {t["name"] for t in document["transitions"]}
    for i, a in enumerate(document["arcs"]):
        to_transition = a["target"] in transition_names
        orientation = "PtoT" if to_transition else "TtoP"
        elem = ET.SubElement(page, "arc", id=f"a{i + 1}", orientation=orientation)
        place, trans = (a["source"], a["target"]) if to_transition else (a["target"], a["source"])
        ET.SubElement(elem, "transend", idref=ids[trans])
        ET.SubElement(elem, "placeend", idref=ids[place])
        annot = ET.SubElement(elem, "annot")
        ET.SubElement(annot, "text").text = a["inscription"]

    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
