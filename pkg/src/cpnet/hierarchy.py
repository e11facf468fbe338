"""Hierarchical nets: substitution transitions, fusion sets, flattening.

A substitution transition is not an executable transition; it stands for one
fresh instance of a child module, wired through a socket-to-port bijection.
Flattening macro-expands the hierarchy into a flat Net:

- child elements are renamed "<instancePath>::<localName>", the instance
  path being the chain of substitution-transition names from the root;
- each socket place replaces its mapped port copy;
- all members of a fusion set collapse into one place named after the set,
  holding the multiset union of the members' initial tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .colorsets import ColorSetRegistry
from .errors import ValidationFailed
from .expr import FunctionDef
from .net import Arc, Marking, Net, Place, Token, Transition, validate_net

MODES = ("in", "out", "inout")
SEPARATOR = "::"


@dataclass(frozen=True)
class Module:
    name: str
    places: tuple[Place, ...] = ()
    transitions: tuple[Transition, ...] = ()
    arcs: tuple[Arc, ...] = ()
    ports: tuple[tuple[str, str], ...] = ()  # (place name, mode)
    initial_tokens: tuple[tuple[str, Token], ...] = ()  # (place name, token)


@dataclass(frozen=True)
class SubstitutionTransition:
    name: str
    parent: str
    child: str
    sockets: tuple[tuple[str, str], ...]  # (parent place, child port)


@dataclass(frozen=True)
class FusionSet:
    name: str
    members: tuple[tuple[str, str], ...]  # (module name, place name)


@dataclass(frozen=True)
class Hcpn:
    registry: ColorSetRegistry
    modules: tuple[Module, ...]  # root first by convention
    root: str
    substitutions: tuple[SubstitutionTransition, ...] = ()
    fusion_sets: tuple[FusionSet, ...] = ()
    functions: dict[str, FunctionDef] = field(default_factory=dict)

    def module(self, name: str) -> Module:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)


@dataclass
class NameMap:
    """Traceability between flat names and (instance path, local name).
    A fused place maps back to its first declared member."""

    to_local: dict[str, tuple[str, str]] = field(default_factory=dict)
    to_flat: dict[tuple[str, str], str] = field(default_factory=dict)

    def record(self, flat: str, path: str, local: str) -> None:
        self.to_local.setdefault(flat, (path, local))
        self.to_flat[(path, local)] = flat


@dataclass
class FlattenResult:
    net: Net
    marking: Marking
    name_map: NameMap


def validate_hcpn(h: Hcpn) -> list[str]:
    """Structural report; empty means flatten may proceed."""
    violations: list[str] = []
    names = [m.name for m in h.modules]
    seen: set[str] = set()
    for n in names:
        if n in seen:
            violations.append(f"DuplicateName: module {n!r} declared twice")
        seen.add(n)
    if h.root not in seen:
        violations.append(f"DanglingReference: root module {h.root!r} is not defined")
        return violations
    by_name = {m.name: m for m in h.modules}

    for m in h.modules:
        fragment = Net(h.registry, list(m.places), list(m.transitions), list(m.arcs), h.functions)
        for v in validate_net(fragment):
            violations.append(f"[module {m.name}] {v}")
        place_names = {p.name for p in m.places}
        for p in m.places:
            if SEPARATOR in p.name:
                violations.append(
                    f"ReservedSeparator: place {p.name!r} in module {m.name!r} contains '::'"
                )
        for t in m.transitions:
            if SEPARATOR in t.name:
                violations.append(
                    f"ReservedSeparator: transition {t.name!r} in module {m.name!r} contains '::'"
                )
        port_seen: set[str] = set()
        for pname, mode in m.ports:
            if pname in port_seen:
                violations.append(f"DuplicateName: port {pname!r} in module {m.name!r}")
            port_seen.add(pname)
            if pname not in place_names:
                violations.append(
                    f"DanglingReference: port {pname!r} missing from module {m.name!r}"
                )
                continue
            if mode not in MODES:
                violations.append(f"InvalidMode: port {pname!r} has mode {mode!r}")
                continue
            consumed = any(a.source == pname for a in m.arcs)
            produced = any(a.target == pname for a in m.arcs)
            if mode == "in" and produced:
                violations.append(
                    f"PortModeMismatch: 'in' port {pname!r} of module {m.name!r} receives tokens from its own module"
                )
            if mode == "out" and consumed:
                violations.append(
                    f"PortModeMismatch: 'out' port {pname!r} of module {m.name!r} is consumed inside its own module"
                )

    # Instantiation graph must be acyclic and references resolvable.
    sub_names_per_parent: dict[str, set[str]] = {}
    children: dict[str, set[str]] = {n: set() for n in by_name}
    for s in h.substitutions:
        if s.parent not in by_name:
            violations.append(f"DanglingReference: substitution {s.name!r} has unknown parent {s.parent!r}")
            continue
        if s.child not in by_name:
            violations.append(f"DanglingReference: substitution {s.name!r} has unknown child {s.child!r}")
            continue
        per_parent = sub_names_per_parent.setdefault(s.parent, set())
        if s.name in per_parent:
            violations.append(
                f"DuplicateName: substitution {s.name!r} appears twice in module {s.parent!r}"
            )
        per_parent.add(s.name)
        children[s.parent].add(s.child)
        parent, child = by_name[s.parent], by_name[s.child]
        parent_places = {p.name: p for p in parent.places}
        child_places = {p.name: p for p in child.places}
        port_modes = dict(child.ports)
        mapped_ports = [port for _, port in s.sockets]
        sockets_seen: set[str] = set()
        for socket, port in s.sockets:
            if socket in sockets_seen:
                violations.append(
                    f"NotABijection: socket {socket!r} mapped twice by substitution {s.name!r}"
                )
            sockets_seen.add(socket)
            if socket not in parent_places:
                violations.append(
                    f"DanglingReference: socket {socket!r} of substitution {s.name!r} missing from {s.parent!r}"
                )
                continue
            if port not in port_modes:
                violations.append(
                    f"DanglingReference: port {port!r} of substitution {s.name!r} is not a port of {s.child!r}"
                )
                continue
            if parent_places[socket].color_set != child_places[port].color_set:
                violations.append(
                    f"SocketColorMismatch: {socket!r} ({parent_places[socket].color_set}) vs port {port!r} ({child_places[port].color_set}) in substitution {s.name!r}"
                )
        if len(set(mapped_ports)) != len(mapped_ports):
            violations.append(f"NotABijection: substitution {s.name!r} maps one port twice")
        unmapped = [p for p, _ in child.ports if p not in set(mapped_ports)]
        for p in unmapped:
            violations.append(
                f"NotABijection: port {p!r} of {s.child!r} is not mapped by substitution {s.name!r}"
            )

    state: dict[str, int] = {}  # 0 visiting, 1 done

    def dfs(node: str, trail: tuple[str, ...]) -> None:
        if state.get(node) == 1:
            return
        if state.get(node) == 0:
            violations.append(
                f"CyclicInstantiation: {' -> '.join(trail + (node,))}"
            )
            return
        state[node] = 0
        for c in sorted(children.get(node, ())):
            dfs(c, trail + (node,))
        state[node] = 1

    dfs(h.root, ())

    fused_places: set[tuple[str, str]] = set()
    port_places = {
        (m.name, pname) for m in h.modules for pname, _ in m.ports
    }
    for fs in h.fusion_sets:
        if len(fs.members) < 2:
            violations.append(f"FusionTooSmall: fusion set {fs.name!r} needs at least 2 members")
        color: Optional[str] = None
        for module_name, place_name in fs.members:
            if module_name not in by_name:
                violations.append(
                    f"DanglingReference: fusion set {fs.name!r} references unknown module {module_name!r}"
                )
                continue
            member_places = {p.name: p for p in by_name[module_name].places}
            if place_name not in member_places:
                violations.append(
                    f"DanglingReference: fusion set {fs.name!r} references unknown place {module_name!r}.{place_name!r}"
                )
                continue
            if (module_name, place_name) in fused_places:
                violations.append(
                    f"FusionOverlap: place {module_name!r}.{place_name!r} belongs to more than one fusion set"
                )
            fused_places.add((module_name, place_name))
            if (module_name, place_name) in port_places:
                violations.append(
                    f"PortFusionConflict: port {module_name!r}.{place_name!r} may not join fusion set {fs.name!r}"
                )
            cs = member_places[place_name].color_set
            if color is None:
                color = cs
            elif cs != color:
                violations.append(
                    f"FusionColorMismatch: fusion set {fs.name!r} mixes {color!r} and {cs!r}"
                )
    return violations


def flatten(h: Hcpn) -> FlattenResult:
    """Macro-expand the hierarchy into one flat net plus its initial
    marking; raises ValidationFailed when validate_hcpn reports anything."""
    violations = validate_hcpn(h)
    if violations:
        raise ValidationFailed(violations)

    by_name = {m.name: m for m in h.modules}
    fusion_of: dict[tuple[str, str], str] = {}
    fusion_color: dict[str, str] = {}
    for fs in h.fusion_sets:
        for module_name, place_name in fs.members:
            fusion_of[(module_name, place_name)] = fs.name
            fusion_color[fs.name] = next(
                p.color_set for p in by_name[module_name].places if p.name == place_name
            )

    places: list[Place] = []
    place_set: set[str] = set()
    transitions: list[Transition] = []
    arcs: list[Arc] = []
    initial: list[tuple[str, Token]] = []
    name_map = NameMap()
    subs_by_parent: dict[str, list[SubstitutionTransition]] = {}
    for s in h.substitutions:
        subs_by_parent.setdefault(s.parent, []).append(s)

    def add_place(flat: str, color_set: str, path: str, local: str) -> None:
        if flat not in place_set:
            place_set.add(flat)
            places.append(Place(flat, color_set))
        name_map.record(flat, path, local)

    def instantiate(module: Module, path: str, socket_map: dict[str, str]) -> None:
        prefix = path + SEPARATOR if path else ""

        def resolve_place(local: str) -> str:
            if local in socket_map:
                return socket_map[local]
            if (module.name, local) in fusion_of:
                return fusion_of[(module.name, local)]
            return prefix + local

        for p in module.places:
            flat = resolve_place(p.name)
            if p.name in socket_map:
                # Socket replaces the port copy; the parent already added it.
                name_map.record(flat, path, p.name)
                continue
            color = fusion_color.get(flat, p.color_set)
            add_place(flat, color, path, p.name)
        for t in module.transitions:
            flat = prefix + t.name
            transitions.append(
                Transition(flat, t.variables, t.guard, t.transition_delay)
            )
            name_map.record(flat, path, t.name)
        trans_names = {t.name for t in module.transitions}
        for a in module.arcs:
            src = prefix + a.source if a.source in trans_names else resolve_place(a.source)
            tgt = prefix + a.target if a.target in trans_names else resolve_place(a.target)
            arcs.append(Arc(src, tgt, a.inscription))
        for local, tok in module.initial_tokens:
            initial.append((resolve_place(local), tok))
        for s in subs_by_parent.get(module.name, ()):
            child = by_name[s.child]
            child_path = prefix + s.name
            child_sockets = {
                port: resolve_place(socket) for socket, port in s.sockets
            }
            instantiate(child, child_path, child_sockets)

    instantiate(by_name[h.root], "", {})

    net = Net(h.registry, places, transitions, arcs, h.functions)
    flat_violations = validate_net(net)
    if flat_violations:
        raise ValidationFailed(flat_violations)
    marking = Marking(net)
    for place, tok in initial:
        marking.add_token(place, tok.value, tok.timestamp)
    return FlattenResult(net, marking, name_map)
