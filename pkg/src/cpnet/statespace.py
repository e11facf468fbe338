"""Reachability graph, SCC condensation, and behavioral properties.

The analyzer works on untimed nets: timestamps make the raw state space
infinite under absolute time, so timed color sets are rejected unless
strip_time is requested, which analyzes an untimed copy (timed flags
dropped, delays ignored, timestamps and clock zeroed).

State identity is a canonical byte key over per-place value multisets:
places in declaration order, token values sorted, numerically equal values
(2 vs 2.0) collapsed to one encoding. Timestamps and the clock are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .colorsets import ColorSetRegistry
from .errors import (
    HomeUndecidable,
    LimitZero,
    LivenessUndecidable,
    TimedNetUnsupported,
)
from .net import Marking, Net, enabled_transitions, fire_transition
from .values import Value, encode_value

DEFAULT_MAX_STATES = 100000
DEFAULT_MAX_EDGES = 500000


def _canon(v: Value) -> Value:
    """Collapse numerically equal representations (2.0 -> 2) so multiset
    equality and key equality coincide."""
    if isinstance(v, bool):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    if isinstance(v, tuple):
        return (_canon(v[0]), _canon(v[1]))
    return v


def state_key(net: Net, marking: Marking) -> bytes:
    parts: list[bytes] = []
    for place in net.places:
        toks = marking.tokens(place.name)
        name = place.name.encode("utf-8")
        parts.append(b"P%d:" % len(name) + name)
        parts.append(b"#%d;" % len(toks))
        for tok in toks:
            parts.append(encode_value(_canon(tok.value)))
    return b"".join(parts)


def key_to_str(key: bytes) -> str:
    return key.decode("utf-8")


@dataclass
class ReachGraph:
    nodes: dict[bytes, Marking]  # discovery (BFS) order
    edges: list[tuple[bytes, str, dict[str, Value], bytes]]
    initial: bytes
    truncated: bool


@dataclass
class SccGraph:
    components: list[frozenset[bytes]]
    component_of: dict[bytes, int]
    edges: set[tuple[int, int]]  # condensation, no self-loops
    terminal: frozenset[int]


@dataclass
class SpaceReport:
    num_states: int
    num_edges: int
    num_sccs: int
    truncated: bool
    home_markings: Optional[list[str]]
    dead_markings: list[str]
    dead_transitions: Optional[list[str]]
    live_transitions: Optional[list[str]]
    impartial_transitions: Optional[list[str]]
    place_bounds: dict[str, tuple[int, int]]

    def to_json(self) -> dict:
        return {
            "num_states": self.num_states,
            "num_edges": self.num_edges,
            "num_sccs": self.num_sccs,
            "truncated": self.truncated,
            "home_markings": self.home_markings,
            "dead_markings": self.dead_markings,
            "dead_transitions": self.dead_transitions,
            "live_transitions": self.live_transitions,
            "impartial_transitions": self.impartial_transitions,
            "place_bounds": {
                name: {"min": lo, "max": hi}
                for name, (lo, hi) in self.place_bounds.items()
            },
        }


def strip_time(net: Net, marking: Marking) -> tuple[Net, Marking]:
    """Untimed copy: timed flags cleared, timestamps and clock zeroed.
    Delay expressions become irrelevant (untimed targets always get 0)."""
    registry = ColorSetRegistry()
    for cs in net.registry:
        registry.sets[cs.name] = replace(cs, timed=False)
    stripped = Net(registry, list(net.places), list(net.transitions), list(net.arcs), net.functions)
    m = Marking(stripped)
    for place in marking.place_names():
        for tok in marking.tokens(place):
            m.add_token(place, tok.value)
    return stripped, m


def _env_key(env: dict[str, Value]) -> tuple:
    return tuple(sorted((k, encode_value(_canon(v))) for k, v in env.items()))


def build_reachability_graph(
    net: Net,
    initial: Marking,
    max_states: int = DEFAULT_MAX_STATES,
    max_edges: int = DEFAULT_MAX_EDGES,
    strip_time_mode: bool = False,
) -> ReachGraph:
    """Deterministic BFS closure over fire_transition successors."""
    if max_states <= 0 or max_edges <= 0:
        raise LimitZero(f"limits must be positive, got max_states={max_states}, max_edges={max_edges}")
    if strip_time_mode:
        net, initial = strip_time(net, initial)
    if net.has_timed_sets():
        raise TimedNetUnsupported(
            "the analyzer handles untimed nets only; rerun with strip_time"
        )

    init_key = state_key(net, initial)
    nodes: dict[bytes, Marking] = {init_key: initial.copy()}
    edges: list[tuple[bytes, str, dict[str, Value], bytes]] = []
    seen_edges: set[tuple] = set()
    truncated = False
    queue: list[bytes] = [init_key]
    qi = 0
    while qi < len(queue):
        src = queue[qi]
        qi += 1
        marking = nodes[src]
        for t, bindings in enabled_transitions(net, marking):
            for binding in bindings:
                succ = marking.copy()
                fire_transition(net, t, succ, binding)
                dst = state_key(net, succ)
                if dst not in nodes:
                    if len(nodes) >= max_states:
                        truncated = True
                        continue
                    nodes[dst] = succ
                    queue.append(dst)
                ek = (src, t.name, _env_key(binding.env), dst)
                if ek in seen_edges:
                    continue
                if len(edges) >= max_edges:
                    truncated = True
                    return ReachGraph(nodes, edges, init_key, truncated)
                seen_edges.add(ek)
                edges.append((src, t.name, dict(binding.env), dst))
    return ReachGraph(nodes, edges, init_key, truncated)


def scc_decomposition(rg: ReachGraph) -> SccGraph:
    """Iterative Tarjan; components emitted in reverse topological order."""
    order = list(rg.nodes)
    succ: dict[bytes, list[bytes]] = {k: [] for k in order}
    for src, _, _, dst in rg.edges:
        succ[src].append(dst)

    index: dict[bytes, int] = {}
    low: dict[bytes, int] = {}
    on_stack: set[bytes] = set()
    stack: list[bytes] = []
    components: list[frozenset[bytes]] = []
    component_of: dict[bytes, int] = {}
    counter = 0

    for root in order:
        if root in index:
            continue
        work: list[tuple[bytes, int]] = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            while ei < len(succ[node]):
                child = succ[node][ei]
                ei += 1
                if child not in index:
                    work[-1] = (node, ei)
                    work.append((child, 0))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component_of[member] = len(components)
                    comp.append(member)
                    if member == node:
                        break
                components.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    cond_edges: set[tuple[int, int]] = set()
    for src, _, _, dst in rg.edges:
        a, b = component_of[src], component_of[dst]
        if a != b:
            cond_edges.add((a, b))
    outgoing = {a for a, _ in cond_edges}
    terminal = frozenset(i for i in range(len(components)) if i not in outgoing)
    return SccGraph(components, component_of, cond_edges, terminal)


def home_markings(rg: ReachGraph, scc: SccGraph) -> list[bytes]:
    """States reachable from every reachable state: the unique terminal
    SCC's members, or nothing when several terminal SCCs exist."""
    if rg.truncated:
        raise HomeUndecidable("graph truncated; home markings undecidable")
    if len(scc.terminal) != 1:
        return []
    (ti,) = scc.terminal
    members = scc.components[ti]
    return [k for k in rg.nodes if k in members]


def dead_markings(rg: ReachGraph) -> list[bytes]:
    has_out = {src for src, _, _, _ in rg.edges}
    return [k for k in rg.nodes if k not in has_out]


def _is_acyclic(nodes: list[bytes], edges: list[tuple[bytes, bytes]]) -> bool:
    indeg = {k: 0 for k in nodes}
    succ: dict[bytes, list[bytes]] = {k: [] for k in nodes}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [k for k in nodes if indeg[k] == 0]
    removed = 0
    while ready:
        n = ready.pop()
        removed += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return removed == len(nodes)


def transition_classes(
    rg: ReachGraph, scc: SccGraph, net: Net
) -> tuple[set[str], set[str], set[str]]:
    """(dead, live, impartial) transition name sets.

    dead: labels no edge. live: labels an edge inside every terminal SCC.
    impartial: removing its edges leaves the graph acyclic (the transition
    occurs in every infinite firing sequence).
    """
    if rg.truncated:
        raise LivenessUndecidable("graph truncated; liveness undecidable")
    names = [t.name for t in net.transitions]
    labels_used = {t for _, t, _, _ in rg.edges}
    dead = {n for n in names if n not in labels_used}

    internal_labels: dict[int, set[str]] = {i: set() for i in scc.terminal}
    for src, label, _, dst in rg.edges:
        a, b = scc.component_of[src], scc.component_of[dst]
        if a == b and a in internal_labels:
            internal_labels[a].add(label)
    live = {
        n
        for n in names
        if scc.terminal and all(n in internal_labels[i] for i in scc.terminal)
    }

    all_nodes = list(rg.nodes)
    impartial = set()
    for n in names:
        rest = [(src, dst) for src, label, _, dst in rg.edges if label != n]
        if _is_acyclic(all_nodes, rest):
            impartial.add(n)
    return dead, live, impartial


def place_bounds(rg: ReachGraph, net: Net) -> dict[str, tuple[int, int]]:
    bounds: dict[str, tuple[int, int]] = {}
    for place in net.places:
        counts = [len(m.tokens(place.name)) for m in rg.nodes.values()]
        bounds[place.name] = (min(counts), max(counts))
    return bounds


def summarize(
    net: Net,
    initial: Marking,
    max_states: int = DEFAULT_MAX_STATES,
    max_edges: int = DEFAULT_MAX_EDGES,
    strip_time_mode: bool = False,
) -> SpaceReport:
    """Full report; home and liveness fields are absent when truncation
    makes them undecidable."""
    rg = build_reachability_graph(net, initial, max_states, max_edges, strip_time_mode)
    scc = scc_decomposition(rg)
    dead_m = [key_to_str(k) for k in dead_markings(rg)]
    if rg.truncated:
        home = None
        dead_t = live_t = impartial_t = None
    else:
        home = [key_to_str(k) for k in home_markings(rg, scc)]
        d, l, i = transition_classes(rg, scc, net)
        dead_t, live_t, impartial_t = sorted(d), sorted(l), sorted(i)
    return SpaceReport(
        num_states=len(rg.nodes),
        num_edges=len(rg.edges),
        num_sccs=len(scc.components),
        truncated=rg.truncated,
        home_markings=home,
        dead_markings=dead_m,
        dead_transitions=dead_t,
        live_transitions=live_t,
        impartial_transitions=impartial_t,
        place_bounds=place_bounds(rg, net),
    )
