"""Acceptance gate: one test per release criterion, one PASS/FAIL line each.

Every expected value here is either written out literally or recomputed by
the independent brute-force oracles in oracles.py; the engine is never
checked against itself.  Results are collected in RESULTS and echoed as a
summary section by the conftest terminal hook.
"""

import functools
import json
import random
import time

from fastapi.testclient import TestClient

from conftest import worked_document, feedback_document, minimal_document
from corpus import net_corpus, random_expr
from cpnet import (
    FusionSet,
    Hcpn,
    Marking,
    Module,
    Place,
    SubstitutionTransition,
    Token,
    advance_global_clock,
    build_reachability_graph,
    document_text,
    export_event_log,
    export_json,
    find_bindings,
    fire_transition,
    flatten,
    import_json,
    parse_colorset_definitions,
    parse_expression,
    pretty_print,
    replay_trace,
    run_simulation,
    summarize,
    validate_hcpn,
)
from cpnet.service import create_app
from cpnet.statespace import key_to_str
from cpnet.values import encode_value
from oracles import (
    env_key,
    marking_to_key,
    oracle_bindings,
    oracle_dead_markings,
    oracle_home,
    oracle_place_bounds,
    oracle_reachability,
    oracle_transition_classes,
)
from test_expr import ast_equal
from test_hierarchy import arc, relay_child, trans
from test_net import build_net
from test_simlog import marks_equal

RESULTS: dict[str, str] = {}


def criterion(label):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                RESULTS[label] = "FAIL"
                print(f"ACCEPTANCE {label}: FAIL")
                raise
            RESULTS[label] = "PASS"
            print(f"ACCEPTANCE {label}: PASS")

        return wrapper

    return deco


@functools.lru_cache(maxsize=None)
def corpus200():
    """Shared corpus of 200 random small nets (read-only in every test)."""
    return tuple(net_corpus(200, base_seed=1))


# --- 1: worked example end to end ---


@criterion("worked example end to end")
def test_worked_example_end_to_end():
    start = time.perf_counter()
    net, marking, _ = import_json(worked_document())
    t = net.transition("T")

    bindings = find_bindings(net, t, marking)
    assert [b.env for b in bindings] == [{"x": 1}]

    record = fire_transition(net, t, marking, bindings[0])
    assert record.consumed == (("P_In", Token(1, 0)),)
    assert record.produced == (("P_Out", Token(2, 3)),)
    assert marking.tokens("P_In") == (Token(-1, 0),)
    assert marking.tokens("P_Out") == (Token(2, 3),)
    assert marking.global_clock == 0

    assert advance_global_clock(net, marking) == 3
    assert marking.global_clock == 3
    assert find_bindings(net, t, marking) == []

    assert time.perf_counter() - start < 1.0


# --- 2: binding search vs oracle ---


@criterion("binding search vs oracle")
def test_binding_search_matches_oracle():
    start = time.perf_counter()
    corpus = corpus200()
    assert len(corpus) == 200
    mismatches = []
    for i, (_, net, marking) in enumerate(corpus):
        for t in net.transitions:
            got = {env_key(t, b.env) for b in find_bindings(net, t, marking)}
            if got != oracle_bindings(net, t, marking):
                mismatches.append((i, t.name))
    assert mismatches == []
    assert time.perf_counter() - start < 30.0


# --- 3: reachability and analyses vs oracle ---


@criterion("reachability and analyses vs oracle")
def test_reachability_and_report_match_oracle():
    start = time.perf_counter()
    for i, (_, net, marking) in enumerate(corpus200()):
        graph = oracle_reachability(net, marking, max_states=2000)
        rg = build_reachability_graph(net, marking)
        assert not rg.truncated, i

        to_oracle = {k: marking_to_key(net, mk) for k, mk in rg.nodes.items()}
        assert len(set(to_oracle.values())) == len(to_oracle), i
        assert set(to_oracle.values()) == graph.nodes, i

        by_name = {t.name: t for t in net.transitions}
        got_edges = {
            (to_oracle[src], tn, env_key(by_name[tn], env), to_oracle[dst])
            for src, tn, env, dst in rg.edges
        }
        assert got_edges == graph.edges, i

        report = summarize(net, marking)
        names = {key_to_str(k): ok for k, ok in to_oracle.items()}
        assert {names[s] for s in report.home_markings} == oracle_home(graph), i
        assert {names[s] for s in report.dead_markings} == oracle_dead_markings(
            graph
        ), i
        dead, live, impartial = oracle_transition_classes(graph, net)
        assert set(report.dead_transitions) == dead, i
        assert set(report.live_transitions) == live, i
        assert set(report.impartial_transitions) == impartial, i
        assert report.place_bounds == oracle_place_bounds(graph, net), i
    assert time.perf_counter() - start < 60.0


# --- 4: serialization fixpoint and printer round trip ---


@criterion("serialization fixpoint and printer round trip")
def test_json_fixpoint_and_pretty_print_round_trip():
    docs = [doc for doc, _, _ in corpus200()]
    docs += [worked_document(), feedback_document(), minimal_document()]
    for doc in docs:
        once = document_text(export_json(*import_json(doc)))
        again = document_text(export_json(*import_json(json.loads(once))))
        assert again == once

    rng = random.Random(20260814)
    for _ in range(1000):
        ast = random_expr(rng)
        assert ast_equal(parse_expression(pretty_print(ast)), ast)


# --- 5: log determinism and replay ---


@criterion("log determinism and replay")
def test_log_determinism_and_replay():
    cases = [(net, marking, 40) for _, net, marking in corpus200()[:80]]
    for doc in (worked_document(), feedback_document()):
        net, marking, _ = import_json(doc)
        cases.append((net, marking, 10))

    for i, (net, marking, steps) in enumerate(cases):
        first = run_simulation(net, marking, seed=i, max_steps=steps)
        second = run_simulation(net, marking, seed=i, max_steps=steps)
        a = export_event_log([first])
        b = export_event_log([second])
        assert a.encode("utf-8") == b.encode("utf-8"), i
        assert marks_equal(replay_trace(net, first), first.final), i


# --- 6: hierarchy flattening vs manual reference ---

REG_INT = parse_colorset_definitions("colset INT = int;")
REG_PAIR = parse_colorset_definitions("colset INT = int; colset PAIR = product INT * INT;")


def case_relay():
    h = Hcpn(
        registry=REG_INT,
        modules=(
            Module(
                name="root",
                places=(Place("Pa", "INT"), Place("Pb", "INT")),
                initial_tokens=(("Pa", Token(1, 0)),),
            ),
            relay_child(),
        ),
        root="root",
        substitutions=(
            SubstitutionTransition(
                "S", "root", "C", (("Pa", "portIn"), ("Pb", "portOut"))
            ),
        ),
    )
    manual = build_net(
        places=(("Pa", "INT"), ("Pb", "INT")),
        transitions=(("S.T", ("x",), None, 0),),
        arcs=(("Pa", "S.T", "x"), ("S.T", "Pb", "x")),
    )
    marking = Marking(manual)
    marking.add_token("Pa", 1)
    mapping = {"Pa": ("", "Pa"), "Pb": ("", "Pb"), "S.T": ("S", "T")}
    return h, manual, marking, mapping


def case_two_instances():
    h = Hcpn(
        registry=REG_INT,
        modules=(
            Module(
                name="root",
                places=(
                    Place("In1", "INT"),
                    Place("In2", "INT"),
                    Place("Out1", "INT"),
                    Place("Out2", "INT"),
                ),
                initial_tokens=(("In1", Token(1, 0)), ("In2", Token(2, 0))),
            ),
            relay_child(),
        ),
        root="root",
        substitutions=(
            SubstitutionTransition(
                "A", "root", "C", (("In1", "portIn"), ("Out1", "portOut"))
            ),
            SubstitutionTransition(
                "B", "root", "C", (("In2", "portIn"), ("Out2", "portOut"))
            ),
        ),
    )
    manual = build_net(
        places=(("In1", "INT"), ("In2", "INT"), ("Out1", "INT"), ("Out2", "INT")),
        transitions=(("A.T", ("x",), None, 0), ("B.T", ("x",), None, 0)),
        arcs=(
            ("In1", "A.T", "x"),
            ("A.T", "Out1", "x"),
            ("In2", "B.T", "x"),
            ("B.T", "Out2", "x"),
        ),
    )
    marking = Marking(manual)
    marking.add_token("In1", 1)
    marking.add_token("In2", 2)
    mapping = {
        "In1": ("", "In1"),
        "In2": ("", "In2"),
        "Out1": ("", "Out1"),
        "Out2": ("", "Out2"),
        "A.T": ("A", "T"),
        "B.T": ("B", "T"),
    }
    return h, manual, marking, mapping


def case_fused_buffer():
    child = Module(
        name="C",
        places=(Place("pin", "INT"), Place("buffer", "INT")),
        transitions=(trans("T"),),
        arcs=(arc("pin", "T", "x"), arc("T", "buffer", "x")),
        ports=(("pin", "in"),),
        initial_tokens=(("buffer", Token(9, 0)),),
    )
    root = Module(
        name="root",
        places=(Place("In1", "INT"), Place("In2", "INT")),
        initial_tokens=(("In1", Token(1, 0)), ("In2", Token(2, 0))),
    )
    h = Hcpn(
        registry=REG_INT,
        modules=(root, child),
        root="root",
        substitutions=(
            SubstitutionTransition("A", "root", "C", (("In1", "pin"),)),
            SubstitutionTransition("B", "root", "C", (("In2", "pin"),)),
        ),
        fusion_sets=(FusionSet("shared", (("C", "buffer"), ("root", "In1"))),),
    )
    # both buffers and In1 collapse into one place; its initial marking is
    # the union {1, 9, 9}
    manual = build_net(
        places=(("shared", "INT"), ("In2", "INT")),
        transitions=(("A.T", ("x",), None, 0), ("B.T", ("x",), None, 0)),
        arcs=(
            ("shared", "A.T", "x"),
            ("A.T", "shared", "x"),
            ("In2", "B.T", "x"),
            ("B.T", "shared", "x"),
        ),
    )
    marking = Marking(manual)
    for value in (1, 9, 9):
        marking.add_token("shared", value)
    marking.add_token("In2", 2)
    mapping = {
        "shared": ("", "In1"),
        "In2": ("", "In2"),
        "A.T": ("A", "T"),
        "B.T": ("B", "T"),
    }
    return h, manual, marking, mapping


def case_product_guard():
    child = Module(
        name="C",
        places=(Place("pin", "PAIR"), Place("pout", "INT")),
        transitions=(trans("T", ("a", "b"), "a > 0"),),
        arcs=(arc("pin", "T", "(a, b)"), arc("T", "pout", "a + b")),
        ports=(("pin", "in"), ("pout", "out")),
    )
    root = Module(
        name="root",
        places=(Place("Src", "PAIR"), Place("Dst", "INT")),
        initial_tokens=(("Src", Token((1, 2), 0)), ("Src", Token((0, 5), 0))),
    )
    h = Hcpn(
        registry=REG_PAIR,
        modules=(root, child),
        root="root",
        substitutions=(
            SubstitutionTransition("S", "root", "C", (("Src", "pin"), ("Dst", "pout"))),
        ),
    )
    manual = build_net(
        colorsets="colset INT = int; colset PAIR = product INT * INT;",
        places=(("Src", "PAIR"), ("Dst", "INT")),
        transitions=(("S.T", ("a", "b"), "a > 0", 0),),
        arcs=(("Src", "S.T", "(a, b)"), ("S.T", "Dst", "a + b")),
    )
    marking = Marking(manual)
    marking.add_token("Src", (1, 2))
    marking.add_token("Src", (0, 5))
    mapping = {"Src": ("", "Src"), "Dst": ("", "Dst"), "S.T": ("S", "T")}
    return h, manual, marking, mapping


def case_inout_feedback():
    child = Module(
        name="C",
        places=(Place("p", "INT"), Place("q", "INT")),
        transitions=(trans("T1"), trans("T2", ("x",), "x < 2")),
        arcs=(
            arc("p", "T1", "x"),
            arc("T1", "q", "x"),
            arc("q", "T2", "x"),
            arc("T2", "p", "x + 1"),
        ),
        ports=(("p", "inout"),),
    )
    root = Module(
        name="root",
        places=(Place("R", "INT"),),
        initial_tokens=(("R", Token(0, 0)),),
    )
    h = Hcpn(
        registry=REG_INT,
        modules=(root, child),
        root="root",
        substitutions=(SubstitutionTransition("S", "root", "C", (("R", "p"),)),),
    )
    manual = build_net(
        places=(("R", "INT"), ("q", "INT")),
        transitions=(("S.T1", ("x",), None, 0), ("S.T2", ("x",), "x < 2", 0)),
        arcs=(
            ("R", "S.T1", "x"),
            ("S.T1", "q", "x"),
            ("q", "S.T2", "x"),
            ("S.T2", "R", "x + 1"),
        ),
    )
    marking = Marking(manual)
    marking.add_token("R", 0)
    mapping = {
        "R": ("", "R"),
        "q": ("S", "q"),
        "S.T1": ("S", "T1"),
        "S.T2": ("S", "T2"),
    }
    return h, manual, marking, mapping


def _flat_graph_signature(net, marking, rename):
    """Reachability graph with states as frozensets of (renamed place,
    sorted token value encodings) so two graphs compare structurally."""
    rg = build_reachability_graph(net, marking)
    assert not rg.truncated
    by_name = {t.name: t for t in net.transitions}
    place_names = [p.name for p in net.places]

    def state(mk):
        return frozenset(
            (rename(p), tuple(sorted(encode_value(tok.value) for tok in mk.tokens(p))))
            for p in place_names
            if mk.tokens(p)
        )

    states = {k: state(mk) for k, mk in rg.nodes.items()}
    edges = {
        (states[src], rename(tn), env_key(by_name[tn], env), states[dst])
        for src, tn, env, dst in rg.edges
    }
    return states[rg.initial], set(states.values()), edges


def _oracle_graph_signature(net, marking, rename):
    graph = oracle_reachability(net, marking, max_states=2000)

    def state(key):
        return frozenset(
            (rename(p), tuple(sorted(encode_value(v) for v in values)))
            for p, values in graph.tokens_of[key].items()
            if values
        )

    states = {k: state(k) for k in graph.nodes}
    edges = {
        (states[src], rename(tn), ek, states[dst])
        for src, tn, ek, dst in graph.edges
    }
    return states[graph.initial], set(states.values()), edges


@criterion("hierarchy flattening vs manual reference")
def test_hierarchy_flattening_matches_manual_reference():
    cases = [
        case_relay(),
        case_two_instances(),
        case_fused_buffer(),
        case_product_guard(),
        case_inout_feedback(),
    ]
    for i, (h, manual, manual_marking, mapping) in enumerate(cases):
        assert validate_hcpn(h) == [], i
        result = flatten(h)
        to_flat = result.name_map.to_flat
        got = _flat_graph_signature(result.net, result.marking, lambda n: n)
        want = _oracle_graph_signature(
            manual, manual_marking, lambda n: to_flat[mapping[n]]
        )
        assert got[0] == want[0], i
        assert got[1] == want[1], i
        assert got[2] == want[2], i


# --- 7: HTTP service walkthrough ---


@criterion("HTTP service walkthrough")
def test_http_service_walkthrough():
    with TestClient(create_app()) as client:
        created = client.post("/sessions", json=worked_document())
        assert created.status_code == 201
        sid = created.json()["sessionId"]
        twin = client.post("/sessions", json=worked_document()).json()["sessionId"]
        assert twin != sid

        enabled = client.get(f"/sessions/{sid}/enabled").json()
        assert enabled == [{"transition": "T", "bindings": [{"x": 1}]}]

        fired = client.post(f"/sessions/{sid}/fire", json={"transition": "T"})
        assert fired.status_code == 200
        record = fired.json()["firingRecord"]
        assert record["binding"] == {"x": 1}
        assert record["consumed"] == [{"place": "P_In", "value": 1, "timestamp": 0}]
        assert record["produced"] == [{"place": "P_Out", "value": 2, "timestamp": 3}]

        state = client.get(f"/sessions/{sid}/state").json()
        assert state["globalClock"] == 0
        assert state["marking"]["P_In"] == [{"value": -1, "timestamp": 0}]
        assert state["marking"]["P_Out"] == [{"value": 2, "timestamp": 3}]

        assert client.post(f"/sessions/{sid}/advance").json() == {"globalClock": 3}

        exported = client.get(f"/sessions/{sid}/export").json()
        assert exported["initialMarking"]["globalClock"] == 3
        assert exported["initialMarking"]["tokens"] == {
            "P_In": [{"value": -1, "timestamp": 0}],
            "P_Out": [{"value": 2, "timestamp": 3}],
        }

        # the remaining token fails the guard, so firing again must be refused
        refused = client.post(f"/sessions/{sid}/fire", json={"transition": "T"})
        assert refused.status_code == 409
        assert refused.json()["error"] == "NotEnabled"

        # the twin session never moved
        fresh = client.get(f"/sessions/{twin}/state").json()
        assert fresh["globalClock"] == 0
        assert fresh["marking"]["P_In"] == [
            {"value": -1, "timestamp": 0},
            {"value": 1, "timestamp": 0},
        ]
        assert fresh["marking"]["P_Out"] == []
