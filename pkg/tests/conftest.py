"""Shared fixtures: the worked two-place timed net (in its literal form and
a feedback variant whose output loops back to the input place), plus small
document builders."""

from __future__ import annotations

import copy
import sys

import pytest

from cpnet import import_json


def worked_document() -> dict:
    return {
        "formatVersion": 1,
        "colorSets": ["colset INT = int timed;"],
        "functions": ["fun double(n) = n * 2;"],
        "places": [
            {"name": "P_In", "colorSet": "INT"},
            {"name": "P_Out", "colorSet": "INT"},
        ],
        "transitions": [
            {"name": "T", "variables": ["x"], "guard": "x > 0", "transitionDelay": 1}
        ],
        "arcs": [
            {"source": "P_In", "target": "T", "inscription": "x"},
            {"source": "T", "target": "P_Out", "inscription": "double(x) @+2"},
        ],
        "initialMarking": {
            "globalClock": 0,
            "tokens": {"P_In": [{"value": 1}, {"value": -1}]},
        },
    }


def feedback_document() -> dict:
    doc = worked_document()
    doc["arcs"][1] = {"source": "T", "target": "P_In", "inscription": "double(x) @+2"}
    return doc


def minimal_document() -> dict:
    return {
        "formatVersion": 1,
        "colorSets": ["colset INT = int;"],
        "functions": [],
        "places": [{"name": "P", "colorSet": "INT"}],
        "transitions": [
            {"name": "T", "variables": ["x"], "guard": None, "transitionDelay": 0}
        ],
        "arcs": [{"source": "P", "target": "T", "inscription": "x"}],
        "initialMarking": {"globalClock": 0, "tokens": {"P": [{"value": 1}]}},
    }


@pytest.fixture
def worked_doc() -> dict:
    return worked_document()


@pytest.fixture
def worked_net():
    return import_json(worked_document())


@pytest.fixture
def feedback_net():
    return import_json(feedback_document())


@pytest.fixture
def mini_doc() -> dict:
    return minimal_document()


@pytest.fixture
def mini():
    return import_json(minimal_document())


def clone(doc: dict) -> dict:
    return copy.deepcopy(doc)


def pytest_terminal_summary(terminalreporter):
    """Echo one line per acceptance criterion after the run (the per-test
    prints are swallowed by capture on success)."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None) if module else None
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, verdict in results.items():
        terminalreporter.write_line(f"{label}: {verdict}")
