"""Simulation drivers and event-log export.

Random runs pick uniformly over all enabled (transition, binding) pairs,
not over transitions, so a transition with many bindings is proportionally
more likely. Within a run the clock only moves when nothing is enabled at
the current time; every firing at the current time happens first.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import EmptyInput, NotEnabled
from .net import (
    Binding,
    FiringRecord,
    Marking,
    Net,
    Transition,
    advance_global_clock,
    enabled_transitions,
    find_bindings,
    fire_transition,
)
from .values import format_value, values_equal

REASON_DEADLOCK = "deadlock"
REASON_STEP_LIMIT = "step limit"
REASON_CLOCK_LIMIT = "clock limit"
REASON_USER_STOP = "user stop"

EnabledPair = tuple[Transition, Binding]
Chooser = Callable[[Net, Marking, list[EnabledPair]], Optional[EnabledPair]]


@dataclass
class Trace:
    """One run: snapshots around an ordered firing sequence.

    Replaying records from the initial snapshot (advancing the clock to each
    record's firing time) reproduces the final snapshot exactly.
    """

    run_id: str
    initial: Marking
    records: list[FiringRecord] = field(default_factory=list)
    final: Optional[Marking] = None
    reason: str = REASON_DEADLOCK


def _enabled_pairs(net: Net, marking: Marking) -> list[EnabledPair]:
    return [(t, b) for t, bindings in enabled_transitions(net, marking) for b in bindings]


def _next_time(marking: Marking) -> Optional[int]:
    future = [
        tok.timestamp
        for place in marking.place_names()
        for tok in marking.tokens(place)
        if tok.timestamp > marking.global_clock
    ]
    return min(future) if future else None


def step_random(net: Net, marking: Marking, rng: random.Random) -> Optional[FiringRecord]:
    """Fire one uniformly chosen enabled pair, advancing the clock at most
    once to find one. Returns None when nothing can fire even then."""
    pairs = _enabled_pairs(net, marking)
    if not pairs:
        advance_global_clock(net, marking)
        pairs = _enabled_pairs(net, marking)
        if not pairs:
            return None
    transition, binding = pairs[rng.randrange(len(pairs))]
    return fire_transition(net, transition, marking, binding)


def run_simulation(
    net: Net,
    marking: Marking,
    *,
    seed: int = 0,
    chooser: Optional[Chooser] = None,
    max_steps: int = 1000,
    max_clock: Optional[int] = None,
    run_id: str = "run-0",
) -> Trace:
    """Drive firings until deadlock or a limit; the input marking is not
    touched. A chooser callback overrides the seeded random policy and may
    return None to stop the run."""
    rng = random.Random(seed)
    working = marking.copy()
    trace = Trace(run_id, marking.copy())
    while True:
        if len(trace.records) >= max_steps:
            trace.reason = REASON_STEP_LIMIT
            break
        pairs = _enabled_pairs(net, working)
        if pairs:
            if chooser is not None:
                choice = chooser(net, working, pairs)
                if choice is None:
                    trace.reason = REASON_USER_STOP
                    break
            else:
                choice = pairs[rng.randrange(len(pairs))]
            trace.records.append(fire_transition(net, choice[0], working, choice[1]))
            continue
        upcoming = _next_time(working)
        if upcoming is None:
            trace.reason = REASON_DEADLOCK
            break
        if max_clock is not None and upcoming > max_clock:
            trace.reason = REASON_CLOCK_LIMIT
            break
        advance_global_clock(net, working)
    trace.final = working
    return trace


def replay_trace(net: Net, trace: Trace) -> Marking:
    """Re-fire a trace's records from its initial snapshot and return the
    resulting marking (clock advanced as the original run advanced it)."""
    marking = trace.initial.copy()
    for record in trace.records:
        while marking.global_clock < record.clock:
            before = marking.global_clock
            advance_global_clock(net, marking)
            if marking.global_clock == before:
                raise NotEnabled(
                    f"replay cannot reach clock {record.clock} for {record.transition!r}"
                )
        transition = net.transition_index[record.transition]
        binding = None
        for candidate in find_bindings(net, transition, marking):
            if all(values_equal(candidate.env[v], record.env[v]) for v in transition.variables):
                binding = candidate
                break
        if binding is None:
            raise NotEnabled(f"replay found no binding {record.env!r} for {record.transition!r}")
        fire_transition(net, transition, marking, binding)
    if trace.final is not None:
        while marking.global_clock < trace.final.global_clock:
            before = marking.global_clock
            advance_global_clock(net, marking)
            if marking.global_clock == before:
                break
    return marking


def _binding_text(record: FiringRecord) -> str:
    return ";".join(f"{var}={format_value(value)}" for var, value in record.env.items())


def _log_rows(traces: list[Trace]) -> list[tuple[str, str, int, str]]:
    rows = []
    for trace in sorted(traces, key=lambda t: t.run_id):
        for record in trace.records:
            rows.append((trace.run_id, record.transition, record.clock, _binding_text(record)))
    return rows


def export_event_log(traces: list[Trace], format: str = "csv") -> str:
    """Flatten traces into CSV (RFC 4180) or JSON lines, one row per firing,
    ordered by (case_id, sequence index)."""
    if not traces:
        raise EmptyInput("no traces to export")
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown log format {format!r}")
    rows = _log_rows(traces)
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\r\n")
        writer.writerow(["case_id", "activity", "timestamp", "binding"])
        writer.writerows(rows)
        return out.getvalue()
    lines = [
        json.dumps(
            {"case_id": c, "activity": a, "timestamp": ts, "binding": b},
            ensure_ascii=False,
        )
        for c, a, ts, b in rows
    ]
    return "\n".join(lines) + "\n" if lines else ""
