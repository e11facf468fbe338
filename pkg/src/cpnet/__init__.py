"""Colored Petri net engine: typed timed tokens, binding search, state-space
analysis, JSON interchange, event-log export, CLI, and an HTTP service."""

from .colorsets import (
    ColorSet,
    ColorSetRegistry,
    declaration_text,
    is_member,
    parse_colorset_definitions,
)
from .errors import CpnError
from .expr import (
    ArcInscription,
    FunctionDef,
    evaluate,
    free_variables,
    match_pattern,
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
from .interchange import (
    document_text,
    export_json,
    import_json,
    pretty_print,
    render_dot,
)
from .cpnxml import export_cpn_xml_stub, import_cpn_xml
from .net import (
    Arc,
    Binding,
    FiringRecord,
    Marking,
    Net,
    Place,
    Token,
    Transition,
    advance_global_clock,
    enabled_transitions,
    find_bindings,
    fire_transition,
    is_enabled,
    validate_net,
)
from .simlog import (
    Trace,
    export_event_log,
    replay_trace,
    run_simulation,
    step_random,
)
from .statespace import (
    build_reachability_graph,
    dead_markings,
    home_markings,
    place_bounds,
    scc_decomposition,
    state_key,
    strip_time,
    summarize,
    transition_classes,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "ArcInscription",
    "Binding",
    "ColorSet",
    "ColorSetRegistry",
    "declaration_text",
    "CpnError",
    "FiringRecord",
    "FunctionDef",
    "FusionSet",
    "Hcpn",
    "Marking",
    "Module",
    "Net",
    "Place",
    "SubstitutionTransition",
    "Token",
    "Trace",
    "Transition",
    "advance_global_clock",
    "build_reachability_graph",
    "dead_markings",
    "document_text",
    "enabled_transitions",
    "evaluate",
    "export_cpn_xml_stub",
    "export_event_log",
    "export_json",
    "find_bindings",
    "fire_transition",
    "flatten",
    "free_variables",
    "home_markings",
    "import_cpn_xml",
    "import_json",
    "is_enabled",
    "is_member",
    "match_pattern",
    "parse_arc_inscription",
    "parse_colorset_definitions",
    "parse_expression",
    "parse_function_definitions",
    "place_bounds",
    "pretty_print",
    "render_dot",
    "replay_trace",
    "run_simulation",
    "scc_decomposition",
    "state_key",
    "step_random",
    "strip_time",
    "summarize",
    "transition_classes",
    "validate_hcpn",
    "validate_net",
    "__version__",
]
