"""Global protocols for distribution-grid fault management.

A global protocol describes how substations interact as a whole. It can be
executed directly, or projected to one controller per substation whose
composition is checked against the global behaviour.
"""

from .bundled import scenario_corpus, simple_corpus
from .correspondence import MatchReport, check_bounded, check_state
from .dist_core import (
    canonicalize,
    canonicalize_network,
    network_transitions,
    observable_transitions,
)
from .formats import (
    ParseError,
    parse_condition,
    parse_effects,
    parse_network,
    parse_protocol,
)
from .global_ast import well_formed
from .global_semantics import Configuration, explore, run, successors
from .grid_state import Direction, EffectRegistry, NetworkState, NodeState
from .projection import ENABLING, REACTIVE, ActiveOf, project, project_network

__all__ = [
    "ActiveOf", "Configuration", "Direction", "ENABLING", "EffectRegistry", "MatchReport",
    "NetworkState", "NodeState", "ParseError", "REACTIVE", "canonicalize",
    "canonicalize_network", "check_bounded", "check_state", "explore", "network_transitions",
    "observable_transitions", "parse_condition", "parse_effects", "parse_network",
    "parse_protocol", "project", "project_network", "run", "scenario_corpus", "simple_corpus",
    "successors", "well_formed",
]
