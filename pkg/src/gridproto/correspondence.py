"""Bounded check that the projected network and the global protocol step
in lockstep: each global step is matched by an observable network step
(soundness) and each observable network step by a global one
(completeness), with successors compared up to structural congruence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .dist_core import (
    BrdOut,
    Input,
    Output,
    Par,
    Plus,
    Tau,
    Term,
    ZERO,
    Zero,
    canonicalize_network,
    observable_transitions,
)
from .global_semantics import Broadcast, Configuration, GlobalStep, explore, successors
from .grid_state import EffectRegistry
from .projection import project_network

SOUNDNESS = "soundness"
COMPLETENESS = "completeness"

Projector = Callable[[Configuration], object]


@dataclass(frozen=True)
class Counterexample:
    direction: str
    configuration: Configuration
    offending: object  # GlobalStep, or (label, Network) for completeness
    explanation: str

    def sort_key(self) -> tuple:
        return (self.direction, repr(self.configuration.key()), self.explanation)


@dataclass
class MatchReport:
    checked_states: int = 0
    checked_edges: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def count(self, direction: str) -> int:
        return sum(1 for cx in self.counterexamples if cx.direction == direction)

    def merge(self, other: "MatchReport") -> None:
        self.checked_states += other.checked_states
        self.checked_edges += other.checked_edges
        self.counterexamples.extend(other.counterexamples)

    def summary(self) -> str:
        return (f"states={self.checked_states} edges={self.checked_edges} "
                f"soundness_failures={self.count(SOUNDNESS)} "
                f"completeness_failures={self.count(COMPLETENESS)}")


def _compatible(kind, label) -> bool:
    if isinstance(kind, Broadcast):
        return isinstance(label, BrdOut) and (label.sender, label.label) == (kind.enabler, kind.label)
    return isinstance(label, Tau)


def check_state(c: Configuration, reg: EffectRegistry, projector: Projector = project_network,
                steps: list[GlobalStep] | None = None) -> MatchReport:
    """Match the global steps of ``c`` against the observable transitions
    of its projection, in both directions."""
    steps = successors(c, reg) if steps is None else steps
    network = projector(c)
    observed = [(lab, n2, canonicalize_network(n2)) for lab, n2 in observable_transitions(network, reg)]
    expected = [(st, canonicalize_network(projector(st.successor))) for st in steps]
    report = MatchReport(checked_states=1, checked_edges=len(steps))

    for st, want in expected:
        if not any(_compatible(st.kind, lab) and form == want for lab, _, form in observed):
            report.counterexamples.append(Counterexample(
                SOUNDNESS, c, st,
                f"global step '{st.kind}' has no matching network transition"))
    for lab, n2, form in observed:
        if not any(_compatible(st.kind, lab) and form == want for st, want in expected):
            report.counterexamples.append(Counterexample(
                COMPLETENESS, c, (lab, n2),
                f"network transition '{lab}' has no matching global step"))
    return report


def check_bounded(c: Configuration, reg: EffectRegistry, depth: int | None = None,
                  cap: int | None = None, projector: Projector = project_network) -> MatchReport:
    """``check_state`` over every configuration reachable within ``depth``
    steps (all reachable ones when ``depth`` is None)."""
    graph = explore(c, reg, depth=depth, cap=cap)
    report = MatchReport()
    for cfg in graph.configs:
        report.merge(check_state(cfg, reg, projector))
    report.counterexamples.sort(key=Counterexample.sort_key)
    return report


# -- deliberately broken controllers ------------------------------------------


def _without_output(t: Term, label: str) -> Term:
    if isinstance(t, Output):
        return ZERO if t.label == label else t
    if isinstance(t, Plus):
        left, right = _without_output(t.left, label), _without_output(t.right, label)
        if isinstance(left, Zero):
            return right
        if isinstance(right, Zero):
            return left
        return Plus(left, right)
    if isinstance(t, Par):
        return Par(_without_output(t.left, label), _without_output(t.right, label))
    return t


def drop_input(label: str) -> Callable[[Term], Term]:
    """Reactive-part rewrite removing every persistent input on ``label``."""
    def rewrite(t: Term) -> Term:
        if isinstance(t, Input):
            return ZERO if t.label == label else t
        if isinstance(t, Par):
            return Par(rewrite(t.left), rewrite(t.right))
        return t
    return rewrite


def drop_output(input_label: str, output_label: str) -> Callable[[Term], Term]:
    """Reactive-part rewrite removing the ``output_label`` branch from the
    reaction installed by the ``input_label`` input."""
    def rewrite(t: Term) -> Term:
        if isinstance(t, Input) and t.label == input_label:
            return Input(t.cond, t.label, t.dir, _without_output(t.cont, output_label))
        if isinstance(t, Par):
            return Par(rewrite(t.left), rewrite(t.right))
        return t
    return rewrite


def _inputs(t: Term) -> list[Input]:
    if isinstance(t, Input):
        return [t]
    if isinstance(t, Par):
        return _inputs(t.left) + _inputs(t.right)
    return []


def _outputs(t: Term) -> list[Output]:
    if isinstance(t, Output):
        return [t]
    if isinstance(t, (Plus, Par)):
        return _outputs(t.left) + _outputs(t.right)
    return []


def single_deletions(reactive: Term) -> list[tuple[str, str, Callable]]:
    """Every single deletion applicable to a reactive projection, as
    (kind, description, rewrite); kind is "input" or "output"."""
    out = []
    seen = set()
    for inp in _inputs(reactive):
        if ("input", inp.label) not in seen:
            seen.add(("input", inp.label))
            out.append(("input", f"drop input {inp.label}", drop_input(inp.label)))
        for o in _outputs(inp.cont):
            if ("output", inp.label, o.label) not in seen:
                seen.add(("output", inp.label, o.label))
                out.append(("output", f"drop output {o.label} after input {inp.label}",
                            drop_output(inp.label, o.label)))
    return out


def mutated_projector(rewrite: Callable[[Term], Term]) -> Projector:
    return lambda c: project_network(c, transform_reactive=rewrite)
