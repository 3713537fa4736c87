"""Reduction of configurations ``<Delta, P>``: binary, broadcast and local
synchronisations closed under the protocol contexts and structural
congruence, plus stepping and bounded state-space exploration."""

from __future__ import annotations

import os
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .global_ast import Protocol, apply_redex, enumerate_redexes, protocol_key
from .grid_state import (
    Direction,
    EffectRegistry,
    NetworkState,
    NodeId,
    apply_update,
    children,
    eval_condition,
    id_sort_key,
)

DEFAULT_MAX_STEPS = 10_000
DEFAULT_STATE_CAP = 100_000


class StateBudgetExceeded(RuntimeError):
    pass


def default_state_cap() -> int:
    raw = os.environ.get("GRIDPROTO_STATE_CAP")
    return int(raw) if raw else DEFAULT_STATE_CAP


@dataclass(frozen=True)
class Configuration:
    delta: NetworkState
    protocol: Protocol

    def key(self) -> tuple:
        return (self.delta.key(), protocol_key(self.protocol))


@dataclass(frozen=True)
class Binary:
    enabler: NodeId
    reactor: NodeId
    label: str

    def __str__(self) -> str:
        return f"bin {self.enabler} [{self.reactor}] {self.label}"


@dataclass(frozen=True)
class Broadcast:
    enabler: NodeId
    reactors: tuple
    label: str

    def __str__(self) -> str:
        return f"brd {self.enabler} [{','.join(self.reactors)}] {self.label}"


@dataclass(frozen=True)
class Local:
    enabler: NodeId
    label: str

    def __str__(self) -> str:
        return f"loc {self.enabler} [] {self.label}"


StepKind = Union[Binary, Broadcast, Local]


@dataclass(frozen=True)
class GlobalStep:
    kind: StepKind
    successor: Configuration


def successors(c: Configuration, reg: EffectRegistry) -> list[GlobalStep]:
    """All one-step reductions of ``c``, deduplicated up to congruence."""
    delta, p = c.delta, c.protocol
    steps: list[GlobalStep] = []
    seen = set()

    def emit(kind, new_delta, new_p):
        succ = Configuration(new_delta, new_p)
        key = (kind, succ.key())
        if key not in seen:
            seen.add(key)
            steps.append(GlobalStep(kind, succ))

    for rx in enumerate_redexes(p):
        act, me = rx.action, rx.enabler
        s = delta[me]
        if not eval_condition(s, act.out_cond):
            continue
        if act.dir is Direction.SELF:
            if eval_condition(s, act.in_cond):
                emit(Local(me, act.label), delta, apply_redex(p, rx, (me,)))
        elif act.dir is Direction.CHILDREN:
            reactors = tuple(sorted(
                (i for i in children(delta, me) if eval_condition(delta[i], act.in_cond)),
                key=id_sort_key))
            emit(Broadcast(me, reactors, act.label), delta, apply_redex(p, rx, reactors))
        else:
            if act.dir is Direction.PARENT:
                targets = [s.station_parent] if s.station_parent is not None else []
            else:
                targets = sorted(s.neighbors, key=id_sort_key)
            for target in targets:
                if eval_condition(delta[target], act.in_cond):
                    new_delta = apply_update(delta, me, target, act.label, reg)
                    emit(Binary(me, target, act.label), new_delta, apply_redex(p, rx, (target,)))
    return steps


# -- running ------------------------------------------------------------------

Scheduler = Callable[[Sequence[GlobalStep]], int]


def first_scheduler(steps: Sequence[GlobalStep]) -> int:
    return 0


class RandomScheduler:
    """Uniform choice among the enabled steps, reproducible from the seed."""

    def __init__(self, seed: int | None = None):
        self.rng = random.Random(seed)

    def __call__(self, steps: Sequence[GlobalStep]) -> int:
        return self.rng.randrange(len(steps))


@dataclass
class Trace:
    steps: list = field(default_factory=list)
    final: Configuration | None = None
    exhausted: bool = False

    def lines(self) -> list[str]:
        return [str(k) for k in self.steps]


def run(c: Configuration, reg: EffectRegistry, scheduler: Scheduler = first_scheduler,
        max_steps: int = DEFAULT_MAX_STEPS) -> Trace:
    """Follow one path of the reduction relation. ``exhausted`` is True when
    the run stopped because no step was enabled."""
    trace = Trace(final=c)
    for _ in range(max_steps):
        steps = successors(trace.final, reg)
        if not steps:
            trace.exhausted = True
            return trace
        chosen = steps[scheduler(steps)]
        trace.steps.append(chosen.kind)
        trace.final = chosen.successor
    trace.exhausted = not successors(trace.final, reg)
    return trace


# -- exploration --------------------------------------------------------------


@dataclass
class StateGraph:
    configs: list = field(default_factory=list)
    edges: list = field(default_factory=list)  # (src, StepKind, dst)
    terminal: list = field(default_factory=list)
    complete: bool = True  # False when the depth bound cut off expansion

    def terminal_configs(self) -> list[Configuration]:
        return [self.configs[i] for i in self.terminal]

    def edge_lines(self) -> list[str]:
        return [f"{a} {b} {k}" for a, k, b in self.edges]


def explore(c: Configuration, reg: EffectRegistry, depth: int | None = None,
            cap: int | None = None) -> StateGraph:
    """Breadth-first exploration up to ``depth`` steps (unbounded when None).

    Configurations are identified by network state and protocol normal form.
    Raises StateBudgetExceeded when more than ``cap`` states are discovered.
    """
    if depth is not None and depth < 0:
        raise ValueError("depth must be >= 0")
    cap = default_state_cap() if cap is None else cap
    graph = StateGraph(configs=[c])
    index = {c.key(): 0}
    queue = deque([(0, 0)])
    while queue:
        i, d = queue.popleft()
        if depth is not None and d >= depth:
            if successors(graph.configs[i], reg):
                graph.complete = False
            else:
                graph.terminal.append(i)
            continue
        steps = successors(graph.configs[i], reg)
        if not steps:
            graph.terminal.append(i)
        for st in steps:
            key = st.successor.key()
            j = index.get(key)
            if j is None:
                if len(graph.configs) >= cap:
                    raise StateBudgetExceeded(f"more than {cap} configurations")
                j = len(graph.configs)
                index[key] = j
                graph.configs.append(st.successor)
                queue.append((j, d + 1))
            graph.edges.append((i, st.kind, j))
    graph.terminal.sort()
    return graph
