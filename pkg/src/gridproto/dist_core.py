"""Distributed target language: node definitions, their LTS, the network
LTS with broadcast composition, and canonical forms for structural
congruence.

    D ::= [c]f^d?.R | R | D | D        (definitions)
    R ::= C | 0 | R | R                (reactions)
    C ::= [c]f^d! | C + C              (choices)
    N ::= [s]D | N || N                (networks)

Definitions, reactions and choices share one set of constructors; ``Par``
serves both ``D | D`` and ``R | R``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

from .grid_state import (
    And,
    Condition,
    Direction,
    EffectRegistry,
    InvariantViolation,
    NegativeCounter,
    NodeId,
    NodeState,
    enabler_update,
    eval_condition,
    format_condition,
    id_sort_key,
    reactor_update,
)


class DuplicateNodeId(ValueError):
    pass


@dataclass(frozen=True)
class Zero:
    def __str__(self) -> str:
        return "0"


@dataclass(frozen=True)
class Output:
    cond: Condition
    label: str
    dir: Direction

    def __str__(self) -> str:
        return f"[{format_condition(self.cond)}]{self.label}{self.dir.glyph}!"


@dataclass(frozen=True)
class Plus:
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"{self.left} + {self.right}"


@dataclass(frozen=True)
class Par:
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"{_paren(self.left)} | {_paren(self.right)}"


@dataclass(frozen=True)
class Input:
    cond: Condition
    label: str
    dir: Direction
    cont: "Term" = Zero()

    def __str__(self) -> str:
        cont = self.cont
        body = str(cont) if isinstance(cont, (Zero, Output)) else f"({cont})"
        return f"[{format_condition(self.cond)}]{self.label}{self.dir.glyph}?.{body}"


Term = Union[Zero, Output, Plus, Par, Input]
ZERO = Zero()


def _paren(t) -> str:
    return f"({t})" if isinstance(t, Plus) else str(t)


def is_choice(t) -> bool:
    if isinstance(t, Output):
        return True
    return isinstance(t, Plus) and is_choice(t.left) and is_choice(t.right)


def is_reaction(t) -> bool:
    if isinstance(t, Zero) or is_choice(t):
        return True
    return isinstance(t, Par) and is_reaction(t.left) and is_reaction(t.right)


def is_definition(t) -> bool:
    if isinstance(t, Input):
        return is_reaction(t.cont)
    if isinstance(t, Par):
        return is_definition(t.left) and is_definition(t.right)
    return is_reaction(t)


def par(*ts) -> Term:
    if not ts:
        return ZERO
    out = ts[0]
    for t in ts[1:]:
        out = Par(out, t)
    return out


def plus(*ts) -> Term:
    out = ts[0]
    for t in ts[1:]:
        out = Plus(out, t)
    return out


# -- definition LTS -----------------------------------------------------------


@dataclass(frozen=True)
class In:
    cond: Condition
    label: str
    dir: Direction


@dataclass(frozen=True)
class Out:
    cond: Condition
    label: str
    dir: Direction


@dataclass(frozen=True)
class Step:
    cond: Condition
    label: str


DefAction = Union[In, Out, Step]


def def_transitions(d: Term) -> list[tuple[DefAction, Term]]:
    """Transitions of a definition: persistent inputs, outputs, choice,
    interleaving and the pairing of local outputs with local inputs."""
    if isinstance(d, Input):
        return [(In(d.cond, d.label, d.dir), Par(d.cont, d))]
    if isinstance(d, Output):
        return [(Out(d.cond, d.label, d.dir), ZERO)]
    if isinstance(d, Plus):
        return def_transitions(d.left) + def_transitions(d.right)
    if isinstance(d, Par):
        left, right = def_transitions(d.left), def_transitions(d.right)
        out = [(a, Par(l2, d.right)) for a, l2 in left]
        out += [(a, Par(d.left, r2)) for a, r2 in right]
        out += _self_steps(left, right, lambda x, y: Par(x, y))
        out += _self_steps(right, left, lambda x, y: Par(y, x))
        return out
    return []


def _self_steps(outs, ins, rebuild):
    steps = []
    for a, d1 in outs:
        if not (isinstance(a, Out) and a.dir is Direction.SELF):
            continue
        for b, d2 in ins:
            if isinstance(b, In) and b.dir is Direction.SELF and b.label == a.label:
                steps.append((Step(And(a.cond, b.cond), a.label), rebuild(d1, d2)))
    return steps


# -- network labels -----------------------------------------------------------


@dataclass(frozen=True)
class Tau:
    def __str__(self) -> str:
        return "tau"


@dataclass(frozen=True)
class BinOut:
    src: NodeId
    dst: NodeId
    label: str

    def __str__(self) -> str:
        return f"{self.src}->{self.dst}:{self.label}"


@dataclass(frozen=True)
class BinIn:
    at: NodeId
    src: NodeId
    label: str

    def __str__(self) -> str:
        return f"{self.at}<-{self.src}:{self.label}"


@dataclass(frozen=True)
class BrdOut:
    sender: NodeId
    label: str

    def __str__(self) -> str:
        return f"{self.sender}!*:{self.label}"


@dataclass(frozen=True)
class BrdIn:
    sender: NodeId
    label: str

    def __str__(self) -> str:
        return f"{self.sender}?*:{self.label}"


NetLabel = Union[Tau, BinOut, BinIn, BrdOut, BrdIn]
TAU = Tau()


def compose_labels(l1: NetLabel, l2: NetLabel) -> NetLabel | None:
    """The label of a synchronised transition of two parallel networks, or
    None when the two labels cannot synchronise."""
    if isinstance(l1, BinOut) and isinstance(l2, BinIn):
        return TAU if (l2.at, l2.src, l2.label) == (l1.dst, l1.src, l1.label) else None
    if isinstance(l1, BinIn) and isinstance(l2, BinOut):
        return compose_labels(l2, l1)
    if isinstance(l1, BrdOut) and isinstance(l2, BrdIn):
        return l1 if (l1.sender, l1.label) == (l2.sender, l2.label) else None
    if isinstance(l1, BrdIn) and isinstance(l2, BrdOut):
        return compose_labels(l2, l1)
    if isinstance(l1, BrdIn) and l1 == l2:
        return l1
    return None


# -- networks -----------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    state: NodeState
    defs: Term

    @property
    def id(self) -> NodeId:
        return self.state.id


@dataclass(frozen=True)
class Compose:
    left: "Network"
    right: "Network"


Network = Union[Node, Compose]


def network_of(nodes) -> Network:
    nodes = list(nodes)
    if not nodes:
        raise ValueError("a network has at least one node")
    out = nodes[0]
    for n in nodes[1:]:
        out = Compose(out, n)
    return out


def nodes_of(n: Network) -> list[Node]:
    if isinstance(n, Node):
        return [n]
    return nodes_of(n.left) + nodes_of(n.right)


def _broadcast_options(node: Node, sender: NodeId, label: str) -> list[Node]:
    """Successors of ``node`` on a broadcast of ``label`` from ``sender``:
    every enabled receive, or the node unchanged when none is enabled."""
    if node.id == sender:
        raise ValueError(f"node {sender} cannot receive its own broadcast")
    s = node.state
    received = []
    if s.parent == sender:
        for a, d2 in def_transitions(node.defs):
            if (isinstance(a, In) and a.dir is Direction.CHILDREN and a.label == label
                    and eval_condition(s, a.cond)):
                received.append(Node(s, d2))
    return received or [node]


def discards(node: Node, sender: NodeId, label: str) -> bool:
    s = node.state
    if s.parent != sender:
        return True
    return not any(
        isinstance(a, In) and a.dir is Direction.CHILDREN and a.label == label
        and eval_condition(s, a.cond)
        for a, _ in def_transitions(node.defs))


def node_transitions(node: Node, reg: EffectRegistry, peers=(), labels=()) -> list[tuple[NetLabel, Node]]:
    """Transitions of a single node.

    Output-side transitions need no context. Binary inputs and broadcast
    receptions are reported for each sender in ``peers``; broadcast
    stimuli cover the labels of the node's own inputs plus ``labels``, and
    fall back to a discard when no receive is enabled.
    """
    s, me = node.state, node.id
    out: list[tuple[NetLabel, Node]] = []
    bin_inputs = []
    brd_labels = set(labels)
    for a, d2 in def_transitions(node.defs):
        if isinstance(a, Step):
            if eval_condition(s, a.cond):
                out.append((TAU, Node(s, d2)))
        elif isinstance(a, Out):
            if not eval_condition(s, a.cond):
                continue
            if a.dir is Direction.PARENT and s.station_parent is not None:
                dst = s.station_parent
                out.append((BinOut(me, dst, a.label), Node(enabler_update(s, a.label, dst, reg), d2)))
            elif a.dir is Direction.NEIGHBOR:
                for dst in sorted(s.neighbors, key=id_sort_key):
                    out.append((BinOut(me, dst, a.label), Node(enabler_update(s, a.label, dst, reg), d2)))
            elif a.dir is Direction.CHILDREN:
                out.append((BrdOut(me, a.label), Node(s, d2)))
        elif isinstance(a, In):
            if a.dir.is_binary and eval_condition(s, a.cond):
                bin_inputs.append((a, d2))
            elif a.dir is Direction.CHILDREN:
                brd_labels.add(a.label)
    for peer in peers:
        if peer == me:
            continue
        for a, d2 in bin_inputs:
            out.append((BinIn(me, peer, a.label), Node(reactor_update(s, a.label, peer, reg), d2)))
        for label in sorted(brd_labels):
            for n2 in _broadcast_options(node, peer, label):
                out.append((BrdIn(peer, label), n2))
    return out


def _binary_inputs(node: Node, src: NodeId, label: str, reg: EffectRegistry) -> list[Node]:
    s = node.state
    return [
        Node(reactor_update(s, label, src, reg), d2)
        for a, d2 in def_transitions(node.defs)
        if isinstance(a, In) and a.dir.is_binary and a.label == label and eval_condition(s, a.cond)
    ]


def network_transitions(n: Network, reg: EffectRegistry) -> list[tuple[NetLabel, Network]]:
    """Transitions of a closed network.

    Local steps and unmatched binary halves interleave; matched binary
    halves synchronise into tau; a broadcast carries every other node along,
    each one receiving or discarding.
    """
    nodes = nodes_of(n)
    ids = [x.id for x in nodes]
    if len(set(ids)) != len(ids):
        raise DuplicateNodeId(f"duplicate node ids in {ids}")
    pos = {x.id: i for i, x in enumerate(nodes)}

    def rebuild(changes: dict) -> Network:
        return network_of(changes.get(i, x) for i, x in enumerate(nodes))

    out: list[tuple[NetLabel, Network]] = []
    for i, node in enumerate(nodes):
        for lab, n2 in node_transitions(node, reg):
            if isinstance(lab, Tau):
                out.append((lab, rebuild({i: n2})))
            elif isinstance(lab, BinOut):
                out.append((lab, rebuild({i: n2})))
                j = pos.get(lab.dst)
                if j is None:
                    continue
                for m2 in _binary_inputs(nodes[j], node.id, lab.label, reg):
                    out.append((TAU, rebuild({i: n2, j: m2})))
            elif isinstance(lab, BrdOut):
                others = [j for j in range(len(nodes)) if j != i]
                options = [_broadcast_options(nodes[j], node.id, lab.label) for j in others]
                for combo in itertools.product(*options):
                    changes = dict(zip(others, combo))
                    changes[i] = n2
                    out.append((lab, rebuild(changes)))
        # unmatched input halves; a half whose effect is undefined for that
        # peer does not exist
        for peer in ids:
            if peer == node.id:
                continue
            for a, d2 in def_transitions(node.defs):
                if isinstance(a, In) and a.dir.is_binary and eval_condition(node.state, a.cond):
                    try:
                        m2 = Node(reactor_update(node.state, a.label, peer, reg), d2)
                    except (NegativeCounter, InvariantViolation):
                        continue
                    out.append((BinIn(node.id, peer, a.label), rebuild({i: m2})))
    return out


def observable_transitions(n: Network, reg: EffectRegistry) -> list[tuple[NetLabel, Network]]:
    return [(lab, n2) for lab, n2 in network_transitions(n, reg) if isinstance(lab, (Tau, BrdOut))]


# -- structural congruence ----------------------------------------------------


def _output_key(o: Output) -> tuple:
    return ("!", o.label, o.dir.glyph, format_condition(o.cond))


def _choice_key(c) -> tuple:
    if isinstance(c, Output):
        return (_output_key(c),)
    return tuple(sorted(_choice_key(c.left) + _choice_key(c.right)))


def _collect(t, inputs: set, choices: list):
    if isinstance(t, Zero):
        return
    if isinstance(t, Par):
        _collect(t.left, inputs, choices)
        _collect(t.right, inputs, choices)
    elif isinstance(t, Input):
        sub_in: set = set()
        sub_ch: list = []
        _collect(t.cont, sub_in, sub_ch)
        if sub_in:
            raise TypeError("input continuations must be reactions")
        inputs.add(("?", t.label, t.dir.glyph, format_condition(t.cond), tuple(sorted(sub_ch))))
    else:
        choices.append(_choice_key(t))


def canonicalize(t: Term) -> tuple:
    """Canonical form of a definition: (sorted distinct inputs, sorted
    multiset of choices). Equal forms <=> congruent terms."""
    inputs: set = set()
    choices: list = []
    _collect(t, inputs, choices)
    return (tuple(sorted(inputs)), tuple(sorted(choices)))


def canonicalize_network(n: Network) -> tuple:
    nodes = sorted(nodes_of(n), key=lambda x: id_sort_key(x.id))
    return tuple((x.state.key(), canonicalize(x.defs)) for x in nodes)


def _rebuild_choice(key) -> Term:
    return plus(*(Output(_cond(k[3]), k[1], Direction(k[2])) for k in key))


_COND_CACHE: dict = {}


def _cond(text: str) -> Condition:
    # canonical keys store printed conditions; reparse them on demand
    from .formats import parse_condition

    if text not in _COND_CACHE:
        _COND_CACHE[text] = parse_condition(text)
    return _COND_CACHE[text]


def from_canonical(key) -> Term:
    inputs, choices = key
    parts = [Input(_cond(k[3]), k[1], Direction(k[2]), par(*(_rebuild_choice(c) for c in k[4])) if k[4] else ZERO)
             for k in inputs]
    parts += [_rebuild_choice(c) for c in choices]
    return par(*parts) if parts else ZERO


def normalize(t: Term) -> Term:
    """The canonical representative of ``t``'s congruence class."""
    return from_canonical(canonicalize(t))


def format_definition(t: Term) -> str:
    """Print the normalized definition, one parallel component per ``|``."""
    inputs, choices = canonicalize(t)
    parts = [str(Input(_cond(k[3]), k[1], Direction(k[2]),
                       par(*(_rebuild_choice(c) for c in k[4])) if k[4] else ZERO)) for k in inputs]
    parts += [_paren(_rebuild_choice(c)) for c in choices]
    return " | ".join(parts) if parts else "0"
