"""Substation registers, the condition language, direction resolution and
side effects of binary synchronisations.

A substation register is ``<id, (parent, t), n, k, a, e>``:

    parent   the power provider (a station id, ``Z`` when disconnected,
             ``INF`` for a primary station)
    t        status of the input link (0 = faulty)
    n        neighbour ids
    k        supply capacity
    a        number of active output links
    e        number of faulty output links
"""

from __future__ import annotations

import enum
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field, replace
from typing import Union

NodeId = str


class GridError(Exception):
    """Base class for errors raised by the grid model."""


class InvariantViolation(GridError, ValueError):
    pass


class NegativeCounter(GridError, ArithmeticError):
    pass


class UnknownNode(GridError, KeyError):
    pass


class ConditionTypeError(GridError, TypeError):
    pass


class Special(enum.Enum):
    Z = "z"
    INF = "inf"

    def __str__(self) -> str:
        return self.value


Z = Special.Z
INF = Special.INF

ParentRef = Union[NodeId, Special]

RESERVED_IDS = frozenset({"z", "inf"})


def id_sort_key(node_id: NodeId):
    """Numeric ids first, in numeric order, then the rest alphabetically."""
    return (0, int(node_id), "") if node_id.isdigit() else (1, 0, node_id)


def parent_str(parent: ParentRef) -> str:
    return str(parent)


class Direction(enum.Enum):
    CHILDREN = "*"
    PARENT = "^"
    NEIGHBOR = ">"
    SELF = "@"

    @property
    def glyph(self) -> str:
        return self.value

    @property
    def is_binary(self) -> bool:
        return self in (Direction.PARENT, Direction.NEIGHBOR)

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class NodeState:
    id: NodeId
    parent: ParentRef
    t: int = 1
    neighbors: frozenset = frozenset()
    k: int = 0
    a: int = 0
    e: int = 0

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "neighbors", frozenset(str(n) for n in self.neighbors))
        if not self.id:
            raise InvariantViolation("node id must be nonempty")
        if self.id in RESERVED_IDS:
            raise InvariantViolation(f"node id {self.id!r} is reserved")
        if not isinstance(self.parent, Special):
            object.__setattr__(self, "parent", str(self.parent))
            if self.parent == self.id:
                raise InvariantViolation(f"node {self.id} cannot be its own parent")
        if self.t not in (0, 1):
            raise InvariantViolation(f"node {self.id}: t must be 0 or 1, got {self.t}")
        for name in ("k", "a", "e"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise InvariantViolation(f"node {self.id}: {name} must be a natural, got {value!r}")
        if self.e > self.k:
            raise InvariantViolation(f"node {self.id}: e={self.e} exceeds k={self.k}")
        if self.a > self.k:
            raise InvariantViolation(f"node {self.id}: a={self.a} exceeds k={self.k}")
        if self.id in self.neighbors:
            raise InvariantViolation(f"node {self.id} lists itself as a neighbour")

    @property
    def station_parent(self) -> NodeId | None:
        return None if isinstance(self.parent, Special) else self.parent

    def key(self) -> tuple:
        return (
            self.id,
            parent_str(self.parent),
            self.t,
            tuple(sorted(self.neighbors, key=id_sort_key)),
            self.k,
            self.a,
            self.e,
        )

    def __str__(self) -> str:
        ns = ",".join(sorted(self.neighbors, key=id_sort_key))
        return f"<{self.id},({self.parent},{self.t}),{{{ns}}},{self.k},{self.a},{self.e}>"


class NetworkState(Mapping):
    """Immutable mapping from node ids to registers."""

    __slots__ = ("_nodes", "_hash")

    def __init__(self, nodes: Mapping[NodeId, NodeState] | list[NodeState] = ()):
        if isinstance(nodes, Mapping):
            items = dict(nodes)
        else:
            items = {}
            for s in nodes:
                if s.id in items:
                    raise InvariantViolation(f"duplicate node id {s.id}")
                items[s.id] = s
        for node_id, state in items.items():
            if state.id != node_id:
                raise InvariantViolation(f"entry {node_id} holds the register of {state.id}")
        for state in items.values():
            parent = state.station_parent
            if parent is not None and parent not in items:
                raise InvariantViolation(f"node {state.id}: unknown parent {parent}")
            for n in state.neighbors:
                if n not in items:
                    raise InvariantViolation(f"node {state.id}: unknown neighbour {n}")
        self._nodes = items
        self._hash = None

    def __getitem__(self, node_id: NodeId) -> NodeState:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def __iter__(self) -> Iterator[NodeId]:
        return iter(sorted(self._nodes, key=id_sort_key))

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other) -> bool:
        if isinstance(other, NetworkState):
            return self._nodes == other._nodes
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._nodes.items()))
        return self._hash

    def __repr__(self) -> str:
        return "NetworkState(" + ", ".join(str(self[i]) for i in self) + ")"

    def updated(self, *states: NodeState) -> NetworkState:
        nodes = dict(self._nodes)
        for s in states:
            if s.id not in nodes:
                raise UnknownNode(s.id)
            nodes[s.id] = s
        return NetworkState(nodes)

    def key(self) -> tuple:
        return tuple(self[i].key() for i in self)


# -- conditions ---------------------------------------------------------------

NUMERIC_FIELDS = ("t", "k", "a", "e")
FIELDS = NUMERIC_FIELDS + ("parent",)
COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Field:
    name: str

    def __post_init__(self):
        if self.name not in FIELDS:
            raise ConditionTypeError(f"unknown register field {self.name!r}")

    @property
    def numeric(self) -> bool:
        return self.name != "parent"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Nat:
    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or self.value < 0:
            raise ConditionTypeError(f"not a natural: {self.value!r}")

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class NodeLit:
    value: NodeId

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SpecialLit:
    value: Special

    def __str__(self) -> str:
        return str(self.value)


Expr = Union[Field, Nat, NodeLit, SpecialLit]


def _is_numeric(x: Expr) -> bool:
    return isinstance(x, Nat) or (isinstance(x, Field) and x.numeric)


def _is_parent_side(x: Expr) -> bool:
    return isinstance(x, (NodeLit, SpecialLit)) or (isinstance(x, Field) and not x.numeric)


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Cmp:
    lhs: Expr
    op: str
    rhs: Expr

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ConditionTypeError(f"unknown comparison {self.op!r}")
        if _is_numeric(self.lhs) and _is_numeric(self.rhs):
            return
        if _is_parent_side(self.lhs) and _is_parent_side(self.rhs):
            if self.op not in ("==", "!="):
                raise ConditionTypeError(f"parent can only be compared with == or !=, got {self.op}")
            return
        raise ConditionTypeError(f"ill-typed comparison {self.lhs} {self.op} {self.rhs}")

    def __str__(self) -> str:
        return f"{self.lhs}{self.op}{self.rhs}"


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"

    def __str__(self) -> str:
        return f"{_wrap(self.left, Or)} and {_wrap(self.right, (Or, And))}"


@dataclass(frozen=True)
class Or:
    left: "Condition"
    right: "Condition"

    def __str__(self) -> str:
        return f"{self.left} or {_wrap(self.right, Or)}"


@dataclass(frozen=True)
class Not:
    operand: "Condition"

    def __str__(self) -> str:
        return f"not {_wrap(self.operand, (And, Or))}"


Condition = Union[Const, Cmp, And, Or, Not]

TRUE = Const(True)
FALSE = Const(False)


def _wrap(c, kinds) -> str:
    return f"({c})" if isinstance(c, kinds) else str(c)


def format_condition(c: Condition) -> str:
    return str(c)


def _value(s: NodeState, x: Expr):
    if isinstance(x, Field):
        return s.parent if x.name == "parent" else getattr(s, x.name)
    if isinstance(x, Nat):
        return x.value
    if isinstance(x, SpecialLit):
        return x.value
    return x.value


def eval_condition(s: NodeState, c: Condition) -> bool:
    """Decide ``s |= c``."""
    if isinstance(c, Const):
        return c.value
    if isinstance(c, And):
        return eval_condition(s, c.left) and eval_condition(s, c.right)
    if isinstance(c, Or):
        return eval_condition(s, c.left) or eval_condition(s, c.right)
    if isinstance(c, Not):
        return not eval_condition(s, c.operand)
    lhs, rhs = _value(s, c.lhs), _value(s, c.rhs)
    op = c.op
    if op == "==":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == ">":
        return lhs > rhs
    return lhs >= rhs


# -- directions ---------------------------------------------------------------


class _SelfTarget:
    def __repr__(self) -> str:
        return "SELF_TARGET"


SELF_TARGET = _SelfTarget()


def children(delta: NetworkState, node_id: NodeId) -> frozenset:
    return frozenset(i for i in delta if delta[i].parent == node_id)


def resolve_direction(d: Direction, delta: NetworkState, node_id: NodeId):
    """Recipients of an action with direction ``d`` enabled by ``node_id``.

    Returns a frozenset of ids, or ``SELF_TARGET`` for local steps. A
    neighbour direction returns all neighbours; each one is a separate
    nondeterministic choice.
    """
    s = delta[node_id]
    if d is Direction.SELF:
        return SELF_TARGET
    if d is Direction.PARENT:
        parent = s.station_parent
        return frozenset() if parent is None else frozenset({parent})
    if d is Direction.NEIGHBOR:
        return s.neighbors
    return children(delta, node_id)


# -- side effects -------------------------------------------------------------

OTHER = "other"


@dataclass(frozen=True)
class Assignment:
    """One side-effect assignment.

    ``op`` is one of ``set_parent`` (value ``other`` or ``z``), ``set_t``
    (0 or 1), ``inc``/``dec`` (field k, a or e) and
    ``neighbors_add``/``neighbors_remove`` (value ``other``).
    """

    op: str
    field: str = ""
    value: object = None

    def __post_init__(self):
        ok = {
            "set_parent": self.value in (OTHER, Z),
            "set_t": self.value in (0, 1),
            "inc": self.field in ("k", "a", "e"),
            "dec": self.field in ("k", "a", "e"),
            "neighbors_add": self.value == OTHER,
            "neighbors_remove": self.value == OTHER,
        }
        if not ok.get(self.op, False):
            raise ValueError(f"malformed assignment {self!r}")

    def __str__(self) -> str:
        if self.op == "set_parent":
            return f"parent := {self.value}"
        if self.op == "set_t":
            return f"t := {self.value}"
        if self.op in ("inc", "dec"):
            return f"{self.field} {'+=' if self.op == 'inc' else '-='} 1"
        return f"neighbors {'+=' if self.op == 'neighbors_add' else '-='} other"


@dataclass(frozen=True)
class EffectSpec:
    enabler: tuple = ()
    reactor: tuple = ()


NO_EFFECT = EffectSpec()


@dataclass(frozen=True)
class EffectRegistry:
    effects: Mapping = field(default_factory=dict)

    def __getitem__(self, label: str) -> EffectSpec:
        return self.effects.get(label, NO_EFFECT)

    def labels(self) -> list[str]:
        return sorted(self.effects)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.effects.items())))


EMPTY_REGISTRY = EffectRegistry()


def apply_assignments(s: NodeState, assignments, other: NodeId) -> NodeState:
    """Apply assignments left to right; register invariants are checked on
    the final state only."""
    vals = {
        "parent": s.parent,
        "t": s.t,
        "neighbors": set(s.neighbors),
        "k": s.k,
        "a": s.a,
        "e": s.e,
    }
    for asg in assignments:
        if asg.op == "set_parent":
            vals["parent"] = other if asg.value == OTHER else Z
        elif asg.op == "set_t":
            vals["t"] = asg.value
        elif asg.op == "inc":
            vals[asg.field] += 1
        elif asg.op == "dec":
            if vals[asg.field] == 0:
                raise NegativeCounter(f"node {s.id}: {asg.field} -= 1 underflows")
            vals[asg.field] -= 1
        elif asg.op == "neighbors_add":
            vals["neighbors"].add(other)
        else:
            vals["neighbors"].discard(other)
    return replace(s, parent=vals["parent"], t=vals["t"], neighbors=frozenset(vals["neighbors"]),
                   k=vals["k"], a=vals["a"], e=vals["e"])


def enabler_update(s: NodeState, label: str, reactor: NodeId, reg: EffectRegistry) -> NodeState:
    return apply_assignments(s, reg[label].enabler, reactor)


def reactor_update(s: NodeState, label: str, enabler: NodeId, reg: EffectRegistry) -> NodeState:
    return apply_assignments(s, reg[label].reactor, enabler)


def apply_update(delta: NetworkState, enabler: NodeId, reactor: NodeId, label: str,
                 reg: EffectRegistry) -> NetworkState:
    """``upd(enabler, reactor, f, delta)``: side effects of a binary synchronisation."""
    if enabler == reactor:
        raise ValueError("enabler and reactor must differ")
    s1 = enabler_update(delta[enabler], label, reactor, reg)
    s2 = reactor_update(delta[reactor], label, enabler, reg)
    return delta.updated(s1, s2)
