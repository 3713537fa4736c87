"""Random well-formed terms, networks and configurations for the property
suites, plus single-axiom rewriters for both congruences."""

from __future__ import annotations

import random

from gridproto import dist_core as dc
from gridproto.global_ast import NIL, Active, Fork, Nil, Rec, Sum, SyncAction, Var, activate, unfold
from gridproto.global_semantics import Configuration
from gridproto.grid_state import (
    INF,
    OTHER,
    TRUE,
    Z,
    And,
    Assignment,
    Cmp,
    Direction,
    EffectRegistry,
    EffectSpec,
    Field,
    Nat,
    NetworkState,
    NodeState,
    Not,
    Or,
    SpecialLit,
)

DIRECTIONS = list(Direction)

_ATOMS = [
    TRUE,
    Cmp(Field("e"), ">", Nat(0)),
    Cmp(Field("t"), "==", Nat(0)),
    Cmp(Field("t"), "==", Nat(1)),
    Cmp(Field("k"), ">", Field("a")),
    Cmp(Field("parent"), "!=", SpecialLit(INF)),
    Cmp(Field("parent"), "==", SpecialLit(Z)),
]


def random_condition(rng: random.Random, depth: int = 2):
    r = rng.random()
    if depth <= 0 or r < 0.6:
        return rng.choice(_ATOMS)
    if r < 0.75:
        return Not(random_condition(rng, depth - 1))
    if r < 0.88:
        return And(random_condition(rng, depth - 1), random_condition(rng, depth - 1))
    return Or(random_condition(rng, depth - 1), random_condition(rng, depth - 1))


class ProtocolGen:
    """Random closed protocols with unique labels and binders and guarded
    recursion. Conditions lean towards ``true`` so that steps happen."""

    def __init__(self, rng: random.Random, labels: int = 0):
        self.rng = rng
        self.labels = labels
        self.binders = 0

    def fresh_label(self) -> str:
        self.labels += 1
        return f"L{self.labels}"

    def fresh_var(self) -> str:
        self.binders += 1
        return f"X{self.binders}"

    def cond(self):
        return TRUE if self.rng.random() < 0.5 else random_condition(self.rng)

    def summation(self, depth, bound, pending):
        n = self.rng.choice((1, 1, 2, 3))
        inner = bound | pending
        return Sum(tuple(
            SyncAction(self.fresh_label(), self.rng.choice(DIRECTIONS), self.cond(), self.cond(),
                       self.protocol(depth - 1, inner, frozenset()))
            for _ in range(n)))

    def protocol(self, depth: int, bound=frozenset(), pending=frozenset()):
        rng = self.rng
        if depth <= 0:
            if bound and rng.random() < 0.5:
                return Var(rng.choice(sorted(bound)))
            return NIL
        r = rng.random()
        if r < 0.1:
            return NIL
        if r < 0.2 and bound:
            return Var(rng.choice(sorted(bound)))
        if r < 0.35:
            return Fork(self.protocol(depth - 1, bound, pending), self.protocol(depth - 1, bound, pending))
        if r < 0.55:
            x = self.fresh_var()
            return Rec(x, self.protocol(depth - 1, bound, pending | {x}))
        return self.summation(depth, bound, pending)


def random_protocol(rng: random.Random, depth: int = 4):
    return ProtocolGen(rng).protocol(depth)


def random_recursion(rng: random.Random, depth: int = 4):
    gen = ProtocolGen(rng)
    x = gen.fresh_var()
    return Rec(x, gen.summation(depth, frozenset(), frozenset({x})))


def random_network(rng: random.Random, size: int | None = None) -> NetworkState:
    size = size or rng.randint(2, 4)
    ids = [str(i) for i in range(1, size + 1)]
    parents = {"1": INF}
    for i in ids[1:]:
        r = rng.random()
        parents[i] = Z if r < 0.1 else INF if r < 0.2 else rng.choice(ids[: ids.index(i)])
    links = {i: set() for i in ids}
    for i, p in parents.items():
        if p not in (Z, INF):
            links[i].add(p)
            links[p].add(i)
    for _ in range(rng.randint(0, size)):
        a, b = rng.sample(ids, 2)
        links[a].add(b)
        links[b].add(a)
    states = []
    for i in ids:
        k = rng.randint(0, 3)
        states.append(NodeState(i, parents[i], t=rng.randint(0, 1), neighbors=frozenset(links[i]),
                                k=k, a=rng.randint(0, k), e=rng.randint(0, k)))
    return NetworkState(states)


_SAFE_ASSIGNMENTS = [
    Assignment("set_parent", value=OTHER),
    Assignment("set_parent", value=Z),
    Assignment("set_t", value=0),
    Assignment("set_t", value=1),
    Assignment("neighbors_add", value=OTHER),
    Assignment("neighbors_remove", value=OTHER),
]


def random_effects(rng: random.Random, labels) -> EffectRegistry:
    """Effects that can never fail: no counter arithmetic."""
    effects = {}
    for label in labels:
        if rng.random() < 0.5:
            effects[label] = EffectSpec(
                tuple(rng.sample(_SAFE_ASSIGNMENTS, rng.randint(0, 2))),
                tuple(rng.sample(_SAFE_ASSIGNMENTS, rng.randint(0, 2))))
    return EffectRegistry(effects)


def random_configuration(rng: random.Random, depth: int = 4):
    """A configuration ``<Delta, <ids>P>`` with random effects."""
    from gridproto.global_ast import action_labels

    delta = random_network(rng)
    p = random_protocol(rng, depth)
    ids = rng.sample(list(delta), rng.randint(1, min(2, len(delta))))
    p = activate(ids, p)
    return Configuration(delta, p), random_effects(rng, action_labels(p))


# -- single axiom applications: global protocols ------------------------------


def _positions(p, path=()):
    yield path, p
    if isinstance(p, Fork):
        yield from _positions(p.left, path + ("L",))
        yield from _positions(p.right, path + ("R",))
    elif isinstance(p, (Rec, Active)):
        yield from _positions(p.body, path + ("B",))
    elif isinstance(p, Sum):
        for j, b in enumerate(p.branches):
            yield from _positions(b.cont, path + (j,))


def _replace(p, path, new):
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == "L":
        return Fork(_replace(p.left, rest, new), p.right)
    if step == "R":
        return Fork(p.left, _replace(p.right, rest, new))
    if step == "B":
        if isinstance(p, Rec):
            return Rec(p.var, _replace(p.body, rest, new))
        return Active(p.id, _replace(p.body, rest, new))
    branches = list(p.branches)
    branches[step] = branches[step].with_cont(_replace(branches[step].cont, rest, new))
    return Sum(tuple(branches))


def _under_rec(path, p) -> bool:
    q = p
    for step in path:
        if isinstance(q, Rec):
            return True
        if step == "L":
            q = q.left
        elif step == "R":
            q = q.right
        elif step == "B":
            q = q.body
        else:
            q = q.branches[step].cont
    return False


def global_rewrites(p, active_ids=("1",)):
    """All single Table-2 axiom applications at any position of ``p``, as
    (axiom name, rewritten protocol). Actives are only introduced outside
    recursion bodies."""
    out = []
    for path, q in _positions(p):
        def put(name, new, path=path):
            out.append((name, _replace(p, path, new)))

        in_rec = _under_rec(path, p)
        put("par-unit-intro", Fork(q, NIL))
        if isinstance(q, Fork):
            put("par-comm", Fork(q.right, q.left))
            if isinstance(q.right, Nil):
                put("par-unit-elim", q.left)
            if isinstance(q.left, Fork):
                put("par-assoc", Fork(q.left.left, Fork(q.left.right, q.right)))
            if isinstance(q.right, Fork):
                put("par-assoc-rev", Fork(Fork(q.left, q.right.left), q.right.right))
        if isinstance(q, Sum) and len(q.branches) > 1:
            bs = list(q.branches)
            bs[0], bs[-1] = bs[-1], bs[0]
            put("sum-comm", Sum(tuple(bs)))
        if isinstance(q, Rec):
            put("unfold", unfold(q))
        if isinstance(q, Active):
            if isinstance(q.body, Fork):
                put("active-dist", Fork(Active(q.id, q.body.left), Active(q.id, q.body.right)))
            if isinstance(q.body, Active):
                put("active-swap", Active(q.body.id, Active(q.id, q.body.body)))
        if isinstance(q, Fork) and isinstance(q.left, Active) and isinstance(q.right, Active) \
                and q.left.id == q.right.id:
            put("active-undist", Active(q.left.id, Fork(q.left.body, q.right.body)))
        if not in_rec:
            for node in active_ids:
                if isinstance(q, Nil):
                    put("active-nil-intro", Active(node, NIL))
        if isinstance(q, Active) and isinstance(q.body, Nil):
            put("active-nil-elim", NIL)
    return out


# -- single axiom applications: definitions and networks ----------------------


def random_choice(rng: random.Random, labels=("f", "g", "h")):
    n = rng.randint(1, 3)
    return dc.plus(*(dc.Output(rng.choice(_ATOMS), rng.choice(labels), rng.choice(DIRECTIONS))
                     for _ in range(n)))


def random_reaction(rng: random.Random, depth: int = 2):
    r = rng.random()
    if depth <= 0 or r < 0.2:
        return dc.ZERO if rng.random() < 0.3 else random_choice(rng)
    if r < 0.6:
        return random_choice(rng)
    return dc.Par(random_reaction(rng, depth - 1), random_reaction(rng, depth - 1))


def random_definition(rng: random.Random, depth: int = 3):
    r = rng.random()
    if depth <= 0 or r < 0.25:
        return random_reaction(rng, 1)
    if r < 0.6:
        return dc.Input(rng.choice(_ATOMS), rng.choice(("f", "g", "h")), rng.choice(DIRECTIONS),
                        random_reaction(rng, 2))
    return dc.Par(random_definition(rng, depth - 1), random_definition(rng, depth - 1))


def _def_positions(t, path=()):
    yield path, t
    if isinstance(t, (dc.Par, dc.Plus)):
        yield from _def_positions(t.left, path + ("L",))
        yield from _def_positions(t.right, path + ("R",))
    elif isinstance(t, dc.Input):
        yield from _def_positions(t.cont, path + ("C",))


def _def_replace(t, path, new):
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == "C":
        return dc.Input(t.cond, t.label, t.dir, _def_replace(t.cont, rest, new))
    if step == "L":
        return type(t)(_def_replace(t.left, rest, new), t.right)
    return type(t)(t.left, _def_replace(t.right, rest, new))


def definition_rewrites(t):
    """All single Table-8 axiom applications inside a definition."""
    out = []
    for path, q in _def_positions(t):
        def put(name, new, path=path):
            out.append((name, _def_replace(t, path, new)))

        if not path or path[-1] == "C" or _parent_is_par(t, path):
            put("par-unit-intro", dc.Par(q, dc.ZERO))
        for cls, tag in ((dc.Par, "par"), (dc.Plus, "sum")):
            if isinstance(q, cls):
                put(f"{tag}-comm", cls(q.right, q.left))
                if isinstance(q.left, cls):
                    put(f"{tag}-assoc", cls(q.left.left, cls(q.left.right, q.right)))
                if isinstance(q.right, cls):
                    put(f"{tag}-assoc-rev", cls(cls(q.left, q.right.left), q.right.right))
        if isinstance(q, dc.Par) and isinstance(q.right, dc.Zero):
            put("par-unit-elim", q.left)
        if isinstance(q, dc.Input):
            put("absorb-intro", dc.Par(q, q))
        if isinstance(q, dc.Par) and isinstance(q.left, dc.Input) and q.left == q.right:
            put("absorb-elim", q.left)
    return out


def _parent_is_par(t, path) -> bool:
    q = t
    for step in path[:-1]:
        q = q.cont if step == "C" else q.left if step == "L" else q.right
    return isinstance(q, dc.Par)


def network_rewrites(n):
    """Commutativity and associativity of node composition, at the root."""
    out = []
    if isinstance(n, dc.Compose):
        out.append(("net-comm", dc.Compose(n.right, n.left)))
        if isinstance(n.left, dc.Compose):
            out.append(("net-assoc", dc.Compose(n.left.left, dc.Compose(n.left.right, n.right))))
        if isinstance(n.right, dc.Compose):
            out.append(("net-assoc-rev", dc.Compose(dc.Compose(n.left, n.right.left), n.right.right)))
    return out
