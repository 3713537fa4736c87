"""Global protocols: syntax, well-formedness, substitution and the
congruence-aware views used by the reduction semantics.

    P ::= 0 | P | P | rec X.P | X | S | <id>P
    S ::= f^d<o,i>.P | S + S

Summations are stored flat (a tuple of branches), so associativity of ``+``
is built in.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Union

from .grid_state import TRUE, Condition, Direction, NodeId, format_condition, id_sort_key


class NotARecursion(ValueError):
    pass


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class Fork:
    left: "Protocol"
    right: "Protocol"


@dataclass(frozen=True)
class Rec:
    var: str
    body: "Protocol"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class SyncAction:
    label: str
    dir: Direction
    out_cond: Condition = TRUE
    in_cond: Condition = TRUE
    cont: "Protocol" = Nil()

    def with_cont(self, cont: "Protocol") -> "SyncAction":
        return SyncAction(self.label, self.dir, self.out_cond, self.in_cond, cont)


@dataclass(frozen=True)
class Sum:
    branches: tuple

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise ValueError("a summation needs at least one branch")
        for b in self.branches:
            if not isinstance(b, SyncAction):
                raise TypeError(f"summation branches must be actions, got {type(b).__name__}")


@dataclass(frozen=True)
class Active:
    id: NodeId
    body: "Protocol"


Protocol = Union[Nil, Fork, Rec, Var, Sum, Active]

NIL = Nil()


def action(label, dir, out_cond=TRUE, in_cond=TRUE, cont=NIL) -> Sum:
    """A single-branch summation ``label^dir<out_cond,in_cond>.cont``."""
    return Sum((SyncAction(label, dir, out_cond, in_cond, cont),))


def choice(*sums: Sum) -> Sum:
    return Sum(tuple(b for s in sums for b in s.branches))


def fork(*ps: Protocol) -> Protocol:
    if not ps:
        return NIL
    out = ps[0]
    for p in ps[1:]:
        out = Fork(out, p)
    return out


def activate(ids, p: Protocol) -> Protocol:
    """Wrap ``p`` in ``<id>`` for each id; ``<id>0`` collapses to ``0``."""
    if isinstance(p, Nil):
        return p
    for node_id in reversed(tuple(ids)):
        p = Active(node_id, p)
    return p


# -- well-formedness ----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str

    def __str__(self) -> str:
        return f"{self.kind}({self.subject})"


def _walk(p: Protocol) -> Iterator[Protocol]:
    yield p
    if isinstance(p, Fork):
        yield from _walk(p.left)
        yield from _walk(p.right)
    elif isinstance(p, (Rec, Active)):
        yield from _walk(p.body)
    elif isinstance(p, Sum):
        for b in p.branches:
            yield from _walk(b.cont)


def action_labels(p: Protocol) -> list[str]:
    """Labels of all actions in the static text, with repetitions."""
    return [b.label for q in _walk(p) if isinstance(q, Sum) for b in q.branches]


def active_ids(p: Protocol) -> list[NodeId]:
    return [q.id for q in _walk(p) if isinstance(q, Active)]


def free_vars(p: Protocol) -> frozenset:
    if isinstance(p, Var):
        return frozenset({p.name})
    if isinstance(p, Fork):
        return free_vars(p.left) | free_vars(p.right)
    if isinstance(p, Rec):
        return free_vars(p.body) - {p.var}
    if isinstance(p, Active):
        return free_vars(p.body)
    if isinstance(p, Sum):
        out = frozenset()
        for b in p.branches:
            out |= free_vars(b.cont)
        return out
    return frozenset()


def well_formed(p: Protocol, static: bool = True) -> list[Violation]:
    """All well-formedness violations of ``p`` (empty when well formed).

    ``static=True`` is for authored input: active constructs may only form a
    prefix chain at the top of the term. Runtime terms produced by reduction
    pass ``static=False``.
    """
    violations: list[Violation] = []

    def check(q, bound, unguarded, in_rec, top):
        if isinstance(q, Var):
            if q.name not in bound:
                violations.append(Violation("UnboundVariable", q.name))
            elif q.name in unguarded:
                violations.append(Violation("UnguardedRecursion", q.name))
        elif isinstance(q, Fork):
            check(q.left, bound, unguarded, in_rec, False)
            check(q.right, bound, unguarded, in_rec, False)
        elif isinstance(q, Rec):
            check(q.body, bound | {q.var}, unguarded | {q.var}, True, False)
        elif isinstance(q, Active):
            if in_rec:
                violations.append(Violation("ActiveInRecursion", q.id))
            elif static and not top:
                violations.append(Violation("NestedActive", q.id))
            check(q.body, bound, unguarded, in_rec, top)
        elif isinstance(q, Sum):
            for b in q.branches:
                check(b.cont, bound, frozenset(), in_rec, False)

    check(p, frozenset(), frozenset(), False, True)

    binders = Counter(q.var for q in _walk(p) if isinstance(q, Rec))
    for name, n in sorted(binders.items()):
        if n > 1:
            violations.append(Violation("DuplicateBinder", name))
    labels = Counter(action_labels(p))
    for name, n in sorted(labels.items()):
        if n > 1:
            violations.append(Violation("DuplicateLabel", name))
    return violations


# -- substitution and unfolding -----------------------------------------------


def substitute(p: Protocol, x: str, q: Protocol) -> Protocol:
    """``p[q/x]``. Binder names are distinct in well-formed input, so no
    capture can occur; a binder for ``x`` itself stops the substitution."""
    if isinstance(p, Var):
        return q if p.name == x else p
    if isinstance(p, Fork):
        return Fork(substitute(p.left, x, q), substitute(p.right, x, q))
    if isinstance(p, Rec):
        return p if p.var == x else Rec(p.var, substitute(p.body, x, q))
    if isinstance(p, Active):
        return Active(p.id, substitute(p.body, x, q))
    if isinstance(p, Sum):
        return Sum(tuple(b.with_cont(substitute(b.cont, x, q)) for b in p.branches))
    return p


def unfold(p: Protocol) -> Protocol:
    if not isinstance(p, Rec):
        raise NotARecursion(f"cannot unfold {type(p).__name__}")
    return substitute(p.body, p.var, p)


# -- redexes ------------------------------------------------------------------

# Path steps: "L"/"R" into a fork, "A" under an active construct, "U" unfold
# the recursion found here, an int j into the continuation of branch j.


@dataclass(frozen=True)
class Redex:
    path: tuple
    enabler: NodeId
    branch_index: int
    action: SyncAction


def enumerate_redexes(p: Protocol) -> list[Redex]:
    """Every (enabler, branch) pair that congruence rewriting can bring into
    the shape ``<id>(f^d<o,i>.P + S)``. Conditions are not checked here."""
    out: list[Redex] = []

    def walk(q, path, actives):
        if isinstance(q, Active):
            walk(q.body, path + ("A",), actives + (q.id,))
        elif isinstance(q, Fork):
            walk(q.left, path + ("L",), actives)
            walk(q.right, path + ("R",), actives)
        elif isinstance(q, Rec):
            if actives:
                walk(unfold(q), path + ("U",), actives)
        elif isinstance(q, Sum):
            for node_id in actives:
                for j, b in enumerate(q.branches):
                    out.append(Redex(path, node_id, j, b))
            for j, b in enumerate(q.branches):
                walk(b.cont, path + (j,), ())

    walk(p, (), ())
    return out


def apply_redex(p: Protocol, redex: Redex, reactors) -> Protocol:
    """Fire ``redex``: consume one ``<enabler>`` scoping the summation and
    activate ``reactors`` on the chosen branch's continuation, keeping the
    action prefix and the other branches in place.

    When the consumed active construct also scopes parallel components off
    the path, it is pushed onto them first (``<id>(P|Q) == <id>P | <id>Q``).
    """
    enabler = redex.enabler
    # only active constructs below the innermost action prefix scope the redex
    scope_start = max((n + 1 for n, step in enumerate(redex.path) if isinstance(step, int)), default=0)

    def go(q, path, consume, pending):
        if not path:
            if not isinstance(q, Sum):
                raise ValueError("redex path does not address a summation")
            if consume:
                raise ValueError(f"{enabler} is not active on the addressed summation")
            branches = list(q.branches)
            b = branches[redex.branch_index]
            branches[redex.branch_index] = b.with_cont(activate(reactors, b.cont))
            return Sum(tuple(branches))
        step, rest = path[0], path[1:]
        if step == "A":
            if not isinstance(q, Active):
                raise ValueError("redex path does not match the term")
            in_scope = len(redex.path) - len(path) >= scope_start
            if consume and in_scope and q.id == enabler:
                return go(q.body, rest, False, pending + (q.id,))
            return Active(q.id, go(q.body, rest, consume, pending))
        if step == "L":
            return Fork(go(q.left, rest, consume, pending), activate(pending, q.right))
        if step == "R":
            return Fork(activate(pending, q.left), go(q.right, rest, consume, pending))
        if step == "U":
            return go(unfold(q), rest, consume, pending)
        if not isinstance(q, Sum):
            raise ValueError("redex path does not match the term")
        branches = list(q.branches)
        branches[step] = branches[step].with_cont(go(branches[step].cont, rest, consume, pending))
        return Sum(tuple(branches))

    return go(p, redex.path, True, ())


# -- normal forms -------------------------------------------------------------


def decompose(p: Protocol) -> list[tuple[tuple, Sum]]:
    """Parallel decomposition ``P == <I1>S1 | ... | <Ik>Sk``.

    Recursions met outside any action prefix are unfolded. Each entry is
    (sorted tuple of active ids, summation); ``0`` components vanish.
    """
    out = []

    def go(q, actives):
        if isinstance(q, Active):
            go(q.body, actives + (q.id,))
        elif isinstance(q, Fork):
            go(q.left, actives)
            go(q.right, actives)
        elif isinstance(q, Rec):
            go(unfold(q), actives)
        elif isinstance(q, Sum):
            out.append((tuple(sorted(actives, key=id_sort_key)), q))
        elif isinstance(q, Var):
            raise ValueError(f"unguarded variable {q.name} at top level")

    go(p, ())
    return out


def recompose(parts) -> Protocol:
    return fork(*(activate(ids, s) for ids, s in parts)) if parts else NIL


def _branch_key(b: SyncAction) -> tuple:
    return (b.label, b.dir.glyph, format_condition(b.out_cond), format_condition(b.in_cond),
            protocol_key(b.cont))


def protocol_key(p: Protocol) -> tuple:
    """Canonical form up to the congruence axioms other than unfolding.

    Forks are flattened into a sorted multiset of components, ``0``
    components dropped, active ids distributed onto components and sorted,
    summation branches sorted. Recursions are compared syntactically.
    """
    return tuple(sorted(_components(p, ())))


def _components(p, actives):
    if isinstance(p, Nil):
        return []
    if isinstance(p, Active):
        return _components(p.body, actives + (p.id,))
    if isinstance(p, Fork):
        return _components(p.left, actives) + _components(p.right, actives)
    ids = tuple(sorted(actives, key=id_sort_key))
    if isinstance(p, Sum):
        return [(ids, "sum", tuple(sorted(_branch_key(b) for b in p.branches)))]
    if isinstance(p, Rec):
        return [(ids, "rec", (p.var, protocol_key(p.body)))]
    return [(ids, "var", (p.name,))]
