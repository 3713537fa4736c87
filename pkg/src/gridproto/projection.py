"""Synthesis of per-node controllers from a global protocol.

Three roles drive the translation: the reactive role (``?``) collects the
persistent inputs every node must offer, the enabling role (``!``) yields
the outputs a node offers once it becomes active, and ``ActiveOf(id)``
picks out the part of a runtime term where ``id`` currently holds control.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping, Union

from .dist_core import ZERO, Input, Network, Node, Output, Par, Plus, Term, network_of
from .global_ast import Active, Fork, Nil, Protocol, Rec, Sum, Var
from .global_semantics import Configuration
from .grid_state import NodeId


class UnboundVariable(LookupError):
    pass


class ActiveInRecursion(ValueError):
    pass


@dataclass(frozen=True)
class Reactive:
    def __str__(self) -> str:
        return "?"


@dataclass(frozen=True)
class Enabling:
    def __str__(self) -> str:
        return "!"


@dataclass(frozen=True)
class ActiveOf:
    id: NodeId

    def __str__(self) -> str:
        return str(self.id)


Role = Union[Reactive, Enabling, ActiveOf]
REACTIVE = Reactive()
ENABLING = Enabling()
EMPTY_ENV: Mapping = MappingProxyType({})


def _par(a: Term, b: Term) -> Term:
    return Par(a, b)


def project(p: Protocol, role: Role, env: Mapping | None = None) -> Term:
    """Project ``p`` under ``role``. ``env`` maps recursion variables in
    scope to their bodies; only the enabling role reads it."""
    env = EMPTY_ENV if env is None else env
    return _project(p, role, env, False)


def _project(p, role, env, in_rec) -> Term:
    if isinstance(p, Nil):
        return ZERO
    if isinstance(p, Var):
        if not isinstance(role, Enabling):
            return ZERO
        if p.name not in env:
            raise UnboundVariable(p.name)
        return _project(env[p.name], ENABLING, env, in_rec)
    if isinstance(p, Rec):
        inner = dict(env)
        inner[p.var] = p.body
        return _project(p.body, role, MappingProxyType(inner), True)
    if isinstance(p, Fork):
        return _par(_project(p.left, role, env, in_rec), _project(p.right, role, env, in_rec))
    if isinstance(p, Active):
        if in_rec:
            raise ActiveInRecursion(p.id)
        if isinstance(role, ActiveOf) and role.id == p.id:
            return _par(_project(p.body, role, env, in_rec), _project(p.body, ENABLING, env, in_rec))
        return _project(p.body, role, env, in_rec)
    if isinstance(p, Sum):
        parts = [_project_action(b, role, env, in_rec) for b in p.branches]
        join = Plus if isinstance(role, Enabling) else _par
        out = parts[0]
        for q in parts[1:]:
            out = join(out, q)
        return out
    raise TypeError(f"not a protocol: {p!r}")


def _project_action(b, role, env, in_rec) -> Term:
    if isinstance(role, Enabling):
        return Output(b.out_cond, b.label, b.dir)
    if isinstance(role, Reactive):
        react = Input(b.in_cond, b.label, b.dir, _project(b.cont, ENABLING, env, in_rec))
        return _par(react, _project(b.cont, REACTIVE, env, in_rec))
    return _project(b.cont, role, env, in_rec)


Transform = Callable[[Term], Term]


def project_network(c: Configuration, transform_reactive: Transform | None = None) -> Network:
    """Controllers for every node of the configuration.

    ``transform_reactive`` rewrites the shared reactive part before it is
    installed; tests use it to build deliberately broken controllers.
    """
    reactive = project(c.protocol, REACTIVE)
    if transform_reactive is not None:
        reactive = transform_reactive(reactive)
    return network_of(
        Node(c.delta[i], Par(reactive, project(c.protocol, ActiveOf(i)))) for i in c.delta)
