"""Parsers and printers for protocol (.gp), effects (.fx) and network
(.net) files, and for the condition language.

Protocol files hold named definitions ``Name = expr``; later definitions
may reference earlier or later ones by name and references are inlined.
Expression syntax, loosest binding first::

    expr   := sum ('|' sum)*
    sum    := unary ('+' unary)*
    unary  := 'rec' X '.' unary | '<' id '>' unary | action | '0' | NAME | '(' expr ')'
    action := LABEL DIR ('[o:' cond ']')? ('[i:' cond ']')? ('.' unary)?
    DIR    := '*' | '^' | '>' | '@'

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import yaml

from .global_ast import (
    NIL,
    Active,
    Fork,
    Nil,
    Protocol,
    Rec,
    Sum,
    SyncAction,
    Var,
    action_labels,
)
from .grid_state import (
    FIELDS,
    INF,
    OTHER,
    TRUE,
    Z,
    And,
    Assignment,
    Cmp,
    Condition,
    ConditionTypeError,
    Const,
    Direction,
    EffectRegistry,
    EffectSpec,
    Field,
    InvariantViolation,
    Nat,
    NetworkState,
    NodeLit,
    NodeState,
    Not,
    Or,
    Special,
    SpecialLit,
    format_condition,
)


class ParseError(SyntaxError):
    """A malformed input file; carries 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column
        self.lineno = line
        self.offset = column


class UnknownReference(ParseError):
    pass


# -- tokens -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>:=|\+=|-=|==|!=|<=|>=|[=<>()\[\]{}|+.*^@:;,!])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "sym" or "eof"
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind in ("num", "ident", "sym"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Stream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind in ("sym", "ident") and tok.text in texts

    def accept(self, *texts: str) -> Token | None:
        return self.next() if self.at(*texts) else None

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next()

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)


# -- conditions ---------------------------------------------------------------

_COND_TRUE = ("true", "tt")
_COND_FALSE = ("false", "ff")
_PARENT_ALIASES = ("parent", "i")


def _cond_or(ts: _Stream) -> Condition:
    c = _cond_and(ts)
    while ts.accept("or"):
        c = Or(c, _cond_and(ts))
    return c


def _cond_and(ts: _Stream) -> Condition:
    c = _cond_not(ts)
    while ts.accept("and"):
        c = And(c, _cond_not(ts))
    return c


def _cond_not(ts: _Stream) -> Condition:
    if ts.accept("not"):
        return Not(_cond_not(ts))
    if ts.at(*_COND_TRUE):
        ts.next()
        return TRUE
    if ts.at(*_COND_FALSE):
        ts.next()
        return Const(False)
    if ts.accept("("):
        c = _cond_or(ts)
        ts.expect(")")
        return c
    start = ts.peek()
    lhs = _cond_term(ts)
    op_tok = ts.next()
    if op_tok.text not in ("=", "==", "!=", "<", "<=", ">", ">="):
        raise ts.error("expected a comparison operator", op_tok)
    op = "==" if op_tok.text == "=" else op_tok.text
    rhs = _cond_term(ts)
    lhs, rhs = _coerce_node_literal(lhs, rhs), _coerce_node_literal(rhs, lhs)
    try:
        return Cmp(lhs, op, rhs)
    except ConditionTypeError as exc:
        raise ParseError(str(exc), start.line, start.column) from None


def _cond_term(ts: _Stream):
    tok = ts.next()
    if tok.kind == "num":
        return Nat(int(tok.text))
    if tok.kind == "ident":
        if tok.text in _PARENT_ALIASES:
            return Field("parent")
        if tok.text in FIELDS:
            return Field(tok.text)
        if tok.text == "z":
            return SpecialLit(Z)
        if tok.text == "inf":
            return SpecialLit(INF)
        return NodeLit(tok.text)
    raise ts.error(f"expected a register field or value, found {tok.text or 'end of input'!r}", tok)


def _coerce_node_literal(x, other):
    # a number compared with the parent names a station
    if isinstance(x, Nat) and isinstance(other, Field) and other.name == "parent":
        return NodeLit(str(x.value))
    return x


def parse_condition(text: str) -> Condition:
    ts = _Stream(tokenize(text))
    c = _cond_or(ts)
    if ts.peek().kind != "eof":
        raise ts.error(f"unexpected {ts.peek().text!r} after condition")
    return c


# -- protocols ----------------------------------------------------------------


@dataclass(frozen=True)
class _Ref:
    name: str
    line: int
    column: int


_DIRS = {d.glyph: d for d in Direction}


class _ProtocolParser:
    """Parses to protocol terms whose identifiers are still unresolved
    ``_Ref`` placeholders; resolution happens once all names are known."""

    def __init__(self, ts: _Stream):
        self.ts = ts

    def expr(self):
        p = self.sum()
        while self.ts.accept("|"):
            p = Fork(p, self.sum())
        return p

    def sum(self):
        first = self.ts.peek()
        p = self.unary()
        if not self.ts.at("+"):
            return p
        parts = [p]
        while self.ts.accept("+"):
            parts.append(self.unary())
        branches = []
        for q in parts:
            if not isinstance(q, Sum):
                raise self.ts.error("only actions may be combined with '+'", first)
            branches.extend(q.branches)
        return Sum(tuple(branches))

    def unary(self):
        ts = self.ts
        tok = ts.peek()
        if ts.accept("("):
            p = self.expr()
            ts.expect(")")
            return p
        if ts.accept("<"):
            node = ts.next()
            if node.kind not in ("ident", "num"):
                raise ts.error("expected a node id", node)
            ts.expect(">")
            return Active(node.text, self.unary())
        if tok.kind == "num":
            if tok.text != "0":
                raise ts.error(f"unexpected number {tok.text}")
            ts.next()
            return NIL
        if tok.kind != "ident":
            raise ts.error(f"expected a protocol, found {tok.text or 'end of input'!r}")
        if tok.text == "rec" and ts.peek(1).kind == "ident":
            ts.next()
            var = ts.next().text
            ts.expect(".")
            return Rec(var, self.unary())
        ts.next()
        nxt = ts.peek()
        if nxt.kind == "sym" and nxt.text in _DIRS:
            return Sum((self.action(tok.text, _DIRS[ts.next().text]),))
        return _Ref(tok.text, tok.line, tok.column)

    def action(self, label: str, d: Direction) -> SyncAction:
        ts = self.ts
        out_cond = in_cond = TRUE
        seen = set()
        while ts.at("["):
            ts.next()
            which = ts.expect_kind("ident", "'o' or 'i'")
            if which.text not in ("o", "i") or which.text in seen:
                raise ts.error("expected a single [o: ...] and a single [i: ...]", which)
            seen.add(which.text)
            ts.expect(":")
            c = _cond_or(ts)
            ts.expect("]")
            if which.text == "o":
                out_cond = c
            else:
                in_cond = c
        cont = self.unary() if ts.accept(".") else NIL
        return SyncAction(label, d, out_cond, in_cond, cont)


def _resolve(p, bound: frozenset, lookup):
    if isinstance(p, _Ref):
        if p.name in bound:
            return Var(p.name)
        return lookup(p)
    if isinstance(p, Fork):
        return Fork(_resolve(p.left, bound, lookup), _resolve(p.right, bound, lookup))
    if isinstance(p, Rec):
        return Rec(p.var, _resolve(p.body, bound | {p.var}, lookup))
    if isinstance(p, Active):
        return Active(p.id, _resolve(p.body, bound, lookup))
    if isinstance(p, Sum):
        return Sum(tuple(b.with_cont(_resolve(b.cont, bound, lookup)) for b in p.branches))
    return p


def parse_definitions(text: str) -> dict[str, Protocol]:
    """All definitions of a protocol file, references inlined, in file
    order. A file holding a bare expression yields one definition named
    ``main``."""
    ts = _Stream(tokenize(text))
    raw: dict[str, object] = {}
    if not (ts.peek().kind == "ident" and ts.peek(1).text == "=" and ts.peek(1).kind == "sym"):
        raw["main"] = _ProtocolParser(ts).expr()
        if ts.peek().kind != "eof":
            raise ts.error(f"unexpected {ts.peek().text!r}")
    while ts.peek().kind != "eof":
        name = ts.expect_kind("ident", "a definition name")
        ts.expect("=")
        if name.text in raw:
            raise ts.error(f"{name.text} is defined twice", name)
        raw[name.text] = _ProtocolParser(ts).expr()
        nxt = ts.peek()
        if nxt.kind != "eof" and not (nxt.kind == "ident" and ts.peek(1).text == "="):
            raise ts.error(f"unexpected {nxt.text!r}")

    done: dict[str, Protocol] = {}
    active: list[str] = []

    def lookup(ref: _Ref) -> Protocol:
        if ref.name not in raw:
            raise UnknownReference(f"unknown name {ref.name}", ref.line, ref.column)
        if ref.name in active:
            cycle = " -> ".join(active[active.index(ref.name):] + [ref.name])
            raise ParseError(f"cyclic definitions {cycle}", ref.line, ref.column)
        if ref.name not in done:
            active.append(ref.name)
            done[ref.name] = _resolve(raw[ref.name], frozenset(), lookup)
            active.pop()
        return done[ref.name]

    return {name: lookup(_Ref(name, 0, 0)) for name in raw}


def parse_protocol(text: str, main: str | None = None) -> Protocol:
    """The main protocol of a file: ``main`` if given, else the last
    definition."""
    defs = parse_definitions(text)
    if not defs:
        raise ParseError("no protocol definitions", 1, 1)
    if main is None:
        return defs[list(defs)[-1]]
    if main not in defs:
        raise UnknownReference(f"no definition named {main}", 1, 1)
    return defs[main]


def _needs_parens(p) -> bool:
    return isinstance(p, Fork) or (isinstance(p, Sum) and len(p.branches) > 1)


def _unary(p) -> str:
    return f"({format_protocol(p)})" if _needs_parens(p) else format_protocol(p)


def format_action(b: SyncAction) -> str:
    return (f"{b.label}{b.dir.glyph}[o: {format_condition(b.out_cond)}]"
            f"[i: {format_condition(b.in_cond)}].{_unary(b.cont)}")


def format_protocol(p: Protocol) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Var):
        return p.name
    if isinstance(p, Rec):
        return f"rec {p.var}.({format_protocol(p.body)})"
    if isinstance(p, Active):
        return f"<{p.id}> {_unary(p.body)}"
    if isinstance(p, Sum):
        return " + ".join(format_action(b) for b in p.branches)
    if isinstance(p, Fork):
        right = format_protocol(p.right)
        return f"{format_protocol(p.left)} | {f'({right})' if isinstance(p.right, Fork) else right}"
    raise TypeError(f"not a protocol: {p!r}")


def format_protocol_file(defs: dict) -> str:
    return "".join(f"{name} = {format_protocol(p)}\n" for name, p in defs.items())


# -- effects ------------------------------------------------------------------


def _assignment(ts: _Stream) -> Assignment:
    target = ts.expect_kind("ident", "an assignment target")
    op = ts.next()
    value = ts.next()
    bad = ParseError(f"malformed assignment to {target.text}", target.line, target.column)
    if target.text in _PARENT_ALIASES and op.text == ":=":
        if value.text == OTHER:
            return Assignment("set_parent", value=OTHER)
        if value.text == "z":
            return Assignment("set_parent", value=Z)
    elif target.text == "t" and op.text == ":=" and value.text in ("0", "1"):
        return Assignment("set_t", value=int(value.text))
    elif target.text in ("k", "a", "e") and op.text in ("+=", "-=") and value.text == "1":
        return Assignment("inc" if op.text == "+=" else "dec", field=target.text)
    elif target.text == "neighbors" and op.text in ("+=", "-=") and value.text == OTHER:
        return Assignment("neighbors_add" if op.text == "+=" else "neighbors_remove", value=OTHER)
    raise bad


def _assignment_block(ts: _Stream) -> tuple:
    ts.expect("{")
    out = []
    while not ts.at("}"):
        if ts.accept(";"):
            continue
        out.append(_assignment(ts))
    ts.expect("}")
    return tuple(out)


def parse_effects(text: str) -> EffectRegistry:
    ts = _Stream(tokenize(text))
    effects: dict[str, EffectSpec] = {}
    while ts.peek().kind != "eof":
        kw = ts.expect_kind("ident", "'effect'")
        if kw.text != "effect":
            raise ts.error("expected 'effect'", kw)
        label = ts.expect_kind("ident", "an action label")
        if label.text in effects:
            raise ts.error(f"effects for {label.text} given twice", label)
        ts.expect("{")
        blocks: dict[str, tuple] = {}
        while not ts.at("}"):
            role = ts.expect_kind("ident", "'enabler' or 'reactor'")
            if role.text not in ("enabler", "reactor") or role.text in blocks:
                raise ts.error("expected one 'enabler' and one 'reactor' block", role)
            blocks[role.text] = _assignment_block(ts)
        ts.expect("}")
        effects[label.text] = EffectSpec(blocks.get("enabler", ()), blocks.get("reactor", ()))
    return EffectRegistry(effects)


def format_effects(reg: EffectRegistry) -> str:
    out = []
    for label in reg.labels():
        spec = reg[label]
        out.append(f"effect {label} {{")
        for role, asgs in (("enabler", spec.enabler), ("reactor", spec.reactor)):
            body = "".join(f"    {a}\n" for a in asgs)
            out.append(f"  {role} {{\n{body}  }}" if asgs else f"  {role} {{ }}")
        out.append("}")
    return "\n".join(out) + ("\n" if out else "")


def effect_warnings(reg: EffectRegistry, p: Protocol) -> list[str]:
    """Effect labels that name no action of ``p``."""
    labels = set(action_labels(p))
    return [f"effects given for unknown action {label}" for label in reg.labels() if label not in labels]


# -- networks -----------------------------------------------------------------

_NODE_KEYS = {"id", "parent", "t", "neighbors", "k", "a", "e"}


def _node_id(value, where: str, line: int) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"{where}: node ids are names or numbers, got {value!r}", line, 1)
    return str(value)


def _natural(value, where: str, line: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where} must be a natural number, got {value!r}", line, 1)
    return value


def parse_network(text: str) -> NetworkState:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line, col = (mark.line + 1, mark.column + 1) if mark else (0, 0)
        raise ParseError(f"malformed network file: {getattr(exc, 'problem', exc)}", line, col) from None
    if data is None:
        data = []
    if not isinstance(data, list):
        raise ParseError("a network file is a list of node records", 1, 1)
    lines = [item.start_mark.line + 1 for item in root.value] if root is not None else []
    states = []
    for rec, line in zip(data, lines):
        if not isinstance(rec, dict):
            raise ParseError("each node record is a mapping", line, 1)
        unknown = set(rec) - _NODE_KEYS
        if unknown:
            raise ParseError(f"unknown node fields {sorted(map(str, unknown))}", line, 1)
        if "id" not in rec or "parent" not in rec:
            raise ParseError("node records need an id and a parent", line, 1)
        node = _node_id(rec["id"], "id", line)
        parent = rec["parent"]
        if parent in ("z", "inf"):
            parent = Special(parent)
        else:
            parent = _node_id(parent, f"node {node}: parent", line)
        neighbors = rec.get("neighbors", []) or []
        if not isinstance(neighbors, list):
            raise ParseError(f"node {node}: neighbors must be a list", line, 1)
        fields = {f: _natural(rec.get(f, 1 if f == "t" else 0), f"node {node}: {f}", line)
                  for f in ("t", "k", "a", "e")}
        try:
            states.append(NodeState(node, parent, neighbors=frozenset(
                _node_id(n, f"node {node}: neighbor", line) for n in neighbors), **fields))
        except InvariantViolation as exc:
            raise InvariantViolation(f"line {line}: {exc}") from None
    return NetworkState(states)


def _yaml_scalar(text: str) -> str:
    # bare when YAML reads it back as the same string or the same number
    try:
        back = yaml.safe_load(text)
    except yaml.YAMLError:
        back = None
    if isinstance(back, str) and back == text and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", text):
        return text
    if isinstance(back, int) and not isinstance(back, bool) and str(back) == text:
        return text
    return "'" + text.replace("'", "''") + "'"


def format_network(delta: NetworkState) -> str:
    from .grid_state import id_sort_key

    lines = []
    for i in delta:
        s = delta[i]
        ns = ", ".join(_yaml_scalar(n) for n in sorted(s.neighbors, key=id_sort_key))
        parent = str(s.parent) if isinstance(s.parent, Special) else _yaml_scalar(s.parent)
        lines.append(f"- {{id: {_yaml_scalar(s.id)}, parent: {parent}, t: {s.t}, "
                     f"neighbors: [{ns}], k: {s.k}, a: {s.a}, e: {s.e}}}")
    return "\n".join(lines) + ("\n" if lines else "")
