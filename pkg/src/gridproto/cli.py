"""Command-line front end.

Exit codes: 0 success, 2 malformed input (parse errors, ill-formed
protocols, invalid registers), 3 semantic errors while running (negative
counters, exhausted state budget), 4 verification or scenario failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import bundled
from .correspondence import SOUNDNESS, check_bounded
from .dist_core import format_definition, nodes_of, observable_transitions
from .formats import (
    ParseError,
    effect_warnings,
    format_protocol,
    parse_effects,
    parse_network,
    parse_protocol,
)
from .global_ast import active_ids, well_formed
from .global_semantics import (
    DEFAULT_MAX_STEPS,
    Configuration,
    RandomScheduler,
    StateBudgetExceeded,
    explore,
    first_scheduler,
    run,
)
from .grid_state import EMPTY_REGISTRY, GridError, InvariantViolation
from .projection import REACTIVE, project, project_network

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SEMANTICS = 3
EXIT_FAILED = 4


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load_protocol(path: str, main: str | None):
    try:
        p = parse_protocol(_read(path), main)
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None
    problems = well_formed(p)
    if problems:
        raise InputError(f"{path}: " + ", ".join(map(str, problems)))
    return p


def _load_config(args) -> tuple[Configuration, object]:
    p = _load_protocol(args.protocol, args.main)
    try:
        delta = parse_network(_read(args.net))
    except (ParseError, InvariantViolation) as exc:
        raise InputError(f"{args.net}: {exc}") from None
    reg = EMPTY_REGISTRY
    if args.effects:
        try:
            reg = parse_effects(_read(args.effects))
        except ParseError as exc:
            raise InputError(f"{args.effects}: {exc}") from None
        for warning in effect_warnings(reg, p):
            print(f"warning: {warning}", file=sys.stderr)
    missing = sorted(set(active_ids(p)) - set(delta))
    if missing:
        raise InputError(f"active nodes not in the network: {', '.join(missing)}")
    return Configuration(delta, p), reg


def _print_state(delta, out=sys.stdout):
    for i in delta:
        print(f"  {delta[i]}", file=out)


# -- subcommands --------------------------------------------------------------


def cmd_check(args) -> int:
    p = parse_protocol(_read(args.protocol), args.main)
    problems = well_formed(p)
    for v in problems:
        print(v)
    if problems:
        return EXIT_INPUT
    print(f"ok: {format_protocol(p)}")
    return EXIT_OK


def _interactive_scheduler(steps):
    for n, st in enumerate(steps):
        print(f"  [{n}] {st.kind}")
    while True:
        answer = input("step> ").strip()
        if answer.isdigit() and int(answer) < len(steps):
            return int(answer)
        print(f"enter a number between 0 and {len(steps) - 1}")


def cmd_simulate(args) -> int:
    c, reg = _load_config(args)
    if args.interactive:
        scheduler = _interactive_scheduler
    elif args.seed is not None:
        scheduler = RandomScheduler(args.seed)
    else:
        scheduler = first_scheduler
    trace = run(c, reg, scheduler, args.steps)
    for line in trace.lines():
        print(line)
    print(f"# {len(trace.steps)} steps, {'terminated' if trace.exhausted else 'step bound reached'}")
    _print_state(trace.final.delta)
    print(f"  protocol: {format_protocol(trace.final.protocol)}")
    return EXIT_OK


def cmd_explore(args) -> int:
    c, reg = _load_config(args)
    graph = explore(c, reg, depth=args.depth)
    for line in graph.edge_lines():
        print(line)
    print(f"# states={len(graph.configs)} edges={len(graph.edges)} "
          f"terminal={len(graph.terminal)} complete={str(graph.complete).lower()}")
    return EXIT_OK


def cmd_project(args) -> int:
    p = _load_protocol(args.protocol, args.main)
    if args.net is None:
        print(f"?: {format_definition(project(p, REACTIVE))}")
        return EXIT_OK
    c, _ = _load_config(args)
    ids = list(c.delta)
    if args.node:
        unknown = [n for n in args.node if n not in c.delta]
        if unknown:
            raise InputError(f"unknown nodes: {', '.join(unknown)}")
        ids = [i for i in ids if i in args.node]
    network = {n.id: n for n in nodes_of(project_network(c))}
    for i in ids:
        print(f"{i}: {format_definition(network[i].defs)}")
    return EXIT_OK


def cmd_dist_simulate(args) -> int:
    c, reg = _load_config(args)
    rng = random.Random(args.seed)
    network = project_network(c)
    taken = 0
    for _ in range(args.steps):
        moves = observable_transitions(network, reg)
        if not moves:
            break
        label, network = moves[rng.randrange(len(moves)) if args.seed is not None else 0]
        print(label)
        taken += 1
    print(f"# {taken} transitions")
    for node in nodes_of(network):
        print(f"  {node.state}  {format_definition(node.defs)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    c, reg = _load_config(args)
    report = check_bounded(c, reg, depth=args.depth)
    if args.format == "edges":
        for cx in report.counterexamples:
            offending = cx.offending.kind if cx.direction == SOUNDNESS else cx.offending[0]
            print(f"{cx.direction} {offending}")
    else:
        for cx in report.counterexamples:
            print(f"{cx.direction}: {cx.explanation}")
            _print_state(cx.configuration.delta)
            print(f"  protocol: {format_protocol(cx.configuration.protocol)}")
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_scenario(args) -> int:
    delta, p, reg = bundled.scenario_corpus()
    c = Configuration(delta, p)
    print(f"protocol: {format_protocol(p)}")
    trace = run(c, reg, RandomScheduler(args.seed) if args.seed is not None else first_scheduler)
    for line in trace.lines():
        print(f"  {line}")
    graph = explore(c, reg)
    failures = []
    for final in graph.terminal_configs():
        failures += bundled.scenario_failures(delta, final)
    report = check_bounded(c, reg)
    print(f"explored {len(graph.configs)} configurations, {len(graph.terminal)} terminal")
    print("terminal state:")
    _print_state(trace.final.delta)
    print(f"node 4 reparented to {trace.final.delta['4'].parent}")
    print(f"correspondence: {report.summary()}")
    for problem in sorted(set(failures)):
        print(f"FAIL: {problem}")
    if failures or not report.ok or not trace.exhausted:
        return EXIT_FAILED
    print("scenario ok")
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridproto", description=(
        "Run global grid protocols, synthesize per-node controllers and check that both agree."))
    sub = parser.add_subparsers(dest="command", required=True)

    def config_args(sp, net_required=True):
        sp.add_argument("--net", required=net_required, help="network file (.net)")
        sp.add_argument("--protocol", required=True, help="protocol file (.gp)")
        sp.add_argument("--effects", help="side-effects file (.fx)")
        sp.add_argument("--main", help="definition to use (default: the last one)")

    sp = sub.add_parser("check", help="check that a protocol file is well formed")
    sp.add_argument("protocol")
    sp.add_argument("--main")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("simulate", help="run the global semantics")
    config_args(sp)
    sp.add_argument("--steps", type=int, default=DEFAULT_MAX_STEPS)
    sp.add_argument("--seed", type=int, help="pick steps at random with this seed")
    sp.add_argument("--interactive", action="store_true", help="pick each step at a prompt")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("explore", help="print the reachable state graph as an edge list")
    config_args(sp)
    sp.add_argument("--depth", type=int)
    sp.set_defaults(func=cmd_explore)

    sp = sub.add_parser("project", help="print the synthesized controller of each node")
    config_args(sp, net_required=False)
    sp.add_argument("--node", action="append", help="only this node (repeatable)")
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("dist-simulate", help="run the projected network")
    config_args(sp)
    sp.add_argument("--steps", type=int, default=DEFAULT_MAX_STEPS)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_dist_simulate)

    sp = sub.add_parser("verify", help="check global and projected behaviour agree")
    config_args(sp)
    sp.add_argument("--depth", type=int, help="exploration depth (default: all reachable states)")
    sp.add_argument("--format", choices=("text", "edges"), default="text")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("scenario", help="run the bundled fault-management scenario")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParseError, InvariantViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StateBudgetExceeded as exc:
        print(f"error: state budget exhausted: {exc}", file=sys.stderr)
        return EXIT_SEMANTICS
    except (GridError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTICS


if __name__ == "__main__":
    sys.exit(main())
