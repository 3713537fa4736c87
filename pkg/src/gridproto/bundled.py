"""Protocol, network and effect files shipped with the package."""

from __future__ import annotations

from importlib import resources

from .formats import parse_effects, parse_network, parse_protocol
from .global_semantics import Configuration
from .grid_state import EffectRegistry, NetworkState
from .global_ast import Protocol

CORPUS_FILES = ("simple.gp", "simple.fx", "simple2.net", "simple3.net",
                "scenario.gp", "scenario.fx", "two_station.net")


def corpus_path(name: str):
    """A traversable handle on a bundled corpus file."""
    if name not in CORPUS_FILES:
        raise FileNotFoundError(name)
    return resources.files(__package__).joinpath("corpus", name)


def corpus_text(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")


def scenario_corpus() -> tuple[NetworkState, Protocol, EffectRegistry]:
    """The fault-management scenario: the two-station grid with a fault
    between 3 and 4, the System protocol, and its side effects."""
    return (parse_network(corpus_text("two_station.net")),
            parse_protocol(corpus_text("scenario.gp")),
            parse_effects(corpus_text("scenario.fx")))


def simple_corpus(net: str = "simple3.net") -> tuple[NetworkState, Protocol, EffectRegistry]:
    return (parse_network(corpus_text(net)),
            parse_protocol(corpus_text("simple.gp")),
            parse_effects(corpus_text("simple.fx")))


def scenario_failures(initial: NetworkState, final: Configuration) -> list[str]:
    """Ways a terminal configuration misses the expected outcome: 4 is
    fed by 6, 3 is disconnected from 4 with its counters cleared, and 6
    gained one active output."""
    d = final.delta
    problems = []
    if d["4"].parent != "6":
        problems.append(f"node 4 has parent {d['4'].parent}, expected 6")
    s3 = d["3"]
    if (s3.e, s3.a, s3.k) != (0, 0, 0):
        problems.append(f"node 3 has e={s3.e} a={s3.a} k={s3.k}, expected all 0")
    if "4" in s3.neighbors or "3" in d["4"].neighbors:
        problems.append("nodes 3 and 4 are still neighbours")
    if d["6"].a != initial["6"].a + 1:
        problems.append(f"node 6 has a={d['6'].a}, expected {initial['6'].a + 1}")
    return problems
