import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import definition_rewrites, network_rewrites, random_definition, random_effects, random_network
from gridproto.bundled import scenario_corpus
from gridproto.dist_core import (
    ZERO,
    BinIn,
    BinOut,
    BrdIn,
    BrdOut,
    Compose,
    DuplicateNodeId,
    In,
    Input,
    Node,
    Out,
    Output,
    Par,
    Plus,
    Step,
    Tau,
    canonicalize,
    canonicalize_network,
    compose_labels,
    def_transitions,
    discards,
    format_definition,
    network_of,
    network_transitions,
    node_transitions,
    nodes_of,
    normalize,
    observable_transitions,
)
from gridproto.formats import parse_condition
from gridproto.global_semantics import Configuration
from gridproto.grid_state import INF, TRUE, Z, And, Direction, EffectRegistry, NodeState, eval_condition
from gridproto.projection import project_network

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)
UP, ALL, SELF = Direction.PARENT, Direction.CHILDREN, Direction.SELF
C1, C2 = parse_condition("e>0"), parse_condition("t==0")


# -- published examples -------------------------------------------------------


def test_output_fires_once():
    assert def_transitions(Output(C1, "f", UP)) == [(Out(C1, "f", UP), ZERO)]


def test_input_persists():
    r = Output(C2, "g", UP)
    d = Input(C1, "f", ALL, r)
    assert def_transitions(d) == [(In(C1, "f", ALL), Par(r, d))]


def test_local_output_meets_local_input():
    r = Output(TRUE, "g", UP)
    inp = Input(C2, "f", SELF, r)
    moves = def_transitions(Par(Output(C1, "f", SELF), inp))
    assert (Step(And(C1, C2), "f"), Par(ZERO, Par(r, inp))) in moves


def test_recover_done_leaves_3(scenario):
    delta, _, reg = scenario
    node = Node(delta["4"], Output(parse_condition("t=0"), "RecoverDone", UP))
    ((label, after),) = node_transitions(node, reg)
    assert label == BinOut("4", "3", "RecoverDone")
    assert after.state.parent == Z


def test_node_without_input_discards():
    s = NodeState("2", "1")
    node = Node(s, Output(TRUE, "g", UP))
    moves = node_transitions(node, EffectRegistry(), peers=["1"], labels=["f"])
    assert (BrdIn("1", "f"), node) in moves


def test_failing_input_condition_discards():
    s = NodeState("2", "1", e=0)
    node = Node(s, Input(C1, "f", ALL, Output(TRUE, "g", UP)))
    moves = [m for m in node_transitions(node, EffectRegistry(), peers=["1"]) if isinstance(m[0], BrdIn)]
    assert moves == [(BrdIn("1", "f"), node)]


def test_gamma_examples():
    assert compose_labels(BinOut("1", "2", "f"), BinIn("2", "1", "f")) == Tau()
    assert compose_labels(BrdIn("7", "f"), BrdIn("7", "f")) == BrdIn("7", "f")
    assert compose_labels(BinOut("1", "2", "f"), BinIn("3", "1", "f")) is None


def _pair(parent_defs, child_defs):
    parent = NodeState("1", INF, neighbors=frozenset({"2"}), k=1, a=1, e=1)
    child = NodeState("2", "1", neighbors=frozenset({"1"}))
    return network_of([Node(parent, parent_defs), Node(child, child_defs)])


def test_binary_handshake_updates_both():
    from gridproto.formats import parse_effects
    reg = parse_effects("effect f { enabler { t := 0 } reactor { e -= 1 } }")
    n = _pair(Input(TRUE, "f", UP), Output(TRUE, "f", UP))
    taus = [n2 for lab, n2 in network_transitions(n, reg) if lab == Tau()]
    assert len(taus) == 1
    a, b = nodes_of(taus[0])
    assert (a.state.e, b.state.t) == (0, 0)


def test_broadcast_reaches_only_willing_children():
    sender = NodeState("1", INF, k=2, a=2)
    willing = NodeState("2", "1", t=0)
    unwilling = NodeState("3", "1", t=1)
    react = Output(TRUE, "g", UP)
    inp = Input(C2, "f", ALL, react)
    n = network_of([Node(sender, Output(TRUE, "f", ALL)), Node(willing, inp), Node(unwilling, inp)])
    brd = [(lab, n2) for lab, n2 in network_transitions(n, EffectRegistry()) if isinstance(lab, BrdOut)]
    assert len(brd) == 1
    _, after = brd[0]
    s, w, u = nodes_of(after)
    assert canonicalize(w.defs) == canonicalize(Par(react, inp))
    assert u.defs == inp


def test_lonely_broadcast_is_observable():
    n = Node(NodeState("1", INF), Output(TRUE, "f", ALL))
    assert observable_transitions(n, EffectRegistry()) == [(BrdOut("1", "f"), Node(n.state, ZERO))]


def test_unpaired_output_is_not_observable():
    n = _pair(ZERO, Output(TRUE, "f", UP))
    assert observable_transitions(n, EffectRegistry()) == []


def test_system_projection_starts_with_the_locate_broadcast(scenario):
    delta, p, reg = scenario
    moves = observable_transitions(project_network(Configuration(delta, p)), reg)
    assert [lab for lab, _ in moves] == [BrdOut("PS", "Locate")]


def test_empty_network_is_stuck():
    n = _pair(ZERO, ZERO)
    assert observable_transitions(n, EffectRegistry()) == []


def test_identity_and_absorption():
    d = Input(C1, "f", ALL, Output(C2, "g", UP))
    assert canonicalize(Par(d, ZERO)) == canonicalize(d)
    assert canonicalize(Par(d, d)) == canonicalize(d)


def test_network_composition_commutes():
    a = Node(NodeState("1", INF), ZERO)
    b = Node(NodeState("2", INF), Output(TRUE, "f", ALL))
    assert canonicalize_network(Compose(a, b)) == canonicalize_network(Compose(b, a))


# -- further checks -----------------------------------------------------------


@pytest.fixture(scope="module")
def scenario():
    return scenario_corpus()


def test_duplicate_node_ids_rejected():
    a = Node(NodeState("1", INF), ZERO)
    with pytest.raises(DuplicateNodeId):
        network_transitions(Compose(a, a), EffectRegistry())


def test_node_never_hears_itself():
    node = Node(NodeState("1", INF), Input(TRUE, "f", ALL))
    moves = node_transitions(node, EffectRegistry(), peers=["1"])
    assert not any(isinstance(lab, (BrdIn, BinIn)) for lab, _ in moves)


def test_choice_picks_one_branch():
    c = Plus(Output(TRUE, "f", ALL), Output(TRUE, "g", ALL))
    n = Node(NodeState("1", INF), c)
    labels = [lab for lab, _ in observable_transitions(n, EffectRegistry())]
    assert labels == [BrdOut("1", "f"), BrdOut("1", "g")]


def test_neighbour_output_offers_one_label_per_neighbour():
    s = NodeState("1", INF, neighbors=frozenset({"2", "3"}))
    moves = node_transitions(Node(s, Output(TRUE, "f", Direction.NEIGHBOR)), EffectRegistry())
    assert [lab for lab, _ in moves] == [BinOut("1", "2", "f"), BinOut("1", "3", "f")]


def test_normalize_and_print():
    d = Par(Output(C2, "g", UP), Par(Input(C1, "f", ALL, ZERO), Input(C1, "f", ALL, ZERO)))
    assert format_definition(d) == "[e>0]f*?.0 | [t==0]g^!"
    assert canonicalize(normalize(d)) == canonicalize(d)


def test_absorption_keeps_different_continuations():
    a = Input(C1, "f", ALL, ZERO)
    b = Input(C1, "f", ALL, Output(TRUE, "g", UP))
    assert canonicalize(Par(a, b)) != canonicalize(a)


def test_choices_are_a_multiset():
    o = Output(TRUE, "g", UP)
    assert canonicalize(Par(o, o)) != canonicalize(o)


# -- properties ---------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(SEEDS)
def test_inputs_survive_their_own_firing(seed):
    d = random_definition(random.Random(seed))
    for act, d2 in def_transitions(d):
        if isinstance(act, In):
            assert act in [a for a, _ in def_transitions(d2)]


@settings(max_examples=200, deadline=None)
@given(SEEDS)
def test_canonical_form_is_idempotent(seed):
    d = random_definition(random.Random(seed))
    assert canonicalize(normalize(d)) == canonicalize(d)


@settings(max_examples=200, deadline=None)
@given(SEEDS)
def test_canonical_form_respects_each_axiom(seed):
    rng = random.Random(seed)
    d = random_definition(rng)
    for name, d2 in definition_rewrites(d):
        assert canonicalize(d2) == canonicalize(d), name


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_network_axioms(seed):
    rng = random.Random(seed)
    delta = random_network(rng)
    n = network_of(Node(delta[i], random_definition(rng)) for i in delta)
    for name, n2 in network_rewrites(n):
        assert canonicalize_network(n2) == canonicalize_network(n), name


_LABELS = st.sampled_from(["f", "g"])
_IDS = st.sampled_from(["1", "2", "3"])
_NET_LABELS = st.one_of(
    st.just(Tau()),
    st.builds(BinOut, _IDS, _IDS, _LABELS),
    st.builds(BinIn, _IDS, _IDS, _LABELS),
    st.builds(BrdOut, _IDS, _LABELS),
    st.builds(BrdIn, _IDS, _LABELS),
)


@given(_NET_LABELS, _NET_LABELS)
def test_gamma_is_symmetric(l1, l2):
    assert compose_labels(l1, l2) == compose_labels(l2, l1)


@settings(max_examples=200, deadline=None)
@given(SEEDS)
def test_broadcast_receive_xor_discard(seed):
    rng = random.Random(seed)
    delta = random_network(rng)
    node = Node(delta[rng.choice(list(delta))], random_definition(rng))
    for sender in delta:
        if sender == node.id:
            continue
        for label in ("f", "g", "h"):
            receive = node.state.parent == sender and any(
                isinstance(a, In) and a.dir is ALL and a.label == label and eval_condition(node.state, a.cond)
                for a, _ in def_transitions(node.defs))
            assert receive != discards(node, sender, label)


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_registers_change_only_at_binary_endpoints(seed):
    rng = random.Random(seed)
    delta = random_network(rng)
    reg = random_effects(rng, ["f", "g", "h"])
    n = network_of(Node(delta[i], random_definition(rng)) for i in delta)
    for lab, n2 in network_transitions(n, reg):
        changed = {x.id for x in nodes_of(n2) if x.state != delta[x.id]}
        if isinstance(lab, (BrdOut, BrdIn)):
            assert not changed
        elif isinstance(lab, BinOut):
            assert changed <= {lab.src}
        elif isinstance(lab, BinIn):
            assert changed <= {lab.at}
        else:
            assert len(changed) <= 2
