"""
Tests for calculus terms, participant sets and well-formedness
"""

import itertools
import random

import networkx
import pytest
from src.mpst.generators import random_message
from src.mpst.syntax import parse_global, parse_module, parse_process, parse_queue
from src.mpst.terms import (
    DUPLICATE_LABELS,
    EMPTY_QUEUE,
    SELF_COMMUNICATION,
    Communication,
    End,
    Inactive,
    Input,
    InternalChoice,
    Message,
    Network,
    Output,
    Queue,
    bisimilar,
    graph_of,
    network_equiv,
    participants_network,
    players_global,
    players_network,
    plays_process,
    plays_queue,
    queue_canonical,
    reachable,
    well_formed,
)


def _queue(*triples) -> Queue:
    return Queue(tuple(Message(sender, label, receiver) for sender, receiver, label in triples))


def test_plays_process_inactive():
    """Test the inactive process mentions nobody"""
    assert plays_process(Inactive()) == frozenset()


def test_plays_process_social_user(social):
    """Test U1 mentions only u2 and s"""
    assert plays_process(social.process("U1")) == {"u2", "s"}


def test_plays_process_recursive():
    """Test a self-looping process has a single reachable node"""
    module = parse_module("process P = q!lam. P")
    process = module.process("P")
    assert plays_process(process) == {"q"}
    assert len(reachable(process)) == 1


def test_plays_queue():
    """Test senders and receivers of queued messages"""
    assert plays_queue(EMPTY_QUEUE) == frozenset()
    assert plays_queue(_queue(("u1", "u2", "go"), ("u2", "u1", "stop"))) == {"u1", "u2"}
    assert plays_queue(_queue(("u1", "s", "req"))) == {"u1", "s"}


def test_players_network(social):
    """Test active participants of networks"""
    assert players_network(Network()) == frozenset()
    assert players_network(social.network("Social")) == {"u1", "u2", "s"}
    assert players_network(Network.of({"u1": Inactive(), "s": social.process("S")})) == {"s"}


def test_participants_network(social):
    """Test participants mentioned by the processes of a network"""
    assert participants_network(Network()) == frozenset()
    assert participants_network(Network.of({"u1": social.process("U1")})) == {"u2", "s"}
    assert participants_network(Network.of({"p": parse_process("q!a")})) == {"q"}


def test_players_global(social, exb):
    """Test players of global types"""
    assert players_global(End()) == frozenset()
    assert players_global(exb.global_type("G")) == {"p", "q", "r"}
    assert players_global(social.global_type("G")) == {"u1", "u2", "s"}


def test_input_player_is_the_reader():
    """Test the first participant of an input is its player"""
    gtype = parse_global("q <- p ? a")
    assert isinstance(gtype, Input)
    assert gtype.receiver == "q"
    assert gtype.channel == ("p", "q")
    assert players_global(gtype) == {"q"}


def test_queue_equivalence_distinct_channels():
    """Test messages on distinct channels commute"""
    left = _queue(("p", "q", "lam"), ("q", "p", "mu"))
    right = _queue(("q", "p", "mu"), ("p", "q", "lam"))
    assert queue_canonical(left) == queue_canonical(right)
    assert left == right
    assert hash(left) == hash(right)


def test_queue_equivalence_same_channel():
    """Test same-channel order matters"""
    left = _queue(("p", "q", "a"), ("p", "q", "b"))
    right = _queue(("p", "q", "b"), ("p", "q", "a"))
    assert queue_canonical(left) != queue_canonical(right)
    assert left != right


def test_queue_canonical_empty():
    """Test the empty queue has an empty canonical form"""
    assert queue_canonical(EMPTY_QUEUE) == {}


def test_queue_head_and_removal():
    """Test per-channel head lookup and removal"""
    queue = parse_queue("[p -> q : a, r -> q : c, p -> q : b]")
    assert queue.head("p", "q") == Message("p", "a", "q")
    assert queue.head("q", "p") is None
    assert queue.without_head("p", "q").channel("p", "q") == ("b",)
    assert queue.without_last("p", "q").channel("p", "q") == ("a",)
    assert queue.channels() == [("p", "q"), ("r", "q")]
    with pytest.raises(ValueError):
        queue.without_head("q", "p")


def test_message_self_communication():
    """Test a message to oneself is rejected"""
    with pytest.raises(ValueError):
        Message("p", "a", "p")
    with pytest.raises(ValueError):
        Communication.send("p", "p", "a")


def test_communication_rendering():
    """Test communication text forms"""
    send = Communication.send("u1", "u2", "go")
    receive = Communication.receive("s", "u2", "req")
    assert str(send) == "u1 u2 ! go"
    assert str(receive) == "s u2 ? req"
    assert send.token == "u1>u2!go"
    assert receive.token == "s<u2?req"
    assert send.message == Message("u1", "go", "u2")
    assert receive.message == Message("u2", "req", "s")


def test_network_drops_inactive_and_rejects_duplicates():
    """Test network normalization"""
    process = parse_process("q!a")
    assert Network.of({"p": process, "r": Inactive()}) == Network.of({"p": process})
    with pytest.raises(ValueError):
        Network((("p", process), ("p", process)))


def test_network_equiv():
    """Test structural congruence of networks"""
    module = parse_module("process P = q!a. P\nprocess Q = p?a. Q")
    P, Q = module.process("P"), module.process("Q")
    assert network_equiv(Network.of({"p": P, "q": Q}), Network.of([("q", Q), ("p", P)]))
    assert network_equiv(Network.of({"p": P}), Network.of({"p": P, "r": Inactive()}))
    assert not network_equiv(Network.of({"p": parse_process("q!a")}), Network.of({"p": parse_process("q!b")}))


def test_bisimilar_unfoldings():
    """Test different representations of the same regular tree"""
    module = parse_module("process A = q!a. A\nprocess B = q!a. q!a. B\nprocess C = q!b. C")
    assert bisimilar(module.process("A"), module.process("B"))
    assert not bisimilar(module.process("A"), module.process("C"))


def test_bisimilar_ignores_branch_order():
    """Test branch order does not matter"""
    assert bisimilar(parse_process("q!{a, b.end}"), parse_process("q!{b, a}"))


def test_well_formed_self_communication():
    """Test p[p!lam] is reported"""
    network = Network.of({"p": InternalChoice("p", (("lam", Inactive()),))})
    assert well_formed(network).conditions() == [SELF_COMMUNICATION]


def test_well_formed_duplicate_labels():
    """Test an output with a repeated label is reported"""
    gtype = Output("p", "q", (("a", End()), ("a", End())))
    report = well_formed(gtype)
    assert not report.ok
    assert DUPLICATE_LABELS in report.conditions()


def test_well_formed_social(social):
    """Test the social media session is well-formed"""
    assert well_formed(social.session("SocialMedia")).ok
    assert well_formed(social.global_type("G")).ok


def test_queue_adjacent_swaps():
    """Test swapping neighbours keeps the form across channels and changes it within one"""
    distinct = same = 0
    for seed in range(60):
        messages = [random_message(seed * 10 + offset) for offset in range(6)]
        queue = Queue(tuple(messages))
        for position in range(len(messages) - 1):
            first, second = messages[position], messages[position + 1]
            swapped = list(messages)
            swapped[position], swapped[position + 1] = second, first
            if first.channel != second.channel:
                distinct += 1
                assert queue_canonical(Queue(tuple(swapped))) == queue_canonical(queue)
            elif first.label != second.label:
                same += 1
                assert queue_canonical(Queue(tuple(swapped))) != queue_canonical(queue)
    assert distinct and same


def test_network_equiv_is_an_equivalence():
    """Test reflexivity, symmetry and transitivity on random networks"""
    module = parse_module("process A = q!a. A\nprocess B = q!a. q!a. B\nprocess C = q!b. C")
    processes = [module.process("A"), module.process("B"), module.process("C"), Inactive()]
    rng = random.Random(7)
    networks = []
    for _ in range(12):
        bindings = [(name, rng.choice(processes)) for name in ("p", "r", "t")]
        rng.shuffle(bindings)
        networks.append(Network(tuple(bindings)))

    for network in networks:
        assert network_equiv(network, network)
    for left, right in itertools.product(networks, repeat=2):
        assert network_equiv(left, right) == network_equiv(right, left)
        if network_equiv(left, right):
            assert players_network(left) == players_network(right)
            assert participants_network(left) == participants_network(right)
    for left, middle, right in itertools.product(networks, repeat=3):
        if network_equiv(left, middle) and network_equiv(middle, right):
            assert network_equiv(left, right)


def test_graph_of_loop(small):
    """Test the node graph of a recursive type"""
    loop = small.global_type("Loop")
    graph = graph_of(loop)
    assert graph.number_of_nodes() == 2
    assert sorted(label for _, _, label in graph.edges(data="label")) == ["a", "a"]
    assert graph.nodes[id(loop)]["term"] is loop
    assert not networkx.is_directed_acyclic_graph(graph)
    assert graph_of(loop, loop.branch("a")).number_of_nodes() == 2


def test_graph_of_branches_in_label_order():
    """Test out-edges follow label order"""
    gtype = parse_global("p -> q !{c. q <- p ? c, a. q <- p ? a, b. q <- p ? b}")
    graph = graph_of(gtype)
    assert [graph.edges[edge]["label"] for edge in graph.out_edges(id(gtype))] == ["a", "b", "c"]
    assert [node.player for node in reachable(gtype)][0] == "p"
