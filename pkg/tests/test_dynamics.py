"""
Tests for the session and type configuration transition systems
"""

import pytest
from src.mpst.dynamics import (
    TypeConfiguration,
    config_enabled,
    config_step,
    session_enabled,
    session_run,
    session_step,
)
from src.mpst.errors import NotEnabled, UnboundedType
from src.mpst.syntax import parse_global, parse_queue, parse_trace, show
from src.mpst.terms import (
    EMPTY_QUEUE,
    Communication,
    End,
    Message,
    Network,
    Output,
    Session,
    bisimilar,
)


def test_session_enabled_social(social):
    """Test the first steps of the social media session"""
    steps = [str(step) for step, _ in session_enabled(social.session("SocialMedia"))]
    assert steps == ["u1 u2 ! go", "u1 u2 ! stop", "u2 u1 ! go", "u2 u1 ! stop"]


def test_session_step_send_and_receive(small):
    """Test Send appends and Rcv consumes"""
    session = small.session("PingPong")
    sent = session_step(session, Communication.send("p", "q", "a"))
    assert sent.queue == parse_queue("[p -> q : a]")
    assert sent.network.get("p") is None
    received = session_step(sent, Communication.receive("q", "p", "a"))
    assert received == Session(Network(), EMPTY_QUEUE)
    assert session_enabled(received) == []


def test_session_receive_needs_message(small):
    """Test Rcv with an empty channel"""
    with pytest.raises(NotEnabled):
        session_step(small.session("PingPong"), Communication.receive("q", "p", "a"))


def test_session_receive_wrong_head(small):
    """Test a head label outside the external choice blocks the reader"""
    session = Session(small.network("Ping"), parse_queue("[p -> q : b]"))
    steps = [str(step) for step, _ in session_enabled(session)]
    assert steps == ["p q ! a"]


def test_session_run_stop_trace(social, corpus_path):
    """Test both users agreeing on stop"""
    with open(corpus_path("social_media_stop.trace"), encoding="utf-8") as handle:
        trace = parse_trace(handle.read())
    final = session_run(social.session("SocialMedia"), trace)
    assert show(final) == "s[S] || []"


def test_session_run_reports_index(social):
    """Test the first disabled step is located"""
    trace = parse_trace("u1>u2!stop u1<u2?stop")
    with pytest.raises(NotEnabled) as excinfo:
        session_run(social.session("SocialMedia"), trace)
    assert excinfo.value.index == 1


def test_config_top_out(social):
    """Test a root output"""
    G = social.global_type("G")
    result = config_step(TypeConfiguration(G), Communication.send("u1", "u2", "go"))
    assert result.gtype is G.branch("go")
    assert result.queue == parse_queue("[u1 -> u2 : go]")


def test_config_inside_out(social):
    """Test u2 answering before u1's choice is read"""
    G = social.global_type("G")
    result = config_step(TypeConfiguration(G), Communication.send("u2", "u1", "go"))
    assert isinstance(result.gtype, Output)
    assert (result.gtype.sender, result.gtype.receiver) == ("u1", "u2")
    assert result.gtype.labels == ("go", "stop")
    assert result.queue == parse_queue("[u2 -> u1 : go]")
    assert bisimilar(result.gtype.branch("go"), G.branch("go").branch("go"))
    assert bisimilar(result.gtype.branch("stop"), G.branch("stop").branch("go"))


def test_config_top_in(unread):
    """Test a root input reads the channel head"""
    G = unread.global_type("G")
    start = TypeConfiguration(G, unread.queue("M"))
    middle = config_step(start, Communication.send("p", "q", "lam"))
    assert middle.queue == parse_queue("[q -> p : lam, p -> q : lam]")
    end = config_step(middle, Communication.receive("q", "p", "lam"))
    assert end == start


def test_config_inside_out_independent():
    """Test an unrelated output overtakes the root"""
    gtype = parse_global("p -> q ! a. r -> t ! b")
    result = config_step(TypeConfiguration(gtype), Communication.send("r", "t", "b"))
    assert bisimilar(result.gtype, parse_global("p -> q ! a"))
    assert result.queue == parse_queue("[r -> t : b]")


def test_config_inside_in():
    """Test a read on another channel overtakes the root"""
    gtype = parse_global("p -> q ! a. q <- r ? b")
    result = config_step(TypeConfiguration(gtype, parse_queue("[r -> q : b]")),
                         Communication.receive("q", "r", "b"))
    assert bisimilar(result.gtype, parse_global("p -> q ! a"))
    assert result.queue == EMPTY_QUEUE


def test_config_cannot_consume_root_message():
    """Test a read may not take the message the root has not sent yet"""
    gtype = parse_global("p -> q ! a. q <- p ? a")
    with pytest.raises(NotEnabled):
        config_step(TypeConfiguration(gtype), Communication.receive("q", "p", "a"))


def test_config_step_unknown_player(small):
    """Test a player absent from the type"""
    with pytest.raises(NotEnabled):
        config_step(TypeConfiguration(small.global_type("Once")), Communication.send("r", "p", "a"))


def test_config_step_end():
    """Test End has no steps"""
    with pytest.raises(NotEnabled):
        config_step(TypeConfiguration(End()), Communication.send("p", "q", "a"))
    assert config_enabled(TypeConfiguration(End())) == []


def test_config_enabled_social(social):
    """Test every player's first choices are enabled"""
    steps = [str(step) for step, _ in config_enabled(TypeConfiguration(social.global_type("G")))]
    assert steps == ["u1 u2 ! go", "u1 u2 ! stop", "u2 u1 ! go", "u2 u1 ! stop"]


def test_config_unbounded(exb):
    """Test the descent detects a loop that never meets the player"""
    Gp = exb.global_type("Gp")
    with pytest.raises(UnboundedType) as excinfo:
        config_enabled(TypeConfiguration(Gp))
    _, player = excinfo.value.witness
    assert player == "r"
    queue = parse_queue("[q -> r : lam3]")
    with pytest.raises(UnboundedType):
        config_step(TypeConfiguration(Gp, queue), Communication.receive("r", "q", "lam3"))


def test_configuration_equality(unread):
    """Test configurations compare by bisimilarity and queue equivalence"""
    G = unread.global_type("G")
    unfolded = parse_global("p -> q ! lam. q <- p ? lam. p -> q ! lam. q <- p ? lam")
    assert TypeConfiguration(G, EMPTY_QUEUE) == TypeConfiguration(G, parse_queue("[]"))
    assert TypeConfiguration(G) != TypeConfiguration(unfolded)
    assert TypeConfiguration(G) != TypeConfiguration(G, parse_queue("[p -> q : lam]"))
    assert Message("p", "lam", "q") in list(parse_queue("[p -> q : lam]"))
