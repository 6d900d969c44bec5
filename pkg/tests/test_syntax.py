"""
Tests for the definition language, traces and printers
"""

import json

import pytest
from src.mpst.errors import ParseError, ResolutionError, WellFormednessError
from src.mpst.syntax import (
    format_trace,
    parse_global,
    parse_module,
    parse_process,
    parse_queue,
    parse_term,
    parse_trace,
    render,
    show,
)
from src.mpst.terms import (
    CommKind,
    Communication,
    End,
    ExternalChoice,
    Inactive,
    Input,
    InternalChoice,
    Message,
    Network,
    Output,
    bisimilar,
    network_equiv,
    players_global,
)
from tests.conftest import CORPUS, load_corpus


def test_parse_social_module(social):
    """Test the social media file resolves every namespace"""
    assert list(social.process_defs) == ["U1", "U2", "S"]
    assert list(social.global_defs) == ["G"]
    assert social.participant_set("Users") == {"u1", "u2"}
    assert social.participant_set("Everyone") == {"u1", "u2", "s"}
    session = social.session("SocialMedia")
    assert len(session.queue) == 0
    assert [p for p, _ in session.network.items()] == ["s", "u1", "u2"]


def test_first_definition_is_default(small):
    """Test getters fall back to the first definition"""
    assert small.global_type() is small.global_type("Once")
    assert small.session() == small.session("PingPong")


def test_missing_name_raises(small):
    """Test looking up an unknown name"""
    with pytest.raises(ResolutionError):
        small.global_type("Nope")
    with pytest.raises(ResolutionError):
        small.participant_set("Nobody")


def test_recursive_process_is_cyclic(social):
    """Test recursion variables resolve to the definition node"""
    U1 = social.process("U1")
    assert isinstance(U1, InternalChoice)
    go = U1.branch("go")
    assert isinstance(go, ExternalChoice)
    assert go.branch("go").branch("req").branch("data") is U1


def test_input_reader_first(social):
    """Test `u1 <- u2 ? go` reads on channel u2->u1"""
    G = social.global_type("G")
    inner = G.branch("go").branch("go")
    assert isinstance(inner, Input)
    assert inner.receiver == "u1"
    assert inner.sender == "u2"
    assert inner.label == "go"


def test_missing_continuation_defaults():
    """Test omitted continuations mean end and End"""
    process = parse_process("q!{a, b}")
    assert all(isinstance(child, Inactive) for _, child in process.branches)
    gtype = parse_global("p -> q ! a. q <- p ? a")
    assert isinstance(gtype.branch("a").continuation, End)


def test_empty_network(small):
    """Test a network with no bindings"""
    assert small.network("Idle") == Network()


def test_syntax_error_position():
    """Test syntax errors carry line and column"""
    with pytest.raises(ParseError) as excinfo:
        parse_module("process P = q!a\nglobal G = p -> ! a\n")
    assert excinfo.value.line == 2
    assert excinfo.value.column is not None


def test_duplicate_definition():
    """Test a name defined twice in one namespace"""
    with pytest.raises(ResolutionError, match="duplicate definition 'P'"):
        parse_module("process P = q!a\nprocess P = q!b")


def test_same_name_in_distinct_namespaces():
    """Test namespaces are independent"""
    module = parse_module("process G = q!a\nglobal G = p -> q ! a")
    assert isinstance(module.process("G"), InternalChoice)
    assert isinstance(module.global_type("G"), Output)


def test_unresolved_reference():
    """Test a reference to an undefined process"""
    with pytest.raises(ResolutionError, match="unresolved process reference 'Q'"):
        parse_module("process P = q!a. Q")


def test_unresolved_session_parts():
    """Test sessions must name existing networks and queues"""
    with pytest.raises(ResolutionError):
        parse_module("network N = p[q!a]\nsession S = N with Missing")


def test_unguarded_recursion():
    """Test a renaming loop has no solution"""
    with pytest.raises(ParseError, match="unguarded recursion"):
        parse_module("process P = Q\nprocess Q = P")


def test_renaming_chain_resolves():
    """Test a guarded alias is the same node"""
    module = parse_module("process P = Q\nprocess Q = r!a. P")
    assert module.process("P") is module.process("Q")


def test_network_self_communication():
    """Test p[p!a] is ill-formed"""
    with pytest.raises(WellFormednessError) as excinfo:
        parse_module("network N = p[p!a]")
    assert "self-communication" in str(excinfo.value)


def test_duplicate_labels_rejected():
    """Test repeated branch labels are ill-formed"""
    with pytest.raises(WellFormednessError):
        parse_process("q!{a, a}")


def test_network_duplicate_participant():
    """Test a participant bound twice"""
    with pytest.raises(ResolutionError):
        parse_module("network N = p[q!a] | p[q!b]")


def test_queue_self_message():
    """Test a queued message to oneself"""
    with pytest.raises(ParseError):
        parse_queue("[p -> p : a]")


def test_comments_ignored():
    """Test line comments"""
    module = parse_module("// header\nglobal G = p -> q ! a // trailing\n")
    assert players_global(module.global_type("G")) == {"p"}


def test_parse_expression_with_source(social):
    """Test expressions may refer to definitions"""
    process = parse_process("u1!go. U2", social)
    assert process.branch("go") is social.process("U2")


def test_parse_trace_tokens():
    """Test the compact trace form"""
    trace = parse_trace("u1>u2!stop u1<u2?stop")
    assert trace == (Communication.send("u1", "u2", "stop"), Communication.receive("u1", "u2", "stop"))
    assert format_trace(trace) == "u1>u2!stop u1<u2?stop"


def test_parse_trace_json():
    """Test the JSON trace form"""
    text = json.dumps([{"kind": "send", "player": "p", "peer": "q", "label": "a"},
                       {"kind": "receive", "player": "q", "peer": "p", "label": "a"}])
    trace = parse_trace(text)
    assert trace[0].kind == CommKind.SEND
    assert trace[1].message == Message("p", "a", "q")


def test_parse_trace_invalid():
    """Test malformed tokens are rejected"""
    with pytest.raises(ParseError):
        parse_trace("p>q?a")
    with pytest.raises(ParseError):
        parse_trace("p>p!a")
    with pytest.raises(ParseError):
        parse_trace('[{"kind": "shout"}]')


def test_stop_trace_file(corpus_path):
    """Test the corpus trace parses"""
    with open(corpus_path("social_media_stop.trace"), encoding="utf-8") as handle:
        trace = parse_trace(handle.read())
    assert len(trace) == 4


def test_render_round_trip_cyclic(social, exb):
    """Test printed cyclic types parse back bisimilar"""
    for gtype in (social.global_type("G"), exb.global_type("G"), exb.global_type("Gp")):
        assert bisimilar(parse_term(render(gtype), "global"), gtype)
    U1 = social.process("U1")
    assert bisimilar(parse_term(render(U1), "process"), U1)


def test_render_round_trip_inline():
    """Test acyclic terms print inline"""
    gtype = parse_global("p -> q !{a. q <- p ? a, b}")
    text = render(gtype)
    assert "global" not in text
    assert bisimilar(parse_global(text), gtype)


KINDS = ("process", "global", "network", "queue", "session")


def _corpus_definitions():
    cases = []
    for path in sorted(CORPUS.glob("*.mps")):
        module = load_corpus(path.stem)
        for kind in KINDS:
            for name in getattr(module, f"{kind}_defs"):
                cases.append(pytest.param(path.stem, kind, name, id=f"{path.stem}-{kind}-{name}"))
    return cases


@pytest.mark.parametrize("corpus_name,kind,name", _corpus_definitions())
def test_render_round_trip_corpus(corpus_name, kind, name):
    """Test every corpus definition prints to text that parses back to an equivalent term"""
    module = load_corpus(corpus_name)
    term = getattr(module, f"{kind}_defs")[name]
    text = render(term)
    if kind in ("process", "global"):
        assert bisimilar(parse_term(text, kind), term), text
    elif kind == "queue":
        assert parse_queue(text) == term
    elif kind == "network":
        assert network_equiv(parse_module(text).network(), term), text
    else:
        parsed = parse_module(text).session()
        assert network_equiv(parsed.network, term.network), text
        assert parsed.queue == term.queue


def test_render_session(social):
    """Test sessions print as parseable definition text"""
    session = social.session("SocialMedia")
    module = parse_module(render(session))
    assert module.session() == session


def test_show_forms(small, social):
    """Test inline display forms"""
    assert show(small.session("PingPong")) == "p[q!a.end] | q[p?a.end] || []"
    assert show(Network()) == "0"
    assert show(parse_queue("[p -> q : a]")) == "[p->q:a]"
    assert show(social.session("SocialMedia")) == "s[S] | u1[U1] | u2[U2] || []"


def test_parse_term_rejects_unknown_kind():
    """Test parse_term kinds"""
    with pytest.raises(ValueError):
        parse_term("End", "queue")
