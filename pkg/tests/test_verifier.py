"""
Tests for bounded exploration and the partial property checks
"""

import pytest
from src.mpst.syntax import format_trace, show
from src.mpst.verifier import (
    Bounds,
    Property,
    VerdictStatus,
    check_lock_free,
    check_omf,
    check_p_deadlock_free,
    check_p_lock_free,
    check_p_omf,
    explore,
    verify,
)

SOCIAL_BOUNDS = Bounds(max_trace_len=40, max_queue_per_channel=2)


def test_bounds_validated():
    """Test non-positive bounds are refused"""
    with pytest.raises(ValueError):
        Bounds(max_trace_len=0)
    with pytest.raises(ValueError):
        Bounds(max_queue_per_channel=0)


def test_explore_ping_pong(small):
    """Test the three states: the start, after p sends a, and after q reads it"""
    graph = explore(small.session("PingPong"), Bounds())
    assert len(graph) == 3
    assert not graph.frontier_truncated
    final = graph.states()[-1]
    assert graph.stuck(final)
    assert format_trace(graph.trace_to(final)) == "p>q!a q<p?a"
    assert len(graph.edges()) == 2


def test_explore_queue_bound(small):
    """Test sends beyond the channel bound are pruned"""
    graph = explore(small.session("Flooding"), Bounds(max_trace_len=10, max_queue_per_channel=1))
    assert len(graph) == 2
    assert graph.frontier_truncated


def test_explore_trace_bound(small):
    """Test states at the length limit are not expanded"""
    graph = explore(small.session("PingPong"), Bounds(max_trace_len=1))
    assert len(graph) == 2
    assert graph.frontier_truncated


def test_ping_pong_properties(small):
    """Test a clean exchange satisfies everything"""
    session = small.session("PingPong")
    for prop in Property:
        verdict = verify(session, {"p", "q"}, prop, Bounds())
        assert verdict.status == VerdictStatus.HOLDS
        assert verdict.witness_trace is None
    assert check_lock_free(session, Bounds()).status == VerdictStatus.HOLDS
    assert check_omf(session, Bounds()).status == VerdictStatus.HOLDS


def test_orphan_message(small):
    """Test a message nobody reads"""
    session = small.session("Orphaned")
    verdict = check_p_omf(session, {"p", "q"}, Bounds())
    assert verdict.violated
    assert format_trace(verdict.witness_trace) == "p>q!lam"
    assert show(verdict.witness_state) == "0 || [p->q:lam]"
    assert "p->q:lam" in verdict.detail
    assert check_omf(session, Bounds()).violated
    assert check_p_omf(session, {"p"}, Bounds()).status == VerdictStatus.HOLDS


def test_flooding_within_bounds(small):
    """Test truncation degrades Holds"""
    verdict = check_p_lock_free(small.session("Flooding"), {"p"}, Bounds(max_trace_len=10, max_queue_per_channel=1))
    assert verdict.status == VerdictStatus.HOLDS_WITHIN_BOUNDS
    assert verdict.truncated


def test_empty_session(small):
    """Test the empty session holds every property"""
    verdict = check_p_deadlock_free(small.session("Nothing"), {"p"}, Bounds())
    assert verdict.status == VerdictStatus.HOLDS
    assert verdict.states_explored == 1


def test_social_service_locked(social):
    """Test s can be left waiting forever"""
    verdict = verify(social.session("SocialMedia"), {"s"}, Property.LOCK, SOCIAL_BOUNDS)
    assert verdict.violated
    assert verdict.witness_state.network.get("s") is not None
    assert "s can never act again" in verdict.detail


def test_social_service_deadlocked(social):
    """Test a stuck state keeps s active"""
    verdict = verify(social.session("SocialMedia"), {"s"}, Property.DEADLOCK, SOCIAL_BOUNDS)
    assert verdict.violated
    assert verdict.witness_trace


def test_social_request_orphaned(social):
    """Test u1's request after go/stop is never read"""
    verdict = verify(social.session("SocialMedia"), {"u1", "s"}, Property.OMF, SOCIAL_BOUNDS)
    assert verdict.violated
    assert "u1->s:req" in verdict.detail


def test_social_users_not_violated(social):
    """Test the users' properties hold as far as explored"""
    session = social.session("SocialMedia")
    for prop in (Property.LOCK, Property.OMF, Property.DEADLOCK):
        verdict = verify(session, {"u1", "u2"}, prop, SOCIAL_BOUNDS)
        assert verdict.status != VerdictStatus.VIOLATED


def test_unread_orphan(unread):
    """Test the queued message of the unread session stays unread"""
    verdict = verify(unread.session("Unread"), {"p", "q"}, Property.OMF, Bounds(max_trace_len=12, max_queue_per_channel=2))
    assert verdict.status != VerdictStatus.HOLDS
