"""
Tests for random instance generation
"""

from src.mpst.analysis import bounded
from src.mpst.generators import random_acyclic_global, random_instance
from src.mpst.terms import End, players_global, reachable


def test_instances_are_deterministic():
    """Test equal seeds give equal sources"""
    assert random_instance(11).source == random_instance(11).source


def test_instance_participants_are_the_players():
    """Test the participant set is every player of the global type"""
    for seed in range(20):
        instance = random_instance(seed, intruder=False, pending=False)
        assert instance.participants == players_global(instance.gtype)
        assert bounded(instance.gtype)


def test_intruder_is_left_out():
    """Test the intruder runs but is not a member"""
    instance = random_instance(3, intruder=True)
    assert instance.session.network.get("z") is not None
    assert "z" not in instance.participants
    assert "z" not in players_global(instance.gtype)


def test_pending_message():
    """Test a pending first message starts in the queue"""
    instance = random_instance(5, loop=False, pending=True)
    assert len(instance.session.queue) == 1
    assert not any(node.name == "G" for node in reachable(instance.gtype)[1:])


def test_loop_returns_to_start():
    """Test looping protocols come back to the root"""
    instance = random_instance(5, loop=True)
    assert any(child is instance.gtype for node in reachable(instance.gtype) for _, child in node.successors())
    assert len(instance.session.queue) == 0


def test_acyclic_globals():
    """Test acyclic generation"""
    for seed in range(20):
        gtype = random_acyclic_global(seed, max_levels=4)
        assert not isinstance(gtype, End)
        assert all(child is not gtype for node in reachable(gtype) for _, child in node.successors())
