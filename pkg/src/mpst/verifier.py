"""
Property Verifier

Bounded explicit-state exploration of a session and the partial properties
checked on the resulting state graph:
- deadlock-freedom: no reachable stuck state keeps a member active
- lock-freedom: every reachable state keeping a member active can still
  reach a communication played by that member
- orphan-message-freedom: every queued message between members can still
  be read

States are sessions up to structural congruence. Exploration is a breadth
first search, so witness traces are shortest traces. A state graph is
"truncated" when a send was pruned by the per-channel queue bound or a state
was left unexpanded at the trace length limit; verdicts then degrade from
Holds to HoldsWithinBounds and are never extrapolated.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Set, Tuple

import networkx

from .dynamics import session_enabled
from .syntax import show
from .terms import (
    CommKind,
    Communication,
    Participant,
    ParticipantSet,
    Session,
    Trace,
    participants_network,
    players_network,
    plays_queue,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

StateKey = Hashable


@dataclass(frozen=True)
class Bounds:
    """
    Exploration cutoffs.

    Invariants (enforced in __post_init__):
        - max_trace_len >= 1
        - max_queue_per_channel >= 1
    """
    max_trace_len: int = 64
    max_queue_per_channel: int = 4

    def __post_init__(self):
        if self.max_trace_len < 1:
            raise ValueError(f"max_trace_len must be >= 1, got {self.max_trace_len}")
        if self.max_queue_per_channel < 1:
            raise ValueError(f"max_queue_per_channel must be >= 1, got {self.max_queue_per_channel}")


class Property(str, Enum):
    LOCK = "lock"
    DEADLOCK = "deadlock"
    OMF = "omf"


class VerdictStatus(str, Enum):
    HOLDS = "Holds"
    VIOLATED = "Violated"
    HOLDS_WITHIN_BOUNDS = "HoldsWithinBounds"


@dataclass
class StateGraph:
    """
    Reachable sessions and the steps between them.

    Nodes of `graph` are state keys carrying the session, its BFS depth, the
    parent state and the step from it, and the players that have an enabled
    step. Edges are keyed by the step token.
    """
    graph: networkx.MultiDiGraph
    initial: StateKey
    truncated_states: Set[StateKey] = field(default_factory=set)

    @property
    def frontier_truncated(self) -> bool:
        return bool(self.truncated_states)

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    def states(self) -> List[StateKey]:
        """States in discovery order"""
        return list(self.graph.nodes)

    def session(self, state: StateKey) -> Session:
        return self.graph.nodes[state]["session"]

    def enabled(self, state: StateKey) -> Tuple[Communication, ...]:
        """Every enabled step, including sends pruned by the queue bound"""
        return self.graph.nodes[state]["steps"]

    def active(self, state: StateKey) -> FrozenSet[Participant]:
        return frozenset(step.player for step in self.enabled(state))

    def stuck(self, state: StateKey) -> bool:
        return not self.enabled(state)

    def trace_to(self, state: StateKey) -> Trace:
        steps: List[Communication] = []
        while self.graph.nodes[state]["parent"] is not None:
            steps.append(self.graph.nodes[state]["via"])
            state = self.graph.nodes[state]["parent"]
        return tuple(reversed(steps))

    def edges(self) -> List[Tuple[StateKey, Communication, StateKey]]:
        return [(source, data["step"], target) for source, target, data in self.graph.edges(data=True)]


def explore(session: Session, bounds: Bounds) -> StateGraph:
    """
    Breadth-first exploration up to `bounds`.

    Sends that would put more than `max_queue_per_channel` messages on their
    channel are pruned; states at depth `max_trace_len` are not expanded.
    Both mark the graph truncated.
    """
    graph = networkx.MultiDiGraph()
    initial = session.key
    graph.add_node(initial, session=session, depth=0, parent=None, via=None, steps=())
    result = StateGraph(graph, initial)

    pending = deque([initial])
    while pending:
        state = pending.popleft()
        current = graph.nodes[state]
        steps = session_enabled(current["session"])
        current["steps"] = tuple(step for step, _ in steps)
        if current["depth"] >= bounds.max_trace_len:
            if steps:
                result.truncated_states.add(state)
            continue
        for step, successor in steps:
            if step.kind == CommKind.SEND and \
                    len(successor.queue.channel(step.player, step.peer)) > bounds.max_queue_per_channel:
                result.truncated_states.add(state)
                continue
            key = successor.key
            if key not in graph:
                graph.add_node(key, session=successor, depth=current["depth"] + 1,
                               parent=state, via=step, steps=())
                pending.append(key)
            graph.add_edge(state, key, key=step.token, step=step)

    logger.info(
        f"Explored {graph.number_of_nodes()} states, {graph.number_of_edges()} steps"
        f"{' (truncated)' if result.frontier_truncated else ''}"
    )
    return result


@dataclass
class Verdict:
    """
    Outcome of a property check.

    Invariants:
        - VIOLATED carries a witness trace and state
        - HOLDS_WITHIN_BOUNDS only when the state graph is truncated
    """
    property: Property
    participants: ParticipantSet
    status: VerdictStatus
    states_explored: int
    truncated: bool
    witness_trace: Optional[Trace] = None
    witness_state: Optional[Session] = None
    detail: str = ""

    @property
    def violated(self) -> bool:
        return self.status == VerdictStatus.VIOLATED


def _reaching(graph: StateGraph, targets: Iterable[StateKey],
              keep_edge: Callable[[Communication], bool] = lambda step: True) -> Set[StateKey]:
    """Targets plus every state with a path (through kept edges) to one of them"""
    goal = ("goal",)
    work = networkx.DiGraph()
    work.add_nodes_from(graph.graph.nodes)
    work.add_edges_from(
        (source, target) for source, target, data in graph.graph.edges(data=True) if keep_edge(data["step"])
    )
    work.add_node(goal)
    work.add_edges_from((state, goal) for state in targets)
    return networkx.ancestors(work, goal)


def _settled(graph: StateGraph, state: StateKey,
             keep_edge: Callable[[Communication], bool] = lambda step: True) -> bool:
    """True when no truncated state lies below `state`, so a negative answer there is definitive"""
    if state in graph.truncated_states:
        return False
    below = networkx.descendants(
        networkx.subgraph_view(graph.graph, filter_edge=lambda s, t, k: keep_edge(graph.graph.edges[s, t, k]["step"])),
        state,
    )
    return not (below & graph.truncated_states)


def _verdict(graph: StateGraph, prop: Property, members: ParticipantSet,
             violation: Optional[Tuple[StateKey, str]], undecided: bool) -> Verdict:
    verdict = Verdict(prop, members, VerdictStatus.HOLDS, len(graph), graph.frontier_truncated)
    if violation is not None:
        state, detail = violation
        verdict.status = VerdictStatus.VIOLATED
        verdict.witness_trace = graph.trace_to(state)
        verdict.witness_state = graph.session(state)
        verdict.detail = detail
        logger.info(f"{prop.value} violated for {{{', '.join(sorted(members))}}}: {detail}")
    elif undecided or graph.frontier_truncated:
        verdict.status = VerdictStatus.HOLDS_WITHIN_BOUNDS
    return verdict


def check_p_deadlock_free(session: Session, participants: Iterable[Participant], bounds: Bounds,
                          graph: Optional[StateGraph] = None) -> Verdict:
    """Violated iff a reachable stuck state keeps a member active"""
    members = frozenset(participants)
    graph = graph or explore(session, bounds)
    for state in graph.states():
        if not graph.stuck(state):
            continue
        active = players_network(graph.session(state).network) & members
        if active:
            detail = f"stuck with {', '.join(sorted(active))} active: {show(graph.session(state))}"
            return _verdict(graph, Property.DEADLOCK, members, (state, detail), False)
    return _verdict(graph, Property.DEADLOCK, members, None, False)


def check_p_lock_free(session: Session, participants: Iterable[Participant], bounds: Bounds,
                      graph: Optional[StateGraph] = None) -> Verdict:
    """
    For each member p: a reachable state keeping p active must reach a state
    where p has an enabled step. A state that cannot, and has no truncated
    state below it, is a violation.
    """
    members = frozenset(participants)
    graph = graph or explore(session, bounds)
    undecided = False
    for player in sorted(members):
        targets = [state for state in graph.states() if player in graph.active(state)]
        reaching = _reaching(graph, targets)
        for state in graph.states():
            if state in reaching or player not in players_network(graph.session(state).network):
                continue
            if _settled(graph, state):
                detail = f"{player} can never act again from {show(graph.session(state))}"
                return _verdict(graph, Property.LOCK, members, (state, detail), False)
            undecided = True
    return _verdict(graph, Property.LOCK, members, None, undecided)


def check_p_omf(session: Session, participants: Iterable[Participant], bounds: Bounds,
                graph: Optional[StateGraph] = None) -> Verdict:
    """
    For every ordered pair (p, q) of members: whenever the p->q channel is not
    empty, its head must be readable by q in some continuation.

    The head of a channel stays the same message until q reads it, so tracking
    heads identifies each occurrence: only paths that avoid q's reads from p
    are searched.
    """
    members = frozenset(participants)
    graph = graph or explore(session, bounds)
    undecided = False
    heads: Dict[Tuple[Participant, Participant, str], List[StateKey]] = {}
    for state in graph.states():
        queue = graph.session(state).queue
        for sender, receiver in queue.channels():
            if sender in members and receiver in members:
                heads.setdefault((sender, receiver, queue.head(sender, receiver).label), []).append(state)

    for (sender, receiver, label), states in sorted(heads.items()):
        wanted = Communication.receive(receiver, sender, label)
        targets = [state for state in graph.states() if wanted in graph.enabled(state)]

        def keep(step: Communication, sender=sender, receiver=receiver) -> bool:
            return not (step.kind == CommKind.RECEIVE and step.player == receiver and step.peer == sender)

        reaching = _reaching(graph, targets, keep)
        for state in states:
            if state in reaching:
                continue
            if _settled(graph, state, keep):
                message = f"{sender}->{receiver}:{label}"
                detail = f"{message} is never read from {show(graph.session(state))}"
                return _verdict(graph, Property.OMF, members, (state, detail), False)
            undecided = True
    return _verdict(graph, Property.OMF, members, None, undecided)


def check_lock_free(session: Session, bounds: Bounds) -> Verdict:
    """Lock-freedom of the whole system: every active participant"""
    return check_p_lock_free(session, players_network(session.network), bounds)


def check_omf(session: Session, bounds: Bounds) -> Verdict:
    """Orphan-message-freedom of the whole system: everyone mentioned by the session"""
    everyone = players_network(session.network) | participants_network(session.network) | plays_queue(session.queue)
    return check_p_omf(session, everyone, bounds)


CHECKS: Dict[Property, Callable[..., Verdict]] = {
    Property.LOCK: check_p_lock_free,
    Property.DEADLOCK: check_p_deadlock_free,
    Property.OMF: check_p_omf,
}


def verify(session: Session, participants: Iterable[Participant], prop: Property, bounds: Bounds) -> Verdict:
    """Run one property check"""
    return CHECKS[Property(prop)](session, participants, bounds)
