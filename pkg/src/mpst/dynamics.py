"""
Dynamics

The two labelled transition systems:
- sessions: Send appends the chosen label to the queue tail, Rcv consumes
  the head of the channel from the named peer
- type configurations (global type plus queue): Top-Out/Top-In fire at the
  root, Inside-Out/Inside-In let a communication overtake independent root
  communications of other players

The type configuration step is directed: given the communication, it
descends only through nodes played by someone else, which terminates on
bounded global types.
"""

from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Set, Tuple

import networkx

from .errors import NotEnabled, UnboundedType
from .terms import (
    EMPTY_QUEUE,
    CommKind,
    Communication,
    End,
    ExternalChoice,
    GlobalType,
    Input,
    InternalChoice,
    Message,
    Output,
    Queue,
    Session,
    describe,
    graph_of,
    players_global,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


def session_enabled(session: Session) -> List[Tuple[Communication, Session]]:
    """
    All steps of a session, players in lexicographic order and labels in
    lexicographic order within a player. An empty list means stuck.
    """
    steps: List[Tuple[Communication, Session]] = []
    network, queue = session.network, session.queue
    for player, process in network.items():
        if isinstance(process, InternalChoice):
            for label, continuation in process.successors():
                step = Communication.send(player, process.peer, label)
                steps.append((step, Session(network.with_binding(player, continuation),
                                            queue.append(step.message))))
        elif isinstance(process, ExternalChoice):
            head = queue.head(process.peer, player)
            continuation = process.branch(head.label) if head is not None else None
            if continuation is not None:
                step = Communication.receive(player, process.peer, head.label)
                steps.append((step, Session(network.with_binding(player, continuation),
                                            queue.without_head(process.peer, player))))
    return steps


def session_step(session: Session, step: Communication) -> Session:
    """
    Successor of `session` under `step`.

    Raises:
        NotEnabled: The communication cannot be performed
    """
    process = session.network.get(step.player)
    if step.kind == CommKind.SEND and isinstance(process, InternalChoice) and process.peer == step.peer:
        continuation = process.branch(step.label)
        if continuation is not None:
            return Session(session.network.with_binding(step.player, continuation),
                           session.queue.append(step.message))
    if step.kind == CommKind.RECEIVE and isinstance(process, ExternalChoice) and process.peer == step.peer:
        head = session.queue.head(step.peer, step.player)
        continuation = process.branch(step.label)
        if head is not None and head.label == step.label and continuation is not None:
            return Session(session.network.with_binding(step.player, continuation),
                           session.queue.without_head(step.peer, step.player))
    raise NotEnabled(f"{step} is not enabled", communication=step)


def session_run(session: Session, trace: Sequence[Communication]) -> Session:
    """
    Replay a trace step by step.

    Raises:
        NotEnabled: carrying the index of the first disabled step
    """
    current = session
    for index, step in enumerate(trace):
        try:
            current = session_step(current, step)
        except NotEnabled as exc:
            raise NotEnabled(f"step {index} ({step}) is not enabled", communication=step, index=index) from exc
    return current


# ---------------------------------------------------------------------------
# Type configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TypeConfiguration:
    """A global type running against a queue; equality is bisimilarity plus queue equivalence"""
    gtype: GlobalType
    queue: Queue = EMPTY_QUEUE

    @property
    def key(self) -> Tuple:
        return (self.gtype.key, self.queue.key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TypeConfiguration):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


def _descend(node: GlobalType, queue: Queue, step: Communication,
             on_path: FrozenSet[int]) -> Tuple[GlobalType, Queue]:
    if id(node) in on_path:
        raise UnboundedType(
            f"{describe(node)} is reached again while looking for {step.player}",
            witness=(node, step.player),
        )
    if isinstance(node, End):
        raise NotEnabled(f"{step} is not enabled: End reached", communication=step)

    if node.player == step.player:
        if isinstance(node, Output) and step.kind == CommKind.SEND and step.peer == node.receiver:
            child = node.branch(step.label)
            if child is not None:
                return child, queue.append(step.message)
        if (isinstance(node, Input) and step.kind == CommKind.RECEIVE
                and step.peer == node.sender and step.label == node.label):
            head = queue.head(node.sender, node.receiver)
            if head is not None and head.label == node.label:
                return node.continuation, queue.without_head(node.sender, node.receiver)
        raise NotEnabled(f"{step} is not enabled: {describe(node)} comes first", communication=step)

    inner_path = on_path | {id(node)}
    if isinstance(node, Output):
        stepped = []
        shared = None
        for label, child in node.branches:
            result_child, result_queue = _descend(
                child, queue.append(Message(node.sender, label, node.receiver)), step, inner_path
            )
            if result_queue.channel(node.sender, node.receiver)[-1:] != (label,):
                raise NotEnabled(f"{step} would consume the message of {describe(node)}", communication=step)
            remainder = result_queue.without_last(node.sender, node.receiver)
            if shared is None:
                shared = remainder
            elif remainder != shared:
                raise NotEnabled(f"{step} leaves different queues in the branches of {describe(node)}",
                                 communication=step)
            stepped.append((label, result_child))
        return Output(node.sender, node.receiver, tuple(stepped)), shared

    head = queue.head(node.sender, node.receiver)
    if head is None or head.label != node.label:
        raise NotEnabled(f"{step} is not enabled: {describe(node)} has no message to read",
                         communication=step)
    result_child, result_queue = _descend(
        node.continuation, queue.without_head(node.sender, node.receiver), step, inner_path
    )
    return Input(node.receiver, node.sender, node.label, result_child), result_queue.prepend(head)


def config_step(config: TypeConfiguration, step: Communication) -> TypeConfiguration:
    """
    Successor of a type configuration under `step`.

    Args:
        config: Configuration with a bounded global type
        step: Communication to perform

    Returns:
        The rebuilt configuration. When the step is not at the root, the
        root communication (participants, labels, branching) is preserved
        and every branch is advanced.

    Raises:
        NotEnabled: No rule applies
        UnboundedType: The descent loops, so the global type is not bounded
    """
    if step.player not in players_global(config.gtype):
        raise NotEnabled(f"{step.player} plays no communication of the type", communication=step)
    gtype, queue = _descend(config.gtype, config.queue, step, frozenset())
    return TypeConfiguration(gtype, queue)


def _candidates(gtype: GlobalType, player: str) -> Set[Communication]:
    """Root communications of `player` reachable without passing one of its own nodes"""
    if gtype.player == player:
        return {step for step, _ in gtype.communications()}
    graph = graph_of(gtype)
    own = [key for key, node in graph.nodes(data="term") if node.player == player]
    graph.remove_edges_from(list(graph.out_edges(own)))
    region = graph.subgraph(networkx.descendants(graph, id(gtype)) | {id(gtype)})
    try:
        cycle = networkx.find_cycle(region)
    except networkx.NetworkXNoCycle:
        cycle = []
    if cycle:
        node = graph.nodes[cycle[0][0]]["term"]
        raise UnboundedType(
            f"{describe(node)} lies on a cycle without communications of {player}",
            witness=(node, player),
        )
    found: Set[Communication] = set()
    for key in region:
        node = graph.nodes[key]["term"]
        if node.player == player:
            found.update(step for step, _ in node.communications())
    return found


def config_enabled(config: TypeConfiguration) -> List[Tuple[Communication, TypeConfiguration]]:
    """
    All steps of a type configuration, ordered like `session_enabled`.

    Raises:
        UnboundedType: The global type is not bounded
    """
    steps = []
    for player in sorted(players_global(config.gtype)):
        for step in sorted(_candidates(config.gtype, player), key=Communication.sort_key):
            try:
                steps.append((step, config_step(config, step)))
            except NotEnabled:
                continue
    logger.debug(f"{len(steps)} enabled steps for configuration {config.gtype.key}")
    return steps
