"""
Calculus Terms

Regular (finitely represented, possibly cyclic) terms of the asynchronous
multiparty session calculus and the participant-set functions every other
module relies on.

This module provides:
- Process nodes: Inactive, InternalChoice, ExternalChoice
- Global type nodes: End, Output, Input (reader first, then sender)
- Message, Queue, Network, Session, Communication
- Canonical forms: graph bisimilarity keys, per-channel queue forms
- plays/players functions and the well-formedness report

Terms are finite graphs. A node built for a recursive definition points back
to itself (directly or through other nodes); two nodes denote the same
regular tree exactly when their canonical keys are equal.

Examples:
    >>> p = InternalChoice("q", (("a", Inactive()),))
    >>> sorted(plays_process(p))
    ['q']
"""

import hashlib
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import networkx

Participant = str
Label = str
ParticipantSet = FrozenSet[Participant]
Channel = Tuple[Participant, Participant]
ChannelForm = Dict[Channel, Tuple[Label, ...]]


def fingerprint(key) -> str:
    """Short stable hash of a canonical key"""
    return hashlib.sha256(repr(key).encode("utf-8")).hexdigest()[:16]


class Term:
    """
    Node of a finite term graph.

    Subclasses provide `signature()` (what the node looks like on its own)
    and `successors()` (outgoing edges, ordered by label). Everything else,
    including the canonical key, is derived from these two.
    """

    name: Optional[str] = None

    def signature(self) -> Tuple:
        raise NotImplementedError

    def successors(self) -> Tuple[Tuple[Label, "Term"], ...]:
        raise NotImplementedError

    @cached_property
    def key(self) -> str:
        """Fingerprint of the bisimilarity class of this node"""
        return fingerprint(canonical_form(self))


def _sorted_edges(branches: Iterable[Tuple[Label, Term]]) -> Tuple[Tuple[Label, Term], ...]:
    return tuple(sorted(branches, key=lambda branch: branch[0]))


# ---------------------------------------------------------------------------
# Processes
# ---------------------------------------------------------------------------


class Process(Term):
    """Base class of process nodes"""


@dataclass(frozen=True, eq=False)
class Inactive(Process):
    """The terminated process 0"""

    name: Optional[str] = None

    def signature(self) -> Tuple:
        return ("0",)

    def successors(self) -> Tuple[Tuple[Label, Term], ...]:
        return ()


class Choice(Process):
    """Shared behaviour of internal and external choices"""

    peer: Participant
    branches: Tuple[Tuple[Label, Process], ...]

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(sorted(label for label, _ in self.branches))

    def branch(self, label: Label) -> Optional[Process]:
        for candidate, continuation in self.branches:
            if candidate == label:
                return continuation
        return None

    def successors(self) -> Tuple[Tuple[Label, Term], ...]:
        return _sorted_edges(self.branches)


@dataclass(frozen=True, eq=False)
class InternalChoice(Choice):
    """
    `peer!{l1.P1, ..., ln.Pn}`: choose a label and send it to `peer`.

    Attributes:
        peer: Receiver of the chosen label
        branches: (label, continuation) pairs in source order
        name: Definition name, when the node was built for one
    """

    peer: Participant
    branches: Tuple[Tuple[Label, Process], ...] = ()
    name: Optional[str] = None

    def signature(self) -> Tuple:
        return ("!", self.peer, self.labels)


@dataclass(frozen=True, eq=False)
class ExternalChoice(Choice):
    """`peer?{l1.P1, ..., ln.Pn}`: wait for one of the labels from `peer`"""

    peer: Participant
    branches: Tuple[Tuple[Label, Process], ...] = ()
    name: Optional[str] = None

    def signature(self) -> Tuple:
        return ("?", self.peer, self.labels)


# ---------------------------------------------------------------------------
# Communications
# ---------------------------------------------------------------------------


class CommKind(str, Enum):
    """Direction of a communication"""
    SEND = "send"
    RECEIVE = "receive"


@dataclass(frozen=True)
class Message:
    """
    Queued message `<sender label receiver>`.

    Invariants (enforced in __post_init__):
        - sender != receiver
    """
    sender: Participant
    label: Label
    receiver: Participant

    def __post_init__(self):
        if self.sender == self.receiver:
            raise ValueError(f"message from {self.sender} to itself")

    @property
    def channel(self) -> Channel:
        return (self.sender, self.receiver)

    def __str__(self) -> str:
        return f"{self.sender}->{self.receiver}:{self.label}"


@dataclass(frozen=True)
class Communication:
    """
    Transition label of both LTSs.

    Send `p q ! l`: p emits l to q. Receive `p q ? l`: p reads l sent by q.
    In both cases the player is p.
    """
    kind: CommKind
    player: Participant
    peer: Participant
    label: Label

    def __post_init__(self):
        if self.player == self.peer:
            raise ValueError(f"communication of {self.player} with itself")

    @classmethod
    def send(cls, player: Participant, peer: Participant, label: Label) -> "Communication":
        return cls(CommKind.SEND, player, peer, label)

    @classmethod
    def receive(cls, player: Participant, peer: Participant, label: Label) -> "Communication":
        return cls(CommKind.RECEIVE, player, peer, label)

    @property
    def message(self) -> Message:
        """The message emitted (send) or consumed (receive)"""
        if self.kind == CommKind.SEND:
            return Message(self.player, self.label, self.peer)
        return Message(self.peer, self.label, self.player)

    @property
    def token(self) -> str:
        """Compact trace token: `p>q!l` or `p<q?l`"""
        if self.kind == CommKind.SEND:
            return f"{self.player}>{self.peer}!{self.label}"
        return f"{self.player}<{self.peer}?{self.label}"

    def sort_key(self) -> Tuple[str, int, str, str]:
        return (self.player, 0 if self.kind == CommKind.SEND else 1, self.label, self.peer)

    def __str__(self) -> str:
        mark = "!" if self.kind == CommKind.SEND else "?"
        return f"{self.player} {self.peer} {mark} {self.label}"


Trace = Tuple[Communication, ...]


# ---------------------------------------------------------------------------
# Global types
# ---------------------------------------------------------------------------


class GlobalType(Term):
    """Base class of global type nodes"""

    @property
    def player(self) -> Optional[Participant]:
        return None

    def communications(self) -> Tuple[Tuple[Communication, "GlobalType"], ...]:
        """Root communications paired with the subtree they lead to"""
        return ()


@dataclass(frozen=True, eq=False)
class End(GlobalType):
    """The terminated global type"""

    name: Optional[str] = None

    def signature(self) -> Tuple:
        return ("End",)

    def successors(self) -> Tuple[Tuple[Label, Term], ...]:
        return ()


@dataclass(frozen=True, eq=False)
class Output(GlobalType):
    """`sender -> receiver !{l1.G1, ..., ln.Gn}`"""

    sender: Participant
    receiver: Participant
    branches: Tuple[Tuple[Label, GlobalType], ...] = ()
    name: Optional[str] = None

    @property
    def player(self) -> Participant:
        return self.sender

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(sorted(label for label, _ in self.branches))

    def branch(self, label: Label) -> Optional[GlobalType]:
        for candidate, continuation in self.branches:
            if candidate == label:
                return continuation
        return None

    def signature(self) -> Tuple:
        return ("->", self.sender, self.receiver, self.labels)

    def successors(self) -> Tuple[Tuple[Label, Term], ...]:
        return _sorted_edges(self.branches)

    def communications(self) -> Tuple[Tuple[Communication, GlobalType], ...]:
        return tuple(
            (Communication.send(self.sender, self.receiver, label), child)
            for label, child in self.successors()
        )


@dataclass(frozen=True, eq=False)
class Input(GlobalType):
    """
    `receiver <- sender ? label . continuation`

    The reader is written first, matching the reading rules of the type
    configuration LTS and the weight function.
    """

    receiver: Participant
    sender: Participant
    label: Label
    continuation: Optional[GlobalType] = None
    name: Optional[str] = None

    @property
    def player(self) -> Participant:
        return self.receiver

    @property
    def channel(self) -> Channel:
        return (self.sender, self.receiver)

    def signature(self) -> Tuple:
        return ("<-", self.receiver, self.sender, self.label)

    def successors(self) -> Tuple[Tuple[Label, Term], ...]:
        if self.continuation is None:
            return ()
        return ((self.label, self.continuation),)

    def communications(self) -> Tuple[Tuple[Communication, GlobalType], ...]:
        if self.continuation is None:
            return ()
        return ((Communication.receive(self.receiver, self.sender, self.label), self.continuation),)


def link(node: Term, **fields) -> Term:
    """
    Fill in the outgoing edges of a node allocated before its children.

    Only used while building cyclic terms, before the node is shared.
    """
    for attribute, value in fields.items():
        object.__setattr__(node, attribute, value)
    node.__dict__.pop("key", None)
    return node


# ---------------------------------------------------------------------------
# Graph utilities
# ---------------------------------------------------------------------------


def graph_of(*roots: Term) -> networkx.DiGraph:
    """
    Node graph of the terms reachable from `roots`.

    Vertices are node ids carrying the node under "term"; each vertex's
    out-edges are inserted in label order, so networkx traversals follow
    branch order.
    """
    graph = networkx.DiGraph()
    pending = []
    for root in roots:
        if id(root) not in graph:
            graph.add_node(id(root), term=root)
            pending.append(root)
    while pending:
        node = pending.pop()
        for label, child in node.successors():
            if id(child) not in graph:
                graph.add_node(id(child), term=child)
                pending.append(child)
            if not graph.has_edge(id(node), id(child)):
                graph.add_edge(id(node), id(child), label=label)
    return graph


def reachable(root: Term) -> List[Term]:
    """Nodes reachable from `root`, in depth-first preorder with label-ordered edges"""
    graph = graph_of(root)
    return [graph.nodes[key]["term"] for key in networkx.dfs_preorder_nodes(graph, id(root))]


def canonical_form(root: Term) -> Tuple:
    """
    Representation-independent description of the regular tree rooted at `root`.

    Nodes are grouped into bisimilarity classes by partition refinement, then
    the classes are numbered in breadth-first order from the root. Two roots
    have equal forms iff they are bisimilar.
    """
    nodes = reachable(root)
    index = {id(node): position for position, node in enumerate(nodes)}
    edges = [[(label, index[id(child)]) for label, child in node.successors()] for node in nodes]

    def renumber(signatures: List[Tuple]) -> List[int]:
        numbering: Dict[Tuple, int] = {}
        return [numbering.setdefault(signature, len(numbering)) for signature in signatures]

    blocks = renumber([node.signature() for node in nodes])
    while True:
        refined = renumber([
            (blocks[position], tuple(blocks[target] for _, target in edges[position]))
            for position in range(len(nodes))
        ])
        if len(set(refined)) == len(set(blocks)):
            break
        blocks = refined

    representative: Dict[int, int] = {}
    for position, block in enumerate(blocks):
        representative.setdefault(block, position)

    order = {blocks[0]: 0}
    pending = deque([blocks[0]])
    form = []
    while pending:
        block = pending.popleft()
        position = representative[block]
        out = []
        for label, target in edges[position]:
            target_block = blocks[target]
            if target_block not in order:
                order[target_block] = len(order)
                pending.append(target_block)
            out.append((label, order[target_block]))
        form.append((nodes[position].signature(), tuple(out)))
    return tuple(form)


def bisimilar(left: Term, right: Term) -> bool:
    """True iff both nodes unfold to the same regular tree"""
    return left is right or left.key == right.key


def describe(node: Term) -> str:
    """Short one-node description for diagnostics"""
    if node.name:
        return node.name
    if isinstance(node, InternalChoice):
        return f"{node.peer}!{{{','.join(node.labels)}}}"
    if isinstance(node, ExternalChoice):
        return f"{node.peer}?{{{','.join(node.labels)}}}"
    if isinstance(node, Output):
        return f"{node.sender}->{node.receiver}!{{{','.join(node.labels)}}}"
    if isinstance(node, Input):
        return f"{node.receiver}<-{node.sender}?{node.label}"
    if isinstance(node, End):
        return "End"
    return "end"


# ---------------------------------------------------------------------------
# Queues, networks, sessions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Queue:
    """
    Message queue, compared modulo reordering of messages on distinct channels.

    `==` and `hash` follow the structural equivalence: two queues are equal
    iff every (sender, receiver) channel carries the same label sequence.
    """
    messages: Tuple[Message, ...] = ()

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Queue):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @cached_property
    def key(self) -> Tuple:
        return tuple(sorted(queue_canonical(self).items()))

    def channel(self, sender: Participant, receiver: Participant) -> Tuple[Label, ...]:
        return tuple(m.label for m in self.messages if m.channel == (sender, receiver))

    def head(self, sender: Participant, receiver: Participant) -> Optional[Message]:
        """First message on the channel, i.e. the one the receiver reads next"""
        for message in self.messages:
            if message.channel == (sender, receiver):
                return message
        return None

    def append(self, message: Message) -> "Queue":
        return Queue(self.messages + (message,))

    def prepend(self, message: Message) -> "Queue":
        return Queue((message,) + self.messages)

    def without_head(self, sender: Participant, receiver: Participant) -> "Queue":
        for position, message in enumerate(self.messages):
            if message.channel == (sender, receiver):
                return Queue(self.messages[:position] + self.messages[position + 1:])
        raise ValueError(f"channel {sender}->{receiver} is empty")

    def without_last(self, sender: Participant, receiver: Participant) -> "Queue":
        for position in range(len(self.messages) - 1, -1, -1):
            if self.messages[position].channel == (sender, receiver):
                return Queue(self.messages[:position] + self.messages[position + 1:])
        raise ValueError(f"channel {sender}->{receiver} is empty")

    def channels(self) -> List[Channel]:
        return sorted({message.channel for message in self.messages})


EMPTY_QUEUE = Queue()


@dataclass(frozen=True, eq=False)
class Network:
    """
    Parallel composition of named processes.

    Bindings are kept sorted by participant and Inactive bindings are dropped
    on construction, so structural congruence is equality of the binding
    lists up to process bisimilarity (`==` implements exactly that).
    """
    bindings: Tuple[Tuple[Participant, Process], ...] = ()

    def __post_init__(self):
        seen = set()
        for participant, _ in self.bindings:
            if participant in seen:
                raise ValueError(f"participant {participant} bound twice")
            seen.add(participant)
        normal = tuple(sorted(
            ((participant, process) for participant, process in self.bindings
             if not isinstance(process, Inactive)),
            key=lambda binding: binding[0],
        ))
        object.__setattr__(self, "bindings", normal)

    @classmethod
    def of(cls, bindings: Union[Dict[Participant, Process], Iterable[Tuple[Participant, Process]]]) -> "Network":
        items = bindings.items() if isinstance(bindings, dict) else bindings
        return cls(tuple(items))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __len__(self) -> int:
        return len(self.bindings)

    @cached_property
    def key(self) -> Tuple[Tuple[Participant, str], ...]:
        return tuple((participant, process.key) for participant, process in self.bindings)

    def get(self, participant: Participant) -> Optional[Process]:
        for bound, process in self.bindings:
            if bound == participant:
                return process
        return None

    def items(self) -> Tuple[Tuple[Participant, Process], ...]:
        return self.bindings

    def with_binding(self, participant: Participant, process: Process) -> "Network":
        rest = tuple(b for b in self.bindings if b[0] != participant)
        return Network(rest + ((participant, process),))

    def without(self, participant: Participant) -> "Network":
        return Network(tuple(b for b in self.bindings if b[0] != participant))


@dataclass(frozen=True)
class Session:
    """A network running against a shared message queue"""
    network: Network
    queue: Queue = EMPTY_QUEUE

    @property
    def key(self) -> Tuple:
        return (self.network.key, self.queue.key)


# ---------------------------------------------------------------------------
# Participant sets
# ---------------------------------------------------------------------------


def plays_process(process: Process) -> ParticipantSet:
    """Participants mentioned anywhere in the process"""
    return frozenset(node.peer for node in reachable(process) if isinstance(node, Choice))


def plays_queue(queue: Queue) -> ParticipantSet:
    """Senders and receivers of all queued messages"""
    found = set()
    for message in queue:
        found.update((message.sender, message.receiver))
    return frozenset(found)


def players_network(network: Network) -> ParticipantSet:
    """Participants bound to an active process"""
    return frozenset(participant for participant, _ in network.items())


def participants_network(network: Network) -> ParticipantSet:
    """Participants mentioned by the bound processes"""
    found = set()
    for _, process in network.items():
        found |= plays_process(process)
    return frozenset(found)


def players_global(gtype: GlobalType) -> ParticipantSet:
    """Senders of outputs and readers of inputs reachable in the global type"""
    return frozenset(node.player for node in reachable(gtype) if node.player is not None)


def queue_canonical(queue: Queue) -> ChannelForm:
    """Map each channel to its label sequence; equal maps mean equivalent queues"""
    form: Dict[Channel, List[Label]] = {}
    for message in queue:
        form.setdefault(message.channel, []).append(message.label)
    return {channel: tuple(labels) for channel, labels in form.items()}


def network_equiv(left: Network, right: Network) -> bool:
    """Structural congruence of networks"""
    return left == right


# ---------------------------------------------------------------------------
# Well-formedness
# ---------------------------------------------------------------------------


SELF_COMMUNICATION = "self-communication"
DUPLICATE_LABELS = "duplicate labels"
EMPTY_CHOICE = "empty choice"
MISSING_CONTINUATION = "missing continuation"


@dataclass(frozen=True)
class Violation:
    """One violated side condition"""
    node: str
    condition: str
    detail: str = ""

    def __str__(self) -> str:
        suffix = f" ({self.detail})" if self.detail else ""
        return f"{self.node}: {self.condition}{suffix}"


@dataclass
class ValidationReport:
    """List of violations; empty means well-formed"""
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> List[str]:
        return [violation.condition for violation in self.violations]


def _check_branches(node: Term, labels: List[Label], report: ValidationReport) -> None:
    if not labels:
        report.violations.append(Violation(describe(node), EMPTY_CHOICE))
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        report.violations.append(Violation(describe(node), DUPLICATE_LABELS, ", ".join(duplicates)))


def _check_term(root: Term, report: ValidationReport) -> None:
    for node in reachable(root):
        if isinstance(node, Choice):
            _check_branches(node, [label for label, _ in node.branches], report)
        elif isinstance(node, Output):
            if node.sender == node.receiver:
                report.violations.append(Violation(describe(node), SELF_COMMUNICATION))
            _check_branches(node, [label for label, _ in node.branches], report)
        elif isinstance(node, Input):
            if node.sender == node.receiver:
                report.violations.append(Violation(describe(node), SELF_COMMUNICATION))
            if node.continuation is None:
                report.violations.append(Violation(describe(node), MISSING_CONTINUATION))


def well_formed(term: Union[Term, Network, Session, Queue]) -> ValidationReport:
    """
    Collect violations of the side conditions on processes, global types,
    networks and sessions.

    Violations are data: an empty report means the term is well-formed.

    Examples:
        >>> net = Network.of({"p": InternalChoice("p", (("l", Inactive()),))})
        >>> well_formed(net).conditions()
        ['self-communication']
    """
    report = ValidationReport()
    if isinstance(term, Session):
        report.violations.extend(well_formed(term.network).violations)
    elif isinstance(term, Network):
        for participant, process in term.items():
            if participant in plays_process(process):
                report.violations.append(
                    Violation(f"{participant}[{describe(process)}]", SELF_COMMUNICATION)
                )
            _check_term(process, report)
    elif isinstance(term, Term):
        _check_term(term, report)
    return report
