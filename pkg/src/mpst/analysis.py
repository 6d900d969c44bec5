"""
Static Analysis

Depth, boundedness, weight and soundness of type configurations, computed
exactly on the finite graph of a global type.

depth and weight are both "longest guarded distance" problems: walk the
graph from the root, stop at target nodes, and give up (Infinity) as soon as
a blocking node or a cycle is reachable before a target. For depth, End is
silent rather than blocking. The search graph is a networkx DiGraph over
(node, counter) states, the counter tracking the same-channel reads a weight
walk has passed over; cycles are found as non-trivial strongly connected
components and the remaining DAG is evaluated in topological order.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx

from .dynamics import TypeConfiguration
from .terms import (
    Channel,
    Communication,
    End,
    GlobalType,
    Input,
    Label,
    Message,
    Output,
    Participant,
    Queue,
    describe,
    players_global,
    reachable,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

ExtNat = Union[int, float]
INFINITY: float = math.inf


def format_extnat(value: ExtNat) -> str:
    return "inf" if value == INFINITY else str(int(value))


class NodeRole(str, Enum):
    """How a guarded distance search treats a node"""
    TARGET = "target"
    BLOCK = "block"
    PASS = "pass"
    SILENT = "silent"  # path ends here without contributing


@dataclass(frozen=True)
class Measure:
    """
    Result of a guarded distance computation.

    When the value is Infinity, `reason` says why ("End", "label mismatch" or
    "cycle") and `nodes` names the concrete blocking node or cycle.
    """
    value: ExtNat
    reason: Optional[str] = None
    nodes: Tuple[GlobalType, ...] = ()

    @property
    def finite(self) -> bool:
        return self.value != INFINITY

    def explain(self) -> str:
        if self.finite:
            return format_extnat(self.value)
        return f"inf ({self.reason}: {', '.join(describe(node) for node in self.nodes)})"


StateKey = Tuple[int, int]


def _measure(root: GlobalType, classify: Callable[[GlobalType, int], Tuple[NodeRole, int, str]],
             advance: Callable[[GlobalType, int], int] = lambda node, passed: passed) -> Measure:
    """
    Guarded distance over the states (node, passed) reachable from (root, 0).

    `passed` is a counter carried along the walk; `advance` gives its value
    below a PASS node. Depth never moves it, weight counts the same-channel
    reads already passed over.
    """
    graph = networkx.DiGraph()
    terms: Dict[StateKey, GlobalType] = {}
    roles: Dict[StateKey, Tuple[NodeRole, int, str]] = {}
    order: List[StateKey] = []

    stack = [(root, 0)]
    while stack:
        node, passed = stack.pop()
        key = (id(node), passed)
        if key in terms:
            continue
        terms[key] = node
        order.append(key)
        graph.add_node(key)
        roles[key] = classify(node, passed)
        if roles[key][0] != NodeRole.PASS:
            continue
        carried = advance(node, passed)
        for _, child in reversed(node.successors()):
            child_key = (id(child), carried)
            graph.add_edge(key, child_key)
            if child_key not in terms:
                stack.append((child, carried))

    for key in order:
        role, _, reason = roles[key]
        if role == NodeRole.BLOCK:
            return Measure(INFINITY, reason, (terms[key],))

    for component in networkx.strongly_connected_components(graph):
        if len(component) > 1 or any(graph.has_edge(key, key) for key in component):
            cycle = tuple({id(terms[key]): terms[key] for key in order if key in component}.values())
            return Measure(INFINITY, "cycle", cycle)

    values: Dict[StateKey, Optional[int]] = {}
    for key in reversed(list(networkx.topological_sort(graph))):
        role, base, _ = roles[key]
        if role == NodeRole.TARGET:
            values[key] = base
        elif role == NodeRole.SILENT:
            values[key] = None
        else:
            below = [values[child] for child in graph.successors(key) if values[child] is not None]
            values[key] = 1 + max(below) if below else None
    return Measure(values[(id(root), 0)] or 0)


# ---------------------------------------------------------------------------
# Depth and boundedness
# ---------------------------------------------------------------------------


def measure_depth(gtype: GlobalType, participant: Participant) -> Measure:
    """
    depth() with the blocking witness kept.

    End is silent here, not infinite: a path ending before the participant
    plays puts no bound on it. With End infinite, any type in which some
    player stops before another would be unbounded.
    """
    if participant not in players_global(gtype):
        return Measure(0)

    def classify(node: GlobalType, passed: int) -> Tuple[NodeRole, int, str]:
        if isinstance(node, End):
            return NodeRole.SILENT, 0, ""
        if node.player == participant:
            return NodeRole.TARGET, 1, ""
        return NodeRole.PASS, 0, ""

    return _measure(gtype, classify)


def depth(gtype: GlobalType, participant: Participant) -> ExtNat:
    """
    Worst-case position (1-based) of the first communication played by
    `participant` along the paths of `gtype`.

    Returns 0 iff the participant plays nothing in the type, Infinity when
    some infinite path never meets it. Paths that reach End without meeting
    the participant put no bound on it: a participant still active at End is
    rejected by the End axiom instead.

    Examples:
        >>> g = Output("p", "q", (("a", Input("q", "p", "a", End())),))
        >>> depth(g, "p"), depth(g, "q")
        (1, 2)
    """
    return measure_depth(gtype, participant).value


@dataclass(frozen=True)
class Boundedness:
    """Verdict of the boundedness check, with the first failing (node, participant)"""
    bounded: bool
    witness: Optional[Tuple[GlobalType, Participant]] = None
    measure: Optional[Measure] = None

    def __bool__(self) -> bool:
        return self.bounded


def bounded(gtype: GlobalType) -> Boundedness:
    """
    Check that depth is finite for every player of every node of the type.

    Named nodes (definition roots) are examined first so witnesses point at
    definitions when possible.
    """
    nodes = reachable(gtype)
    ordered = [node for node in nodes if node.name] + [node for node in nodes if not node.name]
    for node in ordered:
        for participant in sorted(players_global(node)):
            result = measure_depth(node, participant)
            if not result.finite:
                logger.debug(f"Unbounded at {describe(node)} for {participant}: {result.explain()}")
                return Boundedness(False, (node, participant), result)
    return Boundedness(True)


# ---------------------------------------------------------------------------
# Weight and soundness
# ---------------------------------------------------------------------------


def measure_weight(message: Message, gtype: GlobalType, ahead: Sequence[Label] = ()) -> Measure:
    """
    weight() with the blocking witness kept.

    `ahead` holds the labels queued before `message` on its channel, oldest
    first. Their reads come first on every path, so the walk passes over
    them in order and only a read out of that order blocks.
    """
    ahead = tuple(ahead)

    def classify(node: GlobalType, passed: int) -> Tuple[NodeRole, int, str]:
        if isinstance(node, End):
            return NodeRole.BLOCK, 0, "End"
        if isinstance(node, Input) and node.channel == message.channel:
            expected = ahead[passed] if passed < len(ahead) else message.label
            if node.label != expected:
                return NodeRole.BLOCK, 0, "label mismatch"
            if passed == len(ahead):
                return NodeRole.TARGET, 0, ""
        return NodeRole.PASS, 0, ""

    def advance(node: GlobalType, passed: int) -> int:
        if isinstance(node, Input) and node.channel == message.channel:
            return passed + 1
        return passed

    return _measure(gtype, classify, advance)


def weight(message: Message, gtype: GlobalType, ahead: Sequence[Label] = ()) -> ExtNat:
    """
    Worst-case distance from the root to the input reading `message`.

    Infinity when some path ends, loops, or expects another label on the
    same channel before reading the message. With `ahead`, the message is
    the occurrence queued behind those labels.
    """
    return measure_weight(message, gtype, ahead).value


def queue_positions(queue: Queue) -> List[Tuple[Message, Tuple[Label, ...]]]:
    """Every occurrence in queue order, with the labels queued before it on its channel"""
    seen: Dict[Channel, List[Label]] = {}
    positions = []
    for message in queue:
        earlier = seen.setdefault(message.channel, [])
        positions.append((message, tuple(earlier)))
        earlier.append(message.label)
    return positions


@dataclass
class Soundness:
    """Outcome of the soundness check; `offender` is the first unreadable message"""
    sound: bool
    offender: Optional[Message] = None
    measure: Optional[Measure] = None
    weights: List[Tuple[Message, ExtNat]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.sound


def p_sound(config: TypeConfiguration, participants: Iterable[Participant]) -> Soundness:
    """
    Check that every queued message between members of `participants` has
    finite weight in the global type.

    Occurrences on one channel are weighed in FIFO order: the k-th one is
    read after the k-1 before it, so its walk passes over their reads.
    """
    members = frozenset(participants)
    checked = [(m, earlier) for m, earlier in queue_positions(config.queue)
               if m.sender in members and m.receiver in members]
    shared = sorted({m.channel for m, earlier in checked if earlier})
    if shared:
        logger.warning(
            f"Several occurrences share a channel ({', '.join(f'{s}->{r}' for s, r in shared)}); "
            f"each is weighed behind the ones queued before it"
        )

    result = Soundness(True)
    cache: Dict[Tuple[Message, Tuple[Label, ...]], Measure] = {}
    for message, earlier in checked:
        if (message, earlier) not in cache:
            cache[message, earlier] = measure_weight(message, config.gtype, earlier)
        measure = cache[message, earlier]
        result.weights.append((message, measure.value))
        if not measure.finite and result.sound:
            result.sound = False
            result.offender = message
            result.measure = measure
    return result


# ---------------------------------------------------------------------------
# Paths and tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Path:
    """
    A root-to-node walk of the tree unfolding.

    `cyclic` marks a walk that stopped on re-entering a node already on it;
    `truncated` marks one cut at the length limit.
    """
    communications: Tuple[Communication, ...]
    cyclic: bool = False
    truncated: bool = False

    def __str__(self) -> str:
        text = " . ".join(str(step) for step in self.communications) or "eps"
        if self.cyclic:
            text += " . (cycle)"
        elif self.truncated:
            text += " . ..."
        return text


def paths_sample(gtype: GlobalType, max_len: int) -> List[Path]:
    """All maximal paths, cut at `max_len` communications or at the first repeated node"""
    paths: List[Path] = []

    def walk(node: GlobalType, prefix: Tuple[Communication, ...], on_path: frozenset) -> None:
        if isinstance(node, End):
            paths.append(Path(prefix))
            return
        if id(node) in on_path:
            paths.append(Path(prefix, cyclic=True))
            return
        if len(prefix) >= max_len:
            paths.append(Path(prefix, truncated=True))
            return
        for step, child in node.communications():
            walk(child, prefix + (step,), on_path | {id(node)})

    walk(gtype, (), frozenset())
    return paths


def node_labels(gtype: GlobalType) -> Dict[int, str]:
    """
    Display labels for the reachable nodes: definition names where present,
    otherwise the path from the nearest labelled ancestor (`G/!go/?go`).
    """
    labels: Dict[int, str] = {id(gtype): gtype.name or "root"}
    pending = [gtype]
    while pending:
        node = pending.pop(0)
        mark = "!" if isinstance(node, Output) else "?"
        for label, child in node.successors():
            if id(child) in labels:
                continue
            labels[id(child)] = child.name or f"{labels[id(node)]}/{mark}{label}"
            pending.append(child)
    return labels


@dataclass(frozen=True)
class DepthRow:
    node: str
    participant: Participant
    depth: ExtNat


def depth_table(gtype: GlobalType) -> List[DepthRow]:
    """depth for every reachable node and every player of the root, in node order"""
    labels = node_labels(gtype)
    players = sorted(players_global(gtype))
    return [
        DepthRow(labels[id(node)], participant, depth(node, participant))
        for node in reachable(gtype)
        for participant in players
    ]


def weight_table(gtype: GlobalType, queue: Queue) -> List[Tuple[Message, Measure]]:
    """weight of every queued message occurrence, in queue order"""
    return [(message, measure_weight(message, gtype, earlier)) for message, earlier in queue_positions(queue)]
