"""
Partial Type Checker

Decides judgements `H |-P N || M : G`: the session N || M follows the bounded
global type G for the participants in P, under the history H.

The algorithm is syntax-directed. At each judgement:
1. Cycle closes the branch when (N, M, G) is already in the history
2. End accepts when no member of P is still active and the queue is P-sound
3. Out / In follow the root communication of G, after checking the process
   shape, the queue-blind history, the players of the rest of the network and
   P-soundness

Each (network, G-node) pair occurs at most once along a branch, so checking
always terminates. Failure is returned as data (TypeFailure); the derivation
can be replayed independently with `derivation_validate`.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from .analysis import Soundness, bounded, format_extnat, p_sound
from .dynamics import TypeConfiguration
from .terms import (
    End,
    ExternalChoice,
    GlobalType,
    Input,
    InternalChoice,
    Message,
    Network,
    Output,
    Participant,
    ParticipantSet,
    Session,
    describe,
    fingerprint,
    players_global,
    players_network,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)


class CheckMode(str, Enum):
    """
    Which premises the rules carry.

    STANDARD: every rule as given (soundness at End, Out and In)
    LOCK_ONLY: no soundness premises; only lock-freedom is then guaranteed
    EMPTY_QUEUE_CYCLE: Cycle only closes on an empty queue, and Out/In
        drop their soundness premises
    """
    STANDARD = "standard"
    LOCK_ONLY = "lock-only"
    EMPTY_QUEUE_CYCLE = "empty-queue-cycle"


class RuleName(str, Enum):
    END = "End"
    CYCLE = "Cycle"
    OUT = "Out"
    IN = "In"


class FailureKind(str, Enum):
    UNBOUNDED_TYPE = "UnboundedType"
    PLAYERS_LEAK = "PlayersLeak"
    NOT_SOUND = "NotSound"
    QUEUE_MISMATCH_ON_REVISIT = "QueueMismatchOnRevisit"
    SHAPE_MISMATCH = "ShapeMismatch"
    HEAD_MESSAGE_MISMATCH = "HeadMessageMismatch"
    END_WITH_ACTIVE = "EndWithActiveP"


@dataclass(frozen=True)
class History:
    """
    Sessions (with their global type) met along a derivation branch.

    `entries` holds (network, queue, type) keys for Cycle; `index` forgets
    the queue and serves the revisit check of Out and In.
    """
    entries: FrozenSet[Tuple] = frozenset()
    index: FrozenSet[Tuple] = frozenset()

    def __len__(self) -> int:
        return len(self.entries)

    def contains(self, session: Session, gtype: GlobalType) -> bool:
        return (session.network.key, session.queue.key, gtype.key) in self.entries

    def revisits(self, network: Network, gtype: GlobalType) -> bool:
        return (network.key, gtype.key) in self.index

    def extend(self, session: Session, gtype: GlobalType) -> "History":
        return History(
            self.entries | {(session.network.key, session.queue.key, gtype.key)},
            self.index | {(session.network.key, gtype.key)},
        )

    @property
    def fingerprint(self) -> str:
        return fingerprint(sorted(self.entries))


@dataclass
class SideCondition:
    """A discharged premise and the evidence found for it"""
    name: str
    holds: bool
    evidence: str = ""


@dataclass
class Derivation:
    """
    Node of a derivation tree.

    Children follow rule arity: one per branch label (sorted) for Out, one for
    In, none for End and Cycle.
    """
    rule: RuleName
    participants: ParticipantSet
    history: History
    session: Session
    gtype: GlobalType
    conditions: List[SideCondition] = field(default_factory=list)
    children: List["Derivation"] = field(default_factory=list)
    label: Optional[str] = None

    def walk(self) -> Iterator["Derivation"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> List["Derivation"]:
        return [node for node in self.walk() if not node.children]

    def height(self) -> int:
        return 1 + max((child.height() for child in self.children), default=0)


@dataclass
class TypeFailure:
    """
    A judgement no rule can derive.

    The witness depends on the kind: participant(s) for PlayersLeak,
    EndWithActiveP and ShapeMismatch, the message for NotSound and
    HeadMessageMismatch, the (node, participant) pair for UnboundedType.
    """
    kind: FailureKind
    session: Session
    gtype: GlobalType
    detail: str
    witness: Any = None
    trail: Tuple[str, ...] = ()

    def __str__(self) -> str:
        where = " / ".join(self.trail) or "root"
        return f"{self.kind.value} at {where}: {self.detail}"


CheckResult = Union[Derivation, TypeFailure]


def accepted(result: CheckResult) -> bool:
    return isinstance(result, Derivation)


def _leak(session: Session, player: Participant, gtype: GlobalType,
          participants: ParticipantSet) -> FrozenSet[Participant]:
    rest = players_network(session.network.without(player))
    return (rest - players_global(gtype)) & participants


def _soundness_evidence(result: Soundness) -> str:
    if not result.weights:
        return "no queued messages between members"
    return ", ".join(f"{message}={format_extnat(value)}" for message, value in result.weights)


class _Checker:
    """One typecheck run: participants and mode are fixed, history grows per branch"""

    def __init__(self, participants: ParticipantSet, mode: CheckMode):
        self.participants = participants
        self.mode = mode

    def _sound(self, gtype: GlobalType, session: Session, rule_premise: bool) -> Optional[Soundness]:
        if self.mode == CheckMode.LOCK_ONLY:
            return None
        if rule_premise and self.mode == CheckMode.EMPTY_QUEUE_CYCLE:
            return None
        return p_sound(TypeConfiguration(gtype, session.queue), self.participants)

    def judge(self, history: History, session: Session, gtype: GlobalType,
              trail: Tuple[str, ...]) -> CheckResult:
        def fail(kind: FailureKind, detail: str, witness: Any = None) -> TypeFailure:
            logger.debug(f"{kind.value} at {' / '.join(trail) or 'root'}: {detail}")
            return TypeFailure(kind, session, gtype, detail, witness, trail)

        node = Derivation(RuleName.CYCLE, self.participants, history, session, gtype)

        if history.contains(session, gtype) and (
            self.mode != CheckMode.EMPTY_QUEUE_CYCLE or not len(session.queue)
        ):
            node.conditions.append(SideCondition("history", True, f"revisit of {describe(gtype)}"))
            return node

        if isinstance(gtype, End):
            node.rule = RuleName.END
            active = players_network(session.network) & self.participants
            if active:
                return fail(FailureKind.END_WITH_ACTIVE,
                            f"{', '.join(sorted(active))} still active at End", sorted(active))
            node.conditions.append(SideCondition("players", True, "no active member"))
            soundness = self._sound(gtype, session, rule_premise=False)
            if soundness is not None:
                if not soundness:
                    return fail(FailureKind.NOT_SOUND, f"{soundness.offender} is never read",
                                soundness.offender)
                node.conditions.append(SideCondition("soundness", True, _soundness_evidence(soundness)))
            return node

        if isinstance(gtype, Output):
            return self._out(node, history, session, gtype, trail, fail)
        return self._in(node, history, session, gtype, trail, fail)

    def _common(self, node: Derivation, history: History, session: Session, player: Participant,
                gtype: GlobalType, continuation: GlobalType, remainder: Session, fail) -> Optional[TypeFailure]:
        if history.revisits(session.network, gtype):
            return fail(FailureKind.QUEUE_MISMATCH_ON_REVISIT,
                        f"network already met with {describe(gtype)} under another queue")
        node.conditions.append(SideCondition("history", True, "network and type not met before"))

        leak = _leak(session, player, gtype, self.participants)
        if leak:
            return fail(FailureKind.PLAYERS_LEAK,
                        f"{', '.join(sorted(leak))} active but not players of {describe(gtype)}", sorted(leak))
        node.conditions.append(SideCondition("players", True, "active members all play in the type"))

        soundness = self._sound(continuation, remainder, rule_premise=True)
        if soundness is not None:
            if not soundness:
                return fail(FailureKind.NOT_SOUND, f"{soundness.offender} is never read", soundness.offender)
            node.conditions.append(SideCondition("soundness", True, _soundness_evidence(soundness)))
        return None

    def _out(self, node, history, session, gtype: Output, trail, fail) -> CheckResult:
        node.rule = RuleName.OUT
        process = session.network.get(gtype.sender)
        if not (isinstance(process, InternalChoice) and process.peer == gtype.receiver
                and set(process.labels) == set(gtype.labels)):
            shown = describe(process) if process is not None else "no process"
            return fail(FailureKind.SHAPE_MISMATCH,
                        f"{gtype.sender} runs {shown}, expected {gtype.receiver}!{{{','.join(gtype.labels)}}}",
                        gtype.sender)
        node.conditions.append(SideCondition("shape", True, describe(process)))

        problem = self._common(node, history, session, gtype.sender, gtype, gtype, session, fail)
        if problem is not None:
            return problem

        logger.debug(f"Out {describe(gtype)} at {' / '.join(trail) or 'root'}")
        extended = history.extend(session, gtype)
        for step, child_type in gtype.communications():
            child_session = Session(
                session.network.with_binding(gtype.sender, process.branch(step.label)),
                session.queue.append(step.message),
            )
            child = self.judge(extended, child_session, child_type, trail + (f"!{step.label}",))
            if isinstance(child, TypeFailure):
                return child
            child.label = step.label
            node.children.append(child)
        return node

    def _in(self, node, history, session, gtype: Input, trail, fail) -> CheckResult:
        node.rule = RuleName.IN
        process = session.network.get(gtype.receiver)
        if not (isinstance(process, ExternalChoice) and process.peer == gtype.sender
                and process.branch(gtype.label) is not None):
            shown = describe(process) if process is not None else "no process"
            return fail(FailureKind.SHAPE_MISMATCH,
                        f"{gtype.receiver} runs {shown}, expected {gtype.sender}?{gtype.label}",
                        gtype.receiver)
        node.conditions.append(SideCondition("shape", True, describe(process)))

        head = session.queue.head(gtype.sender, gtype.receiver)
        if head is None or head.label != gtype.label:
            expected = Message(gtype.sender, gtype.label, gtype.receiver)
            found = str(head) if head is not None else "nothing"
            return fail(FailureKind.HEAD_MESSAGE_MISMATCH, f"expected {expected} at the head, found {found}",
                        expected)
        node.conditions.append(SideCondition("head", True, str(head)))

        child_session = Session(
            session.network.with_binding(gtype.receiver, process.branch(gtype.label)),
            session.queue.without_head(gtype.sender, gtype.receiver),
        )
        problem = self._common(node, history, session, gtype.receiver, gtype, gtype.continuation,
                               child_session, fail)
        if problem is not None:
            return problem

        logger.debug(f"In {describe(gtype)} at {' / '.join(trail) or 'root'}")
        child = self.judge(history.extend(session, gtype), child_session, gtype.continuation,
                           trail + (f"?{gtype.label}",))
        if isinstance(child, TypeFailure):
            return child
        child.label = gtype.label
        node.children.append(child)
        return node


def typecheck(participants: Iterable[Participant], gtype: GlobalType, session: Session,
              mode: CheckMode = CheckMode.STANDARD) -> CheckResult:
    """
    Check `|-P session : gtype` with an empty history.

    Args:
        participants: The set P of participants whose properties are guaranteed
        gtype: Global type (must be bounded)
        session: Network and queue to check
        mode: Which premises the rules carry

    Returns:
        A Derivation when the judgement holds, otherwise the TypeFailure of
        the first failing branch (branches are explored in label order)

    Examples:
        >>> result = typecheck({"u1", "u2"}, module.global_type("G"), module.session("SocialMedia"))
        >>> result.rule
        <RuleName.OUT: 'Out'>
    """
    members = frozenset(participants)
    verdict = bounded(gtype)
    if not verdict:
        node, player = verdict.witness
        return TypeFailure(FailureKind.UNBOUNDED_TYPE, session, gtype,
                           f"depth of {player} in {describe(node)} is infinite", verdict.witness)
    return _Checker(members, mode).judge(History(), session, gtype, ())


# ---------------------------------------------------------------------------
# Independent replay
# ---------------------------------------------------------------------------


def derivation_validate(derivation: Derivation, participants: Iterable[Participant], gtype: GlobalType,
                        session: Session, mode: CheckMode = CheckMode.STANDARD) -> bool:
    """
    Re-check a derivation from scratch against `|-P session : gtype`.

    Every node's judgement, history, rule choice and premises are recomputed;
    nothing recorded in the derivation is trusted.
    """
    members = frozenset(participants)
    if not bounded(gtype):
        return False
    return _replay(derivation, members, History(), session, gtype, mode)


def _replay(node: Derivation, members: ParticipantSet, history: History, session: Session,
            gtype: GlobalType, mode: CheckMode) -> bool:
    if not isinstance(node, Derivation):
        return False
    if node.session != session or node.gtype.key != gtype.key:
        return False
    if frozenset(node.participants) != members or node.history.fingerprint != history.fingerprint:
        return False

    checker = _Checker(members, mode)
    can_cycle = history.contains(session, gtype) and (mode != CheckMode.EMPTY_QUEUE_CYCLE or not len(session.queue))
    if node.rule == RuleName.CYCLE:
        return can_cycle and not node.children
    if can_cycle:
        return False

    if node.rule == RuleName.END:
        if not isinstance(gtype, End) or node.children:
            return False
        if players_network(session.network) & members:
            return False
        soundness = checker._sound(gtype, session, rule_premise=False)
        return soundness is None or soundness.sound

    def premises(player: Participant, continuation: GlobalType, remainder: Session) -> bool:
        if history.revisits(session.network, gtype):
            return False
        if _leak(session, player, gtype, members):
            return False
        soundness = checker._sound(continuation, remainder, rule_premise=True)
        return soundness is None or soundness.sound

    extended = history.extend(session, gtype)

    if node.rule == RuleName.OUT:
        if not isinstance(gtype, Output):
            return False
        process = session.network.get(gtype.sender)
        if not (isinstance(process, InternalChoice) and process.peer == gtype.receiver
                and set(process.labels) == set(gtype.labels)):
            return False
        if not premises(gtype.sender, gtype, session):
            return False
        branches = gtype.communications()
        if len(node.children) != len(branches):
            return False
        for child, (step, child_type) in zip(node.children, branches):
            child_session = Session(
                session.network.with_binding(gtype.sender, process.branch(step.label)),
                session.queue.append(step.message),
            )
            if not _replay(child, members, extended, child_session, child_type, mode):
                return False
        return True

    if node.rule == RuleName.IN:
        if not isinstance(gtype, Input):
            return False
        process = session.network.get(gtype.receiver)
        if not (isinstance(process, ExternalChoice) and process.peer == gtype.sender
                and process.branch(gtype.label) is not None):
            return False
        head = session.queue.head(gtype.sender, gtype.receiver)
        if head is None or head.label != gtype.label:
            return False
        child_session = Session(
            session.network.with_binding(gtype.receiver, process.branch(gtype.label)),
            session.queue.without_head(gtype.sender, gtype.receiver),
        )
        if not premises(gtype.receiver, gtype.continuation, child_session):
            return False
        if len(node.children) != 1:
            return False
        return _replay(node.children[0], members, extended, child_session, gtype.continuation, mode)

    return False
