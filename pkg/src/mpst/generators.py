"""
Random instance generation.

Typable instances are produced top-down: a random protocol is written as a
global type and projected onto each participant, so every participant runs
exactly its part. Protocols are sequences of exchanges (send, then the
matching read), crossed exchanges where both sides send before reading, and
an optional final choice whose branches only involve the two choosing
participants. The protocol either ends or loops back to its start.

Variants that exercise partial typing:
- an intruder participant `z` that sends a message nobody reads, and plays
  no part in the global type
- a pending first message already sitting in the queue (non-looping only)

All generation is driven by `random.Random(seed)` and is deterministic.
"""

import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .syntax import SourceModule, parse_module
from .terms import End, GlobalType, Input, Message, Output, ParticipantSet, Session

NAMES = ("p", "q", "r", "t")
LABELS = ("a", "b", "c", "d")

# ("msg", sender, receiver, label) | ("cross", a, b, label_ab, label_ba)
Block = Tuple


@dataclass(frozen=True)
class Protocol:
    prefix: Tuple[Block, ...]
    choice: Optional[Tuple[str, str, Tuple[Tuple[str, Tuple[Block, ...]], ...]]]
    loop: bool
    pending: bool

    def participants(self) -> List[str]:
        found = set()
        for block in self._all_blocks():
            found.update(block[1:3])
        if self.choice is not None:
            found.update(self.choice[:2])
        return sorted(found)

    def _all_blocks(self) -> List[Block]:
        blocks = list(self.prefix)
        if self.choice is not None:
            for _, segment in self.choice[2]:
                blocks.extend(segment)
        return blocks


@dataclass
class Instance:
    """A generated module with its global type, session and participant set"""
    seed: int
    source: str
    module: SourceModule
    gtype: GlobalType
    session: Session
    participants: ParticipantSet


def _pair(rng: random.Random, names: Sequence[str]) -> Tuple[str, str]:
    first, second = rng.sample(list(names), 2)
    return first, second


def _block(rng: random.Random, names: Sequence[str]) -> Block:
    a, b = _pair(rng, names)
    if rng.random() < 0.3:
        return ("cross", a, b, rng.choice(LABELS), rng.choice(LABELS))
    return ("msg", a, b, rng.choice(LABELS))


def random_protocol(rng: random.Random, max_participants: int = 4, loop: Optional[bool] = None,
                    pending: Optional[bool] = None) -> Protocol:
    names = NAMES[:rng.randint(2, max(2, min(max_participants, len(NAMES))))]
    loop = rng.random() < 0.5 if loop is None else loop
    pending = (not loop and rng.random() < 0.3) if pending is None else (pending and not loop)

    prefix = tuple(_block(rng, names) for _ in range(rng.randint(1, 3)))
    if pending and prefix[0][0] != "msg":
        prefix = (("msg",) + prefix[0][1:4],) + prefix[1:]

    choice = None
    if rng.random() < 0.7:
        a, b = _pair(rng, names)
        labels = rng.sample(LABELS, rng.randint(2, 3))
        branches = []
        for label in labels:
            segment = tuple(_block(rng, (a, b)) for _ in range(rng.randint(0, 2)))
            branches.append((label, segment))
        choice = (a, b, tuple(branches))
    return Protocol(prefix, choice, loop, pending)


# -- text emission -------------------------------------------------------------


def _global_blocks(blocks: Sequence[Block], tail: str, pending_first: bool = False) -> str:
    text = tail
    for position in range(len(blocks) - 1, -1, -1):
        block = blocks[position]
        if block[0] == "msg":
            _, a, b, label = block
            read = f"{b} <- {a} ? {label}. {text}"
            text = read if (pending_first and position == 0) else f"{a} -> {b} ! {label}. {read}"
        else:
            _, a, b, first, second = block
            text = f"{a} -> {b} ! {first}. {b} -> {a} ! {second}. {b} <- {a} ? {first}. {a} <- {b} ? {second}. {text}"
    return text


def global_text(protocol: Protocol) -> str:
    tail = "G" if protocol.loop else "End"
    end = tail
    if protocol.choice is not None:
        a, b, branches = protocol.choice
        parts = [f"{label}. {b} <- {a} ? {label}. {_global_blocks(segment, tail)}" for label, segment in branches]
        end = f"{a} -> {b} !{{" + ", ".join(parts) + "}"
    return _global_blocks(protocol.prefix, end, protocol.pending)


def _local_blocks(blocks: Sequence[Block], role: str, tail: str, pending_first: bool = False) -> str:
    text = tail
    for position in range(len(blocks) - 1, -1, -1):
        block = blocks[position]
        if block[0] == "msg":
            _, a, b, label = block
            if role == a and not (pending_first and position == 0):
                text = f"{b}!{label}. {text}"
            elif role == b:
                text = f"{a}?{label}. {text}"
        else:
            _, a, b, first, second = block
            if role == a:
                text = f"{b}!{first}. {b}?{second}. {text}"
            elif role == b:
                text = f"{a}!{second}. {a}?{first}. {text}"
    return text


def local_text(protocol: Protocol, role: str) -> str:
    """Projection of the protocol onto one participant"""
    tail = f"P_{role}" if protocol.loop else "end"
    end = tail
    if protocol.choice is not None:
        a, b, branches = protocol.choice
        if role in (a, b):
            mark, peer = ("!", b) if role == a else ("?", a)
            parts = [f"{label}. {_local_blocks(segment, role, tail)}" for label, segment in branches]
            end = f"{peer}{mark}{{" + ", ".join(parts) + "}"
    return _local_blocks(protocol.prefix, role, end, protocol.pending)


def instance_text(protocol: Protocol, intruder: bool = False) -> str:
    roles = protocol.participants()
    lines = [f"global G = {global_text(protocol)}"]
    for role in roles:
        lines.append(f"process P_{role} = {local_text(protocol, role)}")
    bindings = [f"{role}[P_{role}]" for role in roles]
    if intruder:
        bindings.append(f"z[{roles[0]}!spam]")
    lines.append(f"network N = {' | '.join(bindings)}")
    if protocol.pending:
        _, a, b, label = protocol.prefix[0]
        lines.append(f"queue M = [{a} -> {b} : {label}]")
    else:
        lines.append("queue M = []")
    lines.append("session S = N with M")
    lines.append(f"set Players = {{{', '.join(roles)}}}")
    return "\n".join(lines) + "\n"


def random_instance(seed: int, max_participants: int = 4, loop: Optional[bool] = None,
                    intruder: Optional[bool] = None, pending: Optional[bool] = None) -> Instance:
    """
    Generate a typable instance.

    The participant set is every player of the global type; the intruder `z`,
    when present, is left out of it.
    """
    rng = random.Random(seed)
    protocol = random_protocol(rng, max_participants, loop, pending)
    intruder = rng.random() < 0.3 if intruder is None else intruder
    source = instance_text(protocol, intruder)
    module = parse_module(source)
    return Instance(seed, source, module, module.global_type("G"), module.session("S"),
                    module.participant_set("Players"))


# -- acyclic types for the analysis oracle -------------------------------------------


def random_acyclic_global(seed: int, max_levels: int = 6, names: Sequence[str] = ("p", "q", "r")) -> GlobalType:
    """Random finite tree global type with at most `max_levels` communications per path"""
    rng = random.Random(seed)

    def build(level: int) -> GlobalType:
        if level >= max_levels or (level > 0 and rng.random() < 0.15):
            return End()
        first, second = _pair(rng, names)
        if rng.random() < 0.5:
            labels = rng.sample(LABELS[:3], rng.randint(1, 3))
            return Output(first, second, tuple((label, build(level + 1)) for label in labels))
        return Input(first, second, rng.choice(LABELS[:2]), build(level + 1))

    return build(0)


def random_message(seed: int, names: Sequence[str] = ("p", "q", "r")) -> Message:
    rng = random.Random(seed)
    sender, receiver = _pair(rng, names)
    return Message(sender, rng.choice(LABELS[:2]), receiver)
