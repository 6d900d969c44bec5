"""
Surface Syntax

Definition files (`.mps`) for processes, global types, networks, queues,
sessions and participant sets, plus the printers.

Grammar (whitespace-insensitive, `//` comments):

    process P = q!{a.P, b.end}            singleton braces may be omitted
    global G = p -> q !{a. q <- p ? a. G, b. End}
    network N = p[P] | q[p?{a, b}]
    queue M = [q -> p : a]
    session S = N with M
    set Users = {p, q}

In `p <- q ? a`, p reads the label a that q sent. A missing branch
continuation means `end` (processes) or `End` (global types).

Recursion is allowed inside the process namespace and inside the global type
namespace. Definitions that only rename each other in a loop ("P = P") have
no solution and are rejected.
"""

import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple, Union

from arpeggio import EOF, NoMatch, NonTerminal, Optional as Opt, ParserPython, Terminal, ZeroOrMore
from arpeggio import RegExMatch as _
import networkx
from pydantic import BaseModel, TypeAdapter, ValidationError

from .errors import ParseError, ResolutionError, WellFormednessError
from .terms import (
    Choice,
    CommKind,
    Communication,
    End,
    ExternalChoice,
    GlobalType,
    Inactive,
    Input,
    InternalChoice,
    Message,
    Network,
    Output,
    ParticipantSet,
    Process,
    Queue,
    Session,
    Term,
    Trace,
    ValidationReport,
    graph_of,
    link,
    reachable,
    well_formed,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

KEYWORDS = ("process", "global", "network", "queue", "session", "set", "with", "end", "End")


# ==========================================
# GRAMMAR
# ==========================================

def comment():
    return _(r'//[^\n]*')


def ident():
    return _(r'(?!(?:{})\b)[A-Za-z][A-Za-z0-9_]*'.format("|".join(KEYWORDS)))


def proc_end():
    return _(r'end\b')


def proc_branch():
    return ident, Opt(".", proc)


def proc_branches():
    return [("{", proc_branch, ZeroOrMore(",", proc_branch), "}"), proc_branch]


def proc_send():
    return ident, "!", proc_branches


def proc_recv():
    return ident, "?", proc_branches


def proc():
    return [proc_end, proc_send, proc_recv, ident]


def gty_end():
    return _(r'End\b')


def gty_branch():
    return ident, Opt(".", gty)


def gty_branches():
    return [("{", gty_branch, ZeroOrMore(",", gty_branch), "}"), gty_branch]


def gty_out():
    return ident, "->", ident, "!", gty_branches


def gty_in():
    return ident, "<-", ident, "?", ident, Opt(".", gty)


def gty():
    return [gty_end, gty_out, gty_in, ident]


def binding():
    return ident, "[", proc, "]"


def message():
    return ident, "->", ident, ":", ident


def queue_lit():
    return "[", Opt(message, ZeroOrMore(",", message)), "]"


def procdef():
    return _(r'process\b'), ident, "=", proc


def globaldef():
    return _(r'global\b'), ident, "=", gty


def netdef():
    return _(r'network\b'), ident, "=", Opt(binding, ZeroOrMore("|", binding))


def queuedef():
    return _(r'queue\b'), ident, "=", queue_lit


def sessiondef():
    return _(r'session\b'), ident, "=", ident, _(r'with\b'), ident


def setdef():
    return _(r'set\b'), ident, "=", "{", Opt(ident, ZeroOrMore(",", ident)), "}"


def definition():
    return [procdef, globaldef, netdef, queuedef, sessiondef, setdef]


def module():
    return ZeroOrMore(definition), EOF


def proc_text():
    return proc, EOF


def gty_text():
    return gty, EOF


def queue_text():
    return queue_lit, EOF


_ROOTS: Dict[str, Callable] = {
    "module": module,
    "process": proc_text,
    "global": gty_text,
    "queue": queue_text,
}
_PARSERS: Dict[str, ParserPython] = {}
# Arpeggio parsers keep per-parse state; serialize access
_PARSER_LOCK = threading.Lock()


def _parse_tree(text: str, root: str) -> Tuple[ParserPython, NonTerminal]:
    with _PARSER_LOCK:
        parser = _PARSERS.get(root)
        if parser is None:
            parser = ParserPython(_ROOTS[root], comment_def=comment)
            _PARSERS[root] = parser
        try:
            return parser, parser.parse(text)
        except NoMatch as exc:
            line, column = parser.pos_to_linecol(exc.position)
            expected = sorted({getattr(rule, "name", None) or str(rule) for rule in exc.rules})
            raise ParseError("syntax error", line, column, expected) from exc


# ==========================================
# PARSE TREE HELPERS
# ==========================================

def _idents(node: NonTerminal) -> List[Terminal]:
    return [child for child in node if isinstance(child, Terminal) and child.rule_name == "ident"]


def _children(node: NonTerminal, rule: str) -> List[NonTerminal]:
    return [child for child in node if child.rule_name == rule]


def _child(node: NonTerminal, rule: str) -> Optional[NonTerminal]:
    found = _children(node, rule)
    return found[0] if found else None


# ==========================================
# SOURCE MODULE
# ==========================================

@dataclass
class SourceModule:
    """
    Resolved definitions of a source file, one namespace per kind.

    Dictionaries preserve source order.
    """
    process_defs: Dict[str, Process] = field(default_factory=dict)
    global_defs: Dict[str, GlobalType] = field(default_factory=dict)
    network_defs: Dict[str, Network] = field(default_factory=dict)
    queue_defs: Dict[str, Queue] = field(default_factory=dict)
    session_defs: Dict[str, Session] = field(default_factory=dict)
    set_defs: Dict[str, ParticipantSet] = field(default_factory=dict)

    def _lookup(self, kind: str, table: Dict, name: Optional[str]):
        if name is None:
            if not table:
                raise ResolutionError(f"no {kind} defined")
            return next(iter(table.values()))
        if name not in table:
            raise ResolutionError(f"no {kind} named '{name}'")
        return table[name]

    def process(self, name: Optional[str] = None) -> Process:
        return self._lookup("process", self.process_defs, name)

    def global_type(self, name: Optional[str] = None) -> GlobalType:
        """Global type by name; the first one defined when name is None"""
        return self._lookup("global type", self.global_defs, name)

    def network(self, name: Optional[str] = None) -> Network:
        return self._lookup("network", self.network_defs, name)

    def queue(self, name: Optional[str] = None) -> Queue:
        return self._lookup("queue", self.queue_defs, name)

    def session(self, name: Optional[str] = None) -> Session:
        return self._lookup("session", self.session_defs, name)

    def participant_set(self, name: str) -> ParticipantSet:
        return self._lookup("set", self.set_defs, name)


class _Builder:
    """Turns parse trees into term graphs, tying recursive definitions"""

    def __init__(self, parser: ParserPython, process_bodies: Dict[str, NonTerminal],
                 global_bodies: Dict[str, NonTerminal]):
        self.parser = parser
        self.process_bodies = process_bodies
        self.global_bodies = global_bodies
        self.processes: Dict[str, Process] = {}
        self.globals: Dict[str, GlobalType] = {}

    def _where(self, node) -> Tuple[Optional[int], Optional[int]]:
        if node is None:
            return None, None
        return self.parser.pos_to_linecol(node.position)

    def _target(self, bodies: Dict[str, NonTerminal], name: str, at, kind: str):
        """Follow renaming definitions ("P = Q") to the definition with a real body"""
        chain: List[str] = []
        current = name
        while True:
            if current not in bodies:
                raise ResolutionError(f"unresolved {kind} reference '{current}'", *self._where(at))
            inner = bodies[current][0]
            if not (isinstance(inner, Terminal) and inner.rule_name == "ident"):
                return current, inner
            if current in chain:
                raise ParseError("unguarded recursion", *self._where(bodies[name]),
                                 expected=[" -> ".join(chain + [current])])
            chain.append(current)
            at = inner
            current = inner.value

    # -- processes -----------------------------------------------------------

    def process_def(self, name: str, at=None) -> Process:
        if name in self.processes:
            return self.processes[name]
        target, inner = self._target(self.process_bodies, name, at, "process")
        if target in self.processes:
            node = self.processes[target]
        elif isinstance(inner, Terminal):
            node = Inactive(name=target)
        else:
            peer = _idents(inner)[0].value
            kind = InternalChoice if inner.rule_name == "proc_send" else ExternalChoice
            node = kind(peer, (), name=target)
            self.processes[target] = node
            link(node, branches=self._proc_branches(inner))
        self.processes[target] = node
        self.processes[name] = node
        return node

    def _proc_branches(self, choice: NonTerminal) -> Tuple[Tuple[str, Process], ...]:
        branches = []
        for branch in _children(_child(choice, "proc_branches"), "proc_branch"):
            label = _idents(branch)[0].value
            body = _child(branch, "proc")
            branches.append((label, self.process(body) if body is not None else Inactive()))
        return tuple(branches)

    def process(self, body: NonTerminal) -> Process:
        inner = body[0]
        if isinstance(inner, Terminal) and inner.rule_name == "ident":
            return self.process_def(inner.value, inner)
        if isinstance(inner, Terminal):
            return Inactive()
        peer = _idents(inner)[0].value
        kind = InternalChoice if inner.rule_name == "proc_send" else ExternalChoice
        return kind(peer, self._proc_branches(inner))

    # -- global types --------------------------------------------------------

    def global_def(self, name: str, at=None) -> GlobalType:
        if name in self.globals:
            return self.globals[name]
        target, inner = self._target(self.global_bodies, name, at, "global type")
        if target in self.globals:
            node = self.globals[target]
        elif isinstance(inner, Terminal):
            node = End(name=target)
        elif inner.rule_name == "gty_out":
            sender, receiver = (t.value for t in _idents(inner)[:2])
            node = Output(sender, receiver, (), name=target)
            self.globals[target] = node
            link(node, branches=self._gty_branches(inner))
        else:
            receiver, sender, label = (t.value for t in _idents(inner)[:3])
            node = Input(receiver, sender, label, None, name=target)
            self.globals[target] = node
            link(node, continuation=self._gty_continuation(inner))
        self.globals[target] = node
        self.globals[name] = node
        return node

    def _gty_branches(self, out: NonTerminal) -> Tuple[Tuple[str, GlobalType], ...]:
        branches = []
        for branch in _children(_child(out, "gty_branches"), "gty_branch"):
            label = _idents(branch)[0].value
            body = _child(branch, "gty")
            branches.append((label, self.global_type(body) if body is not None else End()))
        return tuple(branches)

    def _gty_continuation(self, inp: NonTerminal) -> GlobalType:
        body = _child(inp, "gty")
        return self.global_type(body) if body is not None else End()

    def global_type(self, body: NonTerminal) -> GlobalType:
        inner = body[0]
        if isinstance(inner, Terminal) and inner.rule_name == "ident":
            return self.global_def(inner.value, inner)
        if isinstance(inner, Terminal):
            return End()
        if inner.rule_name == "gty_out":
            sender, receiver = (t.value for t in _idents(inner)[:2])
            return Output(sender, receiver, self._gty_branches(inner))
        receiver, sender, label = (t.value for t in _idents(inner)[:3])
        return Input(receiver, sender, label, self._gty_continuation(inner))


def _queue(node: NonTerminal) -> Queue:
    messages = []
    for entry in _children(node, "message"):
        sender, receiver, label = (t.value for t in _idents(entry))
        try:
            messages.append(Message(sender, label, receiver))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    return Queue(tuple(messages))


def _check(report: ValidationReport) -> None:
    if not report.ok:
        raise WellFormednessError(report)


def parse_module(text: str) -> SourceModule:
    """
    Parse and resolve a definition file.

    Raises:
        ParseError: Syntax error or unguarded recursion (with position)
        ResolutionError: Unresolved reference or duplicate definition
        WellFormednessError: A resolved term violates a side condition
    """
    parser, tree = _parse_tree(text, "module")

    bodies: Dict[str, Dict[str, NonTerminal]] = {}
    for definition_node in _children(tree, "definition"):
        node = definition_node[0]
        name_token = _idents(node)[0]
        table = bodies.setdefault(node.rule_name, {})
        if name_token.value in table:
            line, column = parser.pos_to_linecol(name_token.position)
            raise ResolutionError(f"duplicate definition '{name_token.value}'", line, column)
        table[name_token.value] = node

    process_bodies = {name: _child(node, "proc") for name, node in bodies.get("procdef", {}).items()}
    global_bodies = {name: _child(node, "gty") for name, node in bodies.get("globaldef", {}).items()}
    builder = _Builder(parser, process_bodies, global_bodies)
    result = SourceModule()

    for name in process_bodies:
        result.process_defs[name] = builder.process_def(name)
    for name in global_bodies:
        result.global_defs[name] = builder.global_def(name)

    for name, node in bodies.get("netdef", {}).items():
        pairs = []
        for entry in _children(node, "binding"):
            participant = _idents(entry)[0].value
            pairs.append((participant, builder.process(_child(entry, "proc"))))
        try:
            result.network_defs[name] = Network(tuple(pairs))
        except ValueError as exc:
            raise ResolutionError(f"network {name}: {exc}", *parser.pos_to_linecol(node.position)) from exc

    for name, node in bodies.get("queuedef", {}).items():
        result.queue_defs[name] = _queue(_child(node, "queue_lit"))

    for name, node in bodies.get("sessiondef", {}).items():
        _, network_token, queue_token = _idents(node)
        for token, table, kind in ((network_token, result.network_defs, "network"),
                                   (queue_token, result.queue_defs, "queue")):
            if token.value not in table:
                raise ResolutionError(f"unresolved {kind} reference '{token.value}'",
                                      *parser.pos_to_linecol(token.position))
        result.session_defs[name] = Session(result.network_defs[network_token.value],
                                            result.queue_defs[queue_token.value])

    for name, node in bodies.get("setdef", {}).items():
        result.set_defs[name] = frozenset(t.value for t in _idents(node)[1:])

    report = ValidationReport()
    for term in (*result.process_defs.values(), *result.global_defs.values(),
                 *result.network_defs.values()):
        report.violations.extend(well_formed(term).violations)
    _check(report)

    logger.debug(
        f"Parsed module: {len(result.process_defs)} processes, {len(result.global_defs)} global types, "
        f"{len(result.session_defs)} sessions"
    )
    return result


def _expression(text: str, root: str, source: Optional[SourceModule]):
    parser, tree = _parse_tree(text, root)
    builder = _Builder(parser, {}, {})
    if source is not None:
        builder.processes.update(source.process_defs)
        builder.globals.update(source.global_defs)
    if root == "process":
        term = builder.process(_child(tree, "proc"))
    elif root == "global":
        term = builder.global_type(_child(tree, "gty"))
    else:
        return _queue(_child(tree, "queue_lit"))
    _check(well_formed(term))
    return term


def parse_process(text: str, source: Optional[SourceModule] = None) -> Process:
    """Parse a process expression; names refer to the process definitions of `source`"""
    return _expression(text, "process", source)


def parse_global(text: str, source: Optional[SourceModule] = None) -> GlobalType:
    """Parse a global type expression; names refer to the global definitions of `source`"""
    return _expression(text, "global", source)


def parse_queue(text: str) -> Queue:
    return _expression(text, "queue", None)


def parse_term(text: str, kind: str) -> Union[Process, GlobalType]:
    """
    Parse either an inline expression or definition text (as produced by
    `render` for cyclic terms); for the latter the first definition of the
    requested kind is returned.
    """
    if kind not in ("process", "global"):
        raise ValueError(f"unknown term kind '{kind}'")
    stripped = text.lstrip()
    if re.match(r'(process|global)\b', stripped):
        source = parse_module(text)
        return source.process() if kind == "process" else source.global_type()
    return _expression(text, kind, None)


# ==========================================
# TRACES
# ==========================================

class TraceStep(BaseModel):
    """JSON form of one communication"""
    kind: CommKind
    player: str
    peer: str
    label: str


_TOKEN = re.compile(r'^([A-Za-z][A-Za-z0-9_]*)([<>])([A-Za-z][A-Za-z0-9_]*)([!?])([A-Za-z][A-Za-z0-9_]*)$')


def parse_trace(text: str) -> Trace:
    """
    Parse a trace: whitespace-separated `p>q!l` / `p<q?l` tokens, or a JSON
    array of {"kind", "player", "peer", "label"} objects.
    """
    if text.lstrip().startswith("["):
        try:
            steps = TypeAdapter(List[TraceStep]).validate_json(text)
            return tuple(Communication(s.kind, s.player, s.peer, s.label) for s in steps)
        except (ValidationError, ValueError) as exc:
            raise ParseError(f"invalid JSON trace: {exc}") from exc

    trace = []
    for position, token in enumerate(text.split()):
        match = _TOKEN.match(token)
        if not match or (match.group(2) == ">") != (match.group(4) == "!"):
            raise ParseError(f"invalid trace token '{token}' at index {position}",
                             expected=["p>q!l", "p<q?l"])
        player, _direction, peer, mark, label = match.groups()
        try:
            if mark == "!":
                trace.append(Communication.send(player, peer, label))
            else:
                trace.append(Communication.receive(player, peer, label))
        except ValueError as exc:
            raise ParseError(f"{exc} at index {position}") from exc
    return tuple(trace)


def format_trace(trace: Iterable[Communication]) -> str:
    return " ".join(step.token for step in trace)


# ==========================================
# PRINTERS
# ==========================================

def _loop_heads(roots: Iterable[Term]) -> List[Term]:
    """Targets of depth-first back edges; naming them cuts every cycle"""
    roots = list(roots)
    if not roots:
        return []
    graph = graph_of(*roots)
    top = "roots"
    graph.add_edges_from((top, id(root)) for root in roots)
    active: Set = set()
    heads: Dict[int, Term] = {}
    for _, child, kind in networkx.dfs_labeled_edges(graph, top):
        if kind == "forward":
            active.add(child)
        elif kind == "reverse":
            active.discard(child)
        elif kind == "nontree" and child in active:
            heads.setdefault(child, graph.nodes[child]["term"])
    return list(heads.values())


class _Printer:
    """Prints term graphs, referring to selected nodes by definition name"""

    def __init__(self, roots: List[Term], named: List[Term]):
        taken: Dict[str, int] = {}
        for root in roots:
            for node in reachable(root):
                if node.name:
                    taken.setdefault(node.name, id(node))
        self.names: Dict[int, str] = {}
        counter = 0
        for node in named:
            if id(node) in self.names:
                continue
            if node.name and taken.get(node.name) == id(node):
                self.names[id(node)] = node.name
                continue
            prefix = "G" if isinstance(node, GlobalType) else "P"
            while f"{prefix}{counter}" in taken:
                counter += 1
            self.names[id(node)] = f"{prefix}{counter}"
            taken[f"{prefix}{counter}"] = id(node)
        self.order = [node for node in named]

    def name(self, node: Term) -> Optional[str]:
        return self.names.get(id(node))

    def body(self, node: Term, top: bool = True) -> str:
        if not top and id(node) in self.names:
            return self.names[id(node)]
        if isinstance(node, Inactive):
            return "end"
        if isinstance(node, End):
            return "End"
        if isinstance(node, Choice):
            mark = "!" if isinstance(node, InternalChoice) else "?"
            return f"{node.peer}{mark}{self._branches(node.branches)}"
        if isinstance(node, Output):
            return f"{node.sender} -> {node.receiver} !{self._branches(node.branches)}"
        if isinstance(node, Input):
            return f"{node.receiver} <- {node.sender} ? {node.label}.{self.body(node.continuation, False)}"
        raise TypeError(f"cannot print {type(node).__name__}")

    def _branches(self, branches) -> str:
        parts = [f"{label}.{self.body(child, False)}" for label, child in branches]
        if len(parts) == 1:
            return parts[0]
        return "{" + ", ".join(parts) + "}"

    def definitions(self) -> List[str]:
        lines = []
        seen: Set[int] = set()
        for node in self.order:
            if id(node) in seen:
                continue
            seen.add(id(node))
            keyword = "global" if isinstance(node, GlobalType) else "process"
            lines.append(f"{keyword} {self.names[id(node)]} = {self.body(node)}")
        return lines


def _queue_text(queue: Queue) -> str:
    return "[" + ", ".join(str(m) for m in queue) + "]"


def render(term: Union[Term, Network, Queue, Session], name: Optional[str] = None) -> str:
    """
    Print a term so that parsing the text yields a bisimilar term.

    Acyclic processes and global types print inline. Cyclic ones print as
    definition text whose first definition is the term itself; loop heads get
    their definition names, or synthesized ones (P0, G0, ...).
    """
    if isinstance(term, Queue):
        return _queue_text(term)

    if isinstance(term, Term):
        heads = _loop_heads([term])
        if not heads:
            return _Printer([term], []).body(term)
        printer = _Printer([term], [term] + heads)
        return "\n".join(printer.definitions()) + "\n"

    session = term if isinstance(term, Session) else None
    network = term.network if session is not None else term
    processes = [process for _, process in network.items()]
    printer = _Printer(processes, _loop_heads(processes))
    lines = printer.definitions()
    bindings = " | ".join(f"{p}[{printer.body(proc, False)}]" for p, proc in network.items())
    network_name = name or "N" if session is None else "N"
    lines.append(f"network {network_name} = {bindings}".rstrip())
    if session is not None:
        lines.append(f"queue M = {_queue_text(session.queue)}")
        lines.append(f"session {name or 'S'} = N with M")
    return "\n".join(lines) + "\n"


def show(term: Union[Term, Network, Queue, Session]) -> str:
    """
    Inline display form: named nodes (and unnamed loop heads) are printed by
    name below the root. Not meant to be parsed back.
    """
    if isinstance(term, Queue):
        return _queue_text(term)
    if isinstance(term, Session):
        return f"{show(term.network)} || {_queue_text(term.queue)}"
    if isinstance(term, Network):
        if not len(term):
            return "0"
        return " | ".join(f"{p}[{_shown(proc, False)}]" for p, proc in term.items())
    return _shown(term, True)


def _shown(root: Term, top: bool) -> str:
    named = [node for node in reachable(root) if node.name] + _loop_heads([root])
    return _Printer([root], named).body(root, top)
