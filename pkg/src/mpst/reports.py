"""
Report models

Versioned pydantic models for everything the engine emits, the converters
from library results, and the human-readable text form. Both forms are
deterministic: identical inputs (and seed) give identical output.
"""

from enum import IntEnum
from typing import Any, Dict, Iterable, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field

from .analysis import DepthRow, Measure, Soundness, format_extnat
from .syntax import TraceStep, show
from .terms import Communication, GlobalType, Message, Queue, Session, describe, fingerprint
from .typechecker import CheckMode, CheckResult, Derivation, History, TypeFailure
from .verifier import Bounds, Verdict

ExtNatValue = Union[int, Literal["inf"]]


class ExitCode(IntEnum):
    OK = 0
    REJECTED = 1
    USAGE = 2
    INCONCLUSIVE = 3


def _extnat(value) -> ExtNatValue:
    text = format_extnat(value)
    return "inf" if text == "inf" else int(text)


def trace_steps(trace: Iterable[Communication]) -> List[TraceStep]:
    return [TraceStep(kind=step.kind, player=step.player, peer=step.peer, label=step.label) for step in trace]


def _queue(queue: Queue) -> List[str]:
    return [str(message) for message in queue]


# ==========================================
# DERIVATIONS
# ==========================================

class ConditionModel(BaseModel):
    name: str
    holds: bool
    evidence: str = ""


class FingerprintModel(BaseModel):
    """Hashes of the canonical forms in a judgement; equal judgements hash equally"""
    network: str
    queue: str
    gtype: str
    history: str


def fingerprints(history: History, session: Session, gtype: GlobalType) -> FingerprintModel:
    return FingerprintModel(
        network=fingerprint(session.network.key),
        queue=fingerprint(session.queue.key),
        gtype=gtype.key,
        history=history.fingerprint,
    )


class DerivationNode(BaseModel):
    """One judgement of a derivation tree"""
    rule: str
    label: Optional[str] = Field(None, description="Branch label leading to this judgement")
    network: str
    queue: List[str]
    gtype: str
    history_size: int
    fingerprints: FingerprintModel
    conditions: List[ConditionModel] = []
    children: List["DerivationNode"] = []


class FailureModel(BaseModel):
    kind: str
    detail: str
    trail: List[str]
    witness: Optional[str] = None
    network: str
    queue: List[str]
    gtype: str


class DerivationReport(BaseModel):
    """Outcome of `check`: a derivation when accepted, the failure otherwise"""
    format: Literal["mpst-derivation/1"] = "mpst-derivation/1"
    participants: List[str]
    mode: CheckMode
    accepted: bool
    validated: Optional[bool] = Field(None, description="Independent replay of the derivation")
    derivation: Optional[DerivationNode] = None
    failure: Optional[FailureModel] = None


def derivation_node(node: Derivation) -> DerivationNode:
    return DerivationNode(
        rule=node.rule.value,
        label=node.label,
        network=show(node.session.network),
        queue=_queue(node.session.queue),
        gtype=describe(node.gtype),
        history_size=len(node.history),
        fingerprints=fingerprints(node.history, node.session, node.gtype),
        conditions=[ConditionModel(name=c.name, holds=c.holds, evidence=c.evidence) for c in node.conditions],
        children=[derivation_node(child) for child in node.children],
    )


def _witness_text(witness: Any) -> Optional[str]:
    if witness is None:
        return None
    if isinstance(witness, tuple) and len(witness) == 2 and isinstance(witness[0], GlobalType):
        return f"({describe(witness[0])}, {witness[1]})"
    if isinstance(witness, (list, tuple, frozenset, set)):
        return ", ".join(sorted(str(item) for item in witness))
    return str(witness)


def failure_model(failure: TypeFailure) -> FailureModel:
    return FailureModel(
        kind=failure.kind.value,
        detail=failure.detail,
        trail=list(failure.trail),
        witness=_witness_text(failure.witness),
        network=show(failure.session.network),
        queue=_queue(failure.session.queue),
        gtype=describe(failure.gtype),
    )


def derivation_report(result: CheckResult, participants: Iterable[str], mode: CheckMode,
                      validated: Optional[bool] = None) -> DerivationReport:
    members = sorted(participants)
    if isinstance(result, Derivation):
        return DerivationReport(participants=members, mode=mode, accepted=True, validated=validated,
                                derivation=derivation_node(result))
    return DerivationReport(participants=members, mode=mode, accepted=False, failure=failure_model(result))


# ==========================================
# VERDICTS
# ==========================================

class BoundsModel(BaseModel):
    max_trace_len: int = Field(..., ge=1)
    max_queue_per_channel: int = Field(..., ge=1)


class VerdictReport(BaseModel):
    """Outcome of a property check"""
    format: Literal["mpst-verdict/1"] = "mpst-verdict/1"
    property: str
    set: List[str]
    bounds: BoundsModel
    status: str
    witness_trace: Optional[List[TraceStep]] = None
    witness_state: Optional[str] = None
    detail: str = ""
    states_explored: int
    truncated: bool


def verdict_report(verdict: Verdict, bounds: Bounds) -> VerdictReport:
    return VerdictReport(
        property=verdict.property.value,
        set=sorted(verdict.participants),
        bounds=BoundsModel(max_trace_len=bounds.max_trace_len, max_queue_per_channel=bounds.max_queue_per_channel),
        status=verdict.status.value,
        witness_trace=trace_steps(verdict.witness_trace) if verdict.witness_trace is not None else None,
        witness_state=show(verdict.witness_state) if verdict.witness_state is not None else None,
        detail=verdict.detail,
        states_explored=verdict.states_explored,
        truncated=verdict.truncated,
    )


# ==========================================
# ANALYSES
# ==========================================

class DepthRowModel(BaseModel):
    node: str
    participant: str
    depth: ExtNatValue


class BoundednessModel(BaseModel):
    bounded: bool
    witness_node: Optional[str] = None
    witness_participant: Optional[str] = None
    reason: Optional[str] = None


class WeightRowModel(BaseModel):
    message: str
    weight: ExtNatValue
    reason: Optional[str] = None


class SoundnessModel(BaseModel):
    participants: List[str]
    sound: bool
    offender: Optional[str] = None


class AnalysisReport(BaseModel):
    """Depth table, boundedness and, given a queue, weights and soundness"""
    format: Literal["mpst-analysis/1"] = "mpst-analysis/1"
    gtype: str
    depth: List[DepthRowModel]
    boundedness: BoundednessModel
    weights: List[WeightRowModel] = []
    soundness: Optional[SoundnessModel] = None


def analysis_report(gtype: GlobalType, rows: List[DepthRow], verdict,
                    weights: Optional[List[Tuple[Message, Measure]]] = None,
                    soundness: Optional[Soundness] = None, participants: Iterable[str] = ()) -> AnalysisReport:
    boundedness = BoundednessModel(bounded=bool(verdict))
    if verdict.witness is not None:
        node, participant = verdict.witness
        boundedness.witness_node = node.name or describe(node)
        boundedness.witness_participant = participant
        boundedness.reason = verdict.measure.explain() if verdict.measure is not None else None
    report = AnalysisReport(
        gtype=gtype.name or describe(gtype),
        depth=[DepthRowModel(node=row.node, participant=row.participant, depth=_extnat(row.depth)) for row in rows],
        boundedness=boundedness,
    )
    for message, measure in weights or []:
        report.weights.append(WeightRowModel(message=str(message), weight=_extnat(measure.value),
                                             reason=None if measure.finite else measure.explain()))
    if soundness is not None:
        report.soundness = SoundnessModel(
            participants=sorted(participants),
            sound=soundness.sound,
            offender=str(soundness.offender) if soundness.offender is not None else None,
        )
    return report


# ==========================================
# SIMULATIONS
# ==========================================

class SimulationStepModel(BaseModel):
    index: int
    step: TraceStep
    token: str
    state: str


class SimulationReport(BaseModel):
    """Replayed or randomly chosen steps and the sessions they lead to"""
    format: Literal["mpst-simulation/1"] = "mpst-simulation/1"
    seed: Optional[int] = None
    initial: str
    steps: List[SimulationStepModel] = []
    final: str
    stuck: bool
    failed_index: Optional[int] = None
    error: Optional[str] = None


def simulation_report(initial: Session, steps: List[Tuple[Communication, Session]], final: Session,
                      stuck: bool, seed: Optional[int] = None, failed_index: Optional[int] = None,
                      error: Optional[str] = None) -> SimulationReport:
    return SimulationReport(
        seed=seed,
        initial=show(initial),
        steps=[
            SimulationStepModel(index=index, step=trace_steps([step])[0], token=step.token, state=show(state))
            for index, (step, state) in enumerate(steps)
        ],
        final=show(final),
        stuck=stuck,
        failed_index=failed_index,
        error=error,
    )


# ==========================================
# RUNS
# ==========================================

class RunReport(BaseModel):
    """Envelope for one engine command"""
    format: Literal["mpst-run/1"] = "mpst-run/1"
    command: str
    inputs: Dict[str, str] = {}
    exit_code: ExitCode
    derivation: Optional[DerivationReport] = None
    verdict: Optional[VerdictReport] = None
    analysis: Optional[AnalysisReport] = None
    simulation: Optional[SimulationReport] = None
    error: Optional[str] = None


SCHEMAS: Dict[str, type] = {
    "run": RunReport,
    "derivation": DerivationReport,
    "verdict": VerdictReport,
    "analysis": AnalysisReport,
    "simulation": SimulationReport,
}


def schema(name: str) -> Dict[str, Any]:
    """JSON schema of a report model; KeyError for unknown names"""
    return SCHEMAS[name].model_json_schema()


# ==========================================
# TEXT FORM
# ==========================================

def _derivation_lines(node: DerivationNode, indent: str, lines: List[str]) -> None:
    edge = f"[{node.label}] " if node.label is not None else ""
    queue = "[" + ", ".join(node.queue) + "]"
    lines.append(f"{indent}{edge}{node.rule}: {node.network} || {queue} : {node.gtype}")
    for child in node.children:
        _derivation_lines(child, indent + "  ", lines)


def _text_derivation(report: DerivationReport) -> List[str]:
    members = "{" + ", ".join(report.participants) + "}"
    if report.accepted and report.derivation is not None:
        lines = [f"accepted for {members} ({report.mode.value})"]
        _derivation_lines(report.derivation, "  ", lines)
        return lines
    failure = report.failure
    where = " / ".join(failure.trail) or "root"
    lines = [f"rejected for {members} ({report.mode.value})", f"  {failure.kind} at {where}: {failure.detail}"]
    lines.append(f"  session: {failure.network} || [{', '.join(failure.queue)}]")
    lines.append(f"  type: {failure.gtype}")
    return lines


def _text_verdict(report: VerdictReport) -> List[str]:
    members = "{" + ", ".join(report.set) + "}"
    lines = [
        f"{report.property} for {members}: {report.status}",
        f"  states explored: {report.states_explored}{' (truncated)' if report.truncated else ''}",
    ]
    if report.witness_trace is not None:
        tokens = " ".join(
            f"{s.player}{'>' if s.kind.value == 'send' else '<'}{s.peer}{'!' if s.kind.value == 'send' else '?'}{s.label}"
            for s in report.witness_trace
        )
        lines.append(f"  witness trace: {tokens or '(empty)'}")
        lines.append(f"  witness state: {report.witness_state}")
        lines.append(f"  {report.detail}")
    return lines


def _text_analysis(report: AnalysisReport) -> List[str]:
    lines = [f"global {report.gtype}"]
    if report.depth:
        width = max(len(row.node) for row in report.depth)
        lines.append("  depth:")
        for row in report.depth:
            lines.append(f"    {row.node.ljust(width)}  {row.participant}  {row.depth}")
    bounded = report.boundedness
    if bounded.bounded:
        lines.append("  bounded: yes")
    else:
        lines.append(f"  bounded: no, witness ({bounded.witness_node}, {bounded.witness_participant})")
    if report.weights:
        lines.append("  weights:")
        for row in report.weights:
            lines.append(f"    {row.message}  {row.weight}")
    if report.soundness is not None:
        members = "{" + ", ".join(report.soundness.participants) + "}"
        verdict = "sound" if report.soundness.sound else f"not sound, {report.soundness.offender} is never read"
        lines.append(f"  {members}-soundness: {verdict}")
    return lines


def _text_simulation(report: SimulationReport) -> List[str]:
    lines = [f"start: {report.initial}"]
    for step in report.steps:
        lines.append(f"{step.index:>4}  {step.token}  ->  {step.state}")
    if report.error is not None:
        lines.append(f"error: {report.error}")
    lines.append(f"final: {report.final}{' (stuck)' if report.stuck else ''}")
    return lines


def render_text(report: RunReport) -> str:
    """Human-readable form of a run report"""
    if report.error is not None and report.simulation is None:
        return f"error: {report.error}\n"
    if report.derivation is not None:
        lines = _text_derivation(report.derivation)
    elif report.verdict is not None:
        lines = _text_verdict(report.verdict)
    elif report.analysis is not None:
        lines = _text_analysis(report.analysis)
    elif report.simulation is not None:
        lines = _text_simulation(report.simulation)
    else:
        lines = [report.command]
    return "\n".join(lines) + "\n"
