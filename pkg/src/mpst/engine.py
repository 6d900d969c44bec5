"""
Session Engine

Coordinator behind the command line and the HTTP API.

This module provides the SessionEngine class, which:
- Loads definition files into SourceModules
- Resolves participant sets (named, inline, empty or full)
- Runs type checking, analysis, simulation and verification
- Wraps every outcome in a RunReport with its exit code

Architecture:
    SessionEngine
    ├── syntax (parse_module, parse_trace)
    ├── typechecker (typecheck, derivation_validate)
    ├── analysis (depth_table, bounded, weight_table, p_sound)
    ├── dynamics (session_enabled, session_step)
    └── verifier (verify, Bounds)
"""

import random
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .analysis import bounded, depth_table, p_sound, weight_table
from .dynamics import TypeConfiguration, session_enabled, session_step
from .errors import MpstError, NotEnabled, ParseError
from .reports import (
    ExitCode,
    RunReport,
    analysis_report,
    derivation_report,
    simulation_report,
    verdict_report,
)
from .syntax import SourceModule, parse_module, parse_trace
from .terms import (
    Communication,
    ParticipantSet,
    Session,
    participants_network,
    players_network,
    plays_queue,
)
from .typechecker import CheckMode, accepted, derivation_validate, typecheck
from .verifier import Bounds, Property, VerdictStatus, verify
from ..config.settings import Settings
from ..utils.logger import get_logger

logger = get_logger(__name__)

ParticipantSpec = Union[str, Iterable[str], None]

_NAME = re.compile(r'^[A-Za-z][A-Za-z0-9_]*$')

PROPERTY_DESCRIPTIONS: Dict[str, str] = {
    Property.LOCK.value: "every active member can always act again in some continuation",
    Property.DEADLOCK.value: "no reachable stuck state keeps a member active",
    Property.OMF.value: "every queued message between members can eventually be read",
}


def full_set(session: Session, prop: Optional[Property] = None) -> ParticipantSet:
    """Members of the whole-system property: active players, or everyone mentioned for omf"""
    everyone = players_network(session.network)
    if prop == Property.OMF:
        everyone = everyone | participants_network(session.network) | plays_queue(session.queue)
    return everyone


class SessionEngine:
    """
    Session Engine - runs the library operations behind one interface.

    State:
        - mode: CheckMode used by check() unless overridden
        - bounds: exploration Bounds used by verify() unless overridden

    Side effects:
        - Logging (one INFO line per command)

    Thread safety: engine state is read-only after construction
    """

    def __init__(self, mode: Optional[CheckMode] = None, bounds: Optional[Bounds] = None):
        """
        Initialize the engine.

        Args:
            mode: Default check mode (Settings.get_check_mode() when None)
            bounds: Default exploration bounds (Settings.default_bounds() when None)
        """
        self.mode = mode or Settings.get_check_mode()
        self.bounds = bounds or Settings.default_bounds()
        logger.info(f"Session engine initialized (mode: {self.mode.value}, "
                    f"bounds: {self.bounds.max_trace_len}/{self.bounds.max_queue_per_channel})")

    # ------------------------------------------------------------------
    # Inputs
    # ------------------------------------------------------------------

    def load(self, path: Optional[Union[str, Path]] = None, text: Optional[str] = None) -> SourceModule:
        """
        Parse a definition file, or definition text.

        Raises:
            ParseError, ResolutionError, WellFormednessError: Bad input
            OSError: The file cannot be read
        """
        if (path is None) == (text is None):
            raise ValueError("load() takes exactly one of path or text")
        if path is not None:
            text = Path(path).read_text(encoding="utf-8")
            logger.info(f"Loading {path}")
        return parse_module(text)

    def resolve_participants(self, module: SourceModule, spec: ParticipantSpec,
                             prop: Optional[Property] = None, session: Optional[Session] = None) -> ParticipantSet:
        """
        Resolve a participant set.

        Accepted forms:
            - a set defined in the module ("Users")
            - an inline list ("u1,u2" or "{u1, u2}")
            - "-" for the empty set
            - "*" for the members of the whole-system property of `prop`
              on `session` (active players; plus everyone mentioned for omf)
            - an iterable of names

        Raises:
            ParseError: Malformed inline list, or "*" without a session
        """
        if spec is None:
            return frozenset()
        if not isinstance(spec, str):
            return frozenset(spec)

        text = spec.strip()
        if text == "-":
            return frozenset()
        if text == "*":
            if session is None:
                raise ParseError("'*' needs a session to take the participants from")
            return full_set(session, prop)
        if text in module.set_defs:
            return module.participant_set(text)

        names = [name.strip() for name in text.strip("{}").split(",") if name.strip()]
        for name in names:
            if not _NAME.match(name):
                raise ParseError(f"invalid participant name '{name}' in set '{spec}'")
        return frozenset(names)

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def check(self, module: SourceModule, global_name: Optional[str] = None, session_name: Optional[str] = None,
              participants: ParticipantSpec = "-", mode: Optional[CheckMode] = None) -> RunReport:
        """
        Type check a session against a global type.

        Returns:
            RunReport with a DerivationReport; exit code 0 when accepted (and
            the derivation replays), 1 when rejected, 2 on resolution errors

        Examples:
            >>> report = engine.check(module, "G", "SocialMedia", "u1,u2")
            >>> report.exit_code
            <ExitCode.OK: 0>
        """
        mode = CheckMode(mode or self.mode)
        inputs = _inputs(global_=global_name, session=session_name, set=participants, mode=mode.value)
        try:
            gtype = module.global_type(global_name)
            session = module.session(session_name)
            members = self.resolve_participants(module, participants, None, session)
        except MpstError as exc:
            return _failed("check", inputs, exc)

        result = typecheck(members, gtype, session, mode)
        validated = None
        if accepted(result):
            validated = derivation_validate(result, members, gtype, session, mode)
            if not validated:
                logger.error("Derivation failed independent replay")
        code = ExitCode.OK if accepted(result) and validated else ExitCode.REJECTED
        logger.info(f"check {inputs.get('global', '')} / {inputs.get('session', '')} for "
                    f"{{{', '.join(sorted(members))}}}: {'accepted' if code == ExitCode.OK else 'rejected'}")
        return RunReport(command="check", inputs=inputs, exit_code=code,
                         derivation=derivation_report(result, members, mode, validated))

    def analyze(self, module: SourceModule, global_name: Optional[str] = None, queue_name: Optional[str] = None,
                participants: ParticipantSpec = None) -> RunReport:
        """
        Depth table and boundedness of a global type; with a queue, also the
        weight of every queued message and soundness for `participants`
        (everyone in the queue when not given).
        """
        inputs = _inputs(global_=global_name, queue=queue_name, set=participants)
        try:
            gtype = module.global_type(global_name)
            queue = module.queue(queue_name) if queue_name is not None else None
            members = self.resolve_participants(module, participants) if participants is not None else None
        except MpstError as exc:
            return _failed("analyze", inputs, exc)

        rows = depth_table(gtype)
        verdict = bounded(gtype)
        weights, soundness = None, None
        if queue is not None:
            members = members if members is not None else plays_queue(queue)
            weights = weight_table(gtype, queue)
            soundness = p_sound(TypeConfiguration(gtype, queue), members)
        logger.info(f"analyze {gtype.name or 'global'}: {len(rows)} depth rows, bounded={bool(verdict)}")
        return RunReport(command="analyze", inputs=inputs, exit_code=ExitCode.OK,
                         analysis=analysis_report(gtype, rows, verdict, weights, soundness, members or ()))

    def simulate(self, module: SourceModule, session_name: Optional[str] = None, trace: Optional[str] = None,
                 steps: int = 0, seed: int = 0) -> RunReport:
        """
        Replay a trace, or take `steps` uniformly random enabled steps.

        Random runs use `random.Random(seed)` and stop early on a stuck
        session. A disabled trace step gives exit code 1 and its index.
        """
        inputs = _inputs(session=session_name, trace=trace, steps=None if trace is not None else str(steps),
                         seed=None if trace is not None else str(seed))
        try:
            session = module.session(session_name)
            communications = parse_trace(trace) if trace is not None else None
        except MpstError as exc:
            return _failed("simulate", inputs, exc)

        taken: List[Tuple[Communication, Session]] = []
        current = session
        if communications is not None:
            for index, step in enumerate(communications):
                try:
                    current = session_step(current, step)
                except NotEnabled as exc:
                    logger.info(f"simulate: step {index} ({step.token}) is not enabled")
                    report = simulation_report(session, taken, current, not session_enabled(current),
                                               failed_index=index, error=f"step {index} ({step.token}): {exc}")
                    return RunReport(command="simulate", inputs=inputs, exit_code=ExitCode.REJECTED,
                                     simulation=report, error=report.error)
                taken.append((step, current))
            seed_used = None
        else:
            rng = random.Random(seed)
            for _ in range(steps):
                enabled = session_enabled(current)
                if not enabled:
                    break
                step, current = rng.choice(enabled)
                taken.append((step, current))
            seed_used = seed

        stuck = not session_enabled(current)
        logger.info(f"simulate: {len(taken)} steps{' (stuck)' if stuck else ''}")
        return RunReport(command="simulate", inputs=inputs, exit_code=ExitCode.OK,
                         simulation=simulation_report(session, taken, current, stuck, seed_used))

    def verify(self, module: SourceModule, session_name: Optional[str] = None, participants: ParticipantSpec = "*",
               prop: Union[Property, str] = Property.LOCK, bounds: Optional[Bounds] = None) -> RunReport:
        """
        Check a partial property by bounded exploration.

        Exit codes: 0 Holds, 1 Violated, 3 HoldsWithinBounds, 2 bad input.
        """
        bounds = bounds or self.bounds
        inputs = _inputs(session=session_name, set=participants, property=str(getattr(prop, "value", prop)),
                         depth=str(bounds.max_trace_len), queue_bound=str(bounds.max_queue_per_channel))
        try:
            prop = Property(prop)
            session = module.session(session_name)
            members = self.resolve_participants(module, participants, prop, session)
        except (MpstError, ValueError) as exc:
            return _failed("verify", inputs, exc)

        verdict = verify(session, members, prop, bounds)
        code = {
            VerdictStatus.HOLDS: ExitCode.OK,
            VerdictStatus.VIOLATED: ExitCode.REJECTED,
            VerdictStatus.HOLDS_WITHIN_BOUNDS: ExitCode.INCONCLUSIVE,
        }[verdict.status]
        logger.info(f"verify {prop.value} for {{{', '.join(sorted(members))}}}: {verdict.status.value} "
                    f"({verdict.states_explored} states)")
        return RunReport(command="verify", inputs=inputs, exit_code=code, verdict=verdict_report(verdict, bounds))

    def properties(self) -> Dict[str, str]:
        return dict(PROPERTY_DESCRIPTIONS)


def _inputs(global_: Optional[str] = None, **fields) -> Dict[str, str]:
    values = {"global": global_, **fields}
    result = {}
    for key, value in values.items():
        if value is None:
            continue
        if not isinstance(value, str):
            value = ",".join(sorted(value))
        result[key] = value
    return result


def _failed(command: str, inputs: Dict[str, str], exc: Exception) -> RunReport:
    logger.info(f"{command}: {exc}")
    return RunReport(command=command, inputs=inputs, exit_code=ExitCode.USAGE, error=str(exc))
