"""
MPST Partial Checker

Partial typing of asynchronous multiparty sessions against global types.
A session accepted for a participant set P is guaranteed P-lock-free and
P-orphan-message-free; the bounded verifier checks these properties
independently by exploring the session.
"""

from .analysis import bounded, depth, p_sound, weight
from .dynamics import TypeConfiguration, config_enabled, config_step, session_enabled, session_run, session_step
from .engine import SessionEngine
from .errors import MpstError, NotEnabled, ParseError, ResolutionError, UnboundedType, WellFormednessError
from .syntax import SourceModule, parse_module, parse_trace, render, show
from .terms import Communication, GlobalType, Message, Network, Process, Queue, Session
from .typechecker import CheckMode, Derivation, TypeFailure, derivation_validate, typecheck
from .verifier import Bounds, Property, Verdict, VerdictStatus, explore, verify

__all__ = [
    "Bounds",
    "CheckMode",
    "Communication",
    "Derivation",
    "GlobalType",
    "Message",
    "MpstError",
    "Network",
    "NotEnabled",
    "ParseError",
    "Process",
    "Property",
    "Queue",
    "ResolutionError",
    "Session",
    "SessionEngine",
    "SourceModule",
    "TypeConfiguration",
    "TypeFailure",
    "UnboundedType",
    "Verdict",
    "VerdictStatus",
    "WellFormednessError",
    "bounded",
    "config_enabled",
    "config_step",
    "depth",
    "derivation_validate",
    "explore",
    "p_sound",
    "parse_module",
    "parse_trace",
    "render",
    "session_enabled",
    "session_run",
    "session_step",
    "show",
    "typecheck",
    "verify",
    "weight",
]

__version__ = "0.1.0"
