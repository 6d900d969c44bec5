"""
API Routes for the session checker

REST API endpoints over the SessionEngine. Every request carries the
definition source text; responses are RunReports.
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field
from typing import Dict, Optional
from ..mpst.engine import SessionEngine
from ..mpst.errors import MpstError
from ..mpst.reports import ExitCode, RunReport
from ..mpst.syntax import SourceModule
from ..mpst.typechecker import CheckMode
from ..mpst.verifier import Bounds, Property
from ..config.settings import Settings

router = APIRouter(prefix="/api/v1/mpst", tags=["mpst"])

# Global engine instance (in production, use dependency injection)
engine = SessionEngine(mode=Settings.get_check_mode())


class SourceRequest(BaseModel):
    """Fields shared by every request"""
    source: str = Field(..., description="Definition file text")


class CheckRequest(SourceRequest):
    global_name: Optional[str] = Field(None, description="Global type (first defined when omitted)")
    session_name: Optional[str] = Field(None, description="Session (first defined when omitted)")
    participants: str = Field("*", description="Named set, inline list, '-' or '*'")
    mode: Optional[CheckMode] = Field(None, description="standard, lock-only or empty-queue-cycle")


class AnalyzeRequest(SourceRequest):
    global_name: Optional[str] = None
    queue_name: Optional[str] = None
    participants: Optional[str] = None


class SimulateRequest(SourceRequest):
    session_name: Optional[str] = None
    trace: Optional[str] = Field(None, description="Trace tokens (p>q!l p<q?l) or JSON array")
    steps: int = Field(0, ge=0, description="Random steps when no trace is given")
    seed: int = 0


class VerifyRequest(SourceRequest):
    session_name: Optional[str] = None
    participants: str = "*"
    property: Property = Property.LOCK
    max_trace_len: int = Field(Settings.DEFAULT_MAX_TRACE_LEN, ge=1)
    max_queue_per_channel: int = Field(Settings.DEFAULT_QUEUE_BOUND, ge=1)


def _module(source: str) -> SourceModule:
    try:
        return engine.load(text=source)
    except MpstError as e:
        raise HTTPException(status_code=422, detail=str(e))


def _answer(report: RunReport) -> RunReport:
    if report.exit_code == ExitCode.USAGE:
        raise HTTPException(status_code=422, detail=report.error)
    return report


@router.post("/check", response_model=RunReport)
async def check(request: CheckRequest):
    """
    Type check a session against a global type

    Returns the derivation when accepted, the failure otherwise.
    """
    module = _module(request.source)
    try:
        report = engine.check(module, request.global_name, request.session_name,
                              request.participants, request.mode)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
    return _answer(report)


@router.post("/analyze", response_model=RunReport)
async def analyze(request: AnalyzeRequest):
    """Depth table, boundedness, weights and soundness"""
    module = _module(request.source)
    try:
        report = engine.analyze(module, request.global_name, request.queue_name, request.participants)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
    return _answer(report)


@router.post("/simulate", response_model=RunReport)
async def simulate(request: SimulateRequest):
    """
    Replay a trace or run random steps

    A disabled trace step is reported in the response (exit_code 1), not as
    an HTTP error.
    """
    module = _module(request.source)
    try:
        report = engine.simulate(module, request.session_name, request.trace, request.steps, request.seed)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
    return _answer(report)


@router.post("/verify", response_model=RunReport)
async def verify(request: VerifyRequest):
    """Check a partial property by bounded exploration"""
    module = _module(request.source)
    try:
        bounds = Bounds(request.max_trace_len, request.max_queue_per_channel)
        report = engine.verify(module, request.session_name, request.participants, request.property, bounds)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
    return _answer(report)


@router.get("/properties")
async def get_properties() -> Dict[str, object]:
    """Get list of checkable properties"""
    return {
        "properties": [prop.value for prop in Property],
        "descriptions": engine.properties(),
        "modes": [mode.value for mode in CheckMode],
    }
