"""
Exception hierarchy

Parsing, resolution and well-formedness problems are raised; checking
failures and verification verdicts are returned as data.
"""

from typing import Any, List, Optional


class MpstError(Exception):
    """Base class for every error raised by the library"""


class ParseError(MpstError, ValueError):
    """
    Syntax error in a definition file or expression.

    Attributes:
        reason: Human-readable description
        line: 1-based line (None when unknown)
        column: 1-based column (None when unknown)
        expected: Tokens or rules that would have been accepted
    """

    def __init__(
        self,
        reason: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        expected: Optional[List[str]] = None,
    ):
        self.reason = reason
        self.line = line
        self.column = column
        self.expected = list(expected or [])
        where = f" at {line}:{column}" if line is not None else ""
        hint = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{reason}{where}{hint}")


class ResolutionError(ParseError):
    """A referenced definition does not exist or is defined twice"""


class WellFormednessError(MpstError, ValueError):
    """A parsed term violates the side conditions of processes, types or networks"""

    def __init__(self, report: Any):
        self.report = report
        lines = "; ".join(str(v) for v in report.violations)
        super().__init__(f"ill-formed term: {lines}")


class NotEnabled(MpstError):
    """
    A communication cannot be performed.

    Attributes:
        communication: The offending communication (may be None)
        index: Position in a trace, when raised while replaying one
    """

    def __init__(self, message: str, communication: Any = None, index: Optional[int] = None):
        self.communication = communication
        self.index = index
        super().__init__(message)


class UnboundedType(MpstError):
    """A global type used where a bounded one is required"""

    def __init__(self, message: str, witness: Any = None):
        self.witness = witness
        super().__init__(message)
