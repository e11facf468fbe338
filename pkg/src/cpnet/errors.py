"""Exception hierarchy shared by all engine layers.

Every error carries a stable ``code`` string so the CLI and the HTTP
service can report machine-readable error kinds without mapping tables.
"""

from __future__ import annotations


class CpnError(Exception):
    """Base class for all engine errors."""

    code = "Error"

    @property
    def detail(self) -> str:
        return str(self)


class CpnSyntaxError(CpnError):
    """Malformed DSL text. Carries a character position into the source."""

    code = "SyntaxError"

    def __init__(self, message: str, position: int, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.position = position
        self.line = line
        self.column = column


class DelaySyntaxError(CpnSyntaxError):
    code = "DelaySyntaxError"


class UnknownColorSet(CpnError):
    code = "UnknownColorSet"


class DuplicateColorSet(CpnError):
    code = "DuplicateColorSet"


class UnboundVariable(CpnError):
    code = "UnboundVariable"


class UnknownFunction(CpnError):
    code = "UnknownFunction"


class ArityMismatch(CpnError):
    code = "ArityMismatch"


class TypeErrorAtRuntime(CpnError):
    code = "TypeErrorAtRuntime"


class DivisionByZero(CpnError):
    code = "DivisionByZero"


class RecursionLimitExceeded(CpnError):
    code = "RecursionLimitExceeded"


class NotAPattern(CpnError):
    code = "NotAPattern"


class DuplicateFunction(CpnError):
    code = "DuplicateFunction"


class EvaluationError(CpnError):
    """Evaluation failure wrapped with transition/arc context."""

    code = "EvaluationError"

    def __init__(self, message: str, cause: CpnError):
        super().__init__(f"{message}: {cause}")
        self.cause = cause


class NotEnabled(CpnError):
    code = "NotEnabled"


class ColorMismatch(CpnError):
    code = "ColorMismatch"


class NegativeDelay(CpnError):
    code = "NegativeDelay"


class ValidationFailed(CpnError):
    code = "ValidationFailed"

    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


class TimedNetUnsupported(CpnError):
    code = "TimedNetUnsupported"


class LimitZero(CpnError):
    code = "LimitZero"


class HomeUndecidable(CpnError):
    code = "HomeUndecidable"


class LivenessUndecidable(CpnError):
    code = "LivenessUndecidable"


class SchemaError(CpnError):
    """Document does not conform to the interchange schema.

    ``path`` locates the offending element, e.g. ``transitions[0].guard``.
    """

    code = "SchemaError"

    def __init__(self, message: str, path: str = "", cause: CpnError | None = None):
        loc = f" at {path}" if path else ""
        super().__init__(f"{message}{loc}")
        self.path = path
        self.cause = cause
        if cause is not None:
            self.code = cause.code

    @property
    def detail(self) -> str:
        return str(self)


class NothingToUndo(CpnError):
    code = "NothingToUndo"


class XmlParseError(CpnError):
    code = "XmlParseError"


class HierarchyUnsupportedInStub(CpnError):
    code = "HierarchyUnsupportedInStub"


class EmptyInput(CpnError):
    code = "EmptyInput"
