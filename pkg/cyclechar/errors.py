from typing import Any, Dict, Optional


class CycleCharError(Exception):
    """Root of every error raised on purpose by cyclechar."""


class BackendMismatchError(CycleCharError, ValueError):
    pass


class ConventionError(CycleCharError, ValueError):
    """Input violates a structural precondition (degree, parity, idempotency, ...)."""


class ExactnessError(CycleCharError, ValueError):
    """The exact kernel cannot represent the requested value."""


class AmbiguityError(CycleCharError, RuntimeError):
    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class ScenarioError(CycleCharError, ValueError):
    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        where = []
        if field:
            where.append(f"field={field}")
        if line is not None:
            where.append(f"line={line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line
