"""
Error hierarchy

All errors raised by the toolkit derive from InstantonError so the command
line front end can map them onto exit codes.
"""

from typing import Any, Dict, Optional


class InstantonError(Exception):
    """Base class for toolkit errors"""


class RodDataError(InstantonError, ValueError):
    """Malformed rod structures, rod files or non-normalizable ends"""


class DomainError(InstantonError, ValueError):
    """Parameters or points outside the admissible domain"""


class ClassMismatchError(InstantonError, ValueError):
    """Incompatible asymptotic classes or rod data in a comparison"""


class UsageError(InstantonError, ValueError):
    """Malformed command line options"""


class ConvergenceError(InstantonError, RuntimeError):
    """A numeric procedure did not reach its tolerance"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = diagnostics or {}


class IntegrabilityError(ConvergenceError):
    """Path dependence detected while integrating the conformal factor"""
