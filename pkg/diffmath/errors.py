"""
Error Types - Typed failures shared by every SampleNet package
"""

from typing import Any, Optional


class SampleNetError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1


class ShapeError(SampleNetError):
    """Operand shapes are incompatible"""


class GraphError(SampleNetError):
    """A tensor reached the tape without being recorded on it"""


class ContractError(SampleNetError):
    """A documented precondition does not hold"""


class DomainError(SampleNetError):
    """A value lies outside the mathematical domain of an operation"""


class ConfigError(SampleNetError):
    """Invalid or inconsistent configuration"""

    exit_code = 2


class DataError(SampleNetError):
    """Malformed, empty or unusable dataset"""

    exit_code = 3


class NumericError(SampleNetError):
    """Non-finite values produced during computation"""

    exit_code = 4


class ProtocolError(SampleNetError):
    """Evaluation records do not follow the split protocol"""


class ArtifactError(SampleNetError):
    """Run artifacts are missing or cannot be written"""


class TrainingAborted(NumericError):
    """Training stopped on a non-finite loss; carries the last good snapshot"""

    def __init__(self, message: str, model: Any = None, history: Optional[Any] = None):
        super().__init__(message)
        self.model = model
        self.history = history
