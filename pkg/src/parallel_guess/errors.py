"""Exception types shared by every module.

Each error carries a stable machine-readable ``code`` that the CLI echoes in
its JSON error object.
"""
from __future__ import annotations


class ModelError(ValueError):
    """Base class for domain errors (CLI exit status 3)."""

    code = "domain-error"

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


class InvalidAlphabetError(ModelError):
    code = "invalid-alphabet"


class InvalidWordLengthError(ModelError):
    code = "invalid-word-length"


class InvalidToleranceError(ModelError):
    code = "invalid-tolerance"


class DomainError(ModelError):
    code = "domain-error"


class PoleError(DomainError):
    code = "pole"


class SizeLimitError(ModelError):
    code = "size-limit"


class InvalidTrialsError(ModelError):
    code = "invalid-trials"


class InfeasibleSerialError(ModelError):
    """Raised when the serial model would need more rounds than the cap allows.

    ``log10_mean`` holds the analytic mean K**L on a log10 scale.
    """

    code = "infeasible-serial"

    def __init__(self, message: str, log10_mean: float):
        super().__init__(message)
        self.log10_mean = log10_mean

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["log10_mean"] = self.log10_mean
        return d


class TooFewTrialsError(ModelError):
    code = "too-few-trials"


class DegenerateBinsError(ModelError):
    code = "degenerate-bins"
