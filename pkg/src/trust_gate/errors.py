"""Exception hierarchy for the trust-gate engine.

Every error carries a stable machine-readable ``code`` (used verbatim in API
error bodies) and an optional ``details`` mapping for structured context such
as the offending entity or the list of missing approval roles.
"""

from __future__ import annotations

from typing import Any


class TrustGateError(Exception):
    """Base class; ``code`` defaults to the class name."""

    code = "TrustGateError"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


# --- catalog ---------------------------------------------------------------

class ParseError(TrustGateError):
    code = "ParseError"


class ValidationError(TrustGateError):
    code = "ValidationError"


class GateOutOfRange(TrustGateError):
    code = "GateOutOfRange"


# --- scoring ---------------------------------------------------------------

class UnknownControl(TrustGateError):
    code = "UnknownControl"


class NonPositiveAppetite(TrustGateError):
    code = "NonPositiveAppetite"


class MetExceedsTotal(TrustGateError):
    code = "MetExceedsTotal"


class ScoreOutOfRange(TrustGateError):
    code = "ScoreOutOfRange"


class WeightSumInvalid(TrustGateError):
    code = "WeightSumInvalid"


class ValueOutOfRange(TrustGateError):
    code = "ValueOutOfRange"


class MissingPillar(TrustGateError):
    code = "MissingPillar"


# --- lifecycle -------------------------------------------------------------

class UnacceptableTier(TrustGateError):
    code = "UnacceptableTier"


class IncompleteAssessment(TrustGateError):
    code = "IncompleteAssessment"


class AuthorityInsufficient(TrustGateError):
    code = "AuthorityInsufficient"


class UpgradeForbidden(TrustGateError):
    code = "UpgradeForbidden"


class MissingRemediationPlan(TrustGateError):
    code = "MissingRemediationPlan"


class ReReviewOutOfWindow(TrustGateError):
    code = "ReReviewOutOfWindow"


class ApproverInsufficient(TrustGateError):
    code = "ApproverInsufficient"


class ExpiryTooLate(TrustGateError):
    code = "ExpiryTooLate"


class MissingPlan(TrustGateError):
    code = "MissingPlan"


class WrongPhase(TrustGateError):
    code = "WrongPhase"


class WrongGate(TrustGateError):
    code = "WrongGate"


# --- checks ----------------------------------------------------------------

class MissingColumn(TrustGateError):
    code = "MissingColumn"


class SingleGroup(TrustGateError):
    code = "SingleGroup"


class EmptyGroup(TrustGateError):
    code = "EmptyGroup"


class InvalidPredictionValue(TrustGateError):
    code = "InvalidPredictionValue"


class MissingMeasurement(TrustGateError):
    code = "MissingMeasurement"


# --- registry --------------------------------------------------------------

class StoreCorrupt(TrustGateError):
    code = "StoreCorrupt"


class WriteFailed(TrustGateError):
    code = "WriteFailed"


class UnknownSystem(TrustGateError):
    code = "UnknownSystem"


class DuplicateSystem(TrustGateError):
    code = "DuplicateSystem"


class UnknownScope(TrustGateError):
    code = "UnknownScope"


# --- service ---------------------------------------------------------------

class BindFailed(TrustGateError):
    code = "BindFailed"


class AuthConfigMissing(TrustGateError):
    code = "AuthConfigMissing"
