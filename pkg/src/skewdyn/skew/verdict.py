"""Graded decision results."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Status(str, enum.Enum):
    PROVEN_TRANSITIVE = "PROVEN_TRANSITIVE"
    PROVEN_NOT_TRANSITIVE = "PROVEN_NOT_TRANSITIVE"
    VERIFIED_TO_BOUND = "VERIFIED_TO_BOUND"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Verdict:
    """A decision about one property (``claim``) with its evidence.

    ``certificate`` is JSON-ready: integers and fractions appear as decimal
    strings, so it can be embedded in a report verbatim.
    """

    status: Status
    claim: str
    certificate: dict[str, Any] = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.status in (Status.PROVEN_TRANSITIVE, Status.VERIFIED_TO_BOUND)

    @property
    def proven(self) -> bool:
        return self.status in (Status.PROVEN_TRANSITIVE, Status.PROVEN_NOT_TRANSITIVE)

    def to_dict(self) -> dict[str, Any]:
        return {"claim": self.claim, "status": self.status.value, "certificate": self.certificate}


def proven(claim: str, **cert: Any) -> Verdict:
    return Verdict(Status.PROVEN_TRANSITIVE, claim, cert)


def proven_not(claim: str, reason: str, **cert: Any) -> Verdict:
    return Verdict(Status.PROVEN_NOT_TRANSITIVE, claim, {"reason": reason, **cert})


def verified(claim: str, **cert: Any) -> Verdict:
    return Verdict(Status.VERIFIED_TO_BOUND, claim, cert)


def inconclusive(claim: str, reason: str, **cert: Any) -> Verdict:
    return Verdict(Status.INCONCLUSIVE, claim, {"reason": reason, **cert})
