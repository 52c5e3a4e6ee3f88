"""Twisted skew products: construction, quotients, rotation data and deciders."""

from .cocycle import CocycleGraph, PhasedSkew, from_untwisted
from .core import (
    DisplacementData,
    DisplacementEntry,
    FiniteQuotient,
    FriedQuotient,
    TwistedSkew,
    displacement_data,
    fried_quotient,
    iterate,
    quotient,
    splitting,
    translate,
)
from .deciders import (
    DEFAULT_MAX_INDEX,
    DEFAULT_MAX_POWER,
    H1Candidate,
    WitnessCycle,
    decide_cocycle,
    ftp_bounded,
    h1_transitivity,
    has_ftp_untwisted,
    is_totally_transitive,
    is_transitive,
    is_transitive_twisted,
    is_transitive_untwisted,
    witness_cycle,
)
from .verdict import Status, Verdict

__all__ = [
    "CocycleGraph",
    "DEFAULT_MAX_INDEX",
    "DEFAULT_MAX_POWER",
    "DisplacementData",
    "DisplacementEntry",
    "FiniteQuotient",
    "FriedQuotient",
    "H1Candidate",
    "PhasedSkew",
    "Status",
    "TwistedSkew",
    "Verdict",
    "WitnessCycle",
    "decide_cocycle",
    "displacement_data",
    "fried_quotient",
    "from_untwisted",
    "ftp_bounded",
    "h1_transitivity",
    "has_ftp_untwisted",
    "is_totally_transitive",
    "is_transitive",
    "is_transitive_twisted",
    "is_transitive_untwisted",
    "iterate",
    "quotient",
    "splitting",
    "translate",
    "witness_cycle",
]
