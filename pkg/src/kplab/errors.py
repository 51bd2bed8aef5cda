"""Shared exception types.

Every precondition failure in the package raises one of these, with a message
naming the violated condition and the offending values.
"""
from __future__ import annotations


class KplabError(Exception):
    """Base class for all package errors."""


class RejectedConfig(KplabError):
    """Soliton data failed a regularity requirement (minor signs, rank, ...)."""


class DegenerateFrame(KplabError):
    """The co-moving frame is not defined for this configuration."""


class InvalidBranch(KplabError):
    """Requested far-field branch does not exist for this configuration."""


class PoleAtKappa(KplabError):
    """Spectral parameter collides with a pole of the requested function."""


class ConfigMismatch(KplabError):
    """Operands were built from different soliton configurations."""


class MissingPrimitive(KplabError):
    """An operator needed an exact antiderivative the object does not carry."""


class RegionViolation(KplabError):
    """A sampled function leaks outside the region an operator assumes."""


class OrthogonalityViolation(KplabError):
    """Input violates the orthogonality hypothesis of a kernel-side solve."""


class BranchCutCrossing(KplabError):
    """A requested curve segment crosses the square-root branch cut."""


class AlphaOutOfRange(KplabError):
    """Weight exponent violates an admissibility inequality (named in msg)."""


class InadmissibleEta(KplabError):
    """Transverse frequency outside the mode's weighted-space window."""


class HypothesisViolation(KplabError):
    """Quantitative hypothesis of the checked statement does not hold."""


class ThresholdViolation(KplabError):
    """A projection band or fit threshold is outside its admissible range."""


class CaseMismatch(KplabError):
    """Requested object exists only in the other parameter case."""


class ZeroAlphaWithInverse(KplabError):
    """alpha=0 makes the antiderivative symbol singular on the grid."""


class DomainTooSmall(KplabError):
    """Field mass reaches the boundary of the computational domain."""


class UnstableStep(KplabError):
    """Time step produced growth far beyond the allowed bound."""


class ConfigParseError(KplabError):
    """Scenario file is malformed."""
