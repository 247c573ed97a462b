"""Exception hierarchy shared by all conicwalk modules."""


class ConicwalkError(Exception):
    """Base class for every error raised by this package."""


class NotOddPrime(ConicwalkError):
    """The requested characteristic is not an odd prime."""


class CapExceeded(ConicwalkError):
    """A field or enumeration exceeds the configured desk-scale cap."""


class FieldMismatch(ConicwalkError):
    """Operands belong to different field specs."""


class ZeroQuadranceArg(ConicwalkError):
    """An intersection-count argument is zero, outside the formula's hypotheses."""


class IndexInvalid(ConicwalkError):
    """A class index is not a member of the relevant index set."""


class IndexMismatch(ConicwalkError):
    """Two distributions live on different index sets."""


class NotErgodic(ConicwalkError):
    """The kernel is reducible or periodic; no unique stationary limit."""


class BranchMismatch(ConicwalkError):
    """The requested bound branch does not match q mod 4."""


class WalkTimeout(ConicwalkError):
    """An iteration exceeded its step budget; indicates a bug upstream."""


class InternalCheckError(ConicwalkError):
    """A runtime self-check failed (e.g. a provably monotone curve increased)."""


class ConfigError(ConicwalkError):
    """An invalid run configuration; rejected before any computation."""
