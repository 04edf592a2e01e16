"""Exception types raised across the package."""


class MppsError(Exception):
    """Base class for package errors."""


class EpisodeOver(MppsError):
    """step() called at or beyond the horizon."""


class GenerationRetryExhausted(MppsError):
    """Map generator could not satisfy its constraints within the retry budget."""


class SamplingExhausted(MppsError):
    """Exact posterior backend ran out of rejection budget."""


class NoProgramFound(MppsError):
    """Synthesis found no program with nonzero objective at any length."""


class DomainMismatch(MppsError):
    """Operation applied across incompatible domains."""


class UnknownSymbol(MppsError):
    """Goal references an undeclared object or color."""


class CapExceeded(MppsError):
    """A count exceeds the bit-blasting cap."""


class BudgetExceeded(MppsError):
    """Enumerative search exceeded its node budget."""


class TrainingDiverged(MppsError):
    """Non-finite loss encountered during optimization."""
