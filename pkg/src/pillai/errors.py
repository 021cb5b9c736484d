"""Exception hierarchy shared by the certification modules."""


class PillaiError(Exception):
    """Base class for every error raised by this package."""


class PrecisionExhausted(PillaiError):
    """A certified decision stayed undecided up to the precision cap."""


class DomainError(PillaiError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DivisorStraddlesZero(PillaiError, ZeroDivisionError):
    """Division by a ball whose interval contains zero."""


class RationalTerminated(PillaiError):
    """A continued fraction ended before reaching the requested denominator."""


class IndexBeyondCertified(PillaiError, IndexError):
    """Access to a partial quotient that is not certified at this precision."""


class HypothesisFailed(PillaiError):
    """A lemma was applied outside its hypotheses."""


class NonConvergence(PillaiError):
    """A fixed-point iteration did not settle within its step budget."""


class EpsilonNonPositive(PillaiError):
    """No tried convergent gave a certified positive reduction epsilon."""


class MuNearZero(PillaiError):
    """The inhomogeneous term of a reduction cannot be separated from zero."""


class Rejected(PillaiError):
    """A residue collision that fails exact verification."""


class UnclassifiedSolution(PillaiError):
    """A verified solution outside the known families."""


class CoefficientUnderivable(PillaiError):
    """A recomputed bound coefficient exceeds the stated one beyond tolerance."""


class CertificationError(PillaiError, AssertionError):
    """A property that must be certified was refuted or stayed undecided."""
