"""Exception hierarchy.

Everything domain-level derives from HeckeLabError so the command line
interface can map "the input was mathematically bad" to a single exit code,
distinct from usage errors and from genuine bugs.
"""


class HeckeLabError(Exception):
    """Base class for domain errors."""


class BadDiscriminant(HeckeLabError):
    """Discriminant is not a negative fundamental discriminant."""


class NonFundamental(BadDiscriminant):
    """Discriminant of a quadratic order that is not maximal where one was required."""


class UnsupportedDiscriminant(HeckeLabError):
    """No canonical finite part is defined for this field; supply one explicitly."""


class UnitInconsistent(HeckeLabError):
    """eps(u) * u != 1 for some unit u, so no character of this infinite type exists."""


class NoConsistentLift(HeckeLabError):
    """Class-group lift failed; cannot happen when unit consistency holds."""


class ConductorNotSupported(HeckeLabError):
    """Requested conductor clashes with a precondition (e.g. not coprime where needed)."""


class SubfieldMismatch(HeckeLabError):
    """Element does not lie in (or map to) the requested abelian subfield."""


class NonPositiveArgument(HeckeLabError):
    """Kernel argument u must be positive."""


class DomainError(HeckeLabError):
    """Numeric parameter outside the supported domain."""


class SignMismatch(HeckeLabError):
    """Requested vanishing order v is inconsistent with the computed root number."""


class NumericalInstability(HeckeLabError):
    """A certified numeric routine could not reach the requested tolerance."""


class DegenerateQuotient(HeckeLabError):
    """Denominator of a ratio estimate is numerically too small to trust."""


class SingularRoot(HeckeLabError):
    """Newton step undefined: derivative vanishes modulo p at the seed."""


class InsufficientPrecision(HeckeLabError):
    """A p-adic quantity is indistinguishable from zero at the working precision."""
