"""Exception types raised by the library."""


class BlabError(Exception):
    """Base class for all library errors."""


class CenterOutOfDomain(BlabError, ValueError):
    """A refinement center lies outside the integration disc."""


class NonFiniteIntegrand(BlabError, ValueError):
    """The integrand evaluated to inf or nan at a quadrature node."""


class InsufficientResolution(BlabError, ValueError):
    """A grid-sampled density is coarser than the requested resolution."""


class NoCoerciveTerm(BlabError, ValueError):
    """The weight has no RadialPoly term with positive coefficient."""


class GramNotPositiveDefinite(BlabError, ArithmeticError):
    """Cholesky factorization of the Gram matrix failed.

    Usually the degree is too high for the quadrature or truncation accuracy.
    """


class PointOutsideDomain(BlabError, ValueError):
    """A point does not lie in the Hartogs domain."""


class NonRadialWeight(BlabError, ValueError):
    """An operation that needs a rotation-invariant weight got another one."""


class RadiusOrderViolated(BlabError, ValueError):
    """Radii passed to a tail estimate are not correctly ordered."""


class MassTooLarge(BlabError, ValueError):
    """Total mass (or exponent sum) is >= 2, where the integral bounds are vacuous."""


class NotMonotone(BlabError, ValueError):
    """A weight sequence failed the sampled monotonicity check."""


class ConfigError(BlabError, ValueError):
    """An experiment configuration could not be parsed or validated."""


class NonIntegrableWeight(BlabError, ArithmeticError):
    """``exp(-phi)`` is not locally integrable: a log pole carries mass >= 2."""
