"""Exception and warning types shared across the package."""


class LebedevError(Exception):
    """Base class for all errors raised by this package."""


class PoleError(LebedevError):
    """Argument sits on (or within 1e-14 of) a gamma-function pole."""


class ParameterPole(PoleError):
    """Lower hypergeometric parameter c is a nonpositive integer."""


class PrefactorPole(PoleError):
    """A gamma prefactor of a Legendre representation is singular."""


class NoConvergence(LebedevError):
    """A series or quadrature exhausted its budget above tolerance.

    Carries the best value obtained so far in ``best`` when available,
    so callers can still inspect partial results.
    """

    def __init__(self, msg, best=None, err_estimate=None):
        super().__init__(msg)
        self.best = best
        self.err_estimate = err_estimate


class ContourError(LebedevError):
    """Contour abscissa lies outside the analyticity strip."""


class OutOfStrip(LebedevError):
    """Mellin variable outside the declared convergence strip."""


class Divergent(LebedevError):
    """A norm or integral exceeded the overflow budget."""


class IntegrabilityError(LebedevError):
    """Input function lacks a declared integrability class required here."""


class HypothesisError(LebedevError):
    """Spectral function lacks declared inversion-theorem hypotheses."""


class DecayError(LebedevError):
    """Spectral function lacks the declared decay class."""


class GrowthError(LebedevError):
    """e^{theta*tau} growth not covered by the declared decay class."""


class ConfigError(LebedevError):
    """Malformed configuration file or value."""


class AsymmetryWarning(UserWarning):
    """Conjugate symmetry was assumed for a contour integrand but the
    probe |F(conj s) - conj F(s)| exceeded 1e-10."""


class BranchWarning(UserWarning):
    """A formula containing exp(i*pi*mu) was evaluated for non-real mu;
    the principal branch was used."""
