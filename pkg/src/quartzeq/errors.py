"""Exception types shared across the package."""


class QuartzeqError(Exception):
    """Base class for all package-specific failures."""


class DomainError(QuartzeqError, ValueError):
    """A parameter lies outside the domain a routine is valid on."""


class ConvergenceError(QuartzeqError, RuntimeError):
    """A certified tolerance could not be reached within the configured caps.

    Carries enough context to diagnose the failure from a CLI exit.
    """

    def __init__(self, message, *, series=None, x=None, terms_used=None,
                 achieved_bound=None):
        super().__init__(message)
        self.series = series
        self.x = x
        self.terms_used = terms_used
        self.achieved_bound = achieved_bound

    def diagnostic(self):
        d = {"error": "convergence", "message": str(self)}
        if self.series is not None:
            d["series"] = self.series
        if self.x is not None:
            d["x"] = self.x
        if self.terms_used is not None:
            d["terms_used"] = self.terms_used
        if self.achieved_bound is not None:
            d["achieved_bound"] = self.achieved_bound
        return d


class ConsistencyError(QuartzeqError, ArithmeticError):
    """Two independent evaluation routes disagree beyond their combined bounds."""


class IntegrationError(QuartzeqError, RuntimeError):
    """The dynamical integration violated a hard invariant (e.g. positivity)."""
