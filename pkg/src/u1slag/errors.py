"""Exception hierarchy shared by all modules."""


class U1SlagError(Exception):
    """Base class for every error raised by the package."""


# domain / grid
class DomainError(U1SlagError, ValueError):
    pass


class NonConvexDomain(DomainError):
    pass


class AsymmetricDomain(DomainError):
    pass


class ResolutionTooCoarse(DomainError):
    pass


# calculus
class NotIntegrable(U1SlagError):
    """Line integration of a gradient field is path dependent."""


class TestNotVanishing(U1SlagError, ValueError):
    """A weak-form test function is nonzero on the boundary."""

    __test__ = False  # keep pytest from collecting it


# solver
class SolverError(U1SlagError):
    pass


class NewtonDiverged(SolverError):
    pass


class SingularParameter(SolverError, ValueError):
    pass


class NotCauchy(SolverError):
    pass


class FamilySolveError(SolverError):
    """Raised after a batch solve in which some members failed.

    ``results`` keeps the successful members (``None`` where a member failed)
    and ``errors`` maps member index to the exception it raised.
    """

    def __init__(self, results, errors):
        self.results = results
        self.errors = errors
        detail = ", ".join(f"#{i}: {type(e).__name__}: {e}" for i, e in sorted(errors.items()))
        super().__init__(f"{len(errors)} of {len(results)} family members failed ({detail})")


# analysis
class AnalysisError(U1SlagError):
    pass


class ZeroOnContour(AnalysisError):
    pass


class UnderResolved(AnalysisError):
    pass


class ZeroOnBoundary(AnalysisError):
    pass


class IdenticalSolutions(AnalysisError):
    pass


class Unstable(AnalysisError):
    pass


class NotAZero(Unstable):
    pass


class SingularZero(AnalysisError):
    pass


class FitPoor(AnalysisError):
    pass


class AmbiguousSign(AnalysisError):
    pass


class FlatBoundary(AnalysisError):
    pass


# lifting / fibrations
class DegenerateFrame(U1SlagError):
    pass


class UnknownName(U1SlagError, KeyError):
    pass


class RoundTripFailed(U1SlagError):
    pass


class ExtremumConditionFailed(U1SlagError):
    pass


# cli
class ConfigError(U1SlagError, ValueError):
    pass
