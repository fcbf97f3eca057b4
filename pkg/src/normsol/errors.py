"""Exception hierarchy shared by all normsol modules."""


class NormsolError(Exception):
    """Base class for all library-specific failures."""


class ModelError(NormsolError):
    """Nonlinearity data rejected at construction (bad signs, exponents, ...)."""


class NoFiniteMZero(NormsolError):
    """F stays non-positive over the whole scanned range."""


class DivergentNearZero(NormsolError):
    """The integral of K/sqrt(G) diverges near 0 in the numeric probe."""


class NotApplicableError(NormsolError):
    """Operation undefined for this input (e.g. equipartition with m >= 2)."""


class QuadratureError(NormsolError):
    pass


class NoConvergence(QuadratureError):
    """Error estimate stalled above tolerance at the maximum refinement level.

    Carries the best value and its estimated error in ``value``/``error``.
    """

    def __init__(self, msg, value=float("nan"), error=float("inf")):
        super().__init__(msg)
        self.value = value
        self.error = error


class DivergenceSuspected(QuadratureError):
    """Partial sums grow without bound across refinement levels."""


class NoBracket(NormsolError):
    """No sign change found before the overflow bound."""


class BadBracket(NormsolError):
    """bisect_root called without a sign change on the given interval."""


class DegenerateZero(NormsolError):
    """W_lambda has a degenerate first zero: |W'(m_lambda)| below tolerance.

    ``location`` holds the located zero, ``lam`` the multiplier, ``slope``
    the measured derivative.
    """

    def __init__(self, lam, location, slope):
        super().__init__(
            f"degenerate zero of effective potential at lambda={lam:.6g}: "
            f"m_lambda={location:.12g}, W'(m_lambda)={slope:.3g}"
        )
        self.lam = lam
        self.location = location
        self.slope = slope


class AllPointsDegenerate(NormsolError):
    """Every sampled lambda on the branch failed with a degenerate zero."""

    def __init__(self, msg, degenerate_lams=()):
        super().__init__(msg)
        self.degenerate_lams = list(degenerate_lams)


class InversionFailure(NormsolError):
    """The time map x(u) is not strictly monotone (W_lambda <= 0 inside)."""


class SupportOverflow(NormsolError):
    """Fiber rescaling with s < 1 pushed mass into the outer decay band."""


class NoCrossing(NormsolError):
    """The fiber stationarity equation has no solution in the probed range."""


class PreconditionFailed(NormsolError):
    """Structural growth conditions required by a minimizer do not hold."""

    def __init__(self, msg, failed=()):
        super().__init__(msg)
        self.failed = list(failed)
