class W2SError(Exception):
    """
    Base class for every error raised by rfw2s.

    Catching this exception is enough to separate failures of the toolkit from
    generic Python errors raised by the caller's own code.
    """

    pass


class InvalidParameter(W2SError):
    """
    Raised when an input violates its documented domain.

    Covers non-positive counts, exponents outside their admissible range, unstable
    scalings passed to routines that require stability, and configuration files that
    fail pydantic validation (the ValidationError text is carried as the message).
    """

    pass


class DimensionMismatch(W2SError):
    """
    Raised when diagonal operators, coefficient vectors or design matrices do not
    share the truncation dimension of the spectrum they are combined with.
    """

    pass


class TruncationOverflow(W2SError):
    """
    Raised when the truncation dimension required by a tail tolerance exceeds the
    configured cap.
    """

    pass


class ReportIOError(W2SError):
    """
    Raised when a report sink cannot write its destination.
    """

    pass


class HookError(W2SError):
    """
    Represents a failure inside a replicate hook.

    The Monte-Carlo loop stops at the first failing hook; the original exception is
    available as ``__cause__``.
    """

    pass


class NumericalError(W2SError):
    """
    Base class for failures of the numerical routines: root finding, functionals
    with vanishing denominators, and factorizations.
    """

    pass


class ConvergenceError(NumericalError):
    """
    Raised when a root bracket cannot be established or refined within the
    iteration cap. Usually signals a degenerate input such as a regularization below
    floating-point resolution.
    """

    pass


class DegenerateDenominator(NumericalError):
    """
    Raised when p <= Tr(Σ²(Σ+μ₂)⁻²), which makes Υ and χ undefined. This only happens
    for fixed points that were not produced by the solver for the same (n, p, λ).
    """

    pass


class RegimeError(NumericalError):
    """
    Raised when Υ >= 1 at a fixed point, where 1/(1 - Υ) in the bias and variance
    formulas is not defined.
    """

    pass


class PSDViolation(NumericalError):
    """
    Raised when an assembled diagonal operator has an entry below -PSD_TOLERANCE.
    """

    pass


class FactorizationError(NumericalError):
    """
    Raised when the Cholesky factorization of a ridge Gram system fails.
    """

    pass
