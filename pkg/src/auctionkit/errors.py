"""Exception hierarchy shared across the toolkit."""


class AuctionKitError(Exception):
    """Base class for all domain errors raised by this package."""


class SpecValidationError(AuctionKitError):
    """An auction specification violates one of its invariants."""


class InvalidBidError(AuctionKitError):
    """A bid is not on the auction's bid grid."""


class InvalidValueError(AuctionKitError):
    """A valuation lies outside the value set {0, ..., x}."""


class InvalidJumpError(AuctionKitError):
    """A jump vector is not increasing or lies outside its admissible range."""


class NonRepresentableStrategyError(AuctionKitError):
    """A behavioural strategy has no jump-vector representation
    (support at value 0 not {0}, non-monotone supports, or gapped supports)."""


class UnsupportedUtilityError(AuctionKitError):
    """Requested a curved-utility computation where only risk neutrality is supported."""


class PayoffDomainError(AuctionKitError):
    """Payoff undefined, e.g. a curved utility applied to a negative amount."""


class CharacterizationBoundError(AuctionKitError):
    """A closed-form bidding characterization was requested outside its validity range."""


class ParameterError(AuctionKitError):
    """A numeric parameter is outside its admissible range."""


class EnumerationSizeError(AuctionKitError):
    """A brute-force enumeration would exceed the configured size cap."""


class NumericalFailureError(AuctionKitError):
    """A numerical routine failed to locate a required root or optimum."""


class ConvergenceError(AuctionKitError):
    """An iterative fit failed to converge; carries the best result found so far."""

    def __init__(self, message, best_so_far=None):
        super().__init__(message)
        self.best_so_far = best_so_far


class DataError(AuctionKitError):
    """Malformed input data; carries the offending line/field when known."""

    def __init__(self, message, line=None, field=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field
