"""Exception types shared across the solver modules."""


class BrokerMfgError(Exception):
    """Base class for all package errors."""


class NonPositiveParameter(BrokerMfgError):
    """A parameter that must be strictly positive is zero or negative."""


class MomentInconsistency(BrokerMfgError):
    """A second moment is below the square of the corresponding mean."""


class BAboveBound(BrokerMfgError):
    """Permanent impact exceeds the admissibility bound for the mean-field solve."""


class ConfigParse(BrokerMfgError):
    """A configuration file or override could not be parsed."""


class RiccatiBlowup(BrokerMfgError):
    """Backward integration of a Riccati equation left the stable range."""


class NTooSmall(BrokerMfgError):
    """Trader count below the threshold required by the finite-game formulas."""


class SeriesDiverging(BrokerMfgError):
    """Neumann-series increments stopped contracting."""


class TruncationLimit(BrokerMfgError):
    """Series failed to converge within the term cap."""


class LengthMismatch(BrokerMfgError):
    """An input sequence does not match the declared count."""


class MissingSigma(BrokerMfgError):
    """Price simulation requested without a volatility parameter."""
