"""Exception hierarchy shared by every chainpay module."""


class ChainPayError(Exception):
    """Base class for all library errors."""


class ParameterOutOfRange(ChainPayError, ValueError):
    pass


class NegativeReward(ChainPayError, ValueError):
    pass


class PositionOutOfDomain(ChainPayError, IndexError):
    """A (k, t) query the mechanism cannot answer."""


class DomainTooSmall(PositionOutOfDomain):
    """A tabular mechanism is too short for the requested scan or attack."""


class MalformedRow(ChainPayError, ValueError):
    pass


class DuplicateEntry(ChainPayError, ValueError):
    pass


class IncompleteChain(ChainPayError, ValueError):
    pass


class InfeasibleClass(ChainPayError, ValueError):
    """The requested property class admits no mechanism."""


class NotApplicable(ChainPayError):
    """Closed-form certification does not exist for this mechanism."""
