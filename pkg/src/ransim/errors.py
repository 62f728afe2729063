"""Exception hierarchy shared by all simulator modules."""


class SimError(Exception):
    """Base class for all simulator errors."""


class ParseError(SimError):
    """Configuration or scenario document is not well-formed."""


class ValidationError(SimError):
    """A document parsed but violates a schema rule (dangling reference,
    duplicate id, non-positive capacity, ...). The message names the
    offending entity id."""


class CapacityError(SimError):
    """An attachment would exceed a sector's ue_capacity."""


class NetworkFullError(SimError):
    """No sector in the network has free capacity for a placement."""


class UnknownEntityError(SimError):
    """A gNB / cell / sector / UE id does not exist."""


class EmptySectorError(SimError):
    """An operation needed at least one attached UE but the sector is empty."""
