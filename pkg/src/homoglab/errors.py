"""Exception types raised across the package."""


class HomoglabError(Exception):
    """Base class for all package errors."""


class ParameterError(HomoglabError, ValueError):
    """Invalid model, geometry, or experiment parameters."""


class ContractError(HomoglabError, ValueError):
    """A caller broke a documented precondition (non-unit normal, pin violation)."""


class ArityError(HomoglabError, ValueError):
    """Wrong number of phases or samples for the requested operation."""


class SizeError(HomoglabError, ValueError):
    """Instance too large for an exhaustive method."""
