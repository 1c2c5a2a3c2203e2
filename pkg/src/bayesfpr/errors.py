"""Exception hierarchy shared by every module."""


class BayesFprError(Exception):
    """Base class for all errors raised by bayesfpr."""


class DomainError(BayesFprError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidModelError(BayesFprError, ValueError):
    """A generative model has a degenerate class prior or malformed parameters."""


class UnsupportedFeatureError(BayesFprError, TypeError):
    """The operation does not support the dataset's feature kind."""


class InsufficientDataError(BayesFprError, ValueError):
    """Too few samples for the requested operation."""


class DegenerateSampleError(BayesFprError, ValueError):
    """A sample has zero spread where a nonzero one is required."""


class ConfigError(BayesFprError, ValueError):
    """An experiment, model, or noise specification is invalid."""
