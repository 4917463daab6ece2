"""Exception hierarchy shared across the toolkit."""


class AnglerecError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(AnglerecError):
    """Invalid argument value (bad n, probability, index out of range, ...)."""


class ResourceError(AnglerecError):
    """Operation would exceed a hard resource cap (e.g. brute force n > 24)."""


class ContractError(AnglerecError):
    """A documented usage contract was violated (wrong kind, wrong rule, ...)."""


class FeatureError(AnglerecError):
    """Instance cannot be encoded (e.g. edgeless graph has no spectrum)."""


class DomainError(AnglerecError):
    """Metric input outside its mathematical domain."""


class SchemaError(AnglerecError):
    """Persisted file has a missing or mismatching schema version."""
