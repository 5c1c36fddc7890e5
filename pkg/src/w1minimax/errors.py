"""Exception hierarchy shared by all modules."""


class W1Error(Exception):
    """Base class for all library errors."""

    code = "error"


class InvalidIndexError(W1Error, ValueError):
    code = "invalid-index"


class EmptyInputError(W1Error, ValueError):
    code = "empty-input"


class ResolutionError(W1Error, ValueError):
    code = "resolution"


class InvalidDensityError(W1Error, ValueError):
    code = "invalid-density"


class ShapeError(W1Error, ValueError):
    code = "shape"


class DimensionError(W1Error, ValueError):
    code = "dimension"


class SizeError(W1Error, ValueError):
    code = "size"


class ConstructionError(W1Error, RuntimeError):
    code = "construction"


class LPStatusError(W1Error, RuntimeError):
    code = "lp-status"


class FitError(W1Error, ValueError):
    code = "fit"


class ConfigError(W1Error, ValueError):
    code = "config"
