"""Exception hierarchy shared by every module."""


class BigtaxError(Exception):
    """Base class for all errors raised by this package."""


class EmptyData(BigtaxError):
    pass


class SchemaError(BigtaxError):
    """Column kinds, names or shapes do not line up."""


class MissingValues(BigtaxError):
    pass


class ConstantColumn(BigtaxError):
    pass


class SingularCovariance(BigtaxError):
    pass


class DegenerateSplit(BigtaxError):
    """A resampling step produced an unusable partition (e.g. a fold lost a class)."""


class InvalidParameter(BigtaxError, ValueError):
    pass


class FitError(BigtaxError):
    """A learner could not be fitted. ``index`` identifies the ensemble member or fold."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
