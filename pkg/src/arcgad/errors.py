"""Exception types. The CLI maps ValidationError to exit 1 and DataIOError to exit 2."""


class ArcError(Exception):
    pass


class ValidationError(ArcError, ValueError):
    pass


class DimensionError(ValidationError):
    pass


class NonFiniteError(ArcError, ArithmeticError):
    pass


class DataIOError(ArcError, OSError):
    pass
