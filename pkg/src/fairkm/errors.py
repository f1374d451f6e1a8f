"""Exception hierarchy; each class maps to a CLI exit code."""


class FairKMError(Exception):
    exit_code = 3


class ConfigError(FairKMError, ValueError):
    """Bad parameters or missing columns."""

    exit_code = 1


class DataError(FairKMError, ValueError):
    """Input data is malformed or degenerate."""

    exit_code = 2


class DegenerateClusteringError(FairKMError, ValueError):
    """An objective was requested on a clustering with an empty cluster."""

    exit_code = 3


class DivergenceError(FairKMError, ArithmeticError):
    exit_code = 3
