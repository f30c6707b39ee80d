class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its target (CLI exit code 3).

    ``achieved`` carries the best error estimate obtained, when one exists.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
