"""Error types shared across the package."""


class ConfigError(Exception):
    """Invalid run configuration or input file (CLI exit code 2)."""


class NumericsError(RuntimeError):
    """Numerical failure: non-convergence, factorization failure, MC blow-up.

    May carry a ``best`` attribute with the best iterate found so far.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
