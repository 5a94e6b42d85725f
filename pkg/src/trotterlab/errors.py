"""Exception hierarchy shared by all modules."""


class TrotterLabError(Exception):
    """Base class for every error raised by trotterlab."""


class NumericalError(TrotterLabError):
    """Failure inside a numerical routine (CLI exit code 2)."""


class NonFinite(NumericalError, ValueError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class DimensionMismatch(TrotterLabError, ValueError):
    pass


class AsymmetricCoefficients(TrotterLabError, ValueError):
    pass


class InvalidAlpha(TrotterLabError, ValueError):
    pass


class DegenerateWindow(TrotterLabError, ValueError):
    pass


class SearchBracketError(NumericalError):
    def __init__(self, msg, side=None, lam=None):
        super().__init__(msg)
        self.side = side
        self.lam = lam


class SingularPencil(NumericalError):
    pass


class InvalidBound(TrotterLabError, ValueError):
    pass


class InsufficientPoints(TrotterLabError, ValueError):
    pass


class ConfigError(TrotterLabError, ValueError):
    """Invalid experiment configuration; ``problems`` lists (field, message) pairs."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [("config", problems)]
        self.problems = list(problems)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.problems))


class JobError(NumericalError):
    """A numerical failure annotated with the (n, t) job that raised it."""

    def __init__(self, n, t, cause):
        self.n = n
        self.t = t
        self.cause = cause
        super().__init__(f"job (n={n}, t={t}) failed: {type(cause).__name__}: {cause}")


class IoError(TrotterLabError, OSError):
    pass
