"""Exception hierarchy shared by all ruinlab modules."""


class RuinlabError(Exception):
    """Base class for every error raised by ruinlab."""


class DomainError(RuinlabError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class AccuracyError(RuinlabError, ArithmeticError):
    """A numerical routine could not reach its requested accuracy."""


class SmallTimeRefusal(AccuracyError):
    """The oscillatory Theta integral was asked for t below the safe threshold.

    Below ``t_min`` the integral cancels to far fewer significant digits than
    double precision carries, so the evaluator refuses instead of returning
    noise.  Use the Monte Carlo oracle in that regime.
    """


class ConfigError(RuinlabError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message
