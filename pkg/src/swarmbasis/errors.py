"""Exception hierarchy shared by all swarmbasis modules."""


class SwarmError(Exception):
    """Base class for every error raised by this package."""


class OutOfDomain(SwarmError, ValueError):
    def __init__(self, dim, value, low, high):
        self.dim = dim
        self.value = value
        super().__init__(
            f"input component {dim} = {value!r} lies outside [{low!r}, {high!r}]"
        )


class TargetEvaluation(SwarmError):
    def __init__(self, point, cause):
        self.point = point
        self.cause = cause
        super().__init__(f"target function failed at {point!r}: {cause}")


class ScheduleGap(SwarmError):
    pass


class Infeasible(SwarmError):
    def __init__(self, best_bound, epsilon):
        self.best_bound = best_bound
        self.epsilon = epsilon
        super().__init__(
            f"accuracy {epsilon!r} unreachable: smallest bound at q_max is {best_bound!r}"
        )


class EmptyTrace(SwarmError, ValueError):
    pass


class ConfigError(SwarmError):
    """Raised for malformed or invalid scenario configuration."""


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
