class SkcvrError(Exception):
    pass


class InvalidParameterError(SkcvrError, ValueError):
    pass


class InvalidStateError(SkcvrError, ValueError):
    pass


class NumericalFailure(SkcvrError, RuntimeError):
    pass


class TruncationWarning(UserWarning):
    """emitted when a truncated Fock representation drops more mass than tolerated"""

    pass


def check_unit_interval(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise InvalidParameterError(f"{name} must be in [0, 1], got {value}")
    return float(value)
