"""Exception hierarchy shared by every module of the package."""


class RWREError(Exception):
    """Base class for all errors raised by rwre_duality."""


class ConfigurationError(RWREError, ValueError):
    """Invalid model, parameter or run configuration.

    ``key`` names the offending configuration entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class InsufficientWindowError(RWREError, IndexError):
    """An operation needs sites that the environment window does not hold."""

    def __init__(self, needed, available):
        self.needed = tuple(needed)
        self.available = tuple(available)
        lo, hi = self.needed
        alo, ahi = self.available
        missing = []
        if lo < alo:
            missing.append(f"[{lo}, {min(hi, alo - 1)}]")
        if hi > ahi:
            missing.append(f"[{max(lo, ahi + 1)}, {hi}]")
        super().__init__(
            f"insufficient window: need sites [{lo}, {hi}], have [{alo}, {ahi}]; "
            f"missing {' and '.join(missing)}"
        )


class NumericalDegeneracyError(RWREError, ArithmeticError):
    """A denominator fell below the degeneracy guard."""


class DegenerateConditioningError(NumericalDegeneracyError):
    """Conditioning on an event whose probability is numerically zero."""


class ConvergenceError(RWREError, RuntimeError):
    """A truncated limit did not converge before the window ran out."""

    def __init__(self, message, last_increment):
        super().__init__(f"{message} (last increment {last_increment:.3e})")
        self.last_increment = last_increment
