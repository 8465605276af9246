class PreconditionError(ValueError):
    """An input violates an operation's documented precondition."""


class UnsupportedDegreeError(ValueError):
    """A degree above the configured maximum ``gm.L_MAX`` was requested."""


class SelectionRuleError(ValueError):
    """A coupling path violates the triangle rule."""


class DegenerateDirectionError(ValueError):
    """A direction vector is too short to define an alignment."""


class ShapeMismatchError(ValueError):
    pass


class UnsupportedPathError(KeyError):
    """No translation path is registered for the requested degrees."""


class ConventionError(RuntimeError):
    """Internal consistency check failed; a basis or normalization convention is wrong."""


class CorrectnessGateError(RuntimeError):
    """Benchmark variants disagree with the reference before timing."""
