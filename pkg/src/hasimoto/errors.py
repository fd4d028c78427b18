"""Structured exceptions raised across the package."""


class HasimotoError(Exception):
    """Base class for all package errors."""


class DimensionError(HasimotoError, ValueError):
    pass


class IntegrabilityError(HasimotoError, ValueError):
    """A field handed to the periodic antiderivative has nonzero mean."""

    def __init__(self, component, mean, tol):
        self.component = component
        self.mean = mean
        self.tol = tol
        super().__init__(
            f"field is not integrable on the circle: component {component} "
            f"has mean {mean:.3e} (tolerance {tol:.1e})"
        )


class BlowUpError(HasimotoError, RuntimeError):
    def __init__(self, last_time, message="non-finite values in state"):
        self.last_time = last_time
        super().__init__(f"{message}; last finite time t={last_time:.17g}")


class SingularityError(HasimotoError, ValueError):
    """Coordinates entered the excluded set of the (theta, Theta) chart."""

    def __init__(self, location, theta, margin):
        self.location = location
        self.theta = theta
        self.margin = margin
        super().__init__(
            f"coordinate singularity at x={location:.6g}: theta={theta:.6g} "
            f"is within {margin} of {{0, pi/2, pi}}"
        )


class FrameError(HasimotoError, ValueError):
    def __init__(self, message, deviation):
        self.deviation = deviation
        super().__init__(f"{message} (max deviation {deviation:.3e})")


class ConfigError(HasimotoError, ValueError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class SnapshotError(ConfigError):
    """A snapshot file or its sidecar could not be parsed."""
