"""Exception types shared across the package."""


class NonFiniteStateError(FloatingPointError):
    """A tendency or state contains NaN/inf."""


class InvalidThicknessError(ValueError):
    pass


class SolverError(ArithmeticError):
    """Singular tridiagonal system."""


class BlowUpError(NonFiniteStateError):
    """A time step produced a non-finite value.

    Carries the stage name and, when known, the substep and step indices so
    sweeps can record the failure instead of crashing.
    """

    def __init__(self, stage: str, substep: int | None = None, step: int | None = None):
        self.stage = stage
        self.substep = substep
        self.step = step
        super().__init__(str(self))

    def __str__(self):
        msg = f"blow-up in {self.stage}"
        if self.substep is not None:
            msg += f" at substep {self.substep}"
        if self.step is not None:
            msg += f" (step {self.step})"
        return msg


class ConfigError(ValueError):
    """Bad configuration: unknown key, missing file, invalid value."""


class DegenerateMetricError(ValueError):
    """Relative error requested against a reference with zero norm."""
