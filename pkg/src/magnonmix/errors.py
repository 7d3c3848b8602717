"""Exception types shared across the toolkit."""


class ContractViolationError(ValueError):
    """An operation was called with inputs that break its contract."""


class ConfigurationError(ValueError):
    """A configuration value is outside the supported set."""


class DivergenceError(RuntimeError):
    """The integrator produced a non-finite magnetization value."""

    def __init__(self, cell: tuple[int, int], t: float):
        self.cell = cell
        self.t = t
        super().__init__(
            f"non-finite magnetization at cell {cell} at t = {t:.6e} s"
        )


class ConvergenceError(RuntimeError):
    """Relaxation hit its iteration cap before reaching the torque tolerance."""

    def __init__(self, steps: int, torque: float, tol: float):
        self.steps = steps
        self.torque = torque
        self.tol = tol
        super().__init__(
            f"relaxation did not converge after {steps} steps: "
            f"max torque {torque:.3e} T, tolerance {tol:.3e} T"
        )


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate.

    ``problems`` lists every violation found, each prefixed with the
    offending field path.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid scenario:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )
