"""Exception hierarchy shared by all chflow modules."""


class ChflowError(Exception):
    """Base class for all chflow errors."""


class PotentialInvalid(ChflowError):
    """A double-well potential violates one of its structural requirements."""


class ProfileSolveFailed(ChflowError):
    """Kink ODE integration lost monotonicity or failed to converge."""


class NewtonDiverged(ChflowError):
    """Newton iteration for a constrained profile did not converge."""


class WrongBranch(ChflowError):
    """Profile solve converged to a state with the wrong number of zeros."""


class SeparationViolated(ChflowError):
    """Glued-kink parameters violate the slow-manifold separation constraints."""


class InterpolantBoundViolated(ChflowError):
    """Measured interpolation-region norm exceeds the exponential bound."""


class NonFinite(ChflowError):
    """A solver step produced non-finite values."""


class StepFloorReached(ChflowError):
    """Adaptive time stepping hit the minimum step size."""


class EnergyIncreaseAtFloor(ChflowError):
    """Energy increased even at the minimum step size; the scheme failed."""


class NonZeroMean(ChflowError):
    """Homogeneous H^-1 norm requested for a field with non-zero mean."""


class DegenerateProjection(ChflowError):
    """Shift-projection objective is flat over a large fraction of shifts."""


class NoValidZeros(ChflowError):
    """The field does not have the zeros required for a glued projection."""


class PhaseHypothesisUnmet(ChflowError):
    """An inequality check was requested outside its phase hypotheses."""


class EigsNotConverged(ChflowError):
    """Eigenvalue iteration for the linearized operator did not converge."""


class WindowTooShort(ChflowError):
    """The detected fit window spans less than one decade."""


class InsufficientData(ChflowError):
    """Too few points for a rate fit."""


class EnergyBudgetExceeded(ChflowError):
    """Constructed initial data exceeds the configured energy cap."""


class ConstraintCorrectionFailed(ChflowError):
    """Mean/mass correction of initial data could not be satisfied."""


class PhaseNotReached(ChflowError):
    """A phase time was not reached within the simulated horizon."""

    def __init__(self, name: str):
        super().__init__(f"phase {name!r} not reached")
        self.name = name


class ConfigError(ChflowError):
    """Base class for configuration file errors."""


class ConfigSyntax(ConfigError):
    """Malformed line in a configuration file."""


class UnknownKey(ConfigError):
    """Unknown key in a configuration file."""


class ConstraintViolation(ConfigError):
    """Configuration value outside its admissible range."""
