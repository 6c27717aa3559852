"""Exception and warning types shared across the package."""


class StequilError(Exception):
    """Base class for all package errors."""


class DegenerateFrequencyError(StequilError):
    """Both driving fields vanish; the operator basis collapses."""


class NonPositiveFrequencyError(StequilError):
    """A transition frequency that must be positive is not."""


class InvalidStateError(StequilError):
    """A matrix fails the density-matrix invariants (trace/positivity)."""


class OutOfRangeError(StequilError):
    """A time outside the support of a sampled protocol."""


class BetaOverflowError(StequilError):
    """|beta| beyond the numerically meaningful range (state is pure)."""


class StepTooLargeError(StequilError):
    """Step-doubling error estimate exceeded the integration budget."""


class PositivityLossError(StequilError):
    """Integrated density matrix developed a significant negative eigenvalue."""


class NoRootError(StequilError):
    """The effective-frequency equation has no solution; the requested
    boundary-value trajectory is infeasible for this bath and duration."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SingularSystemError(StequilError):
    """Polynomial boundary-value system is singular."""


class NonPositiveAnsatzError(StequilError):
    """The polynomial ansatz for e^beta crosses zero on the grid."""


class DegenerateHamiltonianError(StequilError):
    """Hamiltonian gap too small to define an energy basis."""


class NonThermalStateError(StequilError):
    """State parameter beta >= 0 has no effective temperature."""


class ConfigError(StequilError):
    """Run configuration failed schema validation."""


class StequilWarning(UserWarning):
    """Base class for package warnings."""


class InertialViolationWarning(StequilWarning):
    """d(mu)/dt is not small against 2*kappa^2*rabi somewhere on the grid;
    the closed-form propagator is unreliable for this drive."""


class MultipleRootsWarning(StequilWarning):
    """More than one candidate effective frequency; smallest root taken."""


class SingularLogWarning(StequilWarning):
    """Matrix logarithm regularized by clipping a near-zero eigenvalue."""
