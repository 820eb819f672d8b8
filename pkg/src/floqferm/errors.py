"""Exception types shared across the package."""


class FloqfermError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(FloqfermError):
    """Invalid model parameters or run configuration."""


class NumericalError(FloqfermError):
    """A numerical routine could not produce a trustworthy result."""


class OverlappingBonds(ConfigError):
    """A coefficient matrix mixes bonds that share a Majorana index."""


class PairingFailed(NumericalError):
    """No particle-hole partner found within tolerance for an eigenvalue."""

    def __init__(self, value, residual):
        self.value = value
        self.residual = residual
        super().__init__(
            f"no +/- partner for eigenvalue {value!r}; best residual {residual:.3e}"
        )


class IllConditioned(NumericalError):
    """Eigenvector matrix condition number exceeds the trust threshold."""


class DegeneracyRepairFailed(NumericalError):
    """Degenerate eigenspaces could not be brought to biorthonormal form."""


class NonAntisymmetricInput(ConfigError):
    """Matrix expected to be antisymmetric is not, beyond tolerance."""


class AmbiguousClassification(NumericalError):
    """Numerical gap sits inside the tolerance band around the threshold."""


class SingularParameters(ConfigError):
    """Transfer-matrix parameters hit a vanishing denominator."""


class NotLocalized(NumericalError):
    """Requested boundary mode does not decay into the bulk."""


class NoCandidateMode(NumericalError):
    """No eigenvalue close enough to the requested kernel target."""


class RankCollapse(NumericalError):
    """Annihilator columns became linearly dependent during evolution."""


class DegenerateImaginaryPart(NumericalError):
    """A mode with (numerically) real spectrum needs an explicit occupation."""


class StepSizeUnderflow(NumericalError):
    """The adaptive integrator failed to advance."""


class OddDimension(ConfigError):
    """Pfaffian requested for an odd-dimensional matrix."""


class SizeExceeded(ConfigError):
    """Dense reference engine asked to handle a chain beyond its limit."""
