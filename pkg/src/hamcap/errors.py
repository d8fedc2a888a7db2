"""Exception types shared across the package."""


class HamcapError(Exception):
    """Base class for all library errors."""


class AmbiguousLiftError(HamcapError):
    """A modular coordinate jumps by half a period or more between samples."""


class WrongClassError(HamcapError):
    """A loop's winding numbers do not match the declared homotopy class."""


class InfeasibleSpecError(HamcapError):
    """A profile request cannot be realized (conflicting levels or widths)."""


class SingularPointError(HamcapError):
    """Vector field requested at the bump-chart center with nonzero radial slope."""


class NotRadialError(HamcapError):
    """Analytic orbit enumeration requested for a non-radial Hamiltonian."""


class NotMorseBottError(HamcapError):
    """Perturbation orbit count requested for a degenerate orbit family."""


class InvalidIntervalError(HamcapError):
    """Action window violates the contractible-class restriction (must avoid 0)."""


class InvalidHypothesisError(HamcapError):
    """Level parameter fails the admissibility hypothesis c > max(u*ell, 0)."""


class NewtonDivergenceError(HamcapError):
    """An implicit integration step failed to converge."""


class InadmissibleHamiltonianError(HamcapError):
    """Existence verification requires inf over the marked set >= max(R|l|+ul, 0)."""


class VerificationFailureError(HamcapError):
    """A verifier exhausted its complete search without finding a required witness."""
