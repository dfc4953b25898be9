"""Exception hierarchy shared by the solvers and the command-line runner."""


class RabiSimError(Exception):
    """Base class for all package errors."""


class ParameterError(RabiSimError, ValueError):
    """Invalid physical or numerical parameter."""


class DegenerateSpectrumError(ParameterError):
    """The rotating Hamiltonian has a degenerate spectrum (G = 0 at resonance)."""


class DomainError(RabiSimError, ValueError):
    """Argument outside the validated domain of a special function."""


class InputError(RabiSimError, ValueError):
    """Malformed input to a post-processing routine."""


class StateIntegrityError(RabiSimError):
    """A state failed a normalization or positivity check."""


class IntegrationError(RabiSimError):
    """The adaptive integrator could not advance (step-size underflow or non-finite RHS).

    The step statistics gathered up to the failure are attached as ``stats``.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class WindowOverflowError(RabiSimError):
    """Probability leaked to the edges of the Fock window.

    ``suggested`` holds a wider window (a ``FockWindow``) that should contain
    the dynamics, when one can be proposed.
    """

    def __init__(self, message, leakage=None, suggested=None):
        super().__init__(message)
        self.leakage = leakage
        self.suggested = suggested
