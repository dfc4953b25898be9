"""Semiclassical and quantum Rabi model dynamics with large coherent fields."""
__version__ = "0.1.0"

from .core import (FockWindow, JointState, ModelParams, QubitAmplitudes, TimeSeries, build_window,
                   coherent_amplitudes, initial_joint_state)
from .errors import (DegenerateSpectrumError, DomainError, InputError, IntegrationError, ParameterError,
                     RabiSimError, StateIntegrityError, WindowOverflowError)

__all__ = [
    "FockWindow", "JointState", "ModelParams", "QubitAmplitudes", "TimeSeries", "build_window",
    "coherent_amplitudes", "initial_joint_state", "DegenerateSpectrumError", "DomainError", "InputError",
    "IntegrationError", "ParameterError", "RabiSimError", "StateIntegrityError", "WindowOverflowError",
]
