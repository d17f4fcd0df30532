"""Modeling, simulation and identification of a limited-rotation actuator
with magnetic restoration: torque and back-emf closed forms, eddy-current
electrical dynamics, nonlinear and linearized electromechanical models with
pre-sliding friction, and frequency-response identification.
"""

__version__ = "0.1.0"

from .config import Config, load_config, parse_config, table1_config  # noqa: E402
from ._core import BACKEND  # noqa: E402

__all__ = ["Config", "load_config", "parse_config", "table1_config", "BACKEND", "__version__"]
