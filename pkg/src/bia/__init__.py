"""Blind interference alignment with staggered antenna switching.

Build the slot-by-slot transmission scheme for K users, check its linear
algebra over random channels, and compare simulated rates with the
closed-form degrees of freedom.
"""

__version__ = "0.1.0"

from .construct import Construction, Mode, SchemeParams, construct, derive_params
from .dof import dof_formula, optimal_r
from .channel import Representation, draw_channel, received_basis
from .verify import verify_channel, verify_construction
from .simulate import SimulationConfig, simulate_rates

__all__ = [
    "Construction", "Mode", "SchemeParams", "construct", "derive_params",
    "dof_formula", "optimal_r", "Representation", "draw_channel",
    "received_basis", "verify_channel", "verify_construction",
    "SimulationConfig", "simulate_rates", "__version__",
]
