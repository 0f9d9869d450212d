"""Monte Carlo simulation of the multi-species zero-range process.

The hot trajectory loop lives in a compiled Cython kernel with a pure-Python
fallback selected at import time (see _select); both consume identical
counter-based random streams, so results do not depend on which is active.
"""

from ._select import HAVE_COMPILED, compiled_kernel_or_none, python_kernel
from .core import (
    DualPair,
    McEstimate,
    MultiSpeciesConfig,
    colorblind_projection,
    displacement_samples,
    duality_observable,
    gillespie_run,
    height_h,
    initial_config,
    jump_rates,
    mc_estimate,
    n_minus,
    n_plus,
    occupancy_moment_sums,
)

__all__ = [
    "HAVE_COMPILED",
    "compiled_kernel_or_none",
    "python_kernel",
    "DualPair",
    "McEstimate",
    "MultiSpeciesConfig",
    "colorblind_projection",
    "displacement_samples",
    "duality_observable",
    "gillespie_run",
    "height_h",
    "initial_config",
    "jump_rates",
    "mc_estimate",
    "n_minus",
    "n_plus",
    "occupancy_moment_sums",
]
