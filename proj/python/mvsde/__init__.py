"""Tamed Milstein and tamed Euler particle schemes for McKean-Vlasov SDEs."""

from ._core import (
    __version__,
    convergence_ladder,
    lderiv_decay,
    phi,
    poc_split,
    simulate_terminal,
    tame_drift,
    validate_mean_field_ou,
    wasserstein2_1d,
)

__all__ = [
    "__version__",
    "convergence_ladder",
    "lderiv_decay",
    "phi",
    "poc_split",
    "simulate_terminal",
    "tame_drift",
    "validate_mean_field_ou",
    "wasserstein2_1d",
]
