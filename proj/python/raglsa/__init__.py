"""Closed-form loss, Monte Carlo estimates and sweeps for linear self-attention
with retrieval-augmented prompts."""

from ._core import (
    __version__,
    estimate_loss,
    fourth_moment_vec,
    isotropic_loss,
    isserlis_sixth_oracle,
    optimal_n,
    optimal_pretrained_weight,
    regime_loss,
    sixth_moment,
    sweep_csv,
)

__all__ = [
    "__version__",
    "estimate_loss",
    "fourth_moment_vec",
    "isotropic_loss",
    "isserlis_sixth_oracle",
    "optimal_n",
    "optimal_pretrained_weight",
    "regime_loss",
    "sixth_moment",
    "sweep_csv",
]
