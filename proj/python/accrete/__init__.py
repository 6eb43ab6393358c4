"""Simulation and lognormal statistics for multiplicative edit accretion."""

from ._core import (
    AccreteError,
    ProcessParams,
    compare_fits,
    fit_slice,
    gof_test,
    lognormal_pdf,
    mixture_pdf,
    rollup_file,
    simulate_article,
    simulate_final,
    theoretical_moments,
)

__all__ = [
    "AccreteError",
    "ProcessParams",
    "compare_fits",
    "fit_slice",
    "gof_test",
    "lognormal_pdf",
    "mixture_pdf",
    "rollup_file",
    "simulate_article",
    "simulate_final",
    "theoretical_moments",
]
