"""Interior transmission eigenvalues of the unit disc.

Spectrum computation by per-mode dispersion determinants and the argument
principle, the Weyl law and trace identity checks, and an independent
finite-difference cross-check.
"""
from itespec.counting import (EigRecord, SpectrumSet, compute_spectrum, counting_function,
                              mode_cutoff, weyl_fit)
from itespec.dispersion import RefractionIndex, dispersion_fn, parse_index
from itespec.kernels import BACKEND
from itespec.weyl import TraceQuery, cone_model, trace_rhs, weyl_alpha

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EigRecord",
    "RefractionIndex",
    "SpectrumSet",
    "TraceQuery",
    "compute_spectrum",
    "cone_model",
    "counting_function",
    "dispersion_fn",
    "mode_cutoff",
    "parse_index",
    "trace_rhs",
    "weyl_alpha",
    "weyl_fit",
]
