"""Exact intersection pairings on moduli spaces of bundles over a curve.

The public entry points are :func:`evaluate` (and the target-specific wrappers
:func:`ih_pairing`, :func:`integrate_m1`, :func:`integrate_p0`) taking a
:class:`PairingSpec`.  All arithmetic is exact over the rationals.
"""
from .exact import MPoly, ILSeries, SeriesRing, TruncationError, bernoulli, coeff_extract
from .exact import one_minus_exp_inv, series_exp, series_invert
from .pairings import (
    ENGINE_VERSION,
    PairingResult,
    PairingSpec,
    degree_check,
    evaluate,
    evaluate_with_gamma,
    fundamental_class_check,
    gamma_expand,
    ih_pairing,
    integrate_m1,
    integrate_p0,
    kappa,
    kiem_pairing,
    rank2_residue_form,
)

__version__ = "0.1.0"

__all__ = [
    "MPoly",
    "ILSeries",
    "SeriesRing",
    "TruncationError",
    "bernoulli",
    "coeff_extract",
    "one_minus_exp_inv",
    "series_exp",
    "series_invert",
    "ENGINE_VERSION",
    "PairingResult",
    "PairingSpec",
    "degree_check",
    "evaluate",
    "evaluate_with_gamma",
    "fundamental_class_check",
    "gamma_expand",
    "ih_pairing",
    "integrate_m1",
    "integrate_p0",
    "kappa",
    "kiem_pairing",
    "rank2_residue_form",
]
