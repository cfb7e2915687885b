"""Grids, unitary transforms, dyadic partitions and the multiplier catalogue."""

from .dyadic import DyadicPartition, build_dyadic_partition, bump, plateau
from .field import (PHYSICAL, REPRESENTATIONS, X_FOURIER, XV_FOURIER, SpectralField,
                    from_function, random_bandlimited, transform)
from .grid import GridSpec
from .io import load_field, save_field
from .symbols import (CATALOG, MultiplierSymbol, apply_symbol, bessel_symbol,
                      commutator_lower_bound, eval_commutator_symbol, eval_m0,
                      frac_laplacian_symbol, get_symbol, riesz_symbol)

__all__ = [
    "GridSpec", "SpectralField", "transform", "from_function", "random_bandlimited",
    "PHYSICAL", "X_FOURIER", "XV_FOURIER", "REPRESENTATIONS",
    "MultiplierSymbol", "CATALOG", "get_symbol", "apply_symbol", "eval_m0",
    "eval_commutator_symbol", "commutator_lower_bound", "bessel_symbol", "riesz_symbol",
    "frac_laplacian_symbol", "DyadicPartition", "build_dyadic_partition", "bump", "plateau",
    "save_field", "load_field",
]
