"""Fourier multiplier catalogue: m0, its transport commutator, Bessel, Riesz and |zeta|^alpha.

Vector arguments carry their components on the last axis; leading axes broadcast.
Every symbol that involves ``xi/|xi|`` returns 0 at ``xi = 0``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigurationError, NumericError
from .field import PHYSICAL, X_FOURIER, XV_FOURIER, SpectralField, transform

XI = "xi"
ZETA = "zeta"
BOTH = "both"


def _vec(a):
    a = np.asarray(a, dtype=float)
    return a[..., None] if a.ndim == 0 else a


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=-1))


def _unit(xi):
    xi = _vec(xi)
    r = _norm(xi)
    safe = np.where(r > 0, r, 1.0)
    return np.where((r > 0)[..., None], xi / safe[..., None], 0.0), r


def eval_m0(xi, zeta):
    """``(xi/|xi|) . zeta / (1+|zeta|^2)^{1/2}``; bounded by 1 in absolute value."""
    u, _ = _unit(xi)
    zeta = _vec(zeta)
    return np.sum(u * zeta, axis=-1) / np.sqrt(1.0 + np.sum(zeta * zeta, axis=-1))


def eval_commutator_symbol(xi, zeta):
    """Transport commutator symbol ``xi . grad_zeta m0``.

    Written as ``|xi| (1 + |zeta_perp|^2) / (1+|zeta|^2)^{3/2}`` where ``zeta_perp`` is the
    component orthogonal to ``xi``; in floating point this is never below
    :func:`commutator_lower_bound`, which shares the denominator.
    """
    u, r = _unit(xi)
    zeta = _vec(zeta)
    z2 = np.sum(zeta * zeta, axis=-1)
    par = np.sum(u * zeta, axis=-1)
    perp = zeta - par[..., None] * u
    perp2 = np.sum(perp * perp, axis=-1)
    return r * (1.0 + perp2) / (1.0 + z2) ** 1.5


def commutator_lower_bound(xi, zeta):
    """``|xi| / (1+|zeta|^2)^{3/2}``, the weight of the H^{1/2}_x H^{-3/2}_v norm."""
    r = _norm(_vec(xi))
    zeta = _vec(zeta)
    return r / (1.0 + np.sum(zeta * zeta, axis=-1)) ** 1.5


def bessel_symbol(zeta, beta):
    if beta < 0:
        raise ConfigurationError(f"Bessel order must be non-negative, got {beta}")
    zeta = _vec(zeta)
    return (1.0 + np.sum(zeta * zeta, axis=-1)) ** (-beta / 2.0)


def riesz_symbol(xi):
    """``xi/|xi|`` as a vector (zero at the origin)."""
    u, _ = _unit(xi)
    return u


def frac_laplacian_symbol(zeta, alpha):
    if alpha < 0:
        raise ConfigurationError(f"fractional order must be non-negative, got {alpha}")
    r = _norm(_vec(zeta))
    if alpha == 0:
        return np.ones_like(r)
    return r ** alpha


@dataclass(frozen=True)
class MultiplierSymbol:
    """A named symbol ``(xi, zeta, params) -> complex``.

    ``arity`` says which frequency variables the evaluator actually reads, which decides
    the representation :func:`apply_symbol` works in.
    """

    name: str
    arity: str
    evaluator: Callable

    def __call__(self, xi, zeta, params=()):
        return self.evaluator(xi, zeta, tuple(params))

    def on_grid(self, grid, params=()):
        """Symbol sampled on the grid lattice (x-frequencies only when ``arity == 'xi'``)."""
        if self.arity == XI:
            xi = grid.xi_vectors(full=False)
            vals = self(xi, np.zeros(xi.shape[:-1] + (grid.n_v,)), params)
            vals = np.asarray(vals).reshape(vals.shape + (1,) * grid.n_v)
        else:
            vals = self(grid.xi_vectors(), grid.zeta_vectors(), params)
        return np.asarray(vals)

    def check_bounded(self, grid, params=()):
        vals = self.on_grid(grid, params)
        mask = grid.xi_nyquist_mask().reshape(grid.xi_nyquist_mask().shape + (1,) * grid.n_v) \
            if self.arity == XI else grid.nyquist_mask()
        vals = np.where(np.broadcast_to(mask, vals.shape), 0, vals)
        bad = ~np.isfinite(vals)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise NumericError(f"symbol {self.name!r} is not finite at mode index {idx}")
        return float(np.max(np.abs(vals))) if vals.size else 0.0


def _riesz_component(xi, zeta, params):
    j = int(params[0]) if params else 0
    return riesz_symbol(xi)[..., j]


CATALOG = {
    "identity": MultiplierSymbol("identity", XI, lambda xi, z, p: np.ones(np.shape(xi)[:-1])),
    "m0": MultiplierSymbol("m0", BOTH, lambda xi, z, p: eval_m0(xi, z)),
    "commutator": MultiplierSymbol("commutator", BOTH, lambda xi, z, p: eval_commutator_symbol(xi, z)),
    "commutator_lower_bound": MultiplierSymbol(
        "commutator_lower_bound", BOTH, lambda xi, z, p: commutator_lower_bound(xi, z)),
    "bessel": MultiplierSymbol("bessel", ZETA, lambda xi, z, p: bessel_symbol(z, p[0] if p else 1.0)),
    "riesz": MultiplierSymbol("riesz", XI, _riesz_component),
    "frac_laplacian": MultiplierSymbol(
        "frac_laplacian", ZETA, lambda xi, z, p: frac_laplacian_symbol(z, p[0] if p else 0.0)),
}


def get_symbol(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigurationError(f"unknown symbol {name!r}; known: {sorted(CATALOG)}") from None


def apply_symbol(field, symbol, params=()):
    """Pointwise multiplication in frequency space; Nyquist modes are zeroed.

    The result comes back in the representation ``field`` arrived in.
    """
    if isinstance(symbol, str):
        symbol = get_symbol(symbol)
    grid = field.grid
    work_rep = X_FOURIER if symbol.arity == XI else XV_FOURIER
    work = transform(field, work_rep)
    vals = symbol.on_grid(grid, params)
    if symbol.arity == XI:
        nyq = grid.xi_nyquist_mask().reshape((grid.N_x,) * grid.n_x + (1,) * grid.n_v)
    else:
        nyq = grid.nyquist_mask()
    vals = np.where(np.broadcast_to(nyq, vals.shape), 0, vals)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NumericError(f"symbol {symbol.name!r} is not finite at mode index {idx}")
    out = SpectralField(grid, work.data * vals, work_rep, field.t)
    return transform(out, field.rep)


__all__ = [
    "MultiplierSymbol", "CATALOG", "get_symbol", "apply_symbol", "eval_m0",
    "eval_commutator_symbol", "commutator_lower_bound", "bessel_symbol", "riesz_symbol",
    "frac_laplacian_symbol", "XI", "ZETA", "BOTH", "PHYSICAL", "SpectralField",
]
