"""Smooth Littlewood-Paley partition of the spatial-frequency lattice."""

from dataclasses import dataclass

import numpy as np

from .._constants import load as _load_constants
from ..errors import ConfigurationError


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    s = 1.0 - t
    b = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return a / (a + b)


def plateau(r, constants=None):
    """Radial cutoff equal to 1 on ``r <= inner`` and 0 on ``r >= outer``."""
    c = (constants or _load_constants())["bump"]
    inner, outer = c["plateau_radius"], c["cutoff_radius"]
    return _smooth_step((outer - np.asarray(r, dtype=float)) / (outer - inner))


def bump(r, constants=None):
    """``chi(r) = plateau(r) - plateau(2r)``, supported in ``1/2 < r < 2``."""
    r = np.asarray(r, dtype=float)
    return plateau(r, constants) - plateau(2 * r, constants)


@dataclass(frozen=True)
class DyadicPartition:
    """Band weights over the ``(N_x,)*n_x`` frequency grid (FFT order).

    Bands ``k_min..k_max``; the top band absorbs the tail ``sum_{j >= k_max} chi(2^-j xi)``
    so the weights add to exactly one on every grid mode with ``|xi| >= 1``.
    Modes with ``|xi| < 1`` carry zero weight and are tracked by ``low_mask``.
    """

    ks: tuple
    weights: tuple
    low_mask: np.ndarray
    abs_xi: np.ndarray

    @property
    def k_min(self):
        return self.ks[0]

    @property
    def k_max(self):
        return self.ks[-1]

    @property
    def bands(self):
        return list(zip(self.ks, self.weights))

    def weight(self, k):
        return self.weights[self.ks.index(k)]

    def band_energies(self, spectrum_sq, cell=1.0):
        """``E_k = sum w_k |hat rho|^2 * cell`` for an array whose leading axes match the xi grid."""
        spectrum_sq = np.asarray(spectrum_sq)
        nd = self.abs_xi.ndim
        extra = spectrum_sq.ndim - nd
        out = []
        for w in self.weights:
            ww = w.reshape(w.shape + (1,) * extra) if extra > 0 else w
            out.append(np.sum(ww * spectrum_sq, axis=tuple(range(nd))) * cell)
        return np.array(out)

    def low_energy(self, spectrum_sq, cell=1.0):
        spectrum_sq = np.asarray(spectrum_sq)
        nd = self.abs_xi.ndim
        extra = spectrum_sq.ndim - nd
        m = self.low_mask.reshape(self.low_mask.shape + (1,) * extra) if extra > 0 else self.low_mask
        return np.sum(np.where(m, spectrum_sq, 0), axis=tuple(range(nd))) * cell


def build_dyadic_partition(grid, constants=None):
    """Partition the non-Nyquist spatial frequencies of ``grid`` into dyadic bands."""
    abs_xi = grid.abs_xi(full=False)
    nyq = grid.xi_nyquist_mask()
    usable = ~nyq
    rmax = float(abs_xi[usable].max())
    if rmax < 8.0:
        raise ConfigurationError(
            f"grid frequencies reach only |xi|={rmax:.3g}; need at least 3 octaves (|xi| >= 8)")
    k_max = int(np.floor(np.log2(rmax)))
    high = usable & (abs_xi >= 1.0)
    weights = []
    for k in range(k_max):
        w = bump(abs_xi / 2.0 ** k, constants)
        weights.append(np.where(high, w, 0.0))
    # telescoped tail; for |xi| >= 1 the lower bands sum to plateau(2^{1-k_max}|xi|)
    tail = 1.0 - plateau(abs_xi / 2.0 ** (k_max - 1), constants)
    weights.append(np.where(high, tail, 0.0))
    for w in weights:
        w.setflags(write=False)
    low = usable & (abs_xi < 1.0)
    return DyadicPartition(tuple(range(k_max + 1)), tuple(weights), low, abs_xi)
