"""Periodic phase-space grids and their frequency lattices."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .._constants import load as _load_constants
from ..errors import ConfigurationError


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L_x, L_x)^n_x x [-L_v, L_v)^n_v``.

    Arrays living on this grid have shape ``(N_x,)*n_x + (N_v,)*n_v`` with the
    spatial axes first. Frequencies are ``k*pi/L`` in FFT ordering.
    """

    n_x: int = 1
    n_v: int = 1
    N_x: int = 32
    N_v: int = 32
    L_x: float = np.pi
    L_v: float = 8.0
    dt: float = 0.01
    T: float = 1.0

    def __post_init__(self):
        if self.n_x not in (1, 2) or self.n_v not in (1, 2):
            raise ConfigurationError(f"dimensions must be 1 or 2, got n_x={self.n_x}, n_v={self.n_v}")
        for name in ("N_x", "N_v"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or not _is_pow2(int(n)):
                raise ConfigurationError(f"{name}={n} must be a power of two >= 4")
        for name in ("L_x", "L_v", "dt", "T"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")

    # -- sizes -------------------------------------------------------------
    @property
    def ndim(self):
        return self.n_x + self.n_v

    @property
    def shape(self):
        return (self.N_x,) * self.n_x + (self.N_v,) * self.n_v

    @property
    def x_axes(self):
        return tuple(range(self.n_x))

    @property
    def v_axes(self):
        return tuple(range(self.n_x, self.ndim))

    @property
    def h_x(self):
        return 2 * self.L_x / self.N_x

    @property
    def h_v(self):
        return 2 * self.L_v / self.N_v

    @property
    def dxi(self):
        return np.pi / self.L_x

    @property
    def dzeta(self):
        return np.pi / self.L_v

    @property
    def cell_x(self):
        return self.h_x ** self.n_x

    @property
    def cell_v(self):
        return self.h_v ** self.n_v

    @property
    def cell_volume(self):
        return self.cell_x * self.cell_v

    @property
    def freq_cell_x(self):
        return self.dxi ** self.n_x

    @property
    def freq_cell_volume(self):
        return self.dxi ** self.n_x * self.dzeta ** self.n_v

    # -- 1D axes -----------------------------------------------------------
    @cached_property
    def x_axis(self):
        return -self.L_x + self.h_x * np.arange(self.N_x)

    @cached_property
    def v_axis(self):
        return -self.L_v + self.h_v * np.arange(self.N_v)

    @cached_property
    def xi_axis(self):
        return 2 * np.pi * np.fft.fftfreq(self.N_x, d=self.h_x)

    @cached_property
    def zeta_axis(self):
        return 2 * np.pi * np.fft.fftfreq(self.N_v, d=self.h_v)

    # -- broadcast meshes ---------------------------------------------------
    def _component(self, axis_values, axis, ndim):
        shape = [1] * ndim
        shape[axis] = axis_values.size
        return axis_values.reshape(shape)

    def x_components(self, full=True):
        """Spatial coordinates as a list of ``n_x`` broadcastable arrays."""
        nd = self.ndim if full else self.n_x
        return [self._component(self.x_axis, i, nd) for i in range(self.n_x)]

    def v_components(self, full=True):
        nd = self.ndim if full else self.n_v
        off = self.n_x if full else 0
        return [self._component(self.v_axis, off + j, nd) for j in range(self.n_v)]

    def xi_components(self, full=True):
        nd = self.ndim if full else self.n_x
        return [self._component(self.xi_axis, i, nd) for i in range(self.n_x)]

    def zeta_components(self, full=True):
        nd = self.ndim if full else self.n_v
        off = self.n_x if full else 0
        return [self._component(self.zeta_axis, off + j, nd) for j in range(self.n_v)]

    def xi_vectors(self, full=True):
        """Frequency vectors ``xi`` with a trailing component axis."""
        comps = np.broadcast_arrays(*self.xi_components(full))
        if full:
            comps = [np.broadcast_to(c, self.shape) for c in comps]
        return np.stack(comps, axis=-1)

    def zeta_vectors(self, full=True):
        comps = np.broadcast_arrays(*self.zeta_components(full))
        if full:
            comps = [np.broadcast_to(c, self.shape) for c in comps]
        return np.stack(comps, axis=-1)

    def v_vectors(self, full=False):
        comps = np.broadcast_arrays(*self.v_components(full))
        if full:
            comps = [np.broadcast_to(c, self.shape) for c in comps]
        return np.stack(comps, axis=-1)

    def abs_xi(self, full=True):
        return np.sqrt(sum(c ** 2 for c in self.xi_components(full)))

    def abs_zeta(self, full=True):
        return np.sqrt(sum(c ** 2 for c in self.zeta_components(full)))

    def abs_v(self, full=False):
        return np.sqrt(sum(c ** 2 for c in self.v_components(full)))

    def nyquist_mask(self, axes=None):
        """Boolean mask of modes sitting on a Nyquist index along ``axes``."""
        axes = tuple(range(self.ndim)) if axes is None else tuple(axes)
        mask = np.zeros(self.shape, dtype=bool)
        for ax in axes:
            n = self.shape[ax]
            idx = [slice(None)] * self.ndim
            idx[ax] = n // 2
            mask[tuple(idx)] = True
        return mask

    def xi_nyquist_mask(self):
        """Nyquist mask over the spatial-frequency grid only."""
        mask = np.zeros((self.N_x,) * self.n_x, dtype=bool)
        for ax in range(self.n_x):
            idx = [slice(None)] * self.n_x
            idx[ax] = self.N_x // 2
            mask[tuple(idx)] = True
        return mask

    # -- support ------------------------------------------------------------
    def v_support_mask(self, fraction=None):
        """True on velocity points with ``|v| <= fraction * L_v``."""
        if fraction is None:
            fraction = _load_constants()["support_fraction"]
        return self.abs_v(full=False) <= fraction * self.L_v + 1e-12

    def outside_support_fraction(self, data, fraction=None):
        """Share of the L1 mass of ``data`` sitting outside the velocity support."""
        inside = self.v_support_mask(fraction)
        mag = np.abs(np.asarray(data))
        # reduce spatial axes first so the mask broadcasts over velocity axes
        lead = tuple(range(mag.ndim - self.n_v))
        mv = mag.sum(axis=lead) if lead else mag
        total = mv.sum()
        if total == 0:
            return 0.0
        return float(mv[~inside].sum() / total)

    def is_supported(self, data, tol=None, fraction=None):
        if tol is None:
            tol = _load_constants()["support_tolerance"]
        return self.outside_support_fraction(data, fraction) < tol

    def to_dict(self):
        return {
            "n_x": self.n_x, "n_v": self.n_v, "N_x": self.N_x, "N_v": self.N_v,
            "L_x": float(self.L_x), "L_v": float(self.L_v), "dt": float(self.dt), "T": float(self.T),
        }
