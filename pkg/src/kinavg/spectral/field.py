"""Phase-space fields and the unitary transforms between their representations."""

from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import ConfigurationError
from .grid import GridSpec

PHYSICAL = "physical"
X_FOURIER = "x-fourier"
XV_FOURIER = "xv-fourier"
REPRESENTATIONS = (PHYSICAL, X_FOURIER, XV_FOURIER)

# which axes groups are in frequency space for each representation
_FOURIER_GROUPS = {PHYSICAL: (), X_FOURIER: ("x",), XV_FOURIER: ("x", "v")}


def _forward(data, axes, h):
    """Continuous-normalised transform ``h/sqrt(2 pi) * sum f e^{-i k x}`` with x=0 at index N/2."""
    out = np.fft.ifftshift(data, axes=axes)
    out = np.fft.fftn(out, axes=axes)
    return out * (h / np.sqrt(2 * np.pi)) ** len(axes)


def _inverse(data, axes, h):
    out = data * (np.sqrt(2 * np.pi) / h) ** len(axes)
    out = np.fft.ifftn(out, axes=axes)
    return np.fft.fftshift(out, axes=axes)


def _check_grid(grid):
    # GridSpec validates on construction; re-check in case of duck-typed grids
    for n in (grid.N_x, grid.N_v):
        if n < 4 or n & (n - 1):
            raise ConfigurationError(f"grid size {n} is not a power of two >= 4")


@dataclass(frozen=True)
class SpectralField:
    """Complex phase-space data on a :class:`GridSpec` in one of three representations."""

    grid: GridSpec
    data: np.ndarray = dc_field(repr=False)
    rep: str = PHYSICAL
    t: float = 0.0

    def __post_init__(self):
        if self.rep not in REPRESENTATIONS:
            raise ConfigurationError(f"unknown representation {self.rep!r}")
        arr = np.array(self.data, dtype=complex, copy=True)
        if arr.shape != self.grid.shape:
            raise ConfigurationError(f"data shape {arr.shape} does not match grid {self.grid.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def to(self, rep):
        return transform(self, rep)

    def replace(self, data=None, rep=None, t=None):
        return SpectralField(self.grid, self.data if data is None else data,
                             self.rep if rep is None else rep, self.t if t is None else t)

    def __add__(self, other):
        other = other.to(self.rep)
        return self.replace(data=self.data + other.data)

    def __sub__(self, other):
        other = other.to(self.rep)
        return self.replace(data=self.data - other.data)

    def __mul__(self, scalar):
        return self.replace(data=self.data * scalar)

    __rmul__ = __mul__

    def l2_norm_sq(self):
        """Squared L2 norm with the quadrature weight matching the representation."""
        g = self.grid
        w = {PHYSICAL: g.cell_volume, X_FOURIER: g.freq_cell_x * g.cell_v,
             XV_FOURIER: g.freq_cell_volume}[self.rep]
        return float(np.sum(np.abs(self.data) ** 2) * w)


def transform(field, target):
    """Return ``field`` in representation ``target`` (unitary, so Parseval holds exactly)."""
    if target not in REPRESENTATIONS:
        raise ConfigurationError(f"unknown representation {target!r}")
    grid = field.grid
    _check_grid(grid)
    if field.rep == target:
        return field
    have = set(_FOURIER_GROUPS[field.rep])
    want = set(_FOURIER_GROUPS[target])
    data = field.data
    if "x" in have - want:
        data = _inverse(data, grid.x_axes, grid.h_x)
    if "v" in have - want:
        data = _inverse(data, grid.v_axes, grid.h_v)
    if "x" in want - have:
        data = _forward(data, grid.x_axes, grid.h_x)
    if "v" in want - have:
        data = _forward(data, grid.v_axes, grid.h_v)
    return SpectralField(grid, data, target, field.t)


def from_function(grid, func, t=0.0):
    """Sample ``func(x_components, v_components)`` on the grid."""
    xs = grid.x_components()
    vs = grid.v_components()
    data = np.broadcast_to(func(xs, vs), grid.shape)
    return SpectralField(grid, data, PHYSICAL, t)


def random_bandlimited(grid, rng, kx=None, kv=None, real=False):
    """Random field whose xv-spectrum is confined to ``|index| <= kx`` (x axes) and ``kv`` (v axes)."""
    kx = grid.N_x // 4 if kx is None else kx
    kv = grid.N_v // 4 if kv is None else kv
    spec = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    mask = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.ndim):
        n = grid.shape[ax]
        k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        lim = kx if ax < grid.n_x else kv
        shape = [1] * grid.ndim
        shape[ax] = n
        mask &= (k <= lim).reshape(shape)
    spec = np.where(mask, spec, 0)
    f = transform(SpectralField(grid, spec, XV_FOURIER), PHYSICAL)
    if real:
        f = f.replace(data=f.data.real)
    return f
