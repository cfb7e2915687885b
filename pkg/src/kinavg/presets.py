"""Named initial data and problem families used by the CLI and the test-suite."""

import numpy as np

from .errors import ConfigurationError
from .spectral.dyadic import _smooth_step
from .spectral.field import PHYSICAL, SpectralField, from_function, random_bandlimited
from .spectral.grid import GridSpec
from .transport import TransportProblem


def bump_profile(radius):
    """``exp(-1/(1-(r/radius)^2))`` on ``r < radius``."""
    def prof(*vs):
        r2 = sum(np.asarray(v, dtype=float) ** 2 for v in vs) / radius ** 2
        inside = r2 < 1
        return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - r2, 1.0)), 0.0)
    return prof


def free_streaming_bump(grid, radius=None):
    """``exp(cos x_1 + ... )`` times a compact bump of radius ``L_v/4`` in velocity."""
    prof = bump_profile(grid.L_v / 4 if radius is None else radius)

    def f(xs, vs):
        return np.exp(sum(np.cos(x) for x in xs)) * prof(*vs)
    return from_function(grid, f)


def power_law_profile(x, beta=1.5, period=np.pi, n_modes=400):
    """Even periodic profile with cosine coefficients ``(1 + xi^2)^{-beta/2}``."""
    x = np.asarray(x, dtype=float)
    k0 = 2 * np.pi / period
    n = np.arange(1, n_modes + 1)[:, None]
    terms = np.cos(k0 * n * x.ravel()[None, :]) * (1 + (k0 * n) ** 2) ** (-beta / 2)
    return (1 + terms.sum(axis=0)).reshape(x.shape)


def band_family_grid(N, v_mult=16):
    """Refinement ladder for band traces: ``N_x = N``, ``N_v = v_mult N`` on ``[-pi/2, pi/2) x [-8, 8)``."""
    return GridSpec(n_x=1, n_v=1, N_x=int(N), N_v=int(v_mult * N), L_x=np.pi / 2, L_v=8.0)


def band_family_datum(grid, beta=1.5):
    """Power-law profile in ``x`` times a smooth plateau in ``v`` supported in ``|v| < 3.5``."""
    def f(xs, vs):
        return power_law_profile(xs[0], beta, period=2 * grid.L_x) * np.exp(-vs[0] ** 2 / 2) \
            * _smooth_step(3.5 - np.abs(vs[0]))
    return from_function(grid, f)


def manufactured_problem(grid, eps=0.5, T=1.0, dt=0.05, n_save=5):
    """Exact ``f = cos(t) X(x) V(v)`` with the matching source ``g = eps d_t f + v d_x f``."""
    if grid.n_x != 1 or grid.n_v != 1:
        raise ConfigurationError("the manufactured family is one-dimensional")
    X = lambda x: np.exp(np.sin(x))
    dX = lambda x: np.cos(x) * np.exp(np.sin(x))
    V = lambda v: np.exp(-v ** 2)
    x, v = grid.x_components()[0], grid.v_components()[0]

    def exact(t):
        return SpectralField(grid, np.cos(t) * X(x) * V(v) + 0j, PHYSICAL, t)

    def source(t):
        g = (-eps * np.sin(t) * X(x) + np.cos(t) * v * dX(x)) * V(v)
        return SpectralField(grid, g + 0j, PHYSICAL, t)

    prob = TransportProblem(grid, exact(0.0), eps=eps, source=source, T=T,
                            save_times=np.linspace(0, T, n_save), dt=dt)
    return prob, exact


def initial_datum(grid, name, rng=None, **kw):
    if name == "bump":
        return free_streaming_bump(grid, **kw)
    if name == "band_family":
        return band_family_datum(grid, **kw)
    if name == "random":
        rng = np.random.default_rng(0) if rng is None else rng
        return random_bandlimited(grid, rng, **kw)
    raise ConfigurationError(f"unknown initial datum {name!r}; known: bump, band_family, random")


def burgers_initial(name, N, rng=None):
    """Periodic data on ``[-1, 1)``: ``pulse``, ``shock`` (1 -> 0 at 0), ``rarefaction`` or ``rough``."""
    x = -1 + (np.arange(N) + 0.5) * 2.0 / N
    if name == "pulse":
        return np.where((x >= -0.5) & (x < 0), 1.0, 0.0)
    if name == "shock":
        return np.where(x < 0, 1.0, 0.0)
    if name == "rarefaction":
        return np.where(x < 0, 0.0, 1.0)
    if name == "smooth":
        return 0.5 + 0.25 * np.sin(np.pi * x)
    if name == "rough":
        rng = np.random.default_rng(0) if rng is None else rng
        coarse = rng.uniform(-1, 1, size=32)
        return coarse[(np.arange(N) * 32) // N]
    raise ConfigurationError(f"unknown Burgers datum {name!r}")
