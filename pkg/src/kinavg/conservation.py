"""One-dimensional scalar conservation law: finite volumes, kinetic lift, entropy defect, regularity.

Cells are ``x_j = x_left + (j + 1/2) dx`` on a periodic interval.  The kinetic
velocity grid is cell-centred, so every lift integrates back to ``u`` within half a
velocity cell.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .averaging import VelocityAverage, sobolev_norm
from .errors import ConfigurationError, NumericError
from .spectral.dyadic import build_dyadic_partition
from .spectral.grid import GridSpec

log = logging.getLogger(__name__)

MAX_CFL = 0.9


@dataclass(frozen=True)
class ScalarFlux:
    name: str
    A: Callable
    a: Callable
    convex_min: Optional[float] = None   # argmin of a convex flux, enables the exact Godunov flux

    def max_speed(self, lo, hi, n=257):
        us = np.linspace(lo, hi, n)
        sp = np.abs(np.asarray(self.a(us), dtype=float))
        if not np.all(np.isfinite(sp)):
            raise ConfigurationError(f"flux {self.name!r} is not Lipschitz on [{lo}, {hi}]")
        return float(sp.max())


SCALAR_FLUXES = {
    "burgers": ScalarFlux("burgers", lambda u: 0.5 * u * u, lambda u: u, 0.0),
    "linear": ScalarFlux("linear", lambda u: u, lambda u: np.ones_like(np.asarray(u, dtype=float))),
    "cubic": ScalarFlux("cubic", lambda u: u ** 3 / 3.0, lambda u: u * u),
}


def scalar_flux(name):
    if isinstance(name, ScalarFlux):
        return name
    try:
        return SCALAR_FLUXES[name]
    except KeyError:
        raise ConfigurationError(f"unknown scalar flux {name!r}; known: {sorted(SCALAR_FLUXES)}") from None


@dataclass
class ScalarCLProblem:
    u0: np.ndarray
    flux: object = "burgers"
    T: float = 0.5
    cfl: float = 0.9
    x_left: float = -1.0
    length: float = 2.0
    save_times: Optional[np.ndarray] = None

    def __post_init__(self):
        self.flux = scalar_flux(self.flux)
        self.u0 = np.asarray(self.u0, dtype=float)
        if self.u0.ndim != 1 or self.u0.size < 4:
            raise ConfigurationError("u0 must be a 1D array with at least 4 cells")
        if not np.all(np.isfinite(self.u0)):
            raise ConfigurationError("u0 must be bounded")
        if not 0 < self.cfl <= MAX_CFL:
            raise ConfigurationError(f"CFL must lie in (0, {MAX_CFL}], got {self.cfl}")
        if self.save_times is None:
            self.save_times = np.linspace(0.0, self.T, 11)
        st = np.asarray(self.save_times, dtype=float)
        if st[0] != 0 or not np.isclose(st[-1], self.T) or np.any(np.diff(st) <= 0):
            raise ConfigurationError("save_times must increase strictly from 0 to T")
        self.save_times = st
        self.flux.max_speed(self.u_min, self.u_max)

    @property
    def N(self):
        return self.u0.size

    @property
    def dx(self):
        return self.length / self.N

    @property
    def x(self):
        return self.x_left + (np.arange(self.N) + 0.5) * self.dx

    @property
    def u_min(self):
        return float(self.u0.min())

    @property
    def u_max(self):
        return float(self.u0.max())


@dataclass
class CLSolution:
    problem: ScalarCLProblem
    times: np.ndarray
    u: np.ndarray
    steps: int

    @property
    def x(self):
        return self.problem.x

    @property
    def dx(self):
        return self.problem.dx

    def mass(self):
        return self.u.sum(axis=1) * self.dx

    def total_variation(self):
        return np.abs(self.u - np.roll(self.u, -1, axis=1)).sum(axis=1)


def godunov_burgers(ul, ur):
    """Exact Riemann flux for ``u^2/2``."""
    return np.maximum(0.5 * np.maximum(ul, 0) ** 2, 0.5 * np.minimum(ur, 0) ** 2)


def _godunov_convex(flux, ul, ur):
    c = flux.convex_min
    return np.maximum(flux.A(np.maximum(ul, c)), flux.A(np.minimum(ur, c)))


def rusanov(flux, ul, ur):
    s = np.maximum(np.abs(flux.a(ul)), np.abs(flux.a(ur)))
    return 0.5 * (flux.A(ul) + flux.A(ur)) - 0.5 * s * (ur - ul)


def numerical_flux(flux, ul, ur):
    if flux.name == "burgers":
        return godunov_burgers(ul, ur)
    if flux.convex_min is not None:
        return _godunov_convex(flux, ul, ur)
    return rusanov(flux, ul, ur)


def fv_solve(problem):
    """First-order monotone finite volumes with adaptive ``dt = cfl dx / max|a(u)|``."""
    flux = problem.flux
    u = problem.u0.copy()
    dx = problem.dx
    out = [u.copy()]
    t = 0.0
    steps = 0
    for target in problem.save_times[1:]:
        while t < target:
            speed = float(np.max(np.abs(flux.a(u))))
            dt = target - t if speed == 0 else min(problem.cfl * dx / speed, target - t)
            F = numerical_flux(flux, u, np.roll(u, -1))      # flux through the right face
            u = u - dt / dx * (F - np.roll(F, 1))
            t = target if target - t - dt <= 1e-14 * max(1.0, target) else t + dt
            steps += 1
            if not np.all(np.isfinite(u)):
                raise NumericError(f"non-finite state at t={t:g}")
        out.append(u.copy())
    return CLSolution(problem, problem.save_times.copy(), np.array(out), steps)


def burgers_riemann_exact(ul, ur, x, t):
    """Entropy solution of the Burgers Riemann problem centred at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    if t == 0:
        return np.where(x < 0, ul, ur)
    if ul > ur:
        s = 0.5 * (ul + ur)
        return np.where(x < s * t, ul, ur)
    xi = x / t
    return np.clip(xi, ul, ur)


# -- kinetic formulation -----------------------------------------------------------------

@dataclass
class KineticDensity:
    f: np.ndarray          # (nt, N, M)
    v: np.ndarray
    dv: float
    x: np.ndarray
    dx: float
    times: np.ndarray
    u: np.ndarray

    @property
    def constraint_residual(self):
        return float(np.max(np.abs(self.f.sum(axis=-1) * self.dv - self.u)))

    @property
    def bounds_ok(self):
        return bool(self.f.min() >= -1 and self.f.max() <= 1)


def velocity_grid(lo, hi, n=None, dv=None):
    """Cell-centred grid covering ``[min(lo,0), max(hi,0)]`` with one cell of margin."""
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    if dv is None:
        n = 256 if n is None else int(n)
        dv = max(hi - lo, 1e-12) / n
    edges_lo = lo - dv
    m = int(np.ceil((hi + dv - edges_lo) / dv))
    return edges_lo + (np.arange(m) + 0.5) * dv, float(dv)


def _lift(u, v):
    u = u[..., None]
    pos = (v >= 0) & (v <= u)
    neg = (v < 0) & (v >= u)
    return pos.astype(float) - neg.astype(float)


def _as_series(u):
    if isinstance(u, CLSolution):
        return u.u, u.times, u.x, u.dx
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 1:
        arr = arr[None]
    n = arr.shape[1]
    return arr, np.arange(arr.shape[0], dtype=float), (np.arange(n) + 0.5) / n, 1.0 / n


def kinetic_lift(u, v=None, n_v=256):
    """``f = 1`` on ``0 <= v <= u``, ``-1`` on ``u <= v < 0``, ``0`` elsewhere."""
    arr, times, x, dx = _as_series(u)
    if v is None:
        v, dv = velocity_grid(arr.min(), arr.max(), n=n_v)
    else:
        v = np.asarray(v, dtype=float)
        dv = float(v[1] - v[0])
        if v[0] - dv / 2 > min(arr.min(), 0) + 1e-12 or v[-1] + dv / 2 < max(arr.max(), 0) - 1e-12:
            raise ConfigurationError("velocity grid does not cover [min(u,0), max(u,0)]")
    return KineticDensity(_lift(arr, v), v, dv, x, dx, times, arr)


def young_lift(ensemble, v=None, n_v=256):
    """Kinetic density of the empirical Young measure: the average of the members' lifts."""
    members = [_as_series(u) for u in ensemble]
    if not members:
        raise ConfigurationError("ensemble is empty")
    shape = members[0][0].shape
    if any(m[0].shape != shape for m in members):
        raise ConfigurationError("ensemble members live on different grids")
    lo = min(m[0].min() for m in members)
    hi = max(m[0].max() for m in members)
    if v is None:
        v, dv = velocity_grid(lo, hi, n=n_v)
    else:
        v = np.asarray(v, dtype=float)
        dv = float(v[1] - v[0])
    f = np.mean([_lift(m[0], v) for m in members], axis=0)
    u = np.mean([m[0] for m in members], axis=0)
    _, times, x, dx = members[0]
    return KineticDensity(f, v, dv, x, dx, times, u)


@dataclass
class EntropyDefect:
    """Entropy defect on interior slices.

    Pointwise values of a centred-difference ``m`` carry dipoles of size O(1) at a
    captured shock; ``m`` is a measure, so sign and balance diagnostics use block masses
    over x-blocks of width about ``sqrt(dx)``.
    """

    m: np.ndarray              # (nt - 2, N, M) at interior times
    times: np.ndarray
    rate: np.ndarray           # int m dx dv per interior time
    endpoint_residual: float   # |int m(v_max) dx| relative to max int |m| dx dv (total flux balance)
    local_endpoint: float      # largest block mass of m(v_max) relative to the largest block mass
    min_value: float
    block_min: float           # most negative block mass of m dx dv
    negativity_constant: float  # block_min / sqrt(dx)
    flags: list = field(default_factory=list)

    @property
    def total(self):
        return float(np.trapezoid(self.rate, self.times)) if self.rate.size > 1 else float(self.rate.sum())

    @property
    def mean_rate(self):
        span = self.times[-1] - self.times[0]
        return self.total / span if span > 0 else float(self.rate[0])


def _block_sums(arr, b):
    nb = arr.shape[1] // b
    head = arr[:, :nb * b].reshape(arr.shape[0], nb, b, *arr.shape[2:]).sum(axis=2)
    if arr.shape[1] > nb * b:
        head = np.concatenate([head, arr[:, nb * b:].sum(axis=1, keepdims=True)], axis=1)
    return head


def entropy_defect(kd, a, tol=1.0):
    """``m(v) = int_{v_min}^{v} (d_t f + a(w) d_x f) dw`` with centred differences in t and x.

    A block mass below ``-tol sqrt(dx)`` is flagged as an entropy violation.
    """
    if kd.f.shape[0] < 3:
        raise ConfigurationError("entropy defect needs at least 3 time slices for centred differences")
    f = kd.f
    t = np.asarray(kd.times, dtype=float)
    dtf = (f[2:] - f[:-2]) / (t[2:] - t[:-2])[:, None, None]
    dxf = (np.roll(f[1:-1], -1, axis=1) - np.roll(f[1:-1], 1, axis=1)) / (2 * kd.dx)
    resid = dtf + np.asarray(a(kd.v), dtype=float) * dxf
    m = np.cumsum(resid, axis=-1) * kd.dv
    rate = m.sum(axis=(1, 2)) * kd.dx * kd.dv
    b = max(1, int(round(1 / np.sqrt(kd.dx))))
    bx = _block_sums(m * kd.dx, b)
    scale = max(float(np.abs(bx).max()), 1e-300)
    local = float(np.abs(bx[..., -1]).max()) / scale
    total_abs = max(float((np.abs(m).sum(axis=(1, 2)) * kd.dx * kd.dv).max()), 1e-300)
    endpoint = float(np.abs(m[..., -1].sum(axis=1) * kd.dx).max()) / total_abs
    bmin = float((bx * kd.dv).sum(axis=-1).min())
    const = bmin / np.sqrt(kd.dx)
    flags = []
    if const < -tol:
        flags.append(f"block mass {bmin:.3g} below -{tol:g} sqrt(dx)")
    log.info("entropy defect: block min %.3g, endpoint residual %.3g", bmin, endpoint)
    return EntropyDefect(m, t[1:-1], rate, endpoint, local, float(m.min()), bmin, float(const), flags)


# -- regularity ---------------------------------------------------------------------------

CL_S_VALUES = (0.15, 0.20, 0.24, 0.30, 0.35)


@dataclass
class RegularityReport:
    s_values: tuple
    resolutions: list
    totals: dict               # s -> list of sum 2^{2ks} E_k per resolution
    band_energies: list        # per resolution
    decay_slope: float         # beta in E_k ~ 2^{-beta k}
    verdicts: dict
    norm_reports: list

    @property
    def critical_s(self):
        return 0.5 * self.decay_slope

    def to_dict(self):
        return {"version": "1.0", "s_values": list(self.s_values), "resolutions": self.resolutions,
                "totals": {str(s): v for s, v in self.totals.items()},
                "band_energies": [list(map(float, e)) for e in self.band_energies],
                "decay_slope": self.decay_slope, "critical_s": self.critical_s,
                "verdicts": {str(s): v for s, v in self.verdicts.items()}}


def _series_grid(n, length):
    return GridSpec(n_x=1, n_v=1, N_x=n, N_v=4, L_x=length / 2, L_v=1.0)


def cl_regularity_check(series, s_values=CL_S_VALUES, length=2.0, times=None, stability=0.25):
    """Band energies of ``u`` and per-``s`` verdicts from the dyadic decay slope.

    ``series`` is one array ``(nt, N)`` / :class:`CLSolution`, or a list of them at
    increasing resolution.  ``s`` is "consistent" when it lies below half the fitted
    decay exponent of ``E_k`` and, with several resolutions, the last refinement changes
    ``sum 2^{2ks} E_k`` by less than ``stability`` (relative).
    """
    items = series if isinstance(series, (list, tuple)) else [series]
    totals = {float(s): [] for s in s_values}
    energies, resolutions, reports = [], [], []
    for item in items:
        if isinstance(item, CLSolution):
            arr, ts, length = item.u, item.times, item.problem.length
        else:
            arr = np.atleast_2d(np.asarray(item, dtype=float))
            ts = np.arange(arr.shape[0], dtype=float) if times is None else np.asarray(times, float)
        grid = _series_grid(arr.shape[1], length)
        rho = VelocityAverage(arr.astype(complex), ts, grid)
        part = build_dyadic_partition(grid)
        window = (float(ts[0]), float(ts[-1]))
        reps = [sobolev_norm(rho, float(s), window=window, partition=part) for s in s_values]
        for s, r in zip(s_values, reps):
            totals[float(s)].append(r.dyadic_total)
        energies.append(reps[0].band_energies)
        resolutions.append(int(arr.shape[1]))
        reports.append(reps)
    E = np.asarray(energies[-1], dtype=float)
    ks = np.arange(E.size)
    use = (ks >= 1) & (ks < E.size - 1) & (E > 0)
    if use.sum() < 2:
        raise NumericError("not enough populated bands to fit a decay slope")
    slope = -np.polyfit(ks[use], np.log2(E[use]), 1)[0]
    verdicts = {}
    for s, vals in totals.items():
        ok = s < 0.5 * slope
        stable = True
        if len(vals) > 1 and vals[-2] > 0:
            stable = abs(vals[-1] - vals[-2]) / vals[-2] < stability
        verdicts[s] = {"consistent": bool(ok and stable), "below_slope": bool(ok), "stable": bool(stable)}
    return RegularityReport(tuple(float(s) for s in s_values), resolutions, totals, energies, float(slope),
                            verdicts, reports)
