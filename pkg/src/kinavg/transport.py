"""Exact-phase solvers for ``eps f_t + a(v).grad_x f = (-Lap_v)^{alpha/2} g``.

In the x-Fourier representation each mode obeys ``eps d_t f = -i lambda f + S`` with
``lambda = a(v).xi``, so the homogeneous flow is a pointwise phase.  Sources are
handled by an exponential integrator that integrates the phase exactly over a
step and freezes the source at the step midpoint.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from ._constants import load as _load_constants
from .errors import ConfigurationError, SupportError
from .flux import FluxFunction, power_flux
from .spectral.field import PHYSICAL, X_FOURIER, SpectralField, transform
from .spectral.grid import GridSpec
from .spectral.io import save_field
from .spectral.symbols import apply_symbol

log = logging.getLogger(__name__)


@dataclass
class TransportProblem:
    """Initial datum, flux, source and output schedule for one transport solve.

    ``source`` is ``None`` (no source), a time-independent :class:`SpectralField`,
    or a callable ``t -> SpectralField`` (or physical-space array).
    """

    grid: GridSpec
    f0: SpectralField
    eps: float = 1.0
    alpha: float = 0.0
    flux: Optional[FluxFunction] = None
    source: Union[None, SpectralField, Callable] = None
    T: Optional[float] = None
    save_times: Optional[np.ndarray] = None
    dt: Optional[float] = None
    support_tol: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ConfigurationError(f"eps must lie in (0, 1], got {self.eps}")
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be non-negative, got {self.alpha}")
        if self.flux is None:
            self.flux = power_flux(1, n_v=self.grid.n_v)
        self.T = float(self.grid.T if self.T is None else self.T)
        self.dt = float(self.grid.dt if self.dt is None else self.dt)
        if self.support_tol is None:
            self.support_tol = _load_constants()["support_tolerance"]
        if self.save_times is None:
            self.save_times = np.linspace(0.0, self.T, 11)
        st = np.asarray(self.save_times, dtype=float)
        if st.ndim != 1 or st.size < 1 or st[0] != 0.0 or not np.isclose(st[-1], self.T, rtol=0, atol=1e-14 * max(1, self.T)) \
                or np.any(np.diff(st) <= 0):
            raise ConfigurationError("save_times must be strictly increasing from 0 to T")
        st[-1] = self.T
        self.save_times = st
        if self.f0.grid != self.grid:
            raise ConfigurationError("f0 lives on a different grid")
        self.check_support(self.f0, "f0")
        if isinstance(self.source, SpectralField):
            self.check_support(self.source, "source")

    def check_support(self, f, label):
        frac = self.grid.outside_support_fraction(transform(f, PHYSICAL).data)
        if frac >= self.support_tol:
            raise SupportError(f"{label} has {frac:.3g} of its mass outside |v| <= L_v/2")

    @property
    def has_source(self):
        return self.source is not None

    def source_at(self, t):
        """Source field ``g(t)`` in the x-Fourier representation (support-checked)."""
        src = self.source
        if src is None:
            return None
        g = src(t) if callable(src) else src
        if not isinstance(g, SpectralField):
            g = SpectralField(self.grid, np.asarray(g), PHYSICAL, t)
        if callable(src):
            self.check_support(g, f"source(t={t:g})")
        return transform(g, X_FOURIER)

    def forcing_at(self, t):
        """``S = (-Lap_v)^{alpha/2} g`` at time ``t`` in x-Fourier form."""
        g = self.source_at(t)
        if g is None:
            return None
        if self.alpha == 0:
            return g
        return apply_symbol(g, "frac_laplacian", (self.alpha,))


@dataclass
class Trajectory:
    problem: TransportProblem
    slices: list
    diagnostics: list = field(default_factory=list)
    residual: Optional[float] = None
    steps: int = 0

    def __post_init__(self):
        times = np.array([s.t for s in self.slices])
        if times.size == 0:
            raise ConfigurationError("empty trajectory")
        if times[0] != 0.0 or not np.isclose(times[-1], self.problem.T) or np.any(np.diff(times) <= 0):
            raise ConfigurationError("slice times must increase strictly from 0 to T")

    @property
    def times(self):
        return np.array([s.t for s in self.slices])

    @property
    def grid(self):
        return self.problem.grid

    def __len__(self):
        return len(self.slices)

    def __iter__(self):
        return iter(self.slices)

    def stacked(self, rep=X_FOURIER):
        """Slices stacked along a leading time axis."""
        return np.stack([transform(s, rep).data for s in self.slices])

    def sources(self, rep=X_FOURIER):
        """Source ``g`` at every slice time (zeros when the problem has none)."""
        if not self.problem.has_source:
            return np.zeros((len(self.slices),) + self.grid.shape, dtype=complex)
        return np.stack([transform(self.problem.source_at(t), rep).data for t in self.times])


def phase_speed(grid, flux):
    """``lambda(xi, v) = a(v).xi`` over the full grid."""
    a = flux.velocity_field(grid)
    xis = grid.xi_components(full=True)
    pad = (1,) * grid.n_x
    lam = 0.0
    for i in range(grid.n_x):
        lam = lam + xis[i] * a[..., i].reshape(pad + a.shape[:-1])
    return np.broadcast_to(lam, grid.shape)


def _phi1(z):
    """``(e^z - 1)/z`` with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2, np.expm1(safe) / safe)


def solve_free_streaming(problem):
    """Evaluate ``e^{-i v.xi t/eps} f0`` at every save time; no time stepping."""
    if problem.has_source:
        raise ConfigurationError("free streaming requires g = 0")
    if not problem.flux.is_identity:
        raise ConfigurationError("free streaming requires the identity flux a(v) = v")
    return _phase_only(problem)


def _phase_only(problem):
    grid = problem.grid
    lam = phase_speed(grid, problem.flux)
    f0 = transform(problem.f0, X_FOURIER).data
    slices = []
    for t in problem.save_times:
        data = f0 if t == 0 else np.exp(-1j * lam * (t / problem.eps)) * f0
        slices.append(SpectralField(grid, data, X_FOURIER, float(t)))
    traj = Trajectory(problem, slices)
    traj.diagnostics = conserved_quantities(traj)
    return traj


def required_dt(problem):
    """Largest step satisfying the oscillation guard ``dt <= c eps / (|xi|max max|a|)``."""
    grid = problem.grid
    guard = _load_constants()["dt_guard"]
    amax = float(np.max(np.linalg.norm(problem.flux.velocity_field(grid), axis=-1)))
    ximax = float(np.max(grid.abs_xi(full=False)))
    if amax * ximax == 0:
        return np.inf
    return guard * problem.eps / (ximax * amax)


def solve_duhamel(problem, record_residual=True):
    """Exponential-midpoint integration of the mild solution.

    Over one step of length ``h`` starting from ``t``::

        f(t+h) = E f(t) + (h/eps) phi1(-i lambda h/eps) S(t + h/2),   E = e^{-i lambda h/eps}

    which is exact for the homogeneous flow and second order in the source.
    """
    grid = problem.grid
    limit = required_dt(problem)
    if problem.dt > limit * (1 + 1e-12):
        raise ConfigurationError(f"dt={problem.dt:.6g} too large for eps={problem.eps:g}; need dt <= {limit:.6g}")
    if not problem.has_source:
        traj = _phase_only(problem)
        traj.residual = 0.0
        return traj
    lam = phase_speed(grid, problem.flux)
    eps = problem.eps
    f = transform(problem.f0, X_FOURIER).data.copy()
    slices = [SpectralField(grid, f, X_FOURIER, 0.0)]
    cache = {}
    history = []   # (t, f) for the centered residual
    worst = 0.0
    t = 0.0
    steps = 0
    for t_next in problem.save_times[1:]:
        n = max(1, int(np.ceil((t_next - t) / problem.dt - 1e-9)))
        h = (t_next - t) / n
        if h not in cache:
            z = -1j * lam * (h / eps)
            cache = {h: (np.exp(z), (h / eps) * _phi1(z))}
        E, W = cache[h]
        for j in range(n):
            tj = t + j * h
            S = problem.forcing_at(tj + 0.5 * h).data
            if record_residual:
                history.append((tj, f))
                if len(history) == 3:
                    worst = max(worst, _centered_residual(problem, lam, history))
                    history.pop(0)
            f = E * f + W * S
            steps += 1
        t = float(t_next)
        slices.append(SpectralField(grid, f, X_FOURIER, t))
    traj = Trajectory(problem, slices, steps=steps)
    traj.residual = worst if record_residual else None
    if record_residual:
        log.info("duhamel weak residual (relative, centered differences): %.3e", worst)
    traj.diagnostics = conserved_quantities(traj)
    return traj


def _centered_residual(problem, lam, history):
    """Relative size of ``eps (f_{n+1}-f_{n-1})/(2h) + i lambda f_n - S(t_n)``."""
    (t0, f0), (t1, f1), (t2, f2) = history
    if not np.isclose(t2 - t1, t1 - t0):
        return 0.0
    h = t1 - t0
    S = problem.forcing_at(t1).data
    r = problem.eps * (f2 - f0) / (2 * h) + 1j * lam * f1 - S
    scale = np.linalg.norm(S) + np.linalg.norm(lam * f1) + 1e-300
    return float(np.linalg.norm(r) / scale)


def _mixed_norm(data, grid, p1, p2):
    """``|| ||f||_{L^p2_v} ||_{L^p1_x}`` with the grid cell volumes; ``inf`` means max."""
    mag = np.abs(data)
    vax = grid.v_axes
    if np.isinf(p2):
        inner = mag.max(axis=vax)
    else:
        inner = (np.sum(mag ** p2, axis=vax) * grid.cell_v) ** (1.0 / p2)
    if np.isinf(p1):
        return float(inner.max())
    return float((np.sum(inner ** p1) * grid.cell_x) ** (1.0 / p1))


def conserved_quantities(trajectory, mixed=((2.0, 1.0),)):
    """Per-slice mass, L2 norm and mixed ``L^p1_x L^p2_v`` norms."""
    grid = trajectory.grid
    rows = []
    for s in trajectory.slices:
        phys = transform(s, PHYSICAL).data
        row = {"t": float(s.t),
               "mass": float(np.real(np.sum(phys)) * grid.cell_volume),
               "mass_imag": float(np.imag(np.sum(phys)) * grid.cell_volume),
               "l2_norm": float(np.sqrt(transform(s, X_FOURIER).l2_norm_sq()))}
        for p1, p2 in mixed:
            row[f"mixed_norm_{_fmt(p1)}_{_fmt(p2)}"] = _mixed_norm(phys, grid, p1, p2)
        rows.append(row)
    return rows


def _fmt(p):
    return "inf" if np.isinf(p) else f"{p:g}"


def write_diagnostics_csv(rows, path):
    path = Path(path)
    cols = [c for c in rows[0] if c != "mass_imag"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(float(r[c])) for c in cols])
    return path


def export_trajectory(trajectory, outdir, stem="slice"):
    """Write one binary snapshot per slice plus ``diagnostics.csv``; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, s in enumerate(trajectory.slices):
        p = save_field(outdir / f"{stem}_{i:04d}.bin", s)
        paths += [p, p.with_suffix(p.suffix + ".json")]
    rows = trajectory.diagnostics or conserved_quantities(trajectory)
    paths.append(write_diagnostics_csv(rows, outdir / "diagnostics.csv"))
    return paths


def observed_order(errors, ratio=2.0):
    """Convergence orders from errors at successively refined steps."""
    e = np.asarray(errors, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(ratio)
