"""Velocity averages, Sobolev norms, the commutator quadratic form and band-by-band diagnostics.

Quadratic forms are evaluated on the xv-Fourier lattice with the frequency cell
volume ``(pi/L_x)^n_x (pi/L_v)^n_v``, so they are Riemann sums of the continuous
integrals under the unitary transform convention of :mod:`kinavg.spectral.field`.
Claims about Sobolev weights are restricted to spatial modes with ``|xi| >= 1``;
lower modes are reported separately.
"""

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from ._constants import load as _load_constants
from .errors import ConfigurationError, NumericError, SupportError
from .exponents import compute_exponents
from .spectral.dyadic import build_dyadic_partition
from .spectral.field import PHYSICAL, X_FOURIER, XV_FOURIER, SpectralField, transform
from .spectral.symbols import eval_commutator_symbol, eval_m0, get_symbol
from .transport import Trajectory, _mixed_norm

REPORT_VERSION = "1.0"


# -- helpers --------------------------------------------------------------------

def _v_shape(grid):
    return (1,) * grid.n_x + (grid.N_v,) * grid.n_v


def _x_shape(grid):
    return (grid.N_x,) * grid.n_x + (1,) * grid.n_v


def test_function_values(grid, phi, check=True):
    """Sample ``phi`` on the velocity lattice (callable on v-components, array, scalar or None=1)."""
    if phi is None:
        vals = np.ones((grid.N_v,) * grid.n_v)
    elif callable(phi):
        vals = np.asarray(phi(*grid.v_components(full=False)), dtype=float)
        vals = np.broadcast_to(vals, (grid.N_v,) * grid.n_v).copy()
    else:
        vals = np.broadcast_to(np.asarray(phi, dtype=float), (grid.N_v,) * grid.n_v).copy()
    if check and phi is not None and np.any(vals):
        frac = grid.outside_support_fraction(vals)
        if frac >= _load_constants()["support_tolerance"]:
            raise SupportError(f"test function has {frac:.3g} of its mass outside |v| <= L_v/2")
    return vals


def smooth_plateau(radius=1.0, width=None):
    """C-infinity test function equal to 1 on ``|v| <= radius`` and 0 beyond ``radius + width``."""
    from .spectral.dyadic import _smooth_step
    width = radius if width is None else width

    def phi(*vs):
        r = np.sqrt(sum(np.asarray(v, dtype=float) ** 2 for v in vs))
        return _smooth_step((radius + width - r) / width)
    return phi


def mollifier_profile(n=1):
    """``exp(-1/(1-|v|^2))`` on the unit ball (unnormalised; grids normalise it)."""
    def prof(r):
        r = np.asarray(r, dtype=float)
        inside = r < 1
        safe = np.where(inside, 1 - r ** 2, 1.0)
        return np.where(inside, np.exp(-1.0 / safe), 0.0)
    return prof


def _slices_and_times(obj):
    if isinstance(obj, Trajectory):
        return list(obj.slices), obj.times
    if isinstance(obj, SpectralField):
        return [obj], np.array([obj.t])
    if isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], SpectralField):
        return list(obj), np.array([s.t for s in obj])
    raise ConfigurationError(f"expected a SpectralField, list of fields, or Trajectory; got {type(obj).__name__}")


def _trapezoid(values, times):
    values = np.asarray(values, dtype=float)
    if len(times) == 1:
        return float(values[0])
    return float(np.trapezoid(values, times, axis=0)) if values.ndim == 1 else np.trapezoid(values, times, axis=0)


def _nonnyquist_high(grid):
    """Mask over the xi grid: non-Nyquist modes with ``|xi| >= 1``."""
    return (~grid.xi_nyquist_mask()) & (grid.abs_xi(full=False) >= 1.0)


# -- velocity averages ------------------------------------------------------------------

@dataclass
class VelocityAverage:
    """``rho_phi(t, x) = int f phi dv`` on the spatial grid, one row per time."""

    data: np.ndarray
    times: np.ndarray
    grid: object
    phi: np.ndarray = field(repr=False, default=None)

    @property
    def is_kinetic(self):
        return not hasattr(self.grid, "xi_axis")


def velocity_average(f, phi=None):
    """Integrate ``f phi`` over velocity for every time slice.

    ``f`` may be a :class:`SpectralField`, a list of them, a :class:`Trajectory`, or a
    kinetic density exposing ``f`` (shape ``(nt, N, M)``), ``v`` and ``dv``.
    On periodic grids the rectangle rule used here is exact for band-limited integrands.
    """
    if hasattr(f, "v") and hasattr(f, "dv") and not isinstance(f, (SpectralField, Trajectory)):
        v = np.asarray(f.v)
        vals = np.ones_like(v) if phi is None else (np.asarray(phi(v), float) if callable(phi) else np.asarray(phi, float))
        data = np.tensordot(np.asarray(f.f, dtype=float), vals, axes=([-1], [0])) * f.dv
        times = np.asarray(getattr(f, "times", np.arange(data.shape[0])), dtype=float)
        return VelocityAverage(data, times, None, vals)
    slices, times = _slices_and_times(f)
    grid = slices[0].grid
    vals = test_function_values(grid, phi)
    w = vals.reshape(_v_shape(grid))
    rows = []
    for s in slices:
        phys = transform(s, PHYSICAL).data
        rows.append(np.sum(phys * w, axis=grid.v_axes) * grid.cell_v)
    return VelocityAverage(np.array(rows), np.asarray(times, dtype=float), grid, vals)


# -- Sobolev norms -------------------------------------------------------------------

@dataclass
class NormReport:
    s: float
    ks: list
    band_energies: np.ndarray
    low_energy: float
    direct_total: float
    dyadic_total: float
    window: tuple
    mixed_norms: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def relative_gap(self):
        if self.direct_total == 0:
            return 0.0
        return abs(self.dyadic_total - self.direct_total) / self.direct_total

    @property
    def consistent(self):
        return self.relative_gap <= 0.05

    @property
    def weighted_bands(self):
        return np.array([2.0 ** (2 * k * self.s) for k in self.ks]) * np.asarray(self.band_energies)

    def to_dict(self):
        return {"version": REPORT_VERSION, "kind": "norm_report", "s": self.s, "window": list(self.window),
                "bands": [{"k": int(k), "E_k": float(e), "weighted": float(w)}
                          for k, e, w in zip(self.ks, self.band_energies, self.weighted_bands)],
                "low_energy": self.low_energy, "direct_total": self.direct_total,
                "dyadic_total": self.dyadic_total, "relative_gap": self.relative_gap,
                "consistent": self.consistent, "mixed_norms": self.mixed_norms, "flags": self.flags}

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))
        return Path(path)

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "E_k", "weighted_E_k"])
            for k, e, we in zip(self.ks, self.band_energies, self.weighted_bands):
                w.writerow([int(k), repr(float(e)), repr(float(we))])
        return Path(path)


def _x_spectrum_sq(rows, grid):
    """``|hat rho|^2`` per slice on the xi grid (unitary x-transform)."""
    axes = tuple(range(1, grid.n_x + 1))
    out = np.fft.fftn(np.fft.ifftshift(rows, axes=axes), axes=axes) * (grid.h_x / np.sqrt(2 * np.pi)) ** grid.n_x
    return np.abs(out) ** 2


def sobolev_norm(rho, s, window=None, partition=None):
    """``||rho||^2_{L^2_t H^s_x}`` over ``|xi| >= 1``, both directly and as a dyadic sum.

    The direct value weights the spectrum by ``(1+|xi|^2)^s``; the dyadic value is
    ``sum_k 2^{2ks} E_k``.  Time integration is the trapezoid rule over the slices
    inside ``window``; a single slice is treated as constant over the window.
    """
    if not -3 <= s <= 3:
        raise ConfigurationError(f"s={s} outside the validated range [-3, 3]")
    grid = rho.grid
    if grid is None:
        raise ConfigurationError("sobolev_norm needs an average on a spectral grid")
    times = np.asarray(rho.times, dtype=float)
    data = np.asarray(rho.data)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    a, b = window
    if a < times[0] - 1e-12 or (len(times) > 1 and b > times[-1] + 1e-12) or b < a:
        raise ConfigurationError(f"window {window} outside trajectory range [{times[0]}, {times[-1]}]")
    if len(times) == 1:
        sel, scale = np.array([0]), (b - a) if b > a else 1.0
    else:
        sel = np.flatnonzero((times >= a - 1e-12) & (times <= b + 1e-12))
        scale = 1.0
    spec = _x_spectrum_sq(data[sel], grid)
    part = partition or build_dyadic_partition(grid)
    high = _nonnyquist_high(grid)
    weight = np.where(high, (1.0 + grid.abs_xi(full=False) ** 2) ** s, 0.0)
    axes = tuple(range(1, grid.n_x + 1))
    direct_t = np.sum(spec * weight, axis=axes) * grid.freq_cell_x
    bands_t = np.array([np.sum(spec * w, axis=axes) * grid.freq_cell_x for w in part.weights])
    low_t = np.sum(np.where(part.low_mask, spec, 0.0), axis=axes) * grid.freq_cell_x
    ts = times[sel]
    integ = (lambda v: _trapezoid(v, ts) * scale)
    E = np.array([integ(bt) for bt in bands_t])
    direct = integ(direct_t)
    dyadic = float(np.sum(2.0 ** (2 * np.array(part.ks) * s) * E))
    rep = NormReport(float(s), list(part.ks), E, integ(low_t), float(direct), dyadic, (float(a), float(b)))
    if not rep.consistent:
        rep.flags.append(f"dyadic/direct gap {rep.relative_gap:.3g} exceeds 5%")
    return rep


# -- commutator quadratic form ---------------------------------------------------------

def _symbol_grid(grid, name="commutator"):
    vals = np.asarray(get_symbol(name).on_grid(grid), dtype=float)
    return np.where(grid.nyquist_mask(), 0.0, vals)


def commutator_lower_form(f):
    """``sum_{|xi|>=1} |xi| (1+|zeta|^2)^{-3/2} |hat f|^2``, the ``H^{1/2}_x H^{-3/2}_v`` energy."""
    F = transform(f, XV_FOURIER)
    grid = f.grid
    w = _symbol_grid(grid, "commutator_lower_bound")
    w = np.where(grid.abs_xi() >= 1.0, w, 0.0)
    return float(np.sum(w * np.abs(F.data) ** 2) * grid.freq_cell_volume)


def commutator_form_fourier(f, check=True):
    """``sum xi . grad_zeta m0 |hat f|^2`` over the xv-Fourier lattice (Nyquist modes excluded)."""
    if f.rep != XV_FOURIER:
        raise ConfigurationError(f"Fourier-side commutator form needs an xv-fourier field, got {f.rep!r}")
    grid = f.grid
    val = float(np.sum(_symbol_grid(grid) * np.abs(f.data) ** 2) * grid.freq_cell_volume)
    if check:
        low = commutator_lower_form(f)
        if val < low * (1 - 1e-12) - 1e-300:
            raise NumericError(f"commutator form {val:.6g} below its lower bound {low:.6g}")
    return val


@lru_cache(maxsize=8)
def commutator_kernel(grid):
    """Physical-space kernel of the commutator, origin moved to index 0.

    With the unitary transform, convolution ``C * f`` (Riemann sum with the cell volume)
    multiplies ``hat f`` by ``(2 pi)^{d/2} hat C``; dividing by that factor makes the
    convolution act as the commutator symbol.
    """
    sym = SpectralField(grid, _symbol_grid(grid), XV_FOURIER)
    kernel = transform(sym, PHYSICAL).data / (2 * np.pi) ** (grid.ndim / 2)
    kernel = np.fft.ifftshift(kernel)
    kernel.setflags(write=False)
    return kernel


def _circulant_apply(kernel, data):
    """Direct double sum ``sum_y K(x - y) f(y)`` over a periodic lattice (no FFT)."""
    shape = data.shape
    idx = np.indices(shape).reshape(len(shape), -1)
    diff = (idx[:, :, None] - idx[:, None, :]) % np.array(shape)[:, None, None]
    mat = kernel[tuple(diff)]
    return (mat @ data.reshape(-1)).reshape(shape)


DIRECT_LIMIT = 1024


def commutator_form_physical(f, method="auto"):
    """``int conj(f) (C * f) dx dv`` with the commutator kernel ``C`` convolved in phase space.

    ``method='direct'`` sums ``C(x-y, v-w) f(y, w)`` explicitly; ``'fft'`` uses a
    circular convolution; ``'auto'`` picks direct summation up to ``DIRECT_LIMIT`` points.
    """
    if f.rep != PHYSICAL:
        raise ConfigurationError(f"physical-side commutator form needs a physical field, got {f.rep!r}")
    grid = f.grid
    K = commutator_kernel(grid)
    data = f.data
    if method == "auto":
        method = "direct" if data.size <= DIRECT_LIMIT else "fft"
    if method == "direct":
        conv = _circulant_apply(K, data) * grid.cell_volume
    elif method == "fft":
        conv = np.fft.ifftn(np.fft.fftn(K) * np.fft.fftn(data)) * grid.cell_volume
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    pair = np.sum(np.conj(data) * conv) * grid.cell_volume
    return float(pair.real)


def commutator_form_direct(f):
    """``<f, (Q B - B Q) f>`` with ``Q`` the ``m0`` multiplier and ``B = v . grad_x``.

    The velocity factor is applied pointwise on the periodic grid, so this only
    approaches the symbol-level value as the velocity period grows; it is a
    consistency diagnostic, not an exact identity.
    """
    grid = f.grid
    fx = transform(f, X_FOURIER)

    def transport(g):
        gx = transform(g, X_FOURIER).data
        xis = grid.xi_components(full=True)
        vs = grid.v_components(full=True)
        out = sum(1j * xis[i] * vs[i] * gx for i in range(min(grid.n_x, grid.n_v)))
        return SpectralField(grid, out, X_FOURIER)

    from .spectral.symbols import apply_symbol
    qb = apply_symbol(transport(fx), "m0")
    bq = transport(apply_symbol(fx, "m0"))
    comm = transform(qb - bq, PHYSICAL).data
    phys = transform(f, PHYSICAL).data
    return float(np.real(np.sum(np.conj(phys) * comm) * grid.cell_volume))


# -- Theorem-level bound check ---------------------------------------------------------

def _h_half_energy(F_xv, grid):
    """``sum_{|xi|>=1} |xi| (1+|zeta|^2)^{-3/2} |F|^2`` for one xv-Fourier slice."""
    w = _symbol_grid(grid, "commutator_lower_bound")
    w = np.where(grid.abs_xi() >= 1.0, w, 0.0)
    return float(np.sum(w * np.abs(F_xv) ** 2) * grid.freq_cell_volume)


def _lp_norm(data, cell, p):
    mag = np.abs(data)
    if np.isinf(p):
        return float(mag.max())
    return float((np.sum(mag ** p) * cell) ** (1.0 / p))


@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    ratio: float
    eps: float
    p: float
    rho_norm: float
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {"eps": self.eps, "p": self.p, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": None if np.isnan(self.ratio) else self.ratio, "rho_norm": self.rho_norm,
                "flags": self.flags}


def theorem1_bound_check(trajectory, phi=None, p=2.0):
    """``(LHS, RHS, ratio)`` for the free-streaming energy estimate on ``f phi``.

    ``LHS = ||f phi||^2_{L^2_t H^{1/2}_x H^{-3/2}_v}`` (modes ``|xi| >= 1``) and
    ``RHS = ||f phi||^2_{L^inf_t L^p} + ||g phi||^2_{L^1_t L^p'}``.  A zero right-hand
    side yields ``ratio = nan`` with a flag.
    """
    if not isinstance(trajectory, Trajectory) or len(trajectory) == 0:
        raise ConfigurationError("theorem1_bound_check needs a non-empty trajectory")
    grid = trajectory.grid
    if not trajectory.problem.flux.is_identity:
        raise ConfigurationError("the energy estimate is stated for a(v) = v")
    vals = test_function_values(grid, phi).reshape(_v_shape(grid))
    p = float(p)
    pd = np.inf if p == 1 else (1.0 if np.isinf(p) else p / (p - 1))
    times = trajectory.times
    lhs_t, fnorm, gnorm = [], [], []
    gs = trajectory.sources(PHYSICAL) if trajectory.problem.has_source else None
    for i, s in enumerate(trajectory.slices):
        fp = transform(s, PHYSICAL).data * vals
        F = transform(SpectralField(grid, fp, PHYSICAL), XV_FOURIER).data
        lhs_t.append(_h_half_energy(F, grid))
        fnorm.append(_lp_norm(fp, grid.cell_volume, p))
        gnorm.append(_lp_norm(gs[i] * vals, grid.cell_volume, pd) if gs is not None else 0.0)
    lhs = _trapezoid(lhs_t, times)
    rhs = max(fnorm) ** 2 + _trapezoid(gnorm, times) ** 2
    rho = velocity_average(trajectory, phi)
    try:
        rho_norm = sobolev_norm(rho, 0.5).direct_total
    except ConfigurationError:
        rho_norm = float("nan")
    flags = []
    if rhs == 0:
        ratio = float("nan")
        flags.append("ratio undefined: zero data")
    else:
        ratio = lhs / rhs
    if not np.isnan(ratio) and not np.isfinite(ratio):
        flags.append("non-finite ratio")
    return BoundCheck(float(lhs), float(rhs), float(ratio), trajectory.problem.eps, p, rho_norm, flags)


@dataclass
class EpsilonSweep:
    rows: list
    factor: float

    @property
    def ratios(self):
        return np.array([r.ratio for r in self.rows])

    @property
    def spread(self):
        r = self.ratios
        return float(np.max(r) / np.min(r))

    @property
    def uniform(self):
        return bool(np.all(np.isfinite(self.ratios)) and self.spread <= self.factor)

    def to_dict(self):
        return {"version": REPORT_VERSION, "factor": self.factor, "spread": self.spread,
                "uniform": self.uniform, "rows": [r.to_dict() for r in self.rows]}


def theorem1_epsilon_sweep(make_trajectory, eps_values, phi=None, p=2.0, factor=3.0):
    """Run :func:`theorem1_bound_check` for each ``eps`` and test that ratios stay within ``factor``."""
    rows = [theorem1_bound_check(make_trajectory(float(e)), phi, p) for e in eps_values]
    return EpsilonSweep(rows, float(factor))


# -- regularization and commutator term ------------------------------------------------

def _dilated_kernel(grid, scale, profile):
    """Discrete ``Phi_scale`` on the periodic v-lattice, origin at index 0, unit discrete mass."""
    vs = grid.v_components(full=False)
    r = np.sqrt(sum(v ** 2 for v in vs)) / scale
    k = np.broadcast_to(profile(r), (grid.N_v,) * grid.n_v).copy()
    k = np.fft.ifftshift(k)
    total = k.sum() * grid.cell_v
    if total <= 0 or scale < grid.h_v:
        k = np.zeros((grid.N_v,) * grid.n_v)
        k[(0,) * grid.n_v] = 1.0 / grid.cell_v
        return k, True
    return k / total, False


def _scales(grid, s1):
    absxi = grid.abs_xi(full=False)
    return np.maximum(absxi, 1.0) ** (-float(s1))


def _convolve_v(data_x, grid, s1, profile):
    """Convolve each xi-row in v with ``Phi`` dilated to ``max(|xi|,1)^{-s1}``."""
    scales = _scales(grid, s1)
    vax = grid.v_axes
    spec = np.fft.fftn(data_x, axes=vax)
    out = np.empty_like(spec)
    delta_modes = 0
    for sc in np.unique(scales):
        k, is_delta = _dilated_kernel(grid, sc, profile)
        delta_modes += int(is_delta) * int(np.sum(scales == sc))
        mask = (scales == sc).reshape(_x_shape(grid))
        kh = np.fft.fftn(k).reshape(_v_shape(grid))
        out = np.where(mask, spec * kh * grid.cell_v, out)
    return np.fft.ifftn(out, axes=vax), delta_modes


def regularized_field(G, s1, profile=None):
    """``F_{s1} = G *_v Phi_{|xi|^{-s1}}`` for every spatial mode (x-Fourier output).

    ``G`` is the localized density ``f phi``; modes with ``|xi| < 1`` use scale 1.
    """
    if not 0 <= s1 <= 1:
        raise ConfigurationError(f"s1 must lie in [0, 1], got {s1}")
    profile = profile or mollifier_profile(G.grid.n_v)
    grid = G.grid
    gx = transform(G, X_FOURIER).data
    out, _ = _convolve_v(gx, grid, s1, profile)
    return SpectralField(grid, out, X_FOURIER, G.t)


def outside_radius_fraction(field_, radius):
    """Share of ``sum |F|`` sitting at ``|v| > radius`` (any representation in x, physical in v)."""
    grid = field_.grid
    data = transform(field_, X_FOURIER).data if field_.rep != PHYSICAL else field_.data
    mag = np.abs(data).sum(axis=grid.x_axes)
    total = mag.sum()
    if total == 0:
        return 0.0
    return float(mag[grid.abs_v() > radius + 1e-12].sum() / total)


@dataclass
class Com1Result:
    com1: np.ndarray
    bound: np.ndarray
    max_ratio: float
    delta_modes: int

    @property
    def holds(self):
        return self.max_ratio <= 1.0 + 1e-10


def com1_field(G, s1, flux, profile=None):
    """Commutator of the flux with the velocity mollification, per spatial mode.

    ``Com1 = i xi . [a(v) (G * Phi_eps) - (a G) * Phi_eps]`` with ``eps = max(|xi|,1)^{-s1}``,
    together with the pointwise bound ``Lip(a) |xi| eps (|G| * Phi_eps)``.
    """
    if not 0 <= s1 <= 1:
        raise ConfigurationError(f"s1 must lie in [0, 1], got {s1}")
    grid = G.grid
    profile = profile or mollifier_profile(grid.n_v)
    gx = transform(G, X_FOURIER).data
    a = flux.velocity_field(grid)
    conv_g, delta_modes = _convolve_v(gx, grid, s1, profile)
    xis = grid.xi_components(full=True)
    com = np.zeros(grid.shape, dtype=complex)
    for i in range(grid.n_x):
        ai = a[..., i].reshape(_v_shape(grid))
        conv_ag, _ = _convolve_v(ai * gx, grid, s1, profile)
        com += 1j * xis[i] * (ai * conv_g - conv_ag)
    conv_abs, _ = _convolve_v(np.abs(gx), grid, s1, profile)
    absxi = grid.abs_xi(full=False)
    eps = _scales(grid, s1)
    bound = flux.lipschitz * (absxi * eps).reshape(_x_shape(grid)) * np.abs(conv_abs)
    mag = np.abs(com)
    scale = max(float(mag.max()), 1e-300)
    # below 1e-8 of the peak both sides are FFT round-off; check those points against an absolute slack
    pos = bound > 1e-8 * scale
    ratio = float(np.max(mag[pos] / bound[pos])) if np.any(pos) else 0.0
    leak = float(np.max(mag[~pos] - bound[~pos])) / scale if np.any(~pos) and mag.max() > 0 else 0.0
    if leak > 1e-10:
        ratio = max(ratio, np.inf)
    return Com1Result(com, bound, ratio, delta_modes)


# -- per-band proof trace ---------------------------------------------------------------

@dataclass
class BandRecord:
    k: int
    energy: float
    A_k: float
    A_k_pairing: float
    boundary: float
    source: float
    commutator: float
    bound: float
    ratio: float
    divided_lhs: float
    divided_rhs: float
    divided_ratio: float
    imag_residual: float
    skipped: bool = False

    def to_dict(self):
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else (int(v) if k == "k" else float(v)))
                for k, v in self.__dict__.items()}


@dataclass
class ProofTrace:
    s1: float
    profile: str
    exponents: dict
    delta: float
    bands: list
    dyadic_lhs: float
    dyadic_rhs: float
    flags: list = field(default_factory=list)

    @property
    def active(self):
        return [b for b in self.bands if not b.skipped]

    @property
    def max_ratio(self):
        return max(b.ratio for b in self.active)

    @property
    def summed_ratio(self):
        return self.dyadic_lhs / self.dyadic_rhs if self.dyadic_rhs > 0 else float("nan")

    @property
    def verdict(self):
        ok = all(np.isfinite(b.ratio) for b in self.active) and np.isfinite(self.summed_ratio)
        return "bounded" if ok else "unbounded"

    def to_dict(self):
        return {"version": REPORT_VERSION, "kind": "proof_trace", "s1": self.s1, "profile": self.profile,
                "exponents": self.exponents, "delta": self.delta, "bands": [b.to_dict() for b in self.bands],
                "dyadic_lhs": self.dyadic_lhs, "dyadic_rhs": self.dyadic_rhs,
                "summed_ratio": self.summed_ratio, "max_ratio": self.max_ratio, "verdict": self.verdict,
                "flags": self.flags}

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))
        return Path(path)

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "E_k", "A_k", "bound", "ratio"])
            for b in self.bands:
                w.writerow([b.k, repr(b.energy), repr(b.A_k), repr(b.bound), repr(b.ratio)])
        return Path(path)


def band_trace(trajectory, phi=None, s1=None, p1=2, p2=2, q1=2, q2=2, delta=0.05, energy_floor=1e-12,
               profile=None):
    """Measure the per-band quadratic form ``A_k`` and compare it with its three bound terms.

    For band ``k`` with weight ``chi_k(xi)``:

    * ``A_k`` = time integral of ``sum chi_k xi.grad_zeta m0 |hat F|^2`` where
      ``F = (f phi) *_v Phi_{|xi|^{-s1}}``; ``A_k_pairing`` recomputes it from the
      boundary and source pairings, ``-eps [<m0 F, F>]_0^T + 2 Re int <m0 F, K>``;
    * boundary ``2^{k(d4 + s1 d2)} (||f_k(0)||^2 + ||f_k(T)||^2)``;
    * source ``2^{k(d3 + s1 d1 + alpha s1)} int ||f_k|| ||g_k||``;
    * commutator ``2^{k(d4 + s1 d2 + 1 - s1)} int ||f_k||^2``,

    norms being ``L^{p1}_x L^{p2}_v`` for ``f_k`` and ``L^{q1}_x L^{q2}_v`` for ``g_k``.  The
    divided inequality compares ``sum chi_k |xi|^{w-delta} (1+|zeta|^2)^{-3/2} |hat F|^2``
    (``w`` the weight exponent) with ``2^{-k delta}`` times the unweighted bracket.
    Bands whose energy is below ``energy_floor`` of the total are skipped and flagged.
    """
    if not isinstance(trajectory, Trajectory):
        raise ConfigurationError("band_trace needs a Trajectory")
    problem = trajectory.problem
    if not problem.flux.is_identity:
        raise ConfigurationError("band_trace traces the identity-flux estimate only")
    grid = trajectory.grid
    part = build_dyadic_partition(grid)
    alpha = problem.alpha
    rep = compute_exponents(n=grid.n_x, alpha=alpha, gamma="inf", p1=p1, p2=p2, q1=q1, q2=q2)
    s1 = float(rep.s1 if s1 is None else s1)
    d1, d2, d3, d4 = (float(rep.d1), float(rep.d2), float(rep.d3), float(rep.d4))
    wexp = float(rep.weight_exponent)
    profile = profile or mollifier_profile(grid.n_v)
    vals = test_function_values(grid, phi).reshape(_v_shape(grid))
    times = trajectory.times
    eps = problem.eps
    P1, P2, Q1, Q2 = (float(x) for x in (p1, p2, q1, q2))

    sym_c = _symbol_grid(grid, "commutator")
    sym_m = np.where(grid.nyquist_mask(), 0.0,
                     eval_m0(grid.xi_vectors(), grid.zeta_vectors()))
    lower = _symbol_grid(grid, "commutator_lower_bound")
    absxi = grid.abs_xi(full=False)
    weight_div = np.where(absxi >= 1, absxi ** (wexp - delta), 0.0).reshape(_x_shape(grid)) * \
        lower / np.maximum(grid.abs_xi(), 1e-300)
    weight_div = np.where(grid.abs_xi() > 0, weight_div, 0.0)
    from .spectral.symbols import apply_symbol
    nb = len(part.ks)
    Q_t = np.zeros((len(times), nb))
    M_t = np.zeros((len(times), nb))
    P_t = np.zeros((len(times), nb))
    I_t = np.zeros((len(times), nb))
    D_t = np.zeros((len(times), nb))
    E_t = np.zeros((len(times), nb))
    fk_t = np.zeros((len(times), nb))
    gk_t = np.zeros((len(times), nb))
    ftot, gtot = [], []
    has_src = problem.has_source
    for it, s in enumerate(trajectory.slices):
        G = SpectralField(grid, transform(s, PHYSICAL).data * vals, PHYSICAL, s.t)
        F = regularized_field(G, s1, profile)
        Fh = transform(F, XV_FOURIER).data
        com = com1_field(G, s1, problem.flux, profile).com1
        K = com
        gx = None
        if has_src:
            Sx = problem.forcing_at(s.t)
            Sphi = SpectralField(grid, transform(Sx, PHYSICAL).data * vals, PHYSICAL, s.t)
            K = K + transform(regularized_field(Sphi, s1, profile), X_FOURIER).data
            graw = transform(problem.source_at(s.t), PHYSICAL).data * vals
            gx = transform(SpectralField(grid, graw, PHYSICAL), X_FOURIER).data
            gtot.append(_mixed_norm(graw, grid, Q1, Q2))
        else:
            gtot.append(0.0)
        Kh = transform(SpectralField(grid, K, X_FOURIER), XV_FOURIER).data
        ampl = np.abs(Fh) ** 2
        cross = np.conj(Fh) * Kh
        Gx = transform(G, X_FOURIER).data
        ftot.append(_mixed_norm(G.data, grid, P1, P2))
        for j, w in enumerate(part.weights):
            wl = w.reshape(_x_shape(grid))
            wf = wl ** 2
            Q_t[it, j] = np.sum(wf * sym_c * ampl) * grid.freq_cell_volume
            M_t[it, j] = np.sum(wf * sym_m * ampl) * grid.freq_cell_volume
            pair = np.sum(wf * sym_m * cross) * grid.freq_cell_volume
            P_t[it, j] = pair.real
            I_t[it, j] = abs(np.sum(wf * sym_c * ampl).imag)
            D_t[it, j] = np.sum(wf * weight_div * ampl) * grid.freq_cell_volume
            E_t[it, j] = np.sum(wf * np.abs(Gx) ** 2) * grid.freq_cell_x * grid.cell_v
            fk_phys = _x_inverse(wl * Gx, grid)
            fk_t[it, j] = _mixed_norm(fk_phys, grid, P1, P2)
            if gx is not None:
                gk_t[it, j] = _mixed_norm(_x_inverse(wl * gx, grid), grid, Q1, Q2)
    total_energy = float(np.sum([_trapezoid(E_t[:, j], times) for j in range(nb)]))
    bands = []
    flags = []
    for j, k in enumerate(part.ks):
        Ek = _trapezoid(E_t[:, j], times)
        A = _trapezoid(Q_t[:, j], times)
        A_pair = -eps * (M_t[-1, j] - M_t[0, j]) + 2 * _trapezoid(P_t[:, j], times)
        bnd_b = 2.0 ** (k * (d4 + s1 * d2)) * (fk_t[0, j] ** 2 + fk_t[-1, j] ** 2)
        bnd_s = 2.0 ** (k * (d3 + s1 * d1 + alpha * s1)) * _trapezoid(fk_t[:, j] * gk_t[:, j], times)
        bnd_c = 2.0 ** (k * (d4 + s1 * d2 + 1 - s1)) * _trapezoid(fk_t[:, j] ** 2, times)
        bound = bnd_b + bnd_s + bnd_c
        div_l = _trapezoid(D_t[:, j], times)
        div_r = 2.0 ** (-k * delta) * ((fk_t[0, j] ** 2 + fk_t[-1, j] ** 2)
                                       + _trapezoid(fk_t[:, j] * gk_t[:, j], times)
                                       + _trapezoid(fk_t[:, j] ** 2, times))
        skipped = total_energy == 0 or Ek <= energy_floor * total_energy
        ratio = abs(A) / bound if bound > 0 else float("nan")
        imag = float(_trapezoid(I_t[:, j], times)) / max(abs(A), 1e-300)
        rec = BandRecord(int(k), float(Ek), float(A), float(A_pair), float(bnd_b), float(bnd_s), float(bnd_c),
                         float(bound), float(ratio), float(div_l), float(div_r),
                         float(div_l / div_r) if div_r > 0 else float("nan"), imag, bool(skipped))
        if skipped:
            flags.append(f"band {k} skipped: energy {Ek:.3g} below floor")
        bands.append(rec)
    if not any(not b.skipped for b in bands):
        raise NumericError("every band has zero energy")
    rhs_total = max(ftot) ** 2 + _trapezoid(gtot, times) ** 2
    dyadic_lhs = float(sum(b.divided_lhs for b in bands if not b.skipped))
    exps = {k: str(v) for k, v in rep.to_dict().items() if k in ("d1", "d2", "d3", "d4", "theta", "S", "weight_exponent")}
    return ProofTrace(s1, "exp_bump", exps, float(delta), bands, dyadic_lhs, float(rhs_total), flags)


def _x_inverse(data_x, grid):
    """Inverse unitary x-transform of x-Fourier data (velocity stays physical)."""
    axes = grid.x_axes
    out = data_x * (np.sqrt(2 * np.pi) / grid.h_x) ** grid.n_x
    return np.fft.fftshift(np.fft.ifftn(out, axes=axes), axes=axes)


# -- directional pushforward -----------------------------------------------------------

@dataclass
class Pushforward:
    edges: np.ndarray
    density: np.ndarray
    mass_in: float
    mass_out: float

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def cdf(self, x):
        cum = np.concatenate([[0.0], np.cumsum(self.density * np.diff(self.edges))])
        return np.interp(x, self.edges, cum)


def directional_pushforward(F, v, flux, xi, bins=64, cell=None):
    """Density of ``lambda = a(v) . xi/|xi|`` under the weight ``F(v) dv``.

    ``v`` is a 1D array (one velocity dimension) or an array with a trailing component
    axis.  ``cell`` defaults to the lattice spacing (product over components).
    """
    v = np.asarray(v, dtype=float)
    F = np.asarray(F, dtype=float)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    nrm = np.linalg.norm(xi)
    if nrm == 0:
        raise ConfigurationError("direction xi must be non-zero")
    a = np.asarray(flux(v), dtype=float)
    if a.ndim == F.ndim:
        lam = a * (xi[0] / nrm)
    else:
        lam = np.tensordot(a, xi / nrm, axes=([-1], [0]))
    if cell is None:
        if v.ndim == F.ndim:
            cell = float(np.abs(np.diff(np.unique(v))).min())
        else:
            cell = 1.0
            for c in range(v.shape[-1]):
                u = np.unique(v[..., c])
                cell *= float(np.diff(u).min()) if u.size > 1 else 1.0
    if np.ndim(bins) == 0:
        lo, hi = float(lam.min()), float(lam.max())
        if not hi > lo:
            raise ConfigurationError("empty bin range: the projected flux is constant")
        edges = np.linspace(lo, hi, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ConfigurationError("bin edges must be strictly increasing")
        if edges[0] > lam.min() or edges[-1] < lam.max():
            raise ConfigurationError("bins do not cover the range of a(v).xi/|xi|")
    weights = (F * cell).ravel()
    hist, _ = np.histogram(lam.ravel(), bins=edges, weights=weights)
    dens = hist / np.diff(edges)
    mass_in = float(weights.sum())
    return Pushforward(edges, dens, mass_in, float(np.sum(hist)))
