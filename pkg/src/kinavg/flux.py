"""Velocity fluxes, non-degeneracy measurement and the self-similar square-root flux.

The self-similar flux lives on ``[0, 3/2)``.  Branch ``n >= 1`` occupies
``[left_n, right_n]`` with ``left_n = sum_{i<n-1} 3^-i`` and width ``3^-(n-1)``;
there ``a(v) = top_n - (right_n - v)^2`` where ``top_n = sum_{i<n} 9^-i``.
Each branch therefore looks like a rescaled copy of ``1 - (1-v)^2`` and the
flux degenerates like a square root at every branch top.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from sklearn.base import BaseEstimator

from ._constants import load as _load_constants
from .errors import ConfigurationError, NumericError

# branches past this index sit below double resolution of v near 3/2
APPENDIX_BRANCH_CAP = 40


@dataclass(frozen=True)
class FluxFunction:
    """A velocity flux ``a: R^n_v -> R^m``.

    ``evaluator`` takes an array whose trailing axis has length ``n_v`` (or a plain
    array when ``n_v == 1``) and returns values with trailing axis ``m``
    (plain array when ``m == 1``).
    """

    name: str
    evaluator: Callable
    lipschitz: float
    derivative: Optional[Callable] = None
    inverse: Optional[Callable] = None
    domain: tuple = (-np.inf, np.inf)
    n_v: int = 1
    m: int = 1
    critical_points: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, v):
        return self.evaluator(np.asarray(v, dtype=float))

    @property
    def is_identity(self):
        return self.meta.get("identity", False)

    @property
    def is_constant(self):
        return self.meta.get("constant", False)

    def velocity_field(self, grid):
        """``a(v)`` on the grid's velocity lattice, shape ``(N_v,)*n_v + (n_x,)``."""
        if self.n_v != grid.n_v or self.m != grid.n_x:
            raise ConfigurationError(
                f"flux {self.name!r} maps R^{self.n_v} -> R^{self.m}; grid needs R^{grid.n_v} -> R^{grid.n_x}")
        if self.n_v == 1:
            vals = self(grid.v_axis)
        else:
            vals = self(grid.v_vectors(full=False))
        vals = np.asarray(vals, dtype=float)
        if self.m == 1:
            vals = vals[..., None]
        return np.broadcast_to(vals, (grid.N_v,) * grid.n_v + (grid.n_x,))

    def check_lipschitz(self, samples=2001, lo=None, hi=None, rtol=1e-6):
        """Largest sampled difference quotient; raises if it exceeds the declared constant."""
        lo = self.domain[0] if lo is None else lo
        hi = self.domain[1] if hi is None else hi
        if not (np.isfinite(lo) and np.isfinite(hi)):
            lo, hi = -1.0, 1.0
        if self.n_v != 1:
            rng = np.random.default_rng(0)
            p = rng.uniform(lo, hi, size=(samples, self.n_v))
            q = rng.uniform(lo, hi, size=(samples, self.n_v))
            num = np.linalg.norm(np.atleast_2d(np.asarray(self(p)).reshape(samples, -1))
                                 - np.asarray(self(q)).reshape(samples, -1), axis=-1)
            den = np.linalg.norm(p - q, axis=-1)
            worst = float(np.max(num / den))
        else:
            v = np.linspace(lo, hi, samples, endpoint=not math.isclose(hi, self.domain[1]) or
                            self.meta.get("closed_right", True))
            a = self(v)
            worst = float(np.max(np.abs(np.diff(a)) / np.diff(v)))
        if worst > self.lipschitz * (1 + rtol) + 1e-15:
            raise NumericError(f"flux {self.name!r}: difference quotient {worst:.6g} exceeds Lip={self.lipschitz}")
        return worst


def power_flux(k, n_v=1, name=None):
    """``a(v) = v^k`` componentwise (``k=1`` is free streaming).

    ``domain`` is the default compact set used by the measurement routines; the
    formula itself is evaluated anywhere.
    """
    k = int(k)
    if k < 1:
        raise ConfigurationError("power flux needs k >= 1")
    if k == 1:
        return FluxFunction(name or "identity", lambda v: v.copy(), 1.0,
                            derivative=lambda v: np.ones_like(v), inverse=lambda w: np.asarray(w, float),
                            domain=(0.0, 1.0), n_v=n_v, m=n_v, meta={"identity": True})
    return FluxFunction(name or f"power{k}", lambda v: v ** k, float(k),
                        derivative=lambda v: k * v ** (k - 1),
                        inverse=lambda w: np.sign(w) * np.abs(w) ** (1.0 / k) if k % 2 else np.sqrt(w),
                        domain=(0.0, 1.0), n_v=n_v, m=n_v, critical_points=(0.0,))


def constant_flux(value=0.5, n_v=1, m=1):
    def ev(v):
        shape = v.shape[:-1] if n_v > 1 else v.shape
        out = np.full(shape + ((m,) if m > 1 else ()), float(value))
        return out
    return FluxFunction("constant", ev, 0.0, derivative=lambda v: np.zeros_like(v),
                        domain=(0.0, 1.0), n_v=n_v, m=m, meta={"constant": True})


def piecewise_linear_flux(knots, values, name="piecewise_linear"):
    """Continuous piecewise-linear flux through ``(knots[i], values[i])``."""
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    slopes = np.diff(values) / np.diff(knots)
    lip = float(np.max(np.abs(slopes)))

    def deriv(v):
        idx = np.clip(np.searchsorted(knots, v, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    inv = None
    if np.all(slopes > 0):
        def inv(w):
            return np.interp(w, values, knots)
    return FluxFunction(name, lambda v: np.interp(v, knots, values), lip, derivative=deriv, inverse=inv,
                        domain=(float(knots[0]), float(knots[-1])), meta={"min_slope": float(np.min(np.abs(slopes)))})


# -- self-similar square-root flux -------------------------------------------

def _left(n):
    return Fraction(3, 2) * (1 - Fraction(1, 3 ** (n - 1)))


def _top(n):
    return Fraction(9, 8) * (1 - Fraction(1, 9 ** n))


def _base(n):
    return _top(n - 1) if n > 1 else Fraction(0)


_LEFT = np.array([float(_left(n)) for n in range(1, APPENDIX_BRANCH_CAP + 3)])
_TOP = np.array([float(_top(n)) for n in range(1, APPENDIX_BRANCH_CAP + 3)])
_WIDTH = np.array([3.0 ** -(n - 1) for n in range(1, APPENDIX_BRANCH_CAP + 3)])
APPENDIX_DOMAIN = (0.0, 1.5)
APPENDIX_RANGE = (0.0, 9.0 / 8.0)


def _branch_of_v(v):
    v = np.asarray(v, dtype=float)
    n = np.searchsorted(_LEFT, v, side="right")
    return np.clip(n, 1, APPENDIX_BRANCH_CAP)


def appendix_eval(v):
    """Closed-form branch evaluation of the self-similar flux on ``[0, 3/2)``."""
    v = np.asarray(v, dtype=float)
    if np.any((v < 0) | (v >= 1.5)) or not np.all(np.isfinite(v)):
        raise ConfigurationError("self-similar flux is defined on [0, 3/2)")
    n = _branch_of_v(v)
    right = _LEFT[n - 1] + _WIDTH[n - 1]
    out = _TOP[n - 1] - np.maximum(right - v, 0.0) ** 2
    return out if out.ndim else float(out)


def appendix_derivative(v):
    v = np.asarray(v, dtype=float)
    n = _branch_of_v(v)
    return 2.0 * np.maximum(_LEFT[n - 1] + _WIDTH[n - 1] - v, 0.0)


def appendix_inverse(w):
    """``a^{-1}(w) = right_n - sqrt(top_n - w)`` on the branch whose range holds ``w``."""
    w = np.asarray(w, dtype=float)
    if np.any((w < 0) | (w >= 9.0 / 8.0)):
        raise ConfigurationError("self-similar flux takes values in [0, 9/8)")
    n = np.clip(np.searchsorted(_TOP, w, side="right") + 1, 1, APPENDIX_BRANCH_CAP)
    return _LEFT[n - 1] + _WIDTH[n - 1] - np.sqrt(np.maximum(_TOP[n - 1] - w, 0.0))


def _value_branch(w):
    """Branch ``n`` with ``base_n <= w < top_n`` using exact comparisons."""
    wf = float(w)
    n = int(np.searchsorted(_TOP, wf, side="right")) + 1
    n = min(max(n, 1), APPENDIX_BRANCH_CAP + 1)
    while n > 1 and w < _base(n):
        n -= 1
    while w >= _top(n):
        n += 1
    return n


def _sqrt_gap(p_hi, p_lo):
    """``sqrt(p_hi) - sqrt(p_lo)`` without cancellation."""
    a, b = math.sqrt(p_hi), math.sqrt(p_lo)
    return float(p_hi - p_lo) / (a + b) if a + b > 0 else 0.0


def appendix_preimage_measure(c, d):
    """Lebesgue measure of ``{v : c <= a(v) <= d}`` in closed form.

    Endpoints may be floats or :class:`fractions.Fraction`; branch offsets are
    formed exactly before the square roots are taken.
    """
    c, d = Fraction(c), Fraction(d)
    if c > d:
        raise ConfigurationError(f"empty interval [{c}, {d}]")
    if c < 0 or d > Fraction(9, 8):
        raise ConfigurationError("interval must lie inside the flux range [0, 9/8]")
    if c == d:
        return 0.0
    n_c = _value_branch(c)
    total = 0.0
    if d >= Fraction(9, 8):
        n_d = None
    else:
        n_d = _value_branch(d)
    last = n_d if n_d is not None else APPENDIX_BRANCH_CAP
    if n_c > last:
        return 0.0
    # first (possibly partial) branch
    top = _top(n_c)
    hi = min(d, top)
    total += _sqrt_gap(top - c, top - hi)
    if n_d == n_c:
        return total
    # full branches strictly between; branch n has preimage width 3^-(n-1)
    if last - n_c > 1:
        total += 1.5 * (3.0 ** -n_c - 3.0 ** -(last - 1))
    if n_d is None:
        # everything from branch `last` upward is covered
        total += 1.5 * 3.0 ** -(last - 1)
    else:
        top = _top(n_d)
        total += _sqrt_gap(top - _base(n_d), top - d)
    return total


def appendix_interval_bound(c, d):
    """``sqrt(6) |I|^{1/2}``, the interval estimate for the self-similar flux."""
    return math.sqrt(6.0) * math.sqrt(float(Fraction(d) - Fraction(c)))


def counterexample_family(m):
    """Union of ``m`` intervals of length ``9^-(m-1)`` ending at the first ``m`` branch tops.

    Returns a dict with the intervals (as Fractions), ``|O|``, the preimage
    measure summed through :func:`appendix_preimage_measure`, the closed forms and the ratio.
    """
    if int(m) != m or not 1 <= m <= 30:
        raise ConfigurationError("m must be an integer in [1, 30]")
    m = int(m)
    width = Fraction(1, 9 ** (m - 1))
    intervals = [(_top(n) - width, _top(n)) for n in range(1, m + 1)]
    measure_o = float(m * width)
    pre = math.fsum(appendix_preimage_measure(c, d) for c, d in intervals)
    return {
        "m": m,
        "intervals": intervals,
        "set_measure": measure_o,
        "preimage_measure": pre,
        "closed_set_measure": m * 9.0 ** -(m - 1),
        "closed_preimage_measure": m * 3.0 ** -(m - 1),
        "ratio": pre / math.sqrt(measure_o),
        "closed_ratio": math.sqrt(m),
    }


def appendix_flux():
    return FluxFunction("appendix", appendix_eval, 2.0, derivative=appendix_derivative,
                        inverse=appendix_inverse, domain=APPENDIX_DOMAIN,
                        critical_points=tuple(float(_left(n + 1)) for n in range(1, 31)),
                        meta={"closed_right": False})


def flux_from_catalog(name, n_v=1):
    """Build a flux from the packaged catalogue by name."""
    catalog = {e["name"]: e for e in _load_constants("flux_catalog.json")["fluxes"]}
    if name not in catalog:
        raise ConfigurationError(f"unknown flux {name!r}; known: {sorted(catalog)}")
    entry = catalog[name]
    formula, params = entry["formula"], entry.get("params", {})
    if formula == "power":
        fl = power_flux(params["k"], n_v=n_v, name=name)
    elif formula == "appendix":
        fl = appendix_flux()
    elif formula == "constant":
        fl = constant_flux(params.get("value", 0.0), n_v=n_v, m=n_v)
    else:
        raise ConfigurationError(f"unknown flux formula {formula!r}")
    if not math.isclose(fl.lipschitz, entry["lipschitz"]):
        raise ConfigurationError(f"catalog Lipschitz constant for {name!r} disagrees with its formula")
    return fl


# -- non-degeneracy -------------------------------------------------------------

def _sup_window_counts(sorted_vals, widths):
    """For each width, the largest number of sorted samples inside a closed window of that width."""
    out = np.empty(len(widths), dtype=np.int64)
    for j, w in enumerate(widths):
        hi = np.searchsorted(sorted_vals, sorted_vals + w, side="right")
        out[j] = int(np.max(hi - np.arange(sorted_vals.size)))
    return out


class NonDegeneracyEstimator(BaseEstimator):
    """Fit ``sup_{sigma,tau} |{v in D : |a(v).sigma - tau| <= w/2}| ~ c0 w^nu``.

    ``fit(V, A)`` takes velocity samples ``V`` (uniform on ``D``, shape ``(N,)`` or
    ``(N, n)``) and flux values ``A`` (shape ``(N,)`` or ``(N, m)``); the measure of a
    band is its sample fraction times ``domain_volume``.
    """

    def __init__(self, widths=None, n_directions=32, domain_volume=1.0, degenerate_tol=0.05):
        self.widths = widths
        self.n_directions = n_directions
        self.domain_volume = domain_volume
        self.degenerate_tol = degenerate_tol

    def _directions(self, m):
        if m == 1:
            return np.array([[1.0]])
        theta = np.pi * np.arange(self.n_directions) / self.n_directions
        if m == 2:
            return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        rng = np.random.default_rng(0)
        d = rng.standard_normal((self.n_directions, m))
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def fit(self, V, A):
        A = np.asarray(A, dtype=float)
        if A.size == 0:
            raise ConfigurationError("no velocity samples: empty domain")
        A = A.reshape(A.shape[0], -1)
        widths = np.asarray(self.widths if self.widths is not None else np.logspace(-4, -1.5, 11))
        if widths.size < 4 or np.log10(widths.max() / widths.min()) < 2 - 1e-9:
            raise ConfigurationError("need at least 4 band widths spanning two decades")
        counts = np.zeros(widths.size, dtype=np.int64)
        for sigma in self._directions(A.shape[1]):
            proj = np.sort(A @ sigma)
            counts = np.maximum(counts, _sup_window_counts(proj, widths))
        measures = counts / A.shape[0] * self.domain_volume
        self.widths_ = widths
        self.measures_ = measures
        self.degenerate_ = False
        if np.any(measures <= 0):
            raise NumericError("band measure vanished; increase the sample count")
        slope, intercept = np.polyfit(np.log(widths), np.log(measures), 1)
        resid = np.log(measures) - (slope * np.log(widths) + intercept)
        self.nu_ = float(slope)
        self.c0_ = float(np.exp(intercept))
        self.residual_ = float(np.sqrt(np.mean(resid ** 2)))
        self.degenerate_ = bool(self.nu_ < self.degenerate_tol)
        return self

    def predict(self, widths):
        return self.c0_ * np.asarray(widths, dtype=float) ** self.nu_


@dataclass
class NonDegReport:
    nu: float
    c0: float
    residual: float
    degenerate: bool
    widths: np.ndarray
    measures: np.ndarray
    flux: str = ""
    n_samples: int = 0

    @property
    def message(self):
        return "degenerate: no nu>0 fits" if self.degenerate else f"nu={self.nu:.4f}, c0={self.c0:.4f}"

    def to_dict(self):
        return {"version": "1.0", "flux": self.flux, "nu": self.nu, "c0": self.c0,
                "residual": self.residual, "degenerate": self.degenerate, "message": self.message,
                "n_samples": self.n_samples,
                "samples": [{"width": float(w), "measure": float(m)} for w, m in zip(self.widths, self.measures)]}


def _sample_domain(domain, n_samples, n_v, seed):
    if n_v == 1:
        lo, hi = domain
        if not hi > lo:
            raise ConfigurationError(f"empty domain {domain}")
        h = (hi - lo) / n_samples
        return lo + h * (np.arange(n_samples) + 0.5), hi - lo
    box = np.asarray(domain, dtype=float).reshape(n_v, 2)
    if np.any(box[:, 1] <= box[:, 0]):
        raise ConfigurationError(f"empty domain {domain}")
    rng = np.random.default_rng(seed)
    V = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((n_samples, n_v))
    return V, float(np.prod(box[:, 1] - box[:, 0]))


def nondeg_estimate(flux, domain=None, widths=None, n_directions=32, n_samples=10 ** 6, seed=0):
    """Measure band preimages on ``domain`` and fit the non-degeneracy order ``(nu, c0)``.

    One-dimensional domains use a deterministic midpoint lattice; higher
    dimensions draw seeded uniform samples.
    """
    domain = flux.domain if domain is None else domain
    V, vol = _sample_domain(domain, n_samples, flux.n_v, seed)
    A = flux(V)
    est = NonDegeneracyEstimator(widths=widths, n_directions=n_directions, domain_volume=vol).fit(V, A)
    return NonDegReport(est.nu_, est.c0_, est.residual_, est.degenerate_, est.widths_, est.measures_,
                        flux=flux.name, n_samples=n_samples)


def _kept_pieces(lo, hi, centers, delta):
    """``[lo, hi]`` minus the union of ``(c - delta, c + delta)``."""
    pieces, a = [], lo
    for c in sorted(centers):
        if c - delta > a:
            pieces.append((a, min(c - delta, hi)))
        a = max(a, c + delta)
        if a >= hi:
            break
    if hi > a:
        pieces.append((a, hi))
    return pieces


def _graded_panels(p, q, levels=12):
    """Split ``[p, q]`` geometrically towards both ends so endpoint singularities are resolved."""
    length = q - p
    fr = np.concatenate([[0.0], 10.0 ** -np.arange(levels, 0, -1), [0.5]])
    left = p + length * fr
    right = q - length * fr[::-1]
    edges = np.unique(np.concatenate([left, right]))
    return list(zip(edges[:-1], edges[1:]))


def jacobian_integrability(flux, gamma, domain=None, deltas=None):
    """``(int_D |a'(v)|^{1-gamma} dv)^{1/gamma}`` for a strictly monotone 1D flux.

    Neighbourhoods of radius ``delta`` around the critical points are excised for a
    decreasing sequence of ``delta``; if the excised integral keeps growing at a
    non-decaying rate the result is ``inf`` with ``divergent=True``.
    """
    if not 1 <= gamma < np.inf:
        raise ConfigurationError("gamma must lie in [1, inf)")
    lo, hi = flux.domain if domain is None else domain
    probe = np.linspace(lo, hi, 20001)[:-1] if not flux.meta.get("closed_right", True) \
        else np.linspace(lo, hi, 20001)
    vals = flux(probe)
    steps = np.diff(vals)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigurationError(f"flux {flux.name!r} is not one-to-one on [{lo}, {hi}]")
    if flux.derivative is None:
        def deriv(v):
            h = 1e-7
            return (flux(v + h) - flux(v - h)) / (2 * h)
    else:
        deriv = flux.derivative
    expo = 1.0 - gamma

    def integrand(v):
        d = abs(float(deriv(np.asarray(v))))
        if d == 0.0:
            return 0.0 if expo == 0 else np.inf
        return d ** expo

    if expo == 0:
        return {"value": (hi - lo) ** (1.0 / gamma), "divergent": False, "integral": hi - lo, "history": []}
    crit = sorted(c for c in flux.critical_points if lo <= c <= hi)
    # numerically detected critical points (|a'| tiny on the probe lattice)
    dprobe = np.abs(np.asarray(deriv(probe), dtype=float))
    scale = max(float(dprobe.max()), 1e-300)
    for i in np.flatnonzero(dprobe < 1e-9 * scale):
        c = float(probe[i])
        if all(abs(c - x) > 1e-6 for x in crit):
            crit.append(c)
    crit.sort()
    deltas = np.logspace(-2, -8, 7) if deltas is None else np.asarray(deltas)
    history = []
    for delta in deltas:
        total = 0.0
        for p, q in _kept_pieces(lo, hi, crit, delta):
            for a, b in _graded_panels(p, q):
                total += integrate.quad(integrand, a, b, limit=200)[0]
        history.append(total)
    history = np.array(history)
    inc = np.diff(history)
    divergent = not np.all(np.isfinite(history))
    if not divergent and crit and inc.size >= 2 and inc[-2] > 0:
        divergent = bool(inc[-1] / inc[-2] >= 0.95)
    value = np.inf if divergent else float(history[-1]) ** (1.0 / gamma)
    return {"value": value, "divergent": divergent, "integral": float(history[-1]),
            "history": history.tolist()}


def _gauss_quadrature_power(fun, lo, hi, p, panels=4096, order=8):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    pts = mid + half * x
    vals = np.abs(fun(pts)) ** p
    return float(np.sum(vals * w * half))


def distribution_inequality_check(psi, flux, sigma=1.0, p=2.0, c0=1.0, domain=None, psi_support=None,
                                  nu=None, tol=1e-6):
    """Compare ``||psi(a(v) sigma)||_{L^p(D)}`` with ``c0 ||psi||_{L^p}``.

    ``psi`` is a callable or a pair ``(nodes, values)`` read by linear interpolation
    (zero outside the nodes).  The inequality is only claimed for order-one
    non-degenerate fluxes; ``nu`` may be supplied, otherwise it is estimated.
    """
    if isinstance(psi, tuple):
        nodes, values = (np.asarray(a, dtype=float) for a in psi)
        support = (float(nodes[0]), float(nodes[-1]))

        def psi_fn(x):
            return np.interp(x, nodes, values, left=0.0, right=0.0)
    else:
        psi_fn = psi
        support = psi_support
        if support is None:
            raise ConfigurationError("callable psi needs psi_support=(lo, hi)")
    lo, hi = flux.domain if domain is None else domain
    if nu is None:
        nu = nondeg_estimate(flux, (lo, hi), n_samples=2 * 10 ** 5).nu
    applicable = abs(nu - 1.0) <= 0.05
    lhs = _gauss_quadrature_power(lambda v: psi_fn(sigma * flux(v)), lo, hi, p) ** (1.0 / p)
    rhs = c0 * _gauss_quadrature_power(psi_fn, support[0], support[1], p) ** (1.0 / p)
    return {"lhs": lhs, "rhs": rhs, "applicable": bool(applicable), "nu": float(nu),
            "passed": bool(lhs <= rhs * (1 + tol) + 1e-300) if applicable else None}


def interval_sweep(n_intervals, seed=0, rng=None):
    """Random sub-intervals of the self-similar flux range with their measures and the sqrt(6) bound.

    Half of the intervals are drawn uniformly in the full range, half are short
    intervals near branch tops where the square-root degeneracy is sharpest.
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    rows = []
    n_wide = n_intervals // 2
    ends = np.sort(rng.uniform(0.0, 9.0 / 8.0, size=(n_wide, 2)), axis=1)
    branch = rng.integers(1, 12, size=n_intervals - n_wide)
    tops = _TOP[branch - 1]
    # keep lengths above double resolution of the endpoints near 9/8
    lengths = np.maximum(10.0 ** rng.uniform(-14, -1, size=n_intervals - n_wide) * 9.0 ** -(branch - 1), 1e-13)
    shift = rng.uniform(0, 1, size=n_intervals - n_wide) * lengths
    narrow = np.stack([np.maximum(tops - lengths + shift, 0.0), np.minimum(tops + shift, 9.0 / 8.0)], axis=1)
    for c, d in np.concatenate([ends, narrow]):
        if d <= c:
            continue
        meas = appendix_preimage_measure(c, d)
        bound = appendix_interval_bound(c, d)
        rows.append((float(c), float(d), meas, bound, meas / bound))
    return np.array(rows)
