"""Exact regularity exponents for velocity averages and the rules used to compare them.

All arithmetic is on :class:`fractions.Fraction`.  Integrability indices are stored
through their reciprocals so that ``p = inf`` is simply ``1/p = 0``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigurationError

INF = float("inf")


def recip(p):
    """``1/p`` as a Fraction; accepts numbers, Fractions, ``'inf'`` or strings like ``'3/2'``."""
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return Fraction(0)
        p = Fraction(p)
    if p == INF:
        return Fraction(0)
    p = Fraction(p)
    if p <= 0:
        raise ConfigurationError(f"integrability must be positive, got {p}")
    return 1 / p


def from_recip(r):
    """Inverse of :func:`recip`: returns ``inf`` for ``r == 0``."""
    return INF if r == 0 else 1 / Fraction(r)


def conjugate_recip(r):
    """``1/p'`` from ``1/p``."""
    return 1 - r


def fmt(x):
    """Stable text form for reports: ``'inf'``, ``'3/2'``, ``'1'``."""
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _check_index(name, r):
    if not 0 <= r <= 1:
        raise ConfigurationError(f"{name} must lie in [1, inf], got 1/{name}={r}")


@dataclass(frozen=True)
class ExponentInput:
    """``(n, alpha, gamma, p1, p2, q1, q2)`` with integrabilities kept as reciprocals."""

    n: int
    alpha: Fraction
    r_gamma: Fraction
    r_p1: Fraction
    r_p2: Fraction
    r_q1: Fraction
    r_q2: Fraction

    @classmethod
    def make(cls, n=1, alpha=0, gamma="inf", p1=2, p2=2, q1=2, q2=2):
        n = int(n)
        if n < 1:
            raise ConfigurationError("dimension n must be >= 1")
        alpha = Fraction(alpha)
        if alpha < 0:
            raise ConfigurationError("alpha must be non-negative")
        rg = recip(gamma)
        if rg > 1:
            raise ConfigurationError(f"gamma must be >= 1, got {from_recip(rg)}")
        vals = {k: recip(v) for k, v in dict(p1=p1, p2=p2, q1=q1, q2=q2).items()}
        for k, r in vals.items():
            _check_index(k, r)
        return cls(n, alpha, rg, vals["p1"], vals["p2"], vals["q1"], vals["q2"])

    @property
    def gamma(self):
        return from_recip(self.r_gamma)

    def to_dict(self):
        return {"n": self.n, "alpha": fmt(self.alpha), "gamma": fmt(self.gamma),
                "p1": fmt(from_recip(self.r_p1)), "p2": fmt(from_recip(self.r_p2)),
                "q1": fmt(from_recip(self.r_q1)), "q2": fmt(from_recip(self.r_q2))}


@dataclass(frozen=True)
class ExponentReport:
    input: ExponentInput
    ell: object
    d1: Fraction
    d2: Fraction
    d3: Fraction
    d4: Fraction
    theta: Fraction
    s1: Fraction
    S: Fraction
    branch: str
    flags: tuple = ()

    @property
    def weight_exponent(self):
        """Exponent of ``|xi|`` in the quadratic form: twice the smoothness."""
        return 2 * self.S

    @property
    def gain(self):
        return self.S > 0

    def to_dict(self):
        return {"input": self.input.to_dict(), "ell": fmt(self.ell) if self.ell is not None else None,
                "d1": fmt(self.d1), "d2": fmt(self.d2), "d3": fmt(self.d3), "d4": fmt(self.d4),
                "theta": fmt(self.theta), "s1": fmt(self.s1), "S": fmt(self.S),
                "weight_exponent": fmt(self.weight_exponent), "branch": self.branch, "flags": list(self.flags)}


def _pos(x):
    return max(Fraction(x), Fraction(0))


def compute_exponents(inp=None, **kwargs):
    """Smoothness ``S`` of the velocity average together with ``d1..d4``, ``theta`` and ``s1``.

    For ``gamma >= 2``::

        ell = (gamma-2)/(gamma-1)
        d1 = max(n(1/p2 + 1/q2 - ell), 0),  d2 = max(n(2/p2 - ell), 0)
        d3 = max(n(1/p1 + 1/q1 - 1), 0),    d4 = max(n(2/p1 - 1), 0)
        theta = min((1 - (d3-d4)) / (alpha + 1 + (d1-d2)), 1),   S = ((1-d2) theta - d4)/2

    For ``1 <= gamma < 2`` the velocity loss is ``n(2/p2 + 2/gamma - 1)`` and
    ``theta`` uses ``n(1/q2 - 1/p2)`` in its denominator.
    """
    inp = inp if inp is not None else ExponentInput.make(**kwargs)
    n = inp.n
    rg = inp.r_gamma
    d3 = _pos(n * (inp.r_p1 + inp.r_q1 - 1))
    d4 = _pos(n * (2 * inp.r_p1 - 1))
    flags = []
    if rg <= Fraction(1, 2):
        # gamma >= 2; ell = (gamma-2)/(gamma-1) = (1 - 2/gamma)/(1 - 1/gamma)
        ell = (1 - 2 * rg) / (1 - rg)
        d1 = _pos(n * (inp.r_p2 + inp.r_q2 - ell))
        d2 = _pos(n * (2 * inp.r_p2 - ell))
        denom = inp.alpha + 1 + (d1 - d2)
        theta = min((1 - (d3 - d4)) / denom, Fraction(1)) if denom > 0 else Fraction(1)
        S = ((1 - d2) * theta - d4) / 2
        branch = "gamma>=2"
    else:
        ell = None
        d1 = _pos(n * (inp.r_p2 + inp.r_q2 - 1))
        d2 = _pos(n * (2 * inp.r_p2 - 1))
        denom = inp.alpha + 1 + n * (inp.r_q2 - inp.r_p2)
        theta = min((1 - (d3 - d4)) / denom, Fraction(1)) if denom > 0 else Fraction(1)
        S = ((1 - n * (2 * inp.r_p2 + 2 * rg - 1)) * theta - d4) / 2
        branch = "gamma<2"
    if denom <= 0:
        flags.append("theta denominator non-positive; theta capped at 1")
    if S <= 0:
        flags.append("no gain")
    return ExponentReport(inp, ell, d1, d2, d3, d4, theta, theta, S, branch, tuple(flags))


def corollary_exponent(alpha):
    """Closed form ``1/(2(alpha+1))`` for dual integrabilities with the identity flux."""
    return Fraction(1) / (2 * (Fraction(alpha) + 1))


# -- competing results ------------------------------------------------------------

def diperna_lions_exponent(p, q, alpha=0):
    """``(s, r, t)``: ``s = (1/pbar)(alpha + 1/pbar + 1/qlow)^-1``, ``1/r = s/q + (1-s)/p``.

    ``pbar = max(p, p')``, ``qlow = min(q, q')``; ``t = max(p, 2)`` only when ``p == q``
    (otherwise ``None``, meaning the third Besov index is ``inf``).
    """
    rp, rq = recip(p), recip(q)
    if not (0 < rp < 1 and 0 < rq < 1):
        raise ConfigurationError("p and q must lie in (1, inf)")
    alpha = Fraction(alpha)
    r_pbar = min(rp, 1 - rp)
    r_qlow = max(rq, 1 - rq)
    s = r_pbar / (alpha + r_pbar + r_qlow)
    r_r = s * rq + (1 - s) * rp
    t = max(from_recip(rp), Fraction(2)) if rp == rq else None
    return s, from_recip(r_r), t


def westdickenberg_exponent(p, p2, q2, n):
    """``(S, P, flags)`` with ``S = 1 - n + (1/p2')/(1 + 1/q2 - 1/p2)`` and ``P = (1/p - (n-1)/n)^-1``.

    Requires ``1 < p < n/(n-1)``; the endpoint ``p = n/(n-1)`` is accepted with ``P = inf``
    and the flag ``"P infinite"``.
    """
    n = int(n)
    rp, rp2, rq2 = recip(p), recip(p2), recip(q2)
    lower = Fraction(n - 1, n)
    if not rp < 1 or rp < lower:
        raise ConfigurationError(f"p must satisfy 1 < p < n/(n-1); got p={fmt(from_recip(rp))}, n={n}")
    denom = 1 + rq2 - rp2
    if denom <= 0:
        raise ConfigurationError("1 + 1/q2 - 1/p2 must be positive")
    S = 1 - n + (1 - rp2) / denom
    r_P = rp - lower
    flags = ("P infinite",) if r_P == 0 else ()
    return S, from_recip(r_P), flags


def arsenio_exponent(p, n):
    """``S = 1/2`` for ``n <= 2``; ``(3 - 4/p)/2 + n/(4(n-1)) (4/p - 2)`` for ``n >= 3``; ``4/3 <= p <= 2``."""
    rp = recip(p)
    if not Fraction(1, 2) <= rp <= Fraction(3, 4):
        raise ConfigurationError("p must lie in [4/3, 2]")
    n = int(n)
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    if n <= 2:
        return Fraction(1, 2)
    return (3 - 4 * rp) / 2 + Fraction(n, 4 * (n - 1)) * (4 * rp - 2)


def besov_embed(s, p_source, p_target, n):
    """Smoothness after ``B^s_{p_source} -> B^{s~}_{p_target}``: ``s - n(1/p_source - 1/p_target)``."""
    rs, rt = recip(p_source), recip(p_target)
    if rt > rs:
        raise ConfigurationError("embedding direction unsupported: need p_target >= p_source")
    return Fraction(s) - int(n) * (rs - rt)


def interpolate(a, b, w):
    """Complex interpolation of ``(s0, p0)`` and ``(s1, p1)`` with weight ``w`` on the first."""
    w = Fraction(w)
    if not 0 <= w <= 1:
        raise ConfigurationError("interpolation weight must lie in [0, 1]")
    (s0, p0), (s1, p1) = a, b
    s = w * Fraction(s0) + (1 - w) * Fraction(s1)
    r = w * recip(p0) + (1 - w) * recip(p1)
    return s, from_recip(r)


# -- comparisons --------------------------------------------------------------------

COMMUTATOR = "commutator"
DIPERNA_LIONS = "diperna_lions"
WESTDICKENBERG = "westdickenberg"
ARSENIO = "arsenio"

EQUIVALENT = "equivalent"
IMPLIES = "implies"
IMPLIED_BY = "implied-by"
INCOMPARABLE = "incomparable"


@dataclass
class TheoremEntry:
    name: str
    smoothness: object
    integrability: object
    family: str
    applicable: bool = True
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "smoothness": None if self.smoothness is None else fmt(self.smoothness),
                "integrability": None if self.integrability is None else fmt(self.integrability),
                "family": self.family, "applicable": self.applicable, "note": self.note}


@dataclass
class Comparison:
    """Verdict for ``first`` relative to ``second`` (``implies`` means first's result gives second's)."""

    first: str
    second: str
    setting: str
    verdict: str
    rule: str
    inputs: dict
    s_tilde: object = None
    detail: str = ""

    def to_dict(self):
        return {"first": self.first, "second": self.second, "setting": self.setting, "verdict": self.verdict,
                "rule": self.rule, "inputs": {k: fmt(v) if v is not None else None for k, v in self.inputs.items()},
                "s_tilde": None if self.s_tilde is None else fmt(self.s_tilde), "detail": self.detail}


@dataclass
class ComparisonReport:
    n: int
    alpha: Fraction
    p: object
    q: object
    entries: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)

    def verdict(self, second, setting=None):
        for c in self.comparisons:
            if c.second == second and (setting is None or c.setting == setting):
                return c
        return None

    def to_dict(self):
        return {"version": "1.0", "input": {"n": self.n, "alpha": fmt(self.alpha), "p": fmt(self.p), "q": fmt(self.q)},
                "entries": [e.to_dict() for e in self.entries],
                "comparisons": [c.to_dict() for c in self.comparisons]}


def _commutator_S(n, alpha, p1, p2, q1, q2):
    return compute_exponents(ExponentInput.make(n=n, alpha=alpha, gamma="inf", p1=p1, p2=p2, q1=q1, q2=q2)).S


def _compare_diperna_lions(n, alpha, p, q, report):
    rp, rq = recip(p), recip(q)
    if not (0 < rp < 1 and 0 < rq < 1):
        report.entries.append(TheoremEntry(DIPERNA_LIONS, None, None, "B^s_{r,*}", False, "needs 1 < p, q < inf"))
        return
    s3, r3, t3 = diperna_lions_exponent(p, q, alpha)
    report.entries.append(TheoremEntry(DIPERNA_LIONS, s3, r3, f"B^s_{{r,{fmt(t3) if t3 else 'inf'}}}"))
    P = from_recip(rp)
    if rp == rq:
        S2 = _commutator_S(n, alpha, P, P, P, P)
        if rp == Fraction(1, 2):
            verdict = EQUIVALENT if S2 == s3 else INCOMPARABLE
            report.comparisons.append(Comparison(COMMUTATOR, DIPERNA_LIONS, "p=q=2", verdict, "embedding",
                                                 {"s_source": s3, "p_source": 2, "p_target": 2},
                                                 besov_embed(s3, 2, 2, n), "same regularity H^{1/(2(1+alpha))}"))
        elif rp > Fraction(1, 2):
            # p < 2: the competitor's B^{s3}_{p,2} embeds into L^2-based spaces
            s_t = besov_embed(s3, P, 2, n)
            verdict = IMPLIED_BY if s_t >= S2 else INCOMPARABLE
            report.comparisons.append(Comparison(COMMUTATOR, DIPERNA_LIONS, "p=q<2", verdict, "embedding",
                                                 {"s_source": s3, "p_source": P, "p_target": 2, "S": S2}, s_t,
                                                 "competitor embeds into H^{s~} with s~ >= S"))
        else:
            s_t = besov_embed(S2, 2, P, n)
            if s_t >= s3:
                verdict, detail = IMPLIES, ("equality s~ = s" if s_t == s3 else "s~ > s")
            else:
                verdict, detail = INCOMPARABLE, "more differentiability but less integrability"
            report.comparisons.append(Comparison(COMMUTATOR, DIPERNA_LIONS, "p=q>2", verdict, "embedding",
                                                 {"s_source": S2, "p_source": 2, "p_target": P, "s": s3}, s_t, detail))
    elif rp + rq == 1 and rp < Fraction(1, 2):
        Q = from_recip(rq)
        S2 = _commutator_S(n, alpha, P, P, Q, Q)
        s_t = besov_embed(S2, 2, r3, n)
        bound = None
        if n * (1 + alpha) - 1 > 0:
            bound = Fraction(2 * n) / (n * (1 + alpha) - 1)
        if s_t >= s3:
            report.comparisons.append(Comparison(COMMUTATOR, DIPERNA_LIONS, "dual p>2", IMPLIES, "embedding",
                                                 {"s_source": S2, "p_source": 2, "p_target": r3, "s": s3,
                                                  "p_max": bound}, s_t, "embedding into B^{s~}_{r,2} reaches s"))
            return
        w = Fraction(2) / (P * (1 + alpha))
        s_i, r_i = interpolate((S2, 2), (0, P), w)
        if s_i >= s3 and r_i == r3:
            report.comparisons.append(Comparison(COMMUTATOR, DIPERNA_LIONS, "dual p>2", IMPLIES, "interpolation",
                                                 {"s0": S2, "p0": 2, "s1": 0, "p1": P, "w": w}, s_i,
                                                 "interpolation with the L^p bound reaches s"))
            return
        report.comparisons.append(Comparison(COMMUTATOR, DIPERNA_LIONS, "dual p>2", INCOMPARABLE, "embedding",
                                             {"s_source": S2, "p_source": 2, "p_target": r3, "s": s3,
                                              "p_max": bound}, s_t, "more differentiability but less integrability"))


def _compare_westdickenberg(n, p, p2, report):
    rp = recip(p)
    q2 = from_recip(1 - recip(p2))
    try:
        S4, P4, flags = westdickenberg_exponent(p, p2, q2, n)
    except ConfigurationError as exc:
        report.entries.append(TheoremEntry(WESTDICKENBERG, None, None, "B^S_{P,2}", False, str(exc)))
        return
    report.entries.append(TheoremEntry(WESTDICKENBERG, S4, P4, "B^S_{P,2}", True, ", ".join(flags)))
    P = from_recip(rp)
    S2 = _commutator_S(n, 0, P, p2, P, q2)
    inputs = {"p": P, "p2": p2, "q2": q2, "S": S2, "S_competitor": S4}
    if n == 1:
        if rp == Fraction(1, 2):
            report.comparisons.append(Comparison(COMMUTATOR, WESTDICKENBERG, "n=1", EQUIVALENT if S2 == S4 else INCOMPARABLE,
                                                 "embedding", inputs, besov_embed(S4, 2, 2, 1), "same space H^{1/2}"))
        elif rp > Fraction(1, 2):
            s_t = besov_embed(S4, P, 2, 1)
            report.comparisons.append(Comparison(COMMUTATOR, WESTDICKENBERG, "n=1", IMPLIED_BY if s_t >= S2 else INCOMPARABLE,
                                                 "embedding", inputs, s_t, "B^{1/2}_{p,2} embeds into H^{1/p'}"))
        else:
            # compactly supported averages: L^p_loc is inside L^2_loc for p > 2
            report.comparisons.append(Comparison(COMMUTATOR, WESTDICKENBERG, "n=1", IMPLIED_BY if S4 >= S2 else INCOMPARABLE,
                                                 "embedding", dict(inputs, local=1), S4,
                                                 "local inclusion B^{1/2}_{p,2} into H^{1/2} on compact support"))
        return
    if P4 == INF:
        s_t = besov_embed(S2, 2, INF, n)
    else:
        s_t = besov_embed(S2, 2, P4, n)
    verdict = IMPLIES if s_t >= S4 else INCOMPARABLE
    report.comparisons.append(Comparison(COMMUTATOR, WESTDICKENBERG, "n>=2", verdict, "embedding",
                                         dict(inputs, P=P4), s_t, "embedding into B^{s~}_{P,2} with s~ = 3/2 - n"))


def _compare_arsenio(n, p, report):
    try:
        S5 = arsenio_exponent(p, n)
    except ConfigurationError as exc:
        report.entries.append(TheoremEntry(ARSENIO, None, None, "W^{s,p}", False, str(exc)))
        return
    P = from_recip(recip(p))
    report.entries.append(TheoremEntry(ARSENIO, S5, P, "W^{s,p}"))
    S2 = _commutator_S(n, 0, P, 2, P, 2)
    s_t = besov_embed(S5, P, 2, n)
    if s_t == S2 and recip(p) == Fraction(1, 2):
        verdict, detail = EQUIVALENT, "same space at p = 2"
    elif s_t >= S2:
        verdict, detail = IMPLIED_BY, "Sobolev embedding of W^{S,p} reaches H^S"
    else:
        verdict, detail = INCOMPARABLE, "competitor cannot imply the commutator result: s~ < S"
    report.comparisons.append(Comparison(COMMUTATOR, ARSENIO, "n>=3" if n >= 3 else "n<=2", verdict, "embedding",
                                         {"p": P, "S": S2, "S_competitor": S5}, s_t, detail))


def compare_theorems(n=1, alpha=0, p=2, q=None, p2=2):
    """Run every exponent formula on one setting and derive implication verdicts.

    ``q`` defaults to ``p``; ``1/p + 1/q = 1`` selects the dual setting.  The
    mixed-norm competitors use ``p`` as the spatial index with ``p2 = q2'`` in velocity
    (default 2) and are skipped with ``applicable = False`` outside their hypotheses.
    """
    q = p if q is None else q
    n = int(n)
    alpha = Fraction(alpha)
    report = ComparisonReport(n, alpha, from_recip(recip(p)), from_recip(recip(q)))
    P, Q = from_recip(recip(p)), from_recip(recip(q))
    S2 = _commutator_S(n, alpha, P, P, Q, Q)
    report.entries.append(TheoremEntry(COMMUTATOR, S2, 2, "H^s"))
    _compare_diperna_lions(n, alpha, P, Q, report)
    if alpha == 0:
        _compare_westdickenberg(n, P, p2, report)
        _compare_arsenio(n, P, report)
    return report
