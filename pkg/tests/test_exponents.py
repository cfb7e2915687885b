import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from kinavg.errors import ConfigurationError
from kinavg.exponents import (INF, ExponentInput, besov_embed, compare_theorems, compute_exponents,
                              corollary_exponent, diperna_lions_exponent, fmt, from_recip, interpolate,
                              recip, westdickenberg_exponent, arsenio_exponent)

GOLDEN = Path(__file__).parent / "golden"

fractions_ = st.fractions(min_value=0, max_value=4, max_denominator=12)
indices = st.sampled_from(["1", "6/5", "4/3", "3/2", "2", "5/2", "3", "4", "6", "inf"])


def test_recip_roundtrip():
    assert recip("inf") == 0
    assert recip(INF) == 0
    assert recip("3/2") == Fraction(2, 3)
    assert from_recip(Fraction(0)) == INF
    assert fmt(from_recip(Fraction(2, 3))) == "3/2"
    with pytest.raises(ConfigurationError):
        recip(0)


@pytest.mark.parametrize("case", json.loads((GOLDEN / "corollary_exponents.json").read_text())["cases"])
def test_all_two_inputs_give_closed_form(case):
    rep = compute_exponents(n=1, alpha=case["alpha"], gamma="inf")
    assert rep.S == Fraction(case["S"])
    assert rep.S == corollary_exponent(case["alpha"])
    assert (rep.d1, rep.d2, rep.d3, rep.d4) == (0, 0, 0, 0)
    assert rep.theta == rep.s1 == 1 / (Fraction(case["alpha"]) + 1)


def test_outputs_are_fractions():
    rep = compute_exponents(n=2, alpha="1/3", gamma=3, p1=3, p2="5/2", q1="3/2", q2="5/3")
    for v in (rep.d1, rep.d2, rep.d3, rep.d4, rep.theta, rep.S):
        assert isinstance(v, Fraction)


def test_gamma_below_two_branch():
    rep = compute_exponents(n=1, alpha=0, gamma="3/2", p1=2, p2=4, q1=2, q2="4/3")
    assert rep.branch == "gamma<2"
    # velocity loss n(2/p2 + 2/gamma - 1) = 1/2 + 4/3 - 1 = 5/6
    assert rep.S == (1 - Fraction(5, 6)) * rep.theta / 2


def test_no_gain_is_flagged():
    rep = compute_exponents(n=3, alpha=0, gamma="inf", p1="6/5", p2="6/5", q1="6/5", q2="6/5")
    assert rep.S <= 0
    assert "no gain" in rep.flags


def test_invalid_inputs():
    with pytest.raises(ConfigurationError):
        ExponentInput.make(alpha=-1)
    with pytest.raises(ConfigurationError):
        ExponentInput.make(p1="1/2")
    with pytest.raises(ConfigurationError):
        ExponentInput.make(n=0)


@given(alpha=fractions_)
def test_diperna_lions_agrees_at_two(alpha):
    s, r, t = diperna_lions_exponent(2, 2, alpha)
    assert s == compute_exponents(n=1, alpha=alpha, gamma="inf").S
    assert r == 2 and t == 2


@given(alpha=fractions_, g=st.integers(2, 10 ** 6))
def test_gamma_to_infinity_is_continuous(alpha, g):
    a = compute_exponents(n=1, alpha=alpha, gamma=g, p2=3, q2="3/2")
    b = compute_exponents(n=1, alpha=alpha, gamma="inf", p2=3, q2="3/2")
    # ell = (g-2)/(g-1) -> 1 so the loss terms approach their gamma = inf shape
    assert abs(a.S - b.S) <= Fraction(1, g - 1) * 2
    assert b.ell == 1


@settings(max_examples=60)
@given(alpha=fractions_, p2a=indices, p2b=indices, n=st.integers(1, 3))
def test_monotone_in_velocity_index(alpha, p2a, p2b, n):
    lo, hi = sorted([p2a, p2b], key=lambda p: -recip(p))
    s_lo = compute_exponents(n=n, alpha=alpha, p2=lo, q2=2).S
    s_hi = compute_exponents(n=n, alpha=alpha, p2=hi, q2=2).S
    assert s_hi >= s_lo


@settings(max_examples=60)
@given(a=fractions_, b=fractions_, p=indices, n=st.integers(1, 3))
def test_monotone_in_alpha(a, b, p, n):
    lo, hi = sorted([a, b])
    kw = dict(n=n, p1=2, p2=p, q1=2, q2=2)
    s_lo, s_hi = compute_exponents(alpha=lo, **kw), compute_exponents(alpha=hi, **kw)
    if s_lo.d2 <= 1:
        assert s_hi.S <= s_lo.S
    else:
        # without velocity gain a smaller theta only shrinks a negative S towards 0
        assert s_hi.S <= 0 and s_lo.S <= 0 and "no gain" in s_hi.flags


def test_competitor_formulas():
    # stationary mixed-norm result at n = 1, p2 = q2 = 2 gives 1/2 in L^p
    S, P, flags = westdickenberg_exponent("3/2", 2, 2, 1)
    assert S == Fraction(1, 2) and P == Fraction(3, 2) and flags == ()
    S, P, flags = westdickenberg_exponent("3/2", 2, 2, 3)
    assert P == INF and "P infinite" in flags
    with pytest.raises(ConfigurationError):
        westdickenberg_exponent(3, 2, 2, 2)
    assert arsenio_exponent("3/2", 2) == Fraction(1, 2)
    assert arsenio_exponent(2, 3) == Fraction(1, 2)
    with pytest.raises(ConfigurationError):
        arsenio_exponent(3, 1)


def test_embedding_and_interpolation():
    assert besov_embed(Fraction(1, 2), 2, 3, 1) == Fraction(1, 3)
    with pytest.raises(ConfigurationError):
        besov_embed(0, 3, 2, 1)
    s, p = interpolate((Fraction(1, 2), 2), (0, 4), Fraction(1, 2))
    assert s == Fraction(1, 4) and p == Fraction(8, 3)


@pytest.mark.parametrize("case", json.loads((GOLDEN / "compare_verdicts.json").read_text())["cases"],
                         ids=lambda c: c["label"])
def test_comparison_golden(case):
    rep = compare_theorems(**case["input"])
    c = rep.verdict(case["second"], case["setting"])
    assert c is not None, [x.to_dict() for x in rep.comparisons]
    assert c.verdict == case["verdict"]
    if case["s_tilde"] is not None:
        assert c.s_tilde == Fraction(case["s_tilde"])


def test_mixed_norm_embedding_hits_three_halves_minus_n():
    for n in range(2, 7):
        for p in (1 + Fraction(1, 2 * (n - 1)), 1 + Fraction(1, 3 * (n - 1))):
            c = compare_theorems(n=n, alpha=0, p=p).verdict("westdickenberg")
            assert c is not None and c.inputs["P"] != INF
            assert c.s_tilde == Fraction(3, 2) - n
            assert c.verdict == "implies"


def test_report_serializes():
    d = compare_theorems(n=1, alpha=0, p=3).to_dict()
    json.dumps(d)
    assert {e["name"] for e in d["entries"]} >= {"commutator", "diperna_lions"}
