import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import divisors
from srncode.bounds import (
    check_beta,
    divisor_sum_identity,
    dmax,
    dmax_badprimes,
    dmax_from_margin,
    dmax_hybrid,
    failure_bound_fixed_locator,
    failure_bound_max_locator,
    fixed_part_limit,
    locator_product,
    margin,
    product_lemma_bound,
)
from srncode.code import CodeParams
from srncode.numtheory import PrimePowerBasis, factor_small


def oracle_bound(ell, gap, Lambda, shift):
    # gap = dmax - d, assumed integral after multiplying by (l+1)
    prod = Fraction(1)
    for p in (q for q in range(2, Lambda + 1) if Lambda % q == 0 and all(q % r for r in range(2, q))):
        nu = 0
        x = Lambda
        while x % p == 0:
            x //= p
            nu += 1
        prod *= (1 - Fraction(1, p ** (ell + nu))) / (1 - Fraction(1, p ** (ell + shift)))
    k = (ell + 1) * gap
    return prod / 2**k


def test_dmax_examples():
    assert dmax_from_margin(4, 20) == 16
    assert dmax_from_margin(4, 200, 50) == 80
    assert dmax_from_margin(4, 200, 100) == 0
    params = CodeParams(1, 1, 2, PrimePowerBasis((3,), (21,)))
    # N / 2FG = 3^21 / 4 here; compare against direct evaluation.
    want = 0.5 * (math.log2(3**21 / 4) - math.log2(3))
    assert dmax(params, beta=1) == pytest.approx(want, rel=1e-12)
    assert margin(params, 1) == pytest.approx(math.log2(3**21 / 4) - math.log2(3))


def test_dmax_direct_thirty_bits():
    # N = 2^30 * 2FG, beta = 1, l = 1
    assert float(dmax_from_margin(1, 30 - math.log2(3))) == pytest.approx(14.2075, abs=1e-4)


def test_hybrid_and_bad_prime_budgets():
    params = CodeParams(2, 100, 100, PrimePowerBasis((101, 103, 107, 109, 113, 127), (1,) * 6))
    assert dmax_hybrid(params, None, 0) == pytest.approx(dmax(params))
    assert dmax_badprimes(params, None, 3) == dmax_hybrid(params, None, 3)
    lim = fixed_part_limit(params)
    assert dmax_hybrid(params, None, lim) == pytest.approx(0, abs=1e-9)
    assert dmax_hybrid(params, None, lim + 1) < 0
    with pytest.raises(ValueError):
        check_beta(2, 9)


def test_fixed_locator_examples():
    assert failure_bound_fixed_locator(1, Fraction(0), 2, Fraction(2)).exact == Fraction(3, 32)
    assert failure_bound_fixed_locator(1, 0, 2, 2).exact == oracle_bound(1, 2, 2, 0)
    r = failure_bound_fixed_locator(3, 1, 1, 3)
    assert r.exact == Fraction(1, 2**8)
    assert r.in_regime


def test_max_locator_examples():
    assert failure_bound_max_locator(1, 2, 4, 5).exact == Fraction(7, 384)
    assert failure_bound_max_locator(2, 1, 1, 2).exact == Fraction(1, 8)
    # Square-free locator with d = 10 against d-bar = 16 at l = 4: exactly 2^-30.
    for lam in (3 * 5 * 7, 101 * 103, 2 * 3 * 5 * 7 * 11 * 13):
        r = failure_bound_max_locator(4, 10, lam, 16)
        assert r.exact == Fraction(1, 2**30)
        assert r.value < 2**-30 + 1e-24


def test_out_of_regime_is_flagged_not_clamped():
    r = failure_bound_fixed_locator(2, 5, 1, 3)
    assert not r.in_regime and r.value == 64.0  # 2^(3 * 2), not clamped to 1
    r = failure_bound_fixed_locator(2, 1, 16, 3)
    assert not r.in_regime and "locator" in r.notes[0]


def test_bound_with_code_params_factors_over_basis():
    params = CodeParams(2, 3, 3, PrimePowerBasis((2, 3, 5, 7), (2, 1, 1, 1)))
    r = failure_bound_fixed_locator(params, 4, 12, 6)
    assert r.exact == oracle_bound(2, 2, 12, 0)
    with pytest.raises(ValueError):
        failure_bound_fixed_locator(params, 4, 11, 6)


@given(st.integers(1, 3000), st.integers(1, 5))
def test_bounds_match_oracle_product(Lambda, ell):
    assert failure_bound_fixed_locator(ell, 0, Lambda, 1).exact == oracle_bound(ell, 1, Lambda, 0)
    assert failure_bound_max_locator(ell, 0, Lambda, 1).exact == oracle_bound(ell, 1, Lambda, 1)


@given(st.integers(2, 5000), st.integers(1, 4))
def test_product_lemma_dominates(Lambda, ell):
    f = factor_small(Lambda)
    n, p1 = len(f), min(f)
    if n >= p1**ell:
        return
    lemma = product_lemma_bound(n, p1, ell)
    assert locator_product(ell, f, 0) <= lemma
    assert locator_product(ell, f, 1) <= product_lemma_bound(n, p1, ell + 1) if n < p1 ** (ell + 1) else True


@given(st.integers(1, 4), st.fractions(0, 10), st.fractions(0, 10), st.integers(1, 500))
def test_bounds_monotone_in_d(ell, d1, d2, Lambda):
    lo, hi = min(d1, d2), max(d1, d2)
    for fn in (failure_bound_fixed_locator, failure_bound_max_locator):
        assert fn(ell, lo, Lambda, 10).value <= fn(ell, hi, Lambda, 10).value


def test_zero_fixed_part_collapses_to_plain_budget():
    params = CodeParams(2, 50, 50, PrimePowerBasis((53, 59, 61, 67, 71), (1, 2, 1, 1, 1)))
    a = failure_bound_fixed_locator(params, 2, 53, dmax(params))
    b = failure_bound_fixed_locator(params, 2, 53, dmax_hybrid(params, None, 0))
    assert a.value == pytest.approx(b.value) and a.product == b.product


def test_divisor_sum_examples():
    assert divisor_sum_identity(12, lambda p, k: p**k) == (28, 28)
    assert sum(divisors(12)) == 28
    assert divisor_sum_identity(1, lambda p, k: 99) == (1, 1)
    assert divisor_sum_identity(13, lambda p, k: Fraction(5, 7)) == (Fraction(12, 7), Fraction(12, 7))


@given(st.integers(1, 2000), st.integers(1, 3))
def test_divisor_sum_identity_property(Lambda, ell):
    def f(p, k):
        return (1 - Fraction(1, p)) * Fraction(p) ** k / (1 - Fraction(1, p**ell))

    lhs, rhs = divisor_sum_identity(Lambda, f)
    assert lhs == rhs
    # Independent left side from plain divisor enumeration.
    direct = sum(
        math.prod((f(p, e) for p, e in factor_small(d).items()), start=Fraction(1)) for d in divisors(Lambda)
    )
    assert direct == lhs
