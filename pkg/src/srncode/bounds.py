"""Failure-probability bounds and decoding-radius formulas.

Products over primes are evaluated in exact rationals. Only the
2^(-(l+1)(dmax - d)) prefactor is irrational in general; it is exact when
(l+1)(dmax - d) is an integer given as a Fraction or int.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .code import CodeParams
from .lattice import lll_beta
from .numtheory import factor_small

Real = float | Fraction | int


def _log2(x: Fraction | int) -> float:
    x = Fraction(x)
    return math.log2(x.numerator) - math.log2(x.denominator)


def check_beta(ell: int, beta: float) -> None:
    if not 1 <= beta < 3**ell:
        raise ValueError(f"beta = {beta} violates 1 <= beta < 3^l = {3**ell}")


def margin(params: CodeParams, beta: float) -> float:
    """log2(N / (6 F G beta)) = log2(N / 2FG) - log2(3 beta)."""
    check_beta(params.ell, beta)
    return _log2(Fraction(params.N, 2 * params.F * params.G)) - math.log2(3 * beta)


def dmax_from_margin(ell: int, margin_value: Real, d_fixed: Real = 0) -> Real:
    """l/(l+1) (margin - 2 d_fixed); exact when the inputs are rational."""
    if isinstance(margin_value, (int, Fraction)) and isinstance(d_fixed, (int, Fraction)):
        return Fraction(ell, ell + 1) * (margin_value - 2 * d_fixed)
    return ell / (ell + 1) * (margin_value - 2 * d_fixed)


def dmax(params: CodeParams, beta: float | None = None) -> float:
    beta = lll_beta(params.ell + 1) if beta is None else beta
    return float(dmax_from_margin(params.ell, margin(params, beta)))


def dmax_hybrid(params: CodeParams, beta: float | None, d_u: Real) -> float:
    """Interleaved budget next to a fixed part of weight d_u; negative means infeasible."""
    beta = lll_beta(params.ell + 1) if beta is None else beta
    return float(dmax_from_margin(params.ell, margin(params, beta), d_u))


def dmax_badprimes(params: CodeParams, beta: float | None, d_v: Real) -> float:
    # Same shape as the hybrid budget with the valuation-error weight d_v.
    return dmax_hybrid(params, beta, d_v)


def fixed_part_limit(params: CodeParams, beta: float | None = None) -> float:
    """Largest admissible d_u (or d_v): log2 sqrt(N / (6 F G beta))."""
    beta = lll_beta(params.ell + 1) if beta is None else beta
    return margin(params, beta) / 2


def _factor(locator: int, params: CodeParams | None) -> dict[int, int]:
    if locator < 1:
        raise ValueError("locator must be a positive integer")
    if params is None:
        return factor_small(locator)
    exps = params.basis.exponents_of(locator)
    return {p: e for p, e in zip(params.basis.primes, exps) if e}


def locator_product(ell: int, factors: dict[int, int], denominator_shift: int) -> Fraction:
    """prod_p (1 - p^-(l + nu_p)) / (1 - p^-(l + shift))."""
    out = Fraction(1)
    for p, nu in factors.items():
        out *= (1 - Fraction(1, p ** (ell + nu))) / (1 - Fraction(1, p ** (ell + denominator_shift)))
    return out


def product_lemma_bound(n: int, p1: int, f_ell: int) -> Fraction:
    """1 / (1 - n / p1^f(l)); valid when n < p1^f(l)."""
    den = 1 - Fraction(n, p1**f_ell)
    if den <= 0:
        raise ValueError("lemma bound needs n < p1^f(l)")
    return 1 / den


@dataclass(frozen=True)
class BoundReport:
    kind: str  # "fixed" or "maximal" locator shape
    ell: int
    d: Real
    dmax: Real
    locator: int
    product: Fraction
    exponent: Real  # (l+1)(dmax - d)
    prefactor: float
    value: float
    exact: Fraction | None
    in_regime: bool
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "ell": self.ell,
            "d": float(self.d),
            "dmax": float(self.dmax),
            "locator": str(self.locator),
            "product": f"{self.product.numerator}/{self.product.denominator}",
            "exponent": float(self.exponent),
            "prefactor": self.prefactor,
            "bound": self.value,
            "bound_exact": None if self.exact is None else f"{self.exact.numerator}/{self.exact.denominator}",
            "in_regime": self.in_regime,
            "notes": list(self.notes),
        }


def _report(kind: str, params, d: Real, locator: int, dmax_variant: Real, shift) -> BoundReport:
    if isinstance(params, CodeParams):
        ell, fparams = params.ell, params
    else:
        ell, fparams = int(params), None
    factors = _factor(locator, fparams)
    prod = locator_product(ell, factors, shift(factors))
    exponent = (ell + 1) * (dmax_variant - d)
    notes = []
    in_regime = True
    if d > dmax_variant:
        in_regime = False
        notes.append("d exceeds the distance budget")
    if locator > 1 and math.log2(locator) > d + 1e-12:
        in_regime = False
        notes.append("log2(locator) exceeds d")
    exact = None
    if isinstance(exponent, (int, Fraction)) and Fraction(exponent).denominator == 1:
        k = int(exponent)
        exact = prod * (Fraction(1, 2**k) if k >= 0 else 2 ** (-k))
        prefactor = math.ldexp(1.0, -k)
    else:
        prefactor = 2.0 ** (-float(exponent))
    value = float(exact) if exact is not None else prefactor * float(prod)
    return BoundReport(kind, ell, d, dmax_variant, locator, prod, exponent, prefactor, value, exact, in_regime, tuple(notes))


def failure_bound_fixed_locator(params, d: Real, locator: int, dmax_variant: Real) -> BoundReport:
    """Bound for uniform errors at an exact (interleaved) locator.

    ``params`` may be CodeParams (locator factored over the basis) or just l.
    For hybrid and bad-prime runs pass d_i or d_e and the matching budget.
    """
    return _report("fixed", params, d, locator, dmax_variant, lambda f: 0)


def failure_bound_max_locator(params, d: Real, max_locator: int, dmax_variant: Real) -> BoundReport:
    return _report("maximal", params, d, max_locator, dmax_variant, lambda f: 1)


def divisor_sum_identity(Lambda: int, f: Callable[[int, int], Fraction | int]) -> tuple:
    """(sum over eta | Lambda of prod_{p | eta} f(p, nu_p(eta)),
        prod_{p | Lambda} (1 + sum_{k=1}^{nu_p(Lambda)} f(p, k)))."""
    factors = sorted(factor_small(Lambda).items()) if Lambda > 1 else []
    # Left side by explicit enumeration of divisors.
    divisors = [dict()]
    for p, a in factors:
        divisors = [{**dv, p: k} for dv in divisors for k in range(a + 1)]
    lhs = 0
    for dv in divisors:
        term = 1
        for p, k in dv.items():
            if k:
                term *= f(p, k)
        lhs += term
    rhs = 1
    for p, a in factors:
        rhs *= 1 + sum(f(p, k) for k in range(1, a + 1))
    return lhs, rhs
