"""Uniform error and received-word samplers, plus the counting formulas behind them.

Randomness comes from numpy's counter-based Philox generator. Each
(seed, trial, column) triple owns an independent substream, so results do not
depend on sampling order or on how trials are spread across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .code import (
    CodeError,
    CodeParams,
    FractionVector,
    MultiPrecisionWord,
    ReceivedWord,
    multiprecision_column,
)
from .numtheory import PrimePowerBasis, factor_small, vector_valuation

MODELS = ("exact", "maximal")

# Stream id used for codeword planting; column streams use 0..n-1.
PLANT_STREAM = 2**32 - 1


def substream(seed: int, trial: int, column: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, column])))


_I64 = 2**63


def uniform_below(rng: np.random.Generator, q: int) -> int:
    """Uniform integer in [0, q) for arbitrary-size q."""
    if q <= 0:
        raise ValueError("upper bound must be positive")
    if q < _I64:
        return int(rng.integers(0, q))
    nbits = (q - 1).bit_length()
    nwords = (nbits + 63) // 64
    excess = nwords * 64 - nbits
    while True:
        words = rng.integers(0, 2**64, size=nwords, dtype=np.uint64)
        x = 0
        for w in words:
            x = (x << 64) | int(w)
        x >>= excess
        if x < q:
            return x


def uniform_vector(rng, q: int, ell: int) -> tuple[int, ...]:
    return tuple(uniform_below(rng, q) for _ in range(ell))


def uniform_unit_vector(rng, p: int, k: int, ell: int) -> tuple[int, ...]:
    """Uniform in (Z/p^k)^ell conditioned on some entry being a unit (rejection)."""
    q = p**k
    while True:
        c = uniform_vector(rng, q, ell)
        if any(x % p for x in c):
            return c


def _exps_of(basis: PrimePowerBasis, locator) -> tuple[int, ...]:
    if isinstance(locator, int):
        return basis.exponents_of(locator)
    exps = tuple(int(e) for e in locator)
    basis.from_exponents(exps)  # validates range
    return exps


@dataclass(frozen=True)
class LocatorSpec:
    """Exponent vectors of the random part (Lambda, Lambda_m, Lambda_i, Lambda_e, ...)
    and of the fixed part (Lambda_u or Lambda_v). Supports must be disjoint."""

    basis: PrimePowerBasis
    random_exps: tuple[int, ...]
    fixed_exps: tuple[int, ...] = ()

    def __post_init__(self):
        n = self.basis.n
        rnd = tuple(int(e) for e in self.random_exps)
        fix = tuple(int(e) for e in self.fixed_exps) or (0,) * n
        if len(rnd) != n or len(fix) != n:
            raise CodeError("exponent vectors must have one entry per prime")
        for e, m in zip(rnd + fix, self.basis.mults * 2):
            if not 0 <= e <= m:
                raise CodeError("exponents must lie in [0, multiplicity]")
        if any(a and b for a, b in zip(rnd, fix)):
            raise CodeError("fixed and random supports overlap")
        object.__setattr__(self, "random_exps", rnd)
        object.__setattr__(self, "fixed_exps", fix)

    @classmethod
    def from_locators(cls, basis: PrimePowerBasis, random: int, fixed: int = 1) -> LocatorSpec:
        return cls(basis, basis.exponents_of(random), basis.exponents_of(fixed))

    @property
    def random_locator(self) -> int:
        return self.basis.from_exponents(self.random_exps)

    @property
    def fixed_locator(self) -> int:
        return self.basis.from_exponents(self.fixed_exps)

    @property
    def random_support(self) -> tuple[int, ...]:
        return tuple(j for j, e in enumerate(self.random_exps) if e)

    @property
    def fixed_support(self) -> tuple[int, ...]:
        return tuple(j for j, e in enumerate(self.fixed_exps) if e)

    def to_json(self) -> dict:
        return {"random": list(self.random_exps), "fixed": list(self.fixed_exps)}


@dataclass(frozen=True)
class PartialColumn:
    """Fixed received pair (rho_bar, residues) on a valuation-error column.

    ``residues=None`` asks the sampler to draw a uniform reduced residue
    column, which is only meaningful when rho_bar < nu_p(g).
    """

    rho_bar: int
    residues: tuple[int, ...] | None = None


@dataclass
class FixedErrorPart:
    """Hybrid plain case: error columns eps_j. Bad-prime case: partial words."""

    columns: Mapping[int, tuple[int, ...]] = field(default_factory=dict)
    partial: Mapping[int, PartialColumn] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "columns": {str(j): [str(x) for x in c] for j, c in self.columns.items()},
            "partial": {
                str(j): {
                    "rho_bar": pc.rho_bar,
                    "residues": None if pc.residues is None else [str(x) for x in pc.residues],
                }
                for j, pc in self.partial.items()
            },
        }

    @classmethod
    def from_json(cls, obj: dict | None) -> FixedErrorPart:
        obj = obj or {}
        cols = {int(j): tuple(int(x) for x in c) for j, c in obj.get("columns", {}).items()}
        partial = {}
        for j, pc in obj.get("partial", {}).items():
            res = pc.get("residues")
            partial[int(j)] = PartialColumn(
                int(pc["rho_bar"]), None if res is None else tuple(int(x) for x in res)
            )
        return cls(cols, partial)


def _random_columns(
    basis: PrimePowerBasis, ell: int, exps: Sequence[int], model: str, seed: int, trial: int
) -> dict[int, tuple[int, ...]]:
    """Error columns p^(lam - e) c with c uniform (unit-containing when exact)."""
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    out = {}
    for j, e in enumerate(exps):
        if not e:
            continue
        p, lam = basis.primes[j], basis.mults[j]
        rng = substream(seed, trial, j)
        if model == "exact":
            c = uniform_unit_vector(rng, p, e, ell)
        else:
            c = uniform_vector(rng, p**e, ell)
        shift = p ** (lam - e)
        out[j] = tuple(shift * x for x in c)
    return out


def _assemble(basis: PrimePowerBasis, ell: int, cols: Mapping[int, tuple[int, ...]]) -> ReceivedWord:
    zero = (0,) * ell
    return ReceivedWord(basis, tuple(cols.get(j, zero) for j in range(basis.n)))


def sample_err1(params: CodeParams, locator, seed: int, trial: int = 0) -> ReceivedWord:
    """Uniform error with locator exactly Lambda (column valuations lam_j - nu_j(Lambda))."""
    exps = _exps_of(params.basis, locator)
    cols = _random_columns(params.basis, params.ell, exps, "exact", seed, trial)
    return _assemble(params.basis, params.ell, cols)


def sample_err2(params: CodeParams, max_locator, seed: int, trial: int = 0) -> ReceivedWord:
    """Uniform error whose locator divides Lambda_m."""
    exps = _exps_of(params.basis, max_locator)
    cols = _random_columns(params.basis, params.ell, exps, "maximal", seed, trial)
    return _assemble(params.basis, params.ell, cols)


def validate_hybrid_fixed(params: CodeParams, spec: LocatorSpec, fixed: FixedErrorPart) -> None:
    basis = params.basis
    if set(fixed.columns) != set(spec.fixed_support):
        raise CodeError("fixed columns must cover exactly the fixed support")
    for j, eps in fixed.columns.items():
        if len(eps) != params.ell:
            raise CodeError(f"fixed column {j} has the wrong length")
        lam = basis.mults[j]
        want = lam - spec.fixed_exps[j]
        if vector_valuation(eps, basis.primes[j], lam) != want:
            raise CodeError(f"fixed column {j} must have valuation exactly {want}")


def sample_hybrid(
    params: CodeParams,
    spec: LocatorSpec,
    fixed: FixedErrorPart,
    model: str,
    seed: int,
    trial: int = 0,
) -> ReceivedWord:
    validate_hybrid_fixed(params, spec, fixed)
    cols = _random_columns(params.basis, params.ell, spec.random_exps, model, seed, trial)
    cols.update({j: tuple(c) for j, c in fixed.columns.items()})
    return _assemble(params.basis, params.ell, cols)


def validate_badprime(params: CodeParams, fv: FractionVector, spec: LocatorSpec, fixed: FixedErrorPart) -> None:
    basis = params.basis
    if set(fixed.partial) != set(spec.fixed_support):
        raise CodeError("partial words must cover exactly the valuation-error support")
    for j in range(basis.n):
        p, lam = basis.primes[j], basis.mults[j]
        nu_g = min(_val(fv.denominator, p), lam)
        if spec.random_exps[j]:
            mu = lam - spec.random_exps[j]
            if mu < nu_g:
                raise CodeError(f"evaluation error at column {j} needs mu >= nu_p(g) = {nu_g}")
        if spec.fixed_exps[j]:
            mu = lam - spec.fixed_exps[j]
            if mu > nu_g:
                raise CodeError(f"valuation error at column {j} needs mu <= nu_p(g) = {nu_g}")
            pc = fixed.partial[j]
            if mu < nu_g and pc.rho_bar != mu:
                raise CodeError(f"column {j}: rho_bar must equal mu = {mu}")
            if mu == nu_g and not nu_g < pc.rho_bar <= lam:
                raise CodeError(f"column {j}: rho_bar must exceed nu_p(g) = {nu_g}")
            if pc.residues is None and pc.rho_bar >= nu_g:
                raise CodeError(f"column {j}: random residues only allowed when rho_bar < nu_p(g)")
            if pc.residues is not None:
                if len(pc.residues) != params.ell:
                    raise CodeError(f"partial column {j} has the wrong length")
                if pc.rho_bar and pc.rho_bar < lam and all(x % p == 0 for x in pc.residues):
                    raise CodeError(f"partial column {j} is not reduced")


def _val(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def sample_badprime(
    params: CodeParams,
    fv: FractionVector,
    spec: LocatorSpec,
    fixed: FixedErrorPart,
    model: str,
    seed: int,
    trial: int = 0,
) -> MultiPrecisionWord:
    """Received word around the multi-precision encoding of fv.

    random_exps describe evaluation errors (Lambda_e or Lambda_{m,e}),
    fixed_exps the valuation errors (Lambda_v) realized by fixed partial words.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    validate_badprime(params, fv, spec, fixed)
    basis, ell = params.basis, params.ell
    vals, cols = [], []
    for j in range(basis.n):
        p, lam = basis.primes[j], basis.mults[j]
        rho, s = multiprecision_column(fv, p, lam)
        if spec.fixed_exps[j]:
            pc = fixed.partial[j]
            rho = pc.rho_bar
            if pc.residues is not None:
                s = tuple(pc.residues)
            elif rho == lam:
                s = (1,) * ell
            else:
                rng = substream(seed, trial, j)
                k = lam - rho
                s = uniform_unit_vector(rng, p, k, ell) if rho else uniform_vector(rng, p**k, ell)
        elif spec.random_exps[j]:
            e = spec.random_exps[j]
            mu = lam - e
            rng = substream(seed, trial, j)
            c = uniform_unit_vector(rng, p, e, ell) if model == "exact" else uniform_vector(rng, p**e, ell)
            q = p ** (lam - rho)
            shift = p ** (mu - rho)
            s = tuple((x + shift * y) % q for x, y in zip(s, c))
        vals.append(rho)
        cols.append(s)
    return MultiPrecisionWord(basis, tuple(vals), tuple(cols))


def apply_error(codeword: ReceivedWord, E: ReceivedWord) -> ReceivedWord:
    return codeword + E


def count_omega(Lambda: int, eta: int, ell: int) -> int:
    """#{(F_1..F_l) in (Z/Lambda)^l : gcd(F_1, ..., F_l, Lambda) = eta}."""
    if Lambda < 1 or eta < 1 or Lambda % eta:
        raise ValueError("eta must be a positive divisor of Lambda")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    out = 1
    for p, a in factor_small(Lambda // eta).items():
        out *= p ** (a * ell) - p ** ((a - 1) * ell)
    return out


def locator_probability_err2(Lambda: int, Lambda_m: int, ell: int) -> Fraction:
    """P(locator = Lambda) for a model-2 error with maximal locator Lambda_m."""
    if Lambda_m % Lambda:
        return Fraction(0)
    return Fraction(count_omega(Lambda, 1, ell), Lambda_m**ell)
