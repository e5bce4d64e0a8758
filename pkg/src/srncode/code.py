"""Simultaneous rational number codes over prime-power moduli.

Two encodings live here:

* :func:`encode` maps a reduced fraction vector f/g with gcd(g, N) = 1 to
  the l x n matrix of residues f_i / g mod p_j^l_j.
* :func:`encode_multiprecision` handles denominators sharing primes with N.
  Column j becomes the pair (nu_j(g), f / (g / p_j^nu_j(g)) mod
  p_j^(l_j - nu_j(g))).

Residues are always stored in canonical form ``[0, modulus)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Sequence

from .numtheory import (
    PrimePowerBasis,
    crt,
    mod_inverse,
    truncated_valuation,
    vector_valuation,
)


class CodeError(ValueError):
    """Base class for invalid code inputs."""


class BadDenominator(CodeError):
    """The denominator shares a prime with N; use the multi-precision encoding."""


class BoundViolation(CodeError):
    """A fraction vector violates |f_i| < F or 0 < g < G."""


class ShapeMismatch(CodeError):
    pass


def _gcd_all(values) -> int:
    return reduce(math.gcd, values, 0)


@dataclass(frozen=True)
class CodeParams:
    ell: int
    numerator_bound: int
    denominator_bound: int
    basis: PrimePowerBasis
    regime: str = field(init=False, compare=False)

    def __post_init__(self):
        if self.ell < 1:
            raise CodeError("interleaving count must be >= 1")
        F, G = self.numerator_bound, self.denominator_bound
        if F <= 0 or G <= 0:
            raise CodeError("bounds F, G must be positive")
        N = self.basis.modulus
        if 2 * F * G < N:
            regime = "strict"
        elif 2 * F * G == N:
            # Enough for injectivity of the multi-precision encoding only.
            regime = "boundary"
        else:
            raise CodeError(f"2FG = {2 * F * G} exceeds N = {N}")
        object.__setattr__(self, "regime", regime)

    @property
    def F(self) -> int:
        return self.numerator_bound

    @property
    def G(self) -> int:
        return self.denominator_bound

    @property
    def N(self) -> int:
        return self.basis.modulus

    def to_json(self) -> dict:
        return {
            **self.basis.to_json(),
            "ell": self.ell,
            "F": str(self.numerator_bound),
            "G": str(self.denominator_bound),
        }

    @classmethod
    def from_json(cls, obj: dict) -> CodeParams:
        basis = PrimePowerBasis(
            tuple(int(p) for p in obj["primes"]),
            tuple(int(m) for m in obj["mults"]),
            trust_large=bool(obj.get("trust_large", False)),
        )
        return cls(int(obj["ell"]), int(obj["F"]), int(obj["G"]), basis)


@dataclass(frozen=True)
class FractionVector:
    """Reduced vector (f_1/g, ..., f_l/g) with a positive common denominator."""

    numerators: tuple[int, ...]
    denominator: int

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(int(f) for f in self.numerators))
        object.__setattr__(self, "denominator", int(self.denominator))
        if not self.numerators:
            raise CodeError("fraction vector needs at least one entry")
        if self.denominator <= 0:
            raise CodeError("denominator must be positive")
        if _gcd_all(self.numerators + (self.denominator,)) != 1:
            raise CodeError("fraction vector is not reduced")

    @classmethod
    def from_fractions(cls, values: Sequence[Fraction | int]) -> FractionVector:
        values = [Fraction(v) for v in values]
        g = math.lcm(*(v.denominator for v in values))
        nums = [v.numerator * (g // v.denominator) for v in values]
        # A common factor can survive only through g, already minimal.
        return cls(tuple(nums), g)

    @property
    def ell(self) -> int:
        return len(self.numerators)

    def fractions(self) -> list[Fraction]:
        return [Fraction(f, self.denominator) for f in self.numerators]

    def check_bounds(self, params: CodeParams) -> None:
        if self.ell != params.ell:
            raise ShapeMismatch(f"expected {params.ell} entries, got {self.ell}")
        if any(abs(f) >= params.F for f in self.numerators):
            raise BoundViolation(f"some |f_i| >= F = {params.F}")
        if not 0 < self.denominator < params.G:
            raise BoundViolation(f"denominator {self.denominator} not in (0, {params.G})")

    def to_json(self) -> dict:
        return {
            "numerators": [str(f) for f in self.numerators],
            "denominator": str(self.denominator),
        }

    @classmethod
    def from_json(cls, obj: dict) -> FractionVector:
        return cls(tuple(int(f) for f in obj["numerators"]), int(obj["denominator"]))


def _check_columns(basis: PrimePowerBasis, columns) -> tuple[tuple[int, ...], ...]:
    if len(columns) != basis.n:
        raise ShapeMismatch(f"expected {basis.n} columns, got {len(columns)}")
    out = tuple(tuple(int(x) % q for x in col) for col, q in zip(columns, basis.moduli))
    widths = {len(c) for c in out}
    if len(widths) != 1 or 0 in widths:
        raise ShapeMismatch("columns must all have the same nonzero length")
    return out


@dataclass(frozen=True)
class ReceivedWord:
    """An element of prod_j (Z/p_j^l_j)^l, stored column by column.

    Error matrices share this type, so words support ``+``, ``-`` and negation.
    """

    basis: PrimePowerBasis
    columns: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", _check_columns(self.basis, self.columns))

    @classmethod
    def from_interpolants(cls, basis: PrimePowerBasis, values: Sequence[int]) -> ReceivedWord:
        cols = tuple(tuple(v % q for v in values) for q in basis.moduli)
        return cls(basis, cols)

    @classmethod
    def zero(cls, basis: PrimePowerBasis, ell: int) -> ReceivedWord:
        return cls(basis, tuple((0,) * ell for _ in range(basis.n)))

    @property
    def ell(self) -> int:
        return len(self.columns[0])

    @cached_property
    def interpolants(self) -> tuple[int, ...]:
        moduli = self.basis.moduli
        return tuple(
            crt([col[i] for col in self.columns], moduli) for i in range(self.ell)
        )

    def _combine(self, other: ReceivedWord, sign: int) -> ReceivedWord:
        if other.basis != self.basis or other.ell != self.ell:
            raise ShapeMismatch("words live in different spaces")
        cols = tuple(
            tuple(a + sign * b for a, b in zip(c1, c2))
            for c1, c2 in zip(self.columns, other.columns)
        )
        return ReceivedWord(self.basis, cols)

    def __add__(self, other: ReceivedWord) -> ReceivedWord:
        return self._combine(other, 1)

    def __sub__(self, other: ReceivedWord) -> ReceivedWord:
        return self._combine(other, -1)

    def __neg__(self) -> ReceivedWord:
        return ReceivedWord(self.basis, tuple(tuple(-x for x in c) for c in self.columns))

    def to_json(self) -> dict:
        return {"columns": [[str(x) for x in col] for col in self.columns]}

    @classmethod
    def from_json(cls, basis: PrimePowerBasis, obj: dict) -> ReceivedWord:
        return cls(basis, tuple(tuple(int(x) for x in col) for col in obj["columns"]))


@dataclass(frozen=True)
class MultiPrecisionWord:
    """Per column a pair (valuation rho_j, residue column mod p_j^l_j).

    Representatives need not be reduced; :func:`reduce_representative`
    produces the reduced one.
    """

    basis: PrimePowerBasis
    valuations: tuple[int, ...]
    columns: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", _check_columns(self.basis, self.columns))
        vals = tuple(int(v) for v in self.valuations)
        if len(vals) != self.basis.n:
            raise ShapeMismatch("one valuation per column is required")
        if any(not 0 <= v <= lam for v, lam in zip(vals, self.basis.mults)):
            raise CodeError("valuations must lie in [0, multiplicity]")
        object.__setattr__(self, "valuations", vals)

    @property
    def ell(self) -> int:
        return len(self.columns[0])

    @property
    def pairs(self):
        return list(zip(self.valuations, self.columns))

    @cached_property
    def is_reduced(self) -> bool:
        for rho, col, p in zip(self.valuations, self.columns, self.basis.primes):
            if rho > 0 and all(x % p == 0 for x in col):
                return False
        return True

    @cached_property
    def interpolants(self) -> tuple[int, ...]:
        moduli = self.basis.moduli
        return tuple(
            crt([col[i] for col in self.columns], moduli) for i in range(self.ell)
        )

    def to_json(self) -> dict:
        return {
            "columns": [
                {"valuation": rho, "residues": [str(x) for x in col]}
                for rho, col in self.pairs
            ]
        }

    @classmethod
    def from_json(cls, basis: PrimePowerBasis, obj: dict) -> MultiPrecisionWord:
        cols = obj["columns"]
        return cls(
            basis,
            tuple(int(c["valuation"]) for c in cols),
            tuple(tuple(int(x) for x in c["residues"]) for c in cols),
        )


@dataclass(frozen=True)
class ErrorLocator:
    lam: int
    truth: int
    mus: tuple[int, ...]
    support: frozenset[int]

    @property
    def distance(self) -> float:
        return math.log2(self.lam)


def _locator_from_mus(basis: PrimePowerBasis, mus: Sequence[int]) -> ErrorLocator:
    lam = math.prod(p ** (m - mu) for p, m, mu in zip(basis.primes, basis.mults, mus))
    support = frozenset(j for j, (mu, m) in enumerate(zip(mus, basis.mults)) if mu < m)
    return ErrorLocator(lam, basis.modulus // lam, tuple(mus), support)


def encode_residues(fv: FractionVector, basis: PrimePowerBasis) -> ReceivedWord:
    """Residue map f_i / g mod p_j^l_j without the F, G bound check."""
    if math.gcd(fv.denominator, basis.modulus) != 1:
        raise BadDenominator(f"gcd({fv.denominator}, N) != 1")
    cols = []
    for q in basis.moduli:
        inv = mod_inverse(fv.denominator, q)
        cols.append(tuple(f * inv % q for f in fv.numerators))
    return ReceivedWord(basis, tuple(cols))


def encode(fv: FractionVector, params: CodeParams) -> ReceivedWord:
    fv.check_bounds(params)
    return encode_residues(fv, params.basis)


def multiprecision_column(fv: FractionVector, p: int, lam: int) -> tuple[int, tuple[int, ...]]:
    """(nu_p(g), S_p(f/g)) for one prime power; S is all ones when nu = lam."""
    rho = truncated_valuation(fv.denominator, p, lam)
    if rho == lam:
        return rho, (1,) * fv.ell
    q = p ** (lam - rho)
    unit = fv.denominator // p**rho
    inv = mod_inverse(unit, q)
    return rho, tuple(f * inv % q for f in fv.numerators)


def multiprecision_residues(fv: FractionVector, basis: PrimePowerBasis) -> MultiPrecisionWord:
    """Multi-precision map without the F, G bound check."""
    vals, cols = [], []
    for p, lam in zip(basis.primes, basis.mults):
        rho, col = multiprecision_column(fv, p, lam)
        vals.append(rho)
        cols.append(col)
    return MultiPrecisionWord(basis, tuple(vals), tuple(cols))


def encode_multiprecision(fv: FractionVector, params: CodeParams) -> MultiPrecisionWord:
    fv.check_bounds(params)
    return multiprecision_residues(fv, params.basis)


def error_locator(w1: ReceivedWord, w2: ReceivedWord) -> ErrorLocator:
    if w1.basis != w2.basis or w1.ell != w2.ell:
        raise ShapeMismatch("words live in different spaces")
    basis = w1.basis
    mus = []
    for c1, c2, p, lam in zip(w1.columns, w2.columns, basis.primes, basis.mults):
        if c1 == c2:
            mus.append(lam)
        else:
            mus.append(vector_valuation([a - b for a, b in zip(c1, c2)], p, lam))
    return _locator_from_mus(basis, mus)


def distance(w1: ReceivedWord, w2: ReceivedWord) -> float:
    """Weighted distance log2(Lambda); exact comparisons should use the locator."""
    return error_locator(w1, w2).distance


def bad_prime_error_matrix(
    w1: MultiPrecisionWord, w2: MultiPrecisionWord
) -> tuple[list[tuple[int, ...]], ErrorLocator]:
    """Columns e_j = p^rho_j r'_j - p^rho'_j r_j mod p^l_j and their locator."""
    if w1.basis != w2.basis or w1.ell != w2.ell:
        raise ShapeMismatch("words live in different spaces")
    if not (w1.is_reduced and w2.is_reduced):
        raise CodeError("bad-prime distance is defined on reduced representatives")
    basis = w1.basis
    errors, mus = [], []
    for (r1, c1), (r2, c2), p, lam, q in zip(
        w1.pairs, w2.pairs, basis.primes, basis.mults, basis.moduli
    ):
        e = tuple((p**r1 * b - p**r2 * a) % q for a, b in zip(c1, c2))
        errors.append(e)
        mus.append(vector_valuation(e, p, lam))
    return errors, _locator_from_mus(basis, mus)


def bad_prime_locator(w1: MultiPrecisionWord, w2: MultiPrecisionWord) -> ErrorLocator:
    return bad_prime_error_matrix(w1, w2)[1]


def is_equivalent(w1: MultiPrecisionWord, w2: MultiPrecisionWord) -> bool:
    if w1.basis != w2.basis or w1.ell != w2.ell:
        return False
    for (r1, c1), (r2, c2), p, q in zip(w1.pairs, w2.pairs, w1.basis.primes, w1.basis.moduli):
        if any((p**r2 * a - p**r1 * b) % q for a, b in zip(c1, c2)):
            return False
    return True


def reduce_representative(w: MultiPrecisionWord) -> MultiPrecisionWord:
    """Divide out gcd(col_j, p_j^rho_j) column by column.

    A zero column at full valuation (rho = lambda) is degenerate: every
    column with rho = lambda is equivalent to it, so it is mapped to the
    conventional all-ones column.
    """
    basis = w.basis
    if w.is_reduced:
        return w
    vals, cols = [], []
    for (rho, col), p, lam in zip(w.pairs, basis.primes, basis.mults):
        if rho == lam and all(x == 0 for x in col):
            vals.append(lam)
            cols.append((1,) * len(col))
            continue
        eta = min(rho, vector_valuation(col, p, lam))
        d = p**eta
        vals.append(rho - eta)
        cols.append(tuple(x // d for x in col))
    return MultiPrecisionWord(basis, tuple(vals), tuple(cols))


def min_distance_lower_bound(params: CodeParams) -> float:
    """log2(N / 2FG): every pair of distinct codewords is strictly farther apart."""
    return math.log2(Fraction(params.N, 2 * params.F * params.G))
