"""Integer number theory helpers: truncated valuations, CRT, inverses.

Everything here works on Python's arbitrary precision integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

# Deterministic Miller-Rabin witnesses, valid for n < 3.3e24 (covers 2**64).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


class NoInverse(ArithmeticError):
    """Raised when an element is not invertible modulo m."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test for n below ~3.3e24.

    Above that limit the same witness set is used and the answer is only
    probabilistic; callers that need certainty must check `n < 2**64`.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_from(floor: int, count: int) -> list[int]:
    """The first `count` primes that are >= floor."""
    out = []
    n = max(floor, 2)
    while len(out) < count:
        if is_prime(n):
            out.append(n)
        n += 1
    return out


def factor_small(n: int) -> dict[int, int]:
    """Trial-division factorization; meant for small n (locators, tests)."""
    if n < 1:
        raise ValueError("factor_small expects a positive integer")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def valuation(x: int, p: int) -> int | None:
    """Exact p-adic valuation; None stands for +infinity (x = 0)."""
    if x == 0:
        return None
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def truncated_valuation(x: int, p: int, lam: int) -> int:
    """min(Val_p(x), lam), with Val_p(0) = infinity."""
    if lam < 1:
        raise ValueError("multiplicity must be >= 1")
    v = 0
    x %= p**lam
    if x == 0:
        return lam
    while x % p == 0:
        x //= p
        v += 1
    return v


def vector_valuation(v: Sequence[int], p: int, lam: int) -> int:
    """Minimum truncated valuation over the entries of v."""
    if len(v) == 0:
        raise ValueError("valuation of an empty vector is undefined")
    return min(truncated_valuation(x, p, lam) for x in v)


def mod_inverse(a: int, m: int) -> int:
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return 0
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NoInverse(f"{a} is not invertible modulo {m}") from None


def central_remainder(a: int, m: int) -> int:
    """Representative of a mod m in [-ceil(m/2)+1, floor(m/2)]."""
    if m < 1:
        raise ValueError("modulus must be positive")
    r = a % m
    if r > m // 2:
        r -= m
    return r


@lru_cache(maxsize=4096)
def crt_coefficients(moduli: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """(M, e) with e_j = 1 mod m_j and 0 mod the other moduli."""
    M = math.prod(moduli)
    coeffs = []
    for q in moduli:
        if q == 1:
            coeffs.append(0)
            continue
        c = M // q
        coeffs.append(c * mod_inverse(c, q) % M)
    return M, tuple(coeffs)


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """Unique R in [0, prod(moduli)) matching every residue.

    Moduli must be pairwise coprime; moduli equal to 1 are allowed.
    """
    if len(residues) != len(moduli):
        raise ValueError("residue/modulus length mismatch")
    M, coeffs = crt_coefficients(tuple(moduli))
    return sum(a * e for a, e in zip(residues, coeffs)) % M


@dataclass(frozen=True)
class PrimePowerBasis:
    """Moduli p_1^l_1, ..., p_n^l_n with distinct increasing primes.

    Primes below 2**64 are certified with deterministic Miller-Rabin.
    Larger primes are only accepted with ``trust_large=True``.
    """

    primes: tuple[int, ...]
    mults: tuple[int, ...]
    trust_large: bool = False

    def __post_init__(self):
        object.__setattr__(self, "primes", tuple(int(p) for p in self.primes))
        object.__setattr__(self, "mults", tuple(int(m) for m in self.mults))
        if len(self.primes) == 0:
            raise ValueError("basis needs at least one prime")
        if len(self.primes) != len(self.mults):
            raise ValueError("primes and multiplicities differ in length")
        if any(b <= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("primes must be strictly increasing")
        if any(m < 1 for m in self.mults):
            raise ValueError("multiplicities must be >= 1")
        for p in self.primes:
            if p >= 2**64 and not self.trust_large:
                raise ValueError(f"{p} exceeds the certified range; pass trust_large=True")
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], **kw) -> PrimePowerBasis:
        pairs = sorted(pairs)
        return cls(tuple(p for p, _ in pairs), tuple(m for _, m in pairs), **kw)

    @property
    def n(self) -> int:
        return len(self.primes)

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        return tuple(p**m for p, m in zip(self.primes, self.mults))

    @cached_property
    def modulus(self) -> int:
        return math.prod(self.moduli)

    @property
    def total_weight(self) -> int:
        return sum(self.mults)

    def interpolate(self, residues: Sequence[int]) -> int:
        if len(residues) != self.n:
            raise ValueError(f"expected {self.n} residues, got {len(residues)}")
        return crt(residues, self.moduli)

    def reduce(self, x: int) -> tuple[int, ...]:
        return tuple(x % q for q in self.moduli)

    def exponents_of(self, d: int) -> tuple[int, ...]:
        """Exponent vector of a divisor d of N over this basis."""
        if d < 1 or self.modulus % d:
            raise ValueError(f"{d} does not divide N = {self.modulus}")
        out = []
        for p in self.primes:
            k = 0
            while d % p == 0:
                d //= p
                k += 1
            out.append(k)
        return tuple(out)

    def from_exponents(self, exps: Sequence[int]) -> int:
        if len(exps) != self.n:
            raise ValueError("exponent vector has the wrong length")
        if any(e < 0 or e > m for e, m in zip(exps, self.mults)):
            raise ValueError("exponents must lie in [0, multiplicity]")
        return math.prod(p**e for p, e in zip(self.primes, exps))

    def to_json(self) -> dict:
        return {"primes": [str(p) for p in self.primes], "mults": list(self.mults)}


def crt_interpolate(residues: Sequence[int], basis: PrimePowerBasis) -> int:
    return basis.interpolate(residues)
