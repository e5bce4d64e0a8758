"""Decoding lattices, scaling, exact LLL and small-dimension l_inf SVP."""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .code import CodeError, CodeParams, MultiPrecisionWord, ReceivedWord
from .numtheory import crt


class DegenerateBasis(ValueError):
    pass


class EnumBoundExceeded(RuntimeError):
    """The exhaustive search box is larger than the allowed node budget."""


class NotAMember(ValueError):
    pass


@dataclass(frozen=True)
class LatticeBasis:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise DegenerateBasis("basis must be a nonempty square matrix")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def _trusted(cls, rows: tuple[tuple[int, ...], ...]) -> LatticeBasis:
        # Internal constructor for rows already known to be square int tuples.
        obj = object.__new__(cls)
        object.__setattr__(obj, "rows", rows)
        return obj

    @property
    def dim(self) -> int:
        return len(self.rows)

    def determinant(self) -> int:
        return _det([list(r) for r in self.rows])


@dataclass(frozen=True)
class LatticeVector:
    phi: int
    psis: tuple[int, ...]

    @classmethod
    def from_coords(cls, v: Sequence[int]) -> LatticeVector:
        return cls(int(v[0]), tuple(int(x) for x in v[1:]))

    @property
    def coords(self) -> tuple[int, ...]:
        return (self.phi,) + self.psis

    def norm_inf(self) -> int:
        return max(abs(x) for x in self.coords)


def _det(m: list[list[int]]) -> int:
    n = len(m)
    if n <= 3:
        # Closed forms for the sizes the decoders hit most.
        if n == 1:
            return m[0][0]
        if n == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        (a, b, c), (d, e, f), (g, h, i) = m
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    # Bareiss fraction-free elimination.
    m = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def build_lattice(word: ReceivedWord, params: CodeParams) -> LatticeBasis:
    """Rows (1, R_1, ..., R_l) and N e_i."""
    ell, N = word.ell, params.N
    rows = [(1,) + word.interpolants]
    for i in range(ell):
        rows.append(tuple(N if k == i + 1 else 0 for k in range(ell + 1)))
    return LatticeBasis._trusted(tuple(rows))


def bad_prime_key_data(word: MultiPrecisionWord) -> tuple[int, int, tuple[int, ...]]:
    """(N_inf, M = N / N_inf, R') for the reduced key equations."""
    if not word.is_reduced:
        raise CodeError("bad-prime lattice needs a reduced representative")
    basis = word.basis
    shifts = [p**rho for p, rho in zip(basis.primes, word.valuations)]
    n_inf = math.prod(shifts)
    sub_moduli = [q // s for q, s in zip(basis.moduli, shifts)]
    r_prime = []
    for i in range(word.ell):
        res = [(n_inf // s) * col[i] for s, col in zip(shifts, word.columns)]
        r_prime.append(crt([r % m for r, m in zip(res, sub_moduli)], sub_moduli))
    return n_inf, basis.modulus // n_inf, tuple(r_prime)


def build_bad_prime_lattice(
    word: MultiPrecisionWord, params: CodeParams
) -> tuple[LatticeBasis, int, tuple[int, ...]]:
    """Rows (N_inf, R'_1, ..., R'_l) and (N / N_inf) e_i."""
    n_inf, M, r_prime = bad_prime_key_data(word)
    ell = word.ell
    rows = [(n_inf,) + r_prime]
    for i in range(ell):
        rows.append(tuple(M if k == i + 1 else 0 for k in range(ell + 1)))
    return LatticeBasis._trusted(tuple(rows)), n_inf, r_prime


def scale(v: Sequence, F: int, G: int) -> tuple:
    """Multiply coordinate 0 by F and the rest by G (exactly)."""
    if F <= 0 or G <= 0:
        raise ValueError("scaling factors must be positive")
    return (v[0] * F,) + tuple(x * G for x in v[1:])


def unscale(v: Sequence, F: int, G: int) -> tuple:
    if F <= 0 or G <= 0:
        raise ValueError("scaling factors must be positive")
    out = []
    for k, x in enumerate(v):
        s = F if k == 0 else G
        if isinstance(x, int) and x % s == 0:
            out.append(x // s)
        else:
            out.append(Fraction(x) / s)
    return tuple(out)


def scale_basis(basis: LatticeBasis, F: int, G: int) -> LatticeBasis:
    return LatticeBasis._trusted(tuple(scale(r, F, G) for r in basis.rows))


_DELTA = Fraction(3, 4)


def lll_reduce(rows: Sequence[Sequence[int]], delta: Fraction = _DELTA) -> list[list[int]]:
    """Integral LLL (exact, no floating point) on linearly independent rows.

    Works with the Gram-Schmidt numerators d_i and lambda_ij so that every
    quantity stays an integer. Output is size-reduced and satisfies the
    Lovasz condition for ``delta``.
    """
    if delta is _DELTA:
        dn, dd = 3, 4
    else:
        delta = Fraction(delta)
        if not Fraction(1, 4) < delta <= 1:
            raise ValueError("delta must lie in (1/4, 1]")
        dn, dd = delta.numerator, delta.denominator
    b = [list(map(int, r)) for r in rows]
    n = len(b)
    if n == 0:
        return b

    def dot(u, v):
        return sum(map(operator.mul, u, v))

    # 1-based bookkeeping to mirror the textbook recurrences.
    d = [0] * (n + 1)
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    d[0] = 1
    d[1] = dot(b[0], b[0])
    if d[1] == 0:
        raise DegenerateBasis("zero row")

    def red(k, l):
        dl = d[l]
        q2 = 2 * lam[k][l]
        if abs(q2) > dl:
            q = (q2 + dl) // (2 * dl)
            bk, bl = b[k - 1], b[l - 1]
            for t in range(len(bk)):
                bk[t] -= q * bl[t]
            lam[k][l] -= q * dl
            lk, ll = lam[k], lam[l]
            for i in range(1, l):
                lk[i] -= q * ll[i]

    def swap(k):
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k]
        d[k - 1] = B

    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(b[k - 1], b[j - 1])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k] = u
            if d[k] == 0:
                raise DegenerateBasis("rows are linearly dependent")
        red(k, k - 1)
        lm = lam[k][k - 1]
        if dd * (d[k] * d[k - 2] + lm * lm) < dn * d[k - 1] * d[k - 1]:
            swap(k)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return b


def _sign_normalize(v: Sequence[int]) -> tuple[int, ...]:
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def lll_beta(dim: int) -> float:
    """l_inf approximation factor sqrt(l+1) 2^(l/2) of LLL with delta = 3/4."""
    ell = dim - 1
    return math.sqrt(ell + 1) * 2 ** (ell / 2)


def approx_svp_inf(basis: LatticeBasis) -> tuple[LatticeVector, float]:
    """Shortest row (l_inf) of an LLL-reduced basis, with its guaranteed factor."""
    reduced = lll_reduce(basis.rows)
    best = min(reduced, key=lambda r: (max(abs(x) for x in r), _sign_normalize(r)))
    return LatticeVector.from_coords(_sign_normalize(best)), lll_beta(basis.dim)


def _inverse(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(rows)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise DegenerateBasis("singular basis")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def _adjugate(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], int]:
    """Cofactor matrix C (C[i][k] = (-1)^(i+k) minor(i, k)) and det, in integers."""
    n = len(rows)
    det = _det([list(r) for r in rows])
    if det == 0:
        raise DegenerateBasis("singular basis")
    if n == 1:
        return [[1]], det
    if n == 2:
        (a, b), (c, d) = rows
        return [[d, -c], [-b, a]], det
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return [
            [e * i - f * h, f * g - d * i, d * h - e * g],
            [c * h - b * i, a * i - c * g, b * g - a * h],
            [b * f - c * e, c * d - a * f, a * e - b * d],
        ], det
    cof = [
        [
            (-1) ** (i + k) * _det([[rows[a][b] for b in range(n) if b != k] for a in range(n) if a != i])
            for k in range(n)
        ]
        for i in range(n)
    ]
    return cof, det


def exact_svp_inf(basis: LatticeBasis, enum_bound: int = 10**6) -> LatticeVector:
    """A true l_inf-shortest nonzero vector by box enumeration.

    Any vector v with |v|_inf <= R has coordinates x = v B^-1 bounded by
    R times the l1 norm of the matching column of B^-1. R is taken from
    the LLL candidate, and B is the LLL-reduced basis to keep the box small.
    """
    return LatticeVector.from_coords(_enumerate_inf(lll_reduce(basis.rows), enum_bound))


def _enumerate_inf(red: list[list[int]], enum_bound: int) -> tuple[int, ...]:
    n = len(red)
    adj, det = _adjugate(red)
    det = abs(det)
    radius = min([max(map(abs, r)) for r in red])
    # Column i of B^-1 is row i of the cofactor matrix over det.
    bounds = [radius * sum(map(abs, a)) // det for a in adj]
    nodes = math.prod(2 * b + 1 for b in bounds)
    if nodes > enum_bound:
        raise EnumBoundExceeded(f"search box has {nodes} nodes > {enum_bound}")
    # The widest coordinate is solved for directly instead of enumerated.
    wide = max(range(n), key=bounds.__getitem__)
    last, width = red[wide], bounds[wide]
    rest = [i for i in range(n) if i != wide]
    head_cols = list(zip(*[red[i] for i in rest]))
    zero = [0] * n
    best_key = None
    bound = radius
    for x in itertools.product(*[range(-bounds[i], bounds[i] + 1) for i in rest]):
        part = [sum(map(operator.mul, x, c)) for c in head_cols] if any(x) else zero
        # Solve |part_k + t last_k| <= bound for t, coordinate by coordinate.
        lo, hi = -width, width
        for a, c in zip(part, last):
            if c > 0:
                lo, hi = max(lo, -((bound + a) // c)), min(hi, (bound - a) // c)
            elif c < 0:
                lo, hi = max(lo, -((bound - a) // -c)), min(hi, (bound + a) // -c)
            elif abs(a) > bound:
                lo, hi = 1, 0
            if lo > hi:
                break
        for t in range(lo, hi + 1):
            v = [a + t * c for a, c in zip(part, last)]
            norm = max(map(abs, v))
            if norm == 0:
                continue
            key = (norm, _sign_normalize(v))
            if best_key is None or key < best_key:
                best_key = key
                bound = norm
    return best_key[1]


def coordinates(v: Sequence[int], basis: LatticeBasis) -> tuple[Fraction, ...]:
    """Exact rational x with x B = v."""
    inv = _inverse(basis.rows)
    n = basis.dim
    return tuple(sum(Fraction(v[k]) * inv[k][i] for k in range(n)) for i in range(n))


def is_member(v: Sequence[int], basis: LatticeBasis) -> bool:
    return all(c.denominator == 1 for c in coordinates(v, basis))


def is_l_reduced(v: LatticeVector | Sequence[int], basis: LatticeBasis) -> bool:
    """True iff v is not a proper integer multiple of another lattice vector."""
    coords = v.coords if isinstance(v, LatticeVector) else tuple(v)
    x = coordinates(coords, basis)
    if any(c.denominator != 1 for c in x):
        raise NotAMember("vector is not in the lattice")
    return math.gcd(*(int(c) for c in x)) == 1
