"""Exhaustive enumeration over every small code: N <= 500, F, G <= 4, l <= 2."""

import itertools
import math
from functools import lru_cache

import numpy as np

from oracles import all_fraction_vectors
from srncode.code import CodeParams
from srncode.numtheory import PrimePowerBasis, factor_small

MAX_N = 500
MAX_FG = 4


def small_codes(strict=False):
    for N in range(2, MAX_N + 1):
        f = factor_small(N)
        primes = tuple(sorted(f))
        basis = PrimePowerBasis(primes, tuple(f[p] for p in primes))
        for F in range(1, MAX_FG + 1):
            for G in range(2, MAX_FG + 1):
                if 2 * F * G > N or (strict and 2 * F * G == N):
                    continue
                for ell in (1, 2):
                    yield CodeParams(ell, F, G, basis)


def plain_codewords(params):
    return all_fraction_vectors(params.ell, params.F, params.G, params.N)


def any_codewords(params):
    return all_fraction_vectors(params.ell, params.F, params.G)


def max_theta(params):
    """Largest integer Theta with 2 F G Theta^2 < N (0 if none)."""
    t = 0
    while 2 * params.F * params.G * (t + 1) ** 2 < params.N:
        t += 1
    return t


def column_valuation(E, p, lam):
    """Truncated valuation over the last axis, vectorized."""
    mu = np.zeros(E.shape[:-1], dtype=np.int64)
    for t in range(1, lam + 1):
        mu += np.all(E % p**t == 0, axis=-1)
    return mu


@lru_cache(maxsize=None)
def plain_column_errors(p, lam, ell, theta):
    """(column, contribution) for every error column with p^(lam - mu) <= theta."""
    out = [((0,) * ell, 1)]
    for e in range(1, lam + 1):
        if p**e > theta:
            break
        for c in itertools.product(range(p**e), repeat=ell):
            if any(x % p for x in c):
                out.append((tuple(p ** (lam - e) * x for x in c), p**e))
    return out


def combine(per_column, theta):
    """All choices of one entry per column with product of contributions <= theta."""
    out = []

    def rec(j, acc, cols):
        if j == len(per_column):
            out.append((tuple(cols), acc))
            return
        for col, c in per_column[j]:
            if acc * c <= theta:
                cols.append(col)
                rec(j + 1, acc * c, cols)
                cols.pop()

    rec(0, 1, [])
    return out


@lru_cache(maxsize=None)
def reduced_pairs(p, lam, ell):
    """All reduced (rho, r) for one column as numpy arrays."""
    rhos, rs = [], []
    for rho in range(lam + 1):
        if rho == lam:
            rhos.append(np.array([lam]))
            rs.append(np.ones((1, ell), dtype=np.int64))
            continue
        q = p ** (lam - rho)
        grid = np.array(list(itertools.product(range(q), repeat=ell)), dtype=np.int64).reshape(-1, ell)
        if rho:
            grid = grid[np.any(grid % p != 0, axis=1)]
        rhos.append(np.full(len(grid), rho))
        rs.append(grid)
    return np.concatenate(rhos), np.concatenate(rs)


def _contribution(p, lam, rho_c, r_c, rho, r):
    q = p**lam
    mu = lam
    for a, b in zip(r, r_c):
        e = (p**rho_c * a - p**rho * b) % q
        k = 0
        while k < lam and e % p ** (k + 1) == 0:
            k += 1
        mu = min(mu, k)
    return p ** (lam - mu)


@lru_cache(maxsize=None)
def badprime_column_neighbours(p, lam, ell, rho_c, r_c, limit):
    """Reduced pairs whose column contribution against (rho_c, r_c) is <= limit.

    Contribution <= limit means E = 0 mod p^mu0. For each received valuation
    that congruence pins every residue down to a coset, which is enumerated
    and then filtered by the exact contribution.
    """
    e_max = 0
    while e_max < lam and p ** (e_max + 1) <= limit:
        e_max += 1
    mu0 = lam - e_max
    out = []
    for rho in range(lam + 1):
        if rho == lam:
            cands = [(1,) * ell]
        else:
            width = p ** (lam - rho)
            axes = []
            for b in r_c:
                t = p**rho * b % p**mu0
                if rho_c >= mu0:
                    axes.append(range(width) if t == 0 else range(0))
                elif t % p**rho_c:
                    axes.append(range(0))
                else:
                    step = p ** (mu0 - rho_c)
                    r0 = (t // p**rho_c) % step
                    axes.append(range(r0, width, step))
            cands = itertools.product(*axes)
        for r in cands:
            if 0 < rho < lam and all(x % p == 0 for x in r):
                continue
            c = _contribution(p, lam, rho_c, r_c, rho, r)
            if c <= limit:
                out.append(((rho, tuple(r)), c))
    return out


def badprime_column_neighbours_scan(p, lam, ell, rho_c, r_c, limit):
    """Brute-force reference for badprime_column_neighbours."""
    RHO, R = reduced_pairs(p, lam, ell)
    q = p**lam
    E = (p**rho_c * R - (p**RHO)[:, None] * np.array(r_c, dtype=np.int64)) % q
    contrib = p ** (lam - column_valuation(E, p, lam))
    keep = np.nonzero(contrib <= limit)[0]
    return [((int(RHO[i]), tuple(int(x) for x in R[i])), int(contrib[i])) for i in keep]


def pairwise_badprime_locators(words, basis):
    """Matrix of bad-prime locators between reduced multi-precision words."""
    k = len(words)
    lam_mat = np.ones((k, k), dtype=np.int64)
    for j, (p, lam) in enumerate(zip(basis.primes, basis.mults)):
        q = p**lam
        rho = np.array([w.valuations[j] for w in words], dtype=np.int64)
        r = np.array([w.columns[j] for w in words], dtype=np.int64)
        prho = p**rho
        E = (prho[:, None, None] * r[None, :, :] - prho[None, :, None] * r[:, None, :]) % q
        lam_mat *= p ** (lam - column_valuation(E, p, lam))
    return lam_mat
