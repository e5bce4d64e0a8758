"""Fault-tolerant distributed exact linear solving.

A coordinator sends (A, b, p, lambda) to workers. Each worker solves the
system modulo p^lambda by Cramer's rule and sends back a residue column, or a
(valuation, column) pair when p divides det(A). Some workers may be faulty.
The coordinator decodes the collected reports into the exact rational
solution and checks A x = b.

Workers live behind a request/response interface (``WorkerRequest`` ->
``WorkerReport``); ``dispatch`` runs them in a thread pool and could be
swapped for a networked transport without touching the coordinator.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .code import CodeParams, MultiPrecisionWord, ReceivedWord
from .decoder import DecodeOutcome, DecoderConfig, decode_bad_primes_outcome, decode_outcome
from .errmodel import substream, uniform_below, uniform_unit_vector
from .lattice import _det, lll_beta
from .numtheory import PrimePowerBasis, mod_inverse, primes_from, truncated_valuation

MODES = ("plain", "bad-prime")
MAX_DIM = 8


class ReconstructionFailure(Exception):
    pass


class VerificationFailure(ReconstructionFailure):
    """A decoded candidate does not satisfy A x = b."""


@dataclass(frozen=True)
class LinearSystem:
    A: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]

    def __post_init__(self):
        A = tuple(tuple(int(x) for x in row) for row in self.A)
        b = tuple(int(x) for x in self.b)
        m = len(A)
        if m == 0 or m > MAX_DIM or any(len(r) != m for r in A) or len(b) != m:
            raise ValueError(f"need a square system of size 1..{MAX_DIM}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.det() == 0:
            raise ValueError("matrix is singular")

    @property
    def m(self) -> int:
        return len(self.A)

    def det(self) -> int:
        return _det([list(r) for r in self.A])

    def cramer_matrix(self, i: int) -> list[list[int]]:
        return [[self.b[r] if c == i else self.A[r][c] for c in range(self.m)] for r in range(self.m)]

    def cramer_numerators(self) -> list[int]:
        return [_det(self.cramer_matrix(i)) for i in range(self.m)]

    def is_jointly_reduced(self) -> bool:
        return math.gcd(self.det(), *self.cramer_numerators()) == 1

    def check(self, x: Sequence[Fraction]) -> bool:
        return all(sum(a * xi for a, xi in zip(row, x)) == bi for row, bi in zip(self.A, self.b))

    def to_json(self) -> dict:
        return {"A": [[str(x) for x in r] for r in self.A], "b": [str(x) for x in self.b]}


def det_mod_prime_power(M: Sequence[Sequence[int]], p: int, lam: int) -> int:
    """det(M) mod p^lam by elimination with minimal-valuation pivots."""
    q = p**lam
    m = [[x % q for x in row] for row in M]
    n = len(m)
    det = 1
    for k in range(n):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                if m[i][j]:
                    v = truncated_valuation(m[i][j], p, lam)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            return 0
        v, i, j = best
        if i != k:
            m[k], m[i] = m[i], m[k]
            det = -det
        if j != k:
            for row in m:
                row[k], row[j] = row[j], row[k]
            det = -det
        a = m[k][k]
        unit_inv = mod_inverse(a // p**v, q)
        for i in range(k + 1, n):
            if m[i][k]:
                t = (m[i][k] // p**v) * unit_inv % q
                m[i] = [(x - t * y) % q for x, y in zip(m[i], m[k])]
        det = det * a % q
    return det % q


@dataclass(frozen=True)
class WorkerRequest:
    worker_id: int
    index: int  # position j in the basis
    system: LinearSystem
    p: int
    lam: int


@dataclass(frozen=True)
class WorkerReport:
    worker_id: int
    index: int
    rho: int
    column: tuple[int, ...]
    faulty: bool = field(default=False, compare=False)  # ground truth, never read by the coordinator

    def to_json(self) -> dict:
        return {
            "worker": self.worker_id,
            "index": self.index,
            "rho": self.rho,
            "column": [str(x) for x in self.column],
            "faulty": self.faulty,
        }


def worker_solve(system: LinearSystem, p: int, lam: int) -> tuple[int, tuple[int, ...]]:
    """(rho, column): rho = 0 gives the plain residue column of the solution."""
    D = det_mod_prime_power(system.A, p, lam)
    nums = [det_mod_prime_power(system.cramer_matrix(i), p, lam) for i in range(system.m)]
    rho = truncated_valuation(D, p, lam)
    if rho == lam:
        return lam, (1,) * system.m
    sub = p ** (lam - rho)
    inv = mod_inverse((D // p**rho) % sub, sub)
    return rho, tuple(x * inv % sub for x in nums)


def serve(req: WorkerRequest) -> WorkerReport:
    rho, col = worker_solve(req.system, req.p, req.lam)
    return WorkerReport(req.worker_id, req.index, rho, col)


def dispatch(requests: Sequence[WorkerRequest], max_workers: int = 4) -> list[WorkerReport]:
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        reports = list(pool.map(serve, requests))
    return sorted(reports, key=lambda r: r.index)


@dataclass(frozen=True)
class FaultSpec:
    """Workers to corrupt; mode "random" or "adversarial" (replay given payloads)."""

    workers: tuple[int, ...] = ()
    mode: str = "random"
    payloads: Mapping[int, tuple[int, tuple[int, ...]]] = field(default_factory=dict)


def inject_faults(reports: Sequence[WorkerReport], spec: FaultSpec, basis: PrimePowerBasis, seed: int) -> list[WorkerReport]:
    if spec.mode not in ("random", "adversarial"):
        raise ValueError("fault mode must be random or adversarial")
    out = []
    for r in reports:
        if r.worker_id not in spec.workers:
            out.append(r)
            continue
        p, lam = basis.primes[r.index], basis.mults[r.index]
        if spec.mode == "adversarial":
            rho, col = spec.payloads[r.worker_id]
            out.append(replace(r, rho=int(rho), column=tuple(int(x) for x in col), faulty=True))
            continue
        rng = substream(seed, r.worker_id, r.index)
        ell = len(r.column)
        if r.rho == 0:
            # Offset with a unit-containing vector: the column is wrong mod p.
            c = uniform_unit_vector(rng, p, lam, ell)
            col = tuple((x + y) % p**lam for x, y in zip(r.column, c))
            out.append(replace(r, column=col, faulty=True))
        else:
            # Valuation fault: claim the determinant is a unit here.
            col = tuple(uniform_below(rng, p**lam) for _ in range(ell))
            out.append(replace(r, rho=0, column=col, faulty=True))
    return out


def hadamard_bounds(system: LinearSystem) -> tuple[int, int]:
    """(F, G) with |det(A_i)| < F and 0 < |det(A)| < G."""

    def bound(M):
        out = 1
        for row in M:
            s = sum(x * x for x in row)
            r = math.isqrt(s)
            out *= r if r * r == s else r + 1
        return out

    G = bound(system.A) + 1
    F = max(bound(system.cramer_matrix(i)) for i in range(system.m)) + 1
    return F, G


def plan_basis(F: int, G: int, ell: int, faults: int, mode: str, mult: int = 1) -> tuple[PrimePowerBasis, int]:
    """Smallest basis (first primes above G in plain mode, from 2 in bad-prime
    mode) with N >= 6 F G beta Theta^2, Theta the product of the ``faults``
    largest moduli. Then any ``faults`` corrupted workers are corrected by the
    LLL decoder with locator bound Theta.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    beta = lll_beta(ell + 1)
    floor = G + 1 if mode == "plain" else 2
    n = faults + 1
    while True:
        primes = primes_from(floor, n)
        basis = PrimePowerBasis(tuple(primes), (mult,) * n)
        theta = math.prod(sorted(basis.moduli)[n - faults:]) if faults else 1
        if basis.modulus >= 6 * F * G * beta * theta * theta:
            return basis, theta
        n += 1


def central_reconstruct(
    reports: Sequence[WorkerReport],
    params: CodeParams,
    cfg: DecoderConfig,
    mode: str,
    system: LinearSystem,
) -> tuple[list[Fraction], DecodeOutcome]:
    reports = sorted(reports, key=lambda r: r.index)
    basis = params.basis
    if mode == "plain":
        if any(r.rho for r in reports):
            raise ReconstructionFailure("a worker reported a non-unit determinant in plain mode")
        word = ReceivedWord(basis, tuple(r.column for r in reports))
        out = decode_outcome(word, params, cfg)
    elif mode == "bad-prime":
        word = MultiPrecisionWord(basis, tuple(r.rho for r in reports), tuple(r.column for r in reports))
        out = decode_bad_primes_outcome(word, params, cfg)
    else:
        raise ValueError(f"mode must be one of {MODES}")
    if not out.ok:
        raise ReconstructionFailure(f"decoding failed: {out.reason}")
    x = out.value.fractions()
    if not system.check(x):
        raise VerificationFailure("decoded vector does not solve the system")
    return x, out


def run_demo(
    system: LinearSystem,
    faults: int = 0,
    mode: str = "plain",
    mult: int = 1,
    fault_mode: str = "random",
    seed: int = 0,
    faulty_workers: Sequence[int] | None = None,
    payloads: Mapping[int, tuple[int, tuple[int, ...]]] | None = None,
    budget: int | None = None,
    max_workers: int = 4,
) -> dict:
    """Full round trip; returns a JSON-ready transcript.

    ``budget`` is the number of faults the basis is sized for (default: the
    number injected). Injecting more than the budget is allowed and the
    transcript then reports failure honestly.
    """
    if mode == "bad-prime" and not system.is_jointly_reduced():
        raise ValueError("bad-prime demo needs gcd(det A, det A_1, ..., det A_m) = 1")
    budget = faults if budget is None else budget
    F, G = hadamard_bounds(system)
    basis, theta = plan_basis(F, G, system.m, budget, mode, mult)
    params = CodeParams(system.m, F, G, basis)
    requests = [
        WorkerRequest(j, j, system, p, lam) for j, (p, lam) in enumerate(zip(basis.primes, basis.mults))
    ]
    honest = dispatch(requests, max_workers)
    if faulty_workers is None:
        # Corrupt the workers holding the largest moduli: the worst case for the budget.
        order = sorted(range(basis.n), key=lambda j: basis.moduli[j], reverse=True)
        faulty_workers = order[:faults]
    spec = FaultSpec(tuple(faulty_workers), fault_mode, payloads or {})
    reports = inject_faults(honest, spec, basis, seed)
    cfg = DecoderConfig(theta)
    transcript = {
        "system": system.to_json(),
        "mode": mode,
        "F": str(F),
        "G": str(G),
        "basis": basis.to_json(),
        "theta": str(theta),
        "fault_budget": budget,
        "faulty_workers": sorted(spec.workers),
        "reports": [r.to_json() for r in reports],
    }
    try:
        x, out = central_reconstruct(reports, params, cfg, mode, system)
    except ReconstructionFailure as exc:
        transcript.update(status="failure", reason=str(exc), solution=None, verified=False)
        return transcript
    transcript.update(
        status="success",
        solution=[f"{v.numerator}/{v.denominator}" for v in x],
        eta=str(out.eta),
        verified=True,
    )
    return transcript
