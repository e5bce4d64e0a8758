import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from srncode.distsolve import (
    FaultSpec,
    LinearSystem,
    WorkerReport,
    det_mod_prime_power,
    dispatch,
    hadamard_bounds,
    inject_faults,
    plan_basis,
    run_demo,
    worker_solve,
    WorkerRequest,
)
from srncode.numtheory import PrimePowerBasis

A = ((1, 1), (1, -1))
B = (1, 2)


def leibniz_det(M):
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        total += (-1) ** inv * math.prod(M[i][perm[i]] for i in range(n))
    return total


def test_system_basics():
    s = LinearSystem(A, B)
    assert s.det() == leibniz_det(A) == -2
    assert s.cramer_numerators() == [-3, 1]
    assert s.check([Fraction(3, 2), Fraction(-1, 2)])
    assert s.is_jointly_reduced()
    with pytest.raises(ValueError):
        LinearSystem(((1, 2), (2, 4)), (1, 1))
    with pytest.raises(ValueError):
        LinearSystem(((1, 2),), (1,))


def test_hadamard_bounds_dominate():
    s = LinearSystem(A, B)
    F, G = hadamard_bounds(s)
    assert abs(s.det()) < G and all(abs(x) < F for x in s.cramer_numerators())


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n), min_size=n, max_size=n)),
    st.sampled_from([(2, 3), (3, 2), (5, 2), (7, 1), (2, 1)]),
)
def test_det_mod_prime_power_matches_leibniz(M, pl):
    p, lam = pl
    assert det_mod_prime_power(M, p, lam) == leibniz_det(M) % p**lam


def test_worker_solve_against_fractions():
    rng = random.Random(2)
    for _ in range(100):
        m = rng.randint(1, 3)
        A_ = tuple(tuple(rng.randint(-9, 9) for _ in range(m)) for _ in range(m))
        b_ = tuple(rng.randint(-9, 9) for _ in range(m))
        if leibniz_det(A_) == 0:
            continue
        s = LinearSystem(A_, b_)
        D, nums = s.det(), s.cramer_numerators()
        for p, lam in ((2, 3), (3, 2), (5, 1), (11, 1)):
            rho, col = worker_solve(s, p, lam)
            q = p**lam
            Dm = D % q
            v = 0
            while v < lam and Dm % p ** (v + 1) == 0:
                v += 1
            assert rho == v
            if rho < lam:
                sub = p ** (lam - rho)
                unit = (D // p**rho) % sub
                assert all((unit * c - n) % sub == 0 for c, n in zip(col, nums))


def test_dispatch_orders_by_index():
    s = LinearSystem(A, B)
    basis = PrimePowerBasis((3, 5, 7), (1, 1, 1))
    reqs = [WorkerRequest(j, j, s, p, 1) for j, p in enumerate(basis.primes)][::-1]
    reps = dispatch(reqs, max_workers=3)
    assert [r.index for r in reps] == [0, 1, 2]
    # x = (3/2, -1/2): residues of -3 * (-2)^-1 and 1 * (-2)^-1
    assert reps[0].column == (0, 1)


def test_plan_basis_meets_the_bound():
    for mode in ("plain", "bad-prime"):
        for k in (0, 1, 2):
            basis, theta = plan_basis(4, 3, 2, k, mode)
            assert basis.modulus >= 6 * 4 * 3 * 2 * 2**0.5 * theta**2
            if mode == "plain":
                assert min(basis.primes) > 3


def test_inject_faults_random_and_adversarial():
    basis = PrimePowerBasis((5, 7, 11), (1, 1, 1))
    honest = [WorkerReport(j, j, 0, (1, 2)) for j in range(3)]
    out = inject_faults(honest, FaultSpec((1,)), basis, seed=3)
    assert out[0] == honest[0] and out[2] == honest[2]
    assert out[1].faulty and any((a - b) % 7 for a, b in zip(out[1].column, honest[1].column))
    adv = inject_faults(honest, FaultSpec((2,), "adversarial", {2: (0, (4, 4))}), basis, seed=0)
    assert adv[2].column == (4, 4)


@pytest.mark.parametrize("mode", ["plain", "bad-prime"])
@pytest.mark.parametrize("faults", [0, 1, 2])
def test_demo_recovers_solution(mode, faults):
    t = run_demo(LinearSystem(A, B), faults=faults, mode=mode, seed=faults)
    assert t["status"] == "success" and t["verified"]
    assert t["solution"] == ["3/2", "-1/2"]
    assert sum(r["faulty"] for r in t["reports"]) == faults


@pytest.mark.parametrize("mode", ["plain", "bad-prime"])
def test_over_budget_reports_failure(mode):
    for seed in range(10):
        t = run_demo(LinearSystem(A, B), faults=3, budget=1, mode=mode, seed=seed)
        assert t["status"] in ("success", "failure")
        if t["status"] == "success":
            assert t["solution"] == ["3/2", "-1/2"]


def test_adversarial_payload_within_budget():
    s = LinearSystem(A, B)
    t = run_demo(s, faults=1, mode="plain", fault_mode="adversarial", faulty_workers=[0], payloads={0: (0, (0, 0))})
    assert t["status"] == "success" and t["solution"] == ["3/2", "-1/2"]


def test_bad_prime_needs_joint_reduction():
    s = LinearSystem(((2, 0), (0, 2)), (2, 4))
    with pytest.raises(ValueError):
        run_demo(s, mode="bad-prime")
    assert run_demo(s, mode="plain")["solution"] == ["1/1", "2/1"]
