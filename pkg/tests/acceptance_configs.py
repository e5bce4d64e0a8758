"""Experiment configs for the Monte Carlo acceptance runs.

Running this file writes them to configs/ for use with ``srn simulate``.
"""

import json
import math
import sys
from pathlib import Path

from srncode.lattice import lll_beta

PRIMES = (3, 5, 7, 11, 13, 17, 19, 23)
MULTS = (3, 2, 1, 2, 1, 1, 2, 1)
N = math.prod(p**m for p, m in zip(PRIMES, MULTS))
ELL = 2
GAP = 2.5  # dmax - d for the random part


def exps(**by_prime):
    return [by_prime.get(f"p{p}", 0) for p in PRIMES]


def locator(e):
    return math.prod(p**k for p, k in zip(PRIMES, e))


def sized_code(d_random, d_fixed=0.0, gap=GAP):
    """F = G chosen so that dmax variant - d_random is just above ``gap``."""
    margin = (ELL + 1) / ELL * (d_random + gap) + 2 * d_fixed
    fg = N / 2 ** (margin + math.log2(3 * lll_beta(ELL + 1)) + 1)
    F = math.isqrt(int(fg))
    return {"primes": [str(p) for p in PRIMES], "mults": list(MULTS), "ell": ELL, "F": str(F), "G": str(F)}


def config(kind, rnd, fixed=None, trials=100_000, seed=1, **model):
    lam_r = locator(rnd)
    lam_f = locator(fixed) if fixed else 1
    obj = {
        "schema": 1,
        "code": sized_code(math.log2(lam_r), math.log2(lam_f)),
        "model": {"kind": kind, "locator": rnd, **model},
        "decoder": {"theta": str(lam_r * lam_f), "svp_mode": "approx"},
        "trials": trials,
        "seed": seed,
    }
    if fixed:
        obj["model"]["fixed_locator"] = fixed
    return obj


RANDOM = exps(p3=2, p7=1, p17=1)  # 9 * 7 * 17 = 1071

CONFIGS = {
    "thm1_err1": config("err1", RANDOM, seed=101),
    "thm2_err2": config("err2", RANDOM, seed=102),
    "thm3_hybrid_exact": config(
        "hybrid", exps(p7=1, p17=1, p11=1), exps(p5=2), seed=103, variant="exact", adversary="collinear"
    ),
    "thm4_hybrid_maximal": config(
        "hybrid", exps(p7=1, p17=1, p11=1), exps(p5=2), seed=104, variant="maximal", adversary="collinear"
    ),
    "hybrid_degenerate": config(
        "hybrid", exps(), exps(p5=2, p19=1), seed=105, variant="exact", adversary="collinear"
    ),
    # g = 15 u: shares 3 and 5 with N. Valuation error at 3 with mu = nu_3(g) = 1.
    "thm5_badprime_exact": config(
        "badprime", exps(p7=1, p11=1, p17=1), exps(p3=2), seed=106, variant="exact",
        adversary="codeword", denominator_valuations=exps(p3=1, p5=1),
    ),
    # g = 3^2 u: shares 3 only. Valuation error at 3 with mu = 0 < nu_3(g).
    "thm6_badprime_maximal": config(
        "badprime", exps(p7=1, p11=1, p17=1), exps(p3=3), seed=107, variant="maximal",
        adversary="random", denominator_valuations=exps(p3=2),
    ),
    # Past the budget on purpose: many failures and some wrong codewords, to stress soundness.
    "soundness_stress": {
        **config("err1", RANDOM, seed=108),
        "code": sized_code(math.log2(1071), 0.0, gap=-6.0),
    },
}


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "configs")
    out.mkdir(exist_ok=True)
    for name, obj in CONFIGS.items():
        (out / f"{name}.json").write_text(json.dumps(obj, indent=2) + "\n")
