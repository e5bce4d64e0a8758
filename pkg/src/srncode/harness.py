"""Monte Carlo estimation of decoding failure rates against the theorem bounds.

A run is described by an :class:`ExperimentConfig` (JSON, ``schema: 1``).
Every trial plants a random codeword, draws a received word from the chosen
error model, decodes it and classifies the outcome. Trials use independent
random substreams, so results are identical for any thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from scipy import stats

from . import bounds
from .code import (
    CodeError,
    CodeParams,
    FractionVector,
    ReceivedWord,
    bad_prime_locator,
    encode,
    encode_multiprecision,
    error_locator,
    reduce_representative,
)
from .decoder import (
    DecoderConfig,
    SoundnessViolation,
    check_soundness,
    check_soundness_bad_primes,
    decode_bad_primes_outcome,
    decode_outcome,
)
from .errmodel import (
    PLANT_STREAM,
    FixedErrorPart,
    LocatorSpec,
    PartialColumn,
    sample_badprime,
    sample_err1,
    sample_err2,
    sample_hybrid,
    substream,
    uniform_below,
    validate_badprime,
)
from .lattice import lll_beta
from .numtheory import vector_valuation

SCHEMA_VERSION = 1
KINDS = ("err1", "err2", "hybrid", "badprime")
CSV_COLUMNS = ("trial", "locator", "outcome", "eta", "time_us")
HYBRID_ADVERSARIES = ("explicit", "collinear", "ones")
BADPRIME_ADVERSARIES = ("explicit", "codeword", "ones", "random")

SCHEMA_HELP = """\
Experiment config (JSON, big integers as decimal strings):
{
  "schema": 1,
  "code": {"primes": ["3", "5"], "mults": [2, 1], "ell": 2, "F": "10", "G": "10"},
  "model": {
    "kind": "err1 | err2 | hybrid | badprime",
    "variant": "exact | maximal",          (hybrid and badprime only)
    "locator": [exponents] or "divisor",   random part: Lambda, Lambda_m, Lambda_i, Lambda_e
    "fixed_locator": [exponents] or "divisor",  Lambda_u / Lambda_v (hybrid, badprime)
    "adversary": "explicit | collinear | ones | codeword | random",
    "fixed": {"columns": {"j": [...]}, "partial": {"j": {"rho_bar": k, "residues": [...]}}},
    "rho_bar_step": 1,                      badprime: rho_bar = nu_p(g) + step when mu = nu_p(g)
    "denominator_valuations": [v_1, ..., v_n]   badprime: planted g has these valuations
  },
  "decoder": {"theta": "Theta", "svp_mode": "approx | exact"},
  "trials": 1000, "seed": 1, "output": "results.csv", "timing": false
}
The environment variable SRN_SEED overrides "seed".
"""


class ConfigError(ValueError):
    pass


def _exps(basis, value) -> tuple[int, ...]:
    if value is None:
        return (0,) * basis.n
    if isinstance(value, (list, tuple)):
        return tuple(int(e) for e in value)
    return basis.exponents_of(int(value))


@dataclass
class ExperimentConfig:
    params: CodeParams
    kind: str
    spec: LocatorSpec
    theta: int
    trials: int
    seed: int
    variant: str = "exact"
    fixed: FixedErrorPart = field(default_factory=FixedErrorPart)
    adversary: str = "explicit"
    rho_bar_step: int = 1
    denominator_valuations: tuple[int, ...] | None = None
    svp_mode: str = "approx"
    output: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"model kind must be one of {KINDS}")
        if self.kind == "err1":
            self.variant = "exact"
        elif self.kind == "err2":
            self.variant = "maximal"
        if self.variant not in ("exact", "maximal"):
            raise ConfigError("variant must be exact or maximal")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.kind in ("err1", "err2") and self.spec.fixed_locator != 1:
            raise ConfigError("models 1 and 2 have no fixed part")
        allowed = HYBRID_ADVERSARIES if self.kind == "hybrid" else BADPRIME_ADVERSARIES
        if self.kind in ("hybrid", "badprime") and self.adversary not in allowed:
            raise ConfigError(f"adversary must be one of {allowed}")
        if self.denominator_valuations is not None:
            if len(self.denominator_valuations) != self.params.basis.n:
                raise ConfigError("one denominator valuation per prime")
            D = math.prod(p**v for p, v in zip(self.params.basis.primes, self.denominator_valuations))
            if D >= self.params.G:
                raise ConfigError("prescribed denominator valuations leave no room below G")

    @property
    def plain(self) -> bool:
        return self.kind != "badprime"

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(self.theta, self.svp_mode, self_check=False)

    @classmethod
    def from_json(cls, obj: dict) -> ExperimentConfig:
        if obj.get("schema") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported or missing schema (expected {SCHEMA_VERSION})")
        try:
            params = CodeParams.from_json(obj["code"])
            model = obj["model"]
            basis = params.basis
            spec = LocatorSpec(
                basis,
                _exps(basis, model.get("locator")),
                _exps(basis, model.get("fixed_locator")),
            )
            dv = model.get("denominator_valuations")
            seed = int(obj.get("seed", 0))
            if os.environ.get("SRN_SEED"):
                seed = int(os.environ["SRN_SEED"])
            dec = obj.get("decoder", {})
            return cls(
                params=params,
                kind=model["kind"],
                spec=spec,
                theta=int(dec["theta"]),
                trials=int(obj.get("trials", 0)),
                seed=seed,
                variant=model.get("variant", "exact"),
                fixed=FixedErrorPart.from_json(model.get("fixed")),
                adversary=model.get("adversary", "explicit"),
                rho_bar_step=int(model.get("rho_bar_step", 1)),
                denominator_valuations=None if dv is None else tuple(int(v) for v in dv),
                svp_mode=dec.get("svp_mode", "approx"),
                output=obj.get("output"),
                timing=bool(obj.get("timing", False)),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc!r}") from exc
        except CodeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> dict:
        model = {
            "kind": self.kind,
            "variant": self.variant,
            "locator": list(self.spec.random_exps),
            "fixed_locator": list(self.spec.fixed_exps),
            "adversary": self.adversary,
            "fixed": self.fixed.to_json(),
            "rho_bar_step": self.rho_bar_step,
        }
        if self.denominator_valuations is not None:
            model["denominator_valuations"] = list(self.denominator_valuations)
        return {
            "schema": SCHEMA_VERSION,
            "code": self.params.to_json(),
            "model": model,
            "decoder": {"theta": str(self.theta), "svp_mode": self.svp_mode},
            "trials": self.trials,
            "seed": self.seed,
            "output": self.output,
            "timing": self.timing,
        }


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_json(json.load(fh))


THEOREMS = {
    ("err1", "exact"): "Theorem 1",
    ("err2", "maximal"): "Theorem 2",
    ("hybrid", "exact"): "Theorem 3",
    ("hybrid", "maximal"): "Theorem 4",
    ("badprime", "exact"): "Theorem 5",
    ("badprime", "maximal"): "Theorem 6",
}


@dataclass(frozen=True)
class Governance:
    theorem: str
    beta: float
    d: float  # total decoder distance log2(theta)
    d_fixed: float  # d_u or d_v
    d_random: float  # d, d_i or d_e
    budget: float  # dmax variant
    report: bounds.BoundReport
    problems: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.problems

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "beta": self.beta,
            "d": self.d,
            "d_fixed": self.d_fixed,
            "d_random": self.d_random,
            "dmax": self.budget,
            "preconditions_hold": self.valid,
            "problems": list(self.problems),
            "bound": self.report.to_json(),
        }


def governing_theorem(cfg: ExperimentConfig) -> Governance:
    """Which theorem bounds this run, its bound, and any violated precondition."""
    params = cfg.params
    beta = lll_beta(params.ell + 1)
    problems = []
    if cfg.svp_mode == "exact":
        beta = 1.0
    lam_r, lam_f = cfg.spec.random_locator, cfg.spec.fixed_locator
    d = math.log2(cfg.theta)
    if cfg.theta % lam_f:
        problems.append("theta must be a multiple of the fixed locator")
    d_f = math.log2(lam_f)
    d_r = math.log2(Fraction(cfg.theta, lam_f))
    if lam_f > 1:
        limit = bounds.fixed_part_limit(params, beta)
        if d_f > limit:
            problems.append(f"fixed part weight {d_f:.3f} exceeds {limit:.3f}")
        budget = bounds.dmax_hybrid(params, beta, d_f)
    else:
        budget = bounds.dmax(params, beta)
    if d_r > budget:
        problems.append(f"random part distance {d_r:.3f} exceeds budget {budget:.3f}")
    if lam_r > 1 and math.log2(lam_r) > d_r + 1e-12:
        problems.append("random locator exceeds its distance share")
    if cfg.kind == "badprime":
        problems.extend(_badprime_problems(cfg))
    shape = bounds.failure_bound_max_locator if cfg.variant == "maximal" else bounds.failure_bound_fixed_locator
    report = shape(params, d_r, lam_r, budget)
    return Governance(
        THEOREMS[(cfg.kind, cfg.variant)], beta, d, d_f, d_r, budget, report, tuple(problems)
    )


def _badprime_problems(cfg: ExperimentConfig) -> list[str]:
    if cfg.denominator_valuations is None:
        if cfg.spec.fixed_locator > 1:
            return ["valuation errors need prescribed denominator valuations"]
        return []
    D = math.prod(p**v for p, v in zip(cfg.params.basis.primes, cfg.denominator_valuations))
    probe = FractionVector((1,) * cfg.params.ell, D)
    try:
        validate_badprime(cfg.params, probe, cfg.spec, _partial_words(cfg, probe, None))
    except CodeError as exc:
        return [str(exc)]
    return []


# ---- per-trial machinery ------------------------------------------------


def plant_codeword(cfg: ExperimentConfig, trial: int) -> FractionVector:
    rng = substream(cfg.seed, trial, PLANT_STREAM)
    params = cfg.params
    F, G, N, ell = params.F, params.G, params.N, params.ell
    dv = cfg.denominator_valuations
    D = 1 if dv is None else math.prod(p**v for p, v in zip(params.basis.primes, dv))
    while True:
        nums = [uniform_below(rng, 2 * F - 1) - (F - 1) for _ in range(ell)]
        u = 1 + uniform_below(rng, (G - 1) // D)
        # Plain runs need a unit denominator; prescribed valuations need a
        # cofactor coprime to N. Unprescribed bad-prime runs take any g.
        if (cfg.plain or dv is not None) and math.gcd(u, N) != 1:
            continue
        g = D * u
        if math.gcd(*nums, g) == 1:
            return FractionVector(tuple(nums), g)


def _hybrid_fixed(cfg: ExperimentConfig, codeword: ReceivedWord) -> FixedErrorPart:
    if cfg.adversary == "explicit":
        return cfg.fixed
    basis, ell = cfg.params.basis, cfg.params.ell
    cols = {}
    for j in cfg.spec.fixed_support:
        p, lam = basis.primes[j], basis.mults[j]
        e = cfg.spec.fixed_exps[j]
        shift = p ** (lam - e)
        base = codeword.columns[j]
        if cfg.adversary == "ones" or vector_valuation(base, p, e) != 0:
            base = (1,) * ell
        # Collinear offset: the column becomes (1 + p^(lam - e)) C_j.
        cols[j] = tuple(shift * x % p**lam for x in base)
    return FixedErrorPart(columns=cols)


def _partial_words(cfg: ExperimentConfig, fv: FractionVector, mp_word) -> FixedErrorPart:
    if cfg.adversary == "explicit":
        return cfg.fixed
    basis, ell = cfg.params.basis, cfg.params.ell
    partial = {}
    for j in cfg.spec.fixed_support:
        p, lam = basis.primes[j], basis.mults[j]
        mu = lam - cfg.spec.fixed_exps[j]
        nu_g = min(_val(fv.denominator, p), lam)
        rho_bar = mu if mu < nu_g else min(nu_g + cfg.rho_bar_step, lam)
        if cfg.adversary == "random" and rho_bar < nu_g:
            partial[j] = PartialColumn(rho_bar, None)
            continue
        q = p ** (lam - rho_bar)
        if cfg.adversary == "codeword" and mp_word is not None:
            res = tuple(x % q for x in mp_word.columns[j])
            if rho_bar and rho_bar < lam and all(x % p == 0 for x in res):
                res = (1,) * ell
        else:
            res = (1,) * ell
        partial[j] = PartialColumn(rho_bar, res)
    return FixedErrorPart(partial=partial)


def _val(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    digest: str
    locator: int
    outcome: str  # success | failure | wrong
    eta: int | None
    time_us: int


def _digest(fv: FractionVector) -> str:
    raw = ",".join(map(str, fv.numerators)) + "/" + str(fv.denominator)
    return hashlib.sha1(raw.encode()).hexdigest()[:12]


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    t0 = time.perf_counter_ns()
    params = cfg.params
    fv = plant_codeword(cfg, trial)
    dcfg = cfg.decoder_config()
    if cfg.plain:
        cw = encode(fv, params)
        if cfg.kind == "err1":
            E = sample_err1(params, cfg.spec.random_exps, cfg.seed, trial)
        elif cfg.kind == "err2":
            E = sample_err2(params, cfg.spec.random_exps, cfg.seed, trial)
        else:
            fixed = _hybrid_fixed(cfg, cw)
            E = sample_hybrid(params, cfg.spec, fixed, cfg.variant, cfg.seed, trial)
        received = cw + E
        locator = error_locator(received, cw).lam
        out = decode_outcome(received, params, dcfg)
        if out.ok:
            check_soundness(received, out.value, params, cfg.theta)
    else:
        cw = encode_multiprecision(fv, params)
        fixed = _partial_words(cfg, fv, cw)
        received = sample_badprime(params, fv, cfg.spec, fixed, cfg.variant, cfg.seed, trial)
        locator = bad_prime_locator(reduce_representative(received), cw).lam
        out = decode_bad_primes_outcome(received, params, dcfg)
        if out.ok:
            check_soundness_bad_primes(received, out.value, params, cfg.theta)
    if not out.ok:
        outcome = "failure"
    elif out.value == fv:
        outcome = "success"
    else:
        outcome = "wrong"
    elapsed = (time.perf_counter_ns() - t0) // 1000 if cfg.timing else 0
    return TrialRecord(trial, _digest(fv), locator, outcome, out.eta, elapsed)


def _run_range(cfg: ExperimentConfig, start: int, stop: int) -> list[TrialRecord]:
    return [run_trial(cfg, t) for t in range(start, stop)]


def clopper_pearson(k: int, n: int, level: float = 0.99) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a, k + 1, n - k))
    return lo, hi


def summarize(cfg: ExperimentConfig, records: list[TrialRecord], gov: Governance, interrupted: bool = False) -> dict:
    n = len(records)
    counts = Counter(r.outcome for r in records)
    noncenter = counts["failure"] + counts["wrong"]
    bound = gov.report.value
    lo, hi = clopper_pearson(noncenter, n)
    rate = noncenter / n if n else None
    summary = {
        "schema": SCHEMA_VERSION,
        "trials": n,
        "requested_trials": cfg.trials,
        "interrupted": interrupted,
        "seed": cfg.seed,
        "successes": counts["success"],
        "failures": counts["failure"],
        "wrong_codewords": counts["wrong"],
        "failure_rate": counts["failure"] / n if n else None,
        "wrong_rate": counts["wrong"] / n if n else None,
        "noncenter_rate": rate,
        "rate_defined": n > 0,
        "ci99": [lo, hi],
        "governance": gov.to_json(),
        "bound": bound,
        "within_3sigma": None if not n else rate <= bound + 3 * math.sqrt(bound / n),
        "bound_ge_upper_ci": bound >= hi,
        "soundness_violations": 0,
        "locator_histogram": {str(k): v for k, v in sorted(Counter(r.locator for r in records).items())},
    }
    return summary


def write_csv(records: Iterable[TrialRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow((r.trial, r.locator, r.outcome, "" if r.eta is None else r.eta, r.time_us))


def run_montecarlo(cfg: ExperimentConfig, threads: int = 1, csv_path: str | None = None) -> dict:
    """Run all trials; write the CSV (if a path is given) and return the summary.

    A soundness violation aborts the run with :class:`SoundnessViolation`
    after flushing the rows collected so far.
    """
    gov = governing_theorem(cfg)
    csv_path = csv_path if csv_path is not None else cfg.output
    records: list[TrialRecord] = []
    interrupted = False
    try:
        if threads <= 1 or cfg.trials < 2 * threads:
            for t in range(cfg.trials):
                records.append(run_trial(cfg, t))
        else:
            step = -(-cfg.trials // (4 * threads))
            chunks = [(s, min(s + step, cfg.trials)) for s in range(0, cfg.trials, step)]
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_run_range, cfg, s, e) for s, e in chunks]
                for fut in futures:
                    records.extend(fut.result())
    except KeyboardInterrupt:
        interrupted = True
    except SoundnessViolation:
        _flush(records, csv_path)
        raise
    records.sort(key=lambda r: r.trial)
    _flush(records, csv_path)
    return summarize(cfg, records, gov, interrupted)


def _flush(records, csv_path):
    if csv_path is None:
        return
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        write_csv(sorted(records, key=lambda r: r.trial), fh)


def csv_text(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()
