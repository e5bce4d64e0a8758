"""Lattice decoders for SRN codes, with and without bad primes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .code import (
    CodeParams,
    FractionVector,
    MultiPrecisionWord,
    ReceivedWord,
    bad_prime_locator,
    encode_residues,
    error_locator,
    multiprecision_residues,
    reduce_representative,
)
from .lattice import (
    LatticeBasis,
    LatticeVector,
    approx_svp_inf,
    build_bad_prime_lattice,
    build_lattice,
    exact_svp_inf,
    scale_basis,
    unscale,
)

SVP_MODES = ("approx", "exact")


class DecodingFailure(Exception):
    def __init__(self, reason: str, eta: int | None = None, vector: LatticeVector | None = None):
        super().__init__(reason)
        self.reason = reason
        self.eta = eta
        self.vector = vector


class SoundnessViolation(AssertionError):
    """A decoder output lies farther than the locator bound from the input."""


@dataclass(frozen=True)
class DecoderConfig:
    """Theta is the integer locator bound; d = log2(Theta)."""

    locator_bound: int
    svp_mode: str = "approx"
    enum_bound: int = 10**6
    self_check: bool = True

    def __post_init__(self):
        if int(self.locator_bound) < 1:
            raise ValueError("locator bound must be >= 1")
        object.__setattr__(self, "locator_bound", int(self.locator_bound))
        if self.svp_mode not in SVP_MODES:
            raise ValueError(f"svp_mode must be one of {SVP_MODES}")

    @property
    def d(self) -> float:
        return math.log2(self.locator_bound)


@dataclass(frozen=True)
class DecodeOutcome:
    value: FractionVector | None
    eta: int | None
    vector: LatticeVector | None
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.value is not None


def _short_vector(basis: LatticeBasis, params: CodeParams, cfg: DecoderConfig) -> LatticeVector:
    scaled = scale_basis(basis, params.F, params.G)
    if cfg.svp_mode == "exact":
        if basis.dim > 5:
            raise ValueError("exact SVP mode is limited to dimension <= 5")
        w = exact_svp_inf(scaled, cfg.enum_bound)
    else:
        w, _ = approx_svp_inf(scaled)
    return LatticeVector.from_coords(unscale(w.coords, params.F, params.G))


def _finish(v: LatticeVector, params: CodeParams, cfg: DecoderConfig, unit_check: bool) -> DecodeOutcome:
    eta = math.gcd(v.phi, *v.psis)
    phi = v.phi // eta
    psis = tuple(x // eta for x in v.psis)
    if eta > cfg.locator_bound:
        return DecodeOutcome(None, eta, v, "eta exceeds locator bound")
    if unit_check and math.gcd(phi, params.N) != 1:
        return DecodeOutcome(None, eta, v, "denominator not a unit mod N")
    if phi == 0 or abs(phi) >= params.G:
        return DecodeOutcome(None, eta, v, "denominator out of range")
    if any(abs(x) >= params.F for x in psis):
        return DecodeOutcome(None, eta, v, "numerator out of range")
    if phi < 0:
        phi, psis = -phi, tuple(-x for x in psis)
    return DecodeOutcome(FractionVector(psis, phi), eta, v)


def decode_outcome(word: ReceivedWord, params: CodeParams, cfg: DecoderConfig) -> DecodeOutcome:
    """Algorithm for plain SRN words; never raises on decoding failure."""
    if word.ell != params.ell or word.basis != params.basis:
        raise ValueError("word does not match code parameters")
    v = _short_vector(build_lattice(word, params), params, cfg)
    out = _finish(v, params, cfg, unit_check=True)
    if out.ok and cfg.self_check:
        check_soundness(word, out.value, params, cfg.locator_bound)
    return out


def decode(word: ReceivedWord, params: CodeParams, cfg: DecoderConfig) -> FractionVector:
    out = decode_outcome(word, params, cfg)
    if not out.ok:
        raise DecodingFailure(out.reason, out.eta, out.vector)
    return out.value


def decode_bad_primes_outcome(
    word: MultiPrecisionWord, params: CodeParams, cfg: DecoderConfig
) -> DecodeOutcome:
    if word.ell != params.ell or word.basis != params.basis:
        raise ValueError("word does not match code parameters")
    word = reduce_representative(word)
    basis, _, _ = build_bad_prime_lattice(word, params)
    v = _short_vector(basis, params, cfg)
    out = _finish(v, params, cfg, unit_check=False)
    if out.ok and cfg.self_check:
        check_soundness_bad_primes(word, out.value, params, cfg.locator_bound)
    return out


def decode_bad_primes(word: MultiPrecisionWord, params: CodeParams, cfg: DecoderConfig) -> FractionVector:
    out = decode_bad_primes_outcome(word, params, cfg)
    if not out.ok:
        raise DecodingFailure(out.reason, out.eta, out.vector)
    return out.value


def check_soundness(word: ReceivedWord, fv: FractionVector, params: CodeParams, theta: int) -> int:
    """Raise unless fv is a codeword within locator theta of word; return its locator."""
    fv.check_bounds(params)
    lam = error_locator(word, encode_residues(fv, params.basis)).lam
    if lam > theta:
        raise SoundnessViolation(f"decoded word has locator {lam} > {theta}")
    return lam


def check_soundness_bad_primes(
    word: MultiPrecisionWord, fv: FractionVector, params: CodeParams, theta: int
) -> int:
    fv.check_bounds(params)
    enc = reduce_representative(multiprecision_residues(fv, params.basis))
    lam = bad_prime_locator(reduce_representative(word), enc).lam
    if lam > theta:
        raise SoundnessViolation(f"decoded word has locator {lam} > {theta}")
    return lam


def unique_decoding_radius(params: CodeParams) -> float:
    """Half the minimum-distance lower bound, 0.5 log2(N / 2FG)."""
    return 0.5 * math.log2(Fraction(params.N, 2 * params.F * params.G))


def within_unique_radius(params: CodeParams, theta: int) -> bool:
    """Exact test of log2(theta) < 0.5 log2(N / 2FG), i.e. 2FG theta^2 < N."""
    return 2 * params.F * params.G * theta * theta < params.N
