"""Spatial decay profiles and the summability constants they induce.

A profile pairs a summable radial weight with a non-increasing,
log-superadditive envelope; their product (the damped weight) controls how
strongly far-apart sites may couple. Constants are exact maxima over a
finite lattice unless overridden with user-supplied analytic values, and
every constant carries a provenance flag saying which.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import UNREACHABLE, Lattice

LATTICE_COMPUTED = "lattice-computed"
USER_SUPPLIED = "user-supplied analytic"

# Relative slack for float comparisons on the validation grid; the equality
# case of log-superadditivity (pure exponentials) must pass.
_REL_SLACK = 1e-12


@dataclass(frozen=True)
class PowerLawWeight:
    """w(r) = (1 + r)^(-p), p > 0."""

    p: float

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("power-law exponent p must be positive")

    def __call__(self, r: float) -> float:
        return (1.0 + r) ** (-self.p)


@dataclass(frozen=True)
class ExponentialEnvelope:
    """xi(r) = exp(-a r), a > 0. Admits a closed-form tail sum."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("envelope rate must be positive")

    def __call__(self, r: float) -> float:
        return math.exp(-self.rate * r)


@dataclass(frozen=True)
class StretchedExponentialEnvelope:
    """xi(r) = exp(-a r^theta), a > 0, 0 < theta <= 1."""

    rate: float
    exponent: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("envelope rate must be positive")
        if not 0 < self.exponent <= 1:
            raise ValueError("stretching exponent must lie in (0, 1]")

    def __call__(self, r: float) -> float:
        return math.exp(-self.rate * r ** self.exponent)


@dataclass(frozen=True)
class DecayProfile:
    """A radial weight together with its decay envelope."""

    weight: Callable[[float], float]
    envelope: Callable[[float], float]

    def damped_weight(self, r: float) -> float:
        return self.weight(r) * self.envelope(r)

    # Sentinel-aware evaluation at hop counts: terms at unreachable distance
    # contribute nothing.
    def weight_at(self, hops: int) -> float:
        return 0.0 if hops >= UNREACHABLE else self.weight(float(hops))

    def envelope_at(self, hops: int) -> float:
        return 0.0 if hops >= UNREACHABLE else self.envelope(float(hops))

    def damped_at(self, hops: int) -> float:
        return 0.0 if hops >= UNREACHABLE else self.damped_weight(float(hops))


@dataclass(frozen=True)
class ProfileValidationReport:
    """Outcome of the grid validation of an envelope.

    `failed_condition` names the first violated condition:
    "envelope_monotone", "log_superadditivity" or "superpolynomial_decay".
    `violations` lists the offending grid points or pairs (truncated to 10).
    """

    ok: bool
    failed_condition: str | None = None
    violations: tuple = ()


def validate_profile(profile: DecayProfile, r_max: int) -> ProfileValidationReport:
    """Check the envelope on the integer grid 0..r_max.

    Three conditions, in order: non-increase, log-superadditivity
    xi(a+b) >= xi(a) xi(b) over all grid pairs, and a superpolynomial-decay
    probe comparing xi(r) r^n at r_max against r_max/2 for n = 1..4.
    """
    if r_max < 2:
        raise ValueError("r_max must be at least 2")
    xi = [profile.envelope(float(r)) for r in range(r_max + 1)]

    bad = [(r, r + 1) for r in range(r_max) if xi[r + 1] > xi[r] * (1 + _REL_SLACK)]
    if bad:
        return ProfileValidationReport(False, "envelope_monotone", tuple(bad[:10]))

    bad = []
    for a in range(r_max + 1):
        for b in range(a, r_max + 1):
            if profile.envelope(float(a + b)) < xi[a] * xi[b] * (1 - _REL_SLACK):
                bad.append((a, b))
    if bad:
        return ProfileValidationReport(False, "log_superadditivity", tuple(bad[:10]))

    half = r_max / 2.0
    xi_half = profile.envelope(half)
    bad = [n for n in (1, 2, 3, 4)
           if not xi[r_max] * r_max ** n < xi_half * half ** n]
    if bad:
        return ProfileValidationReport(False, "superpolynomial_decay", tuple(bad))

    return ProfileValidationReport(True)


@dataclass(frozen=True)
class TailSum:
    """Sum of the envelope beyond a radius, with tail bookkeeping.

    `exact_tail` is True when the envelope family admits a closed-form tail
    past the cutoff (pure exponential); otherwise `truncation_bound` reports
    the heuristic error bound xi(cutoff) * cutoff of the truncated sum.
    """

    value: float
    exact_tail: bool
    truncation_bound: float


def tail_sum(profile: DecayProfile, radius: int, cutoff: int = 4096) -> TailSum:
    """Sum of the envelope over hop counts r = radius+1, radius+2, ..."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if cutoff <= radius:
        raise ValueError("cutoff must exceed radius")
    env = profile.envelope
    partial = sum(env(float(r)) for r in range(radius + 1, cutoff + 1))
    if isinstance(env, ExponentialEnvelope):
        q = math.exp(-env.rate)
        tail = q ** (cutoff + 1) / (1.0 - q)
        return TailSum(partial + tail, True, 0.0)
    return TailSum(partial, False, env(float(cutoff)) * cutoff)


@dataclass(frozen=True)
class DecayConstants:
    """Summability constants of a profile, with per-constant provenance.

    weight_norm: largest row sum of the bare weight over the lattice.
    weight_conv: convolution constant of the bare weight.
    damped_norm / damped_conv: the same two for the damped weight.
    growth: annulus growth constant of the cut; dimension: spatial dimension
    entering the growth bound (a configuration input, never inferred).
    """

    weight_norm: float
    weight_conv: float
    damped_norm: float
    damped_conv: float
    growth: float | None = None
    dimension: int | None = None
    provenance: dict[str, str] = field(default_factory=dict)

    def with_growth(self, growth: float, dimension: int,
                    source: str = LATTICE_COMPUTED) -> "DecayConstants":
        prov = dict(self.provenance)
        prov["growth"] = source
        return dataclasses.replace(self, growth=float(growth),
                                   dimension=int(dimension), provenance=prov)

    def with_overrides(self, **values: float) -> "DecayConstants":
        """Replace named constants with user-supplied analytic values."""
        allowed = {"weight_norm", "weight_conv", "damped_norm", "damped_conv", "growth"}
        unknown = set(values) - allowed
        if unknown:
            raise ValueError(f"unknown constant override(s): {sorted(unknown)}")
        prov = dict(self.provenance)
        for key in values:
            prov[key] = USER_SUPPLIED
        return dataclasses.replace(self, provenance=prov,
                                   **{k: float(v) for k, v in values.items()})

    def as_dict(self) -> dict:
        return {
            "weight_norm": self.weight_norm,
            "weight_conv": self.weight_conv,
            "damped_norm": self.damped_norm,
            "damped_conv": self.damped_conv,
            "growth": self.growth,
            "dimension": self.dimension,
            "provenance": dict(self.provenance),
        }


def _weight_matrix(eval_at: Callable[[int], float], dist: np.ndarray) -> np.ndarray:
    uniq, inverse = np.unique(dist, return_inverse=True)
    values = np.array([eval_at(int(u)) for u in uniq])
    return values[inverse].reshape(dist.shape)


def _conv_constant(w: np.ndarray) -> float:
    # max over (x, z) of sum_y w(x,y) w(y,z) / w(x,z); rows at unreachable
    # distance have zero numerator as well and contribute nothing.
    num = w @ w
    quot = np.zeros_like(num)
    np.divide(num, w, out=quot, where=w > 0)
    return float(quot.max())


def lattice_constants(profile: DecayProfile, lattice: Lattice) -> DecayConstants:
    """Exact row-sum and convolution maxima of the profile over a lattice."""
    bare = _weight_matrix(profile.weight_at, lattice.dist)
    damped = _weight_matrix(profile.damped_at, lattice.dist)
    provenance = {k: LATTICE_COMPUTED for k in
                  ("weight_norm", "weight_conv", "damped_norm", "damped_conv")}
    return DecayConstants(
        weight_norm=float(bare.sum(axis=1).max()),
        weight_conv=_conv_constant(bare),
        damped_norm=float(damped.sum(axis=1).max()),
        damped_conv=_conv_constant(damped),
        provenance=provenance,
    )
